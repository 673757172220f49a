"""Virtual Twins Tools - subgroup identification with the two-step Virtual Twins method."""

__version__ = "0.1.0"
