"""Shared utilities: file output and seed derivation."""
