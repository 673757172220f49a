"""
Simulation scenario settings.

A scenario fixes the outcome model (linear or nonlinear), the covariate
structure (regular, correlated, or selection-biased training sample), whether
the treatment effect is heterogeneous, and the train/test sizes.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Union

from ..constants import DEFAULT_N_TEST
from ..exceptions import SpecError


class Linearity(str, Enum):
    """Outcome model family."""

    LINEAR = "linear"
    NONLINEAR = "nonlinear"


class Structure(str, Enum):
    """Covariate structure and training-sample mechanism."""

    REGULAR = "regular"
    CORRELATED = "correlated"
    SELECTION_BIAS = "selection_bias"

    @property
    def short(self) -> str:
        return {"regular": "reg", "correlated": "corr", "selection_bias": "sb"}[self.value]


_STRUCTURE_ALIASES = {
    "regular": Structure.REGULAR,
    "reg": Structure.REGULAR,
    "correlated": Structure.CORRELATED,
    "corr": Structure.CORRELATED,
    "selection_bias": Structure.SELECTION_BIAS,
    "selection-bias": Structure.SELECTION_BIAS,
    "sb": Structure.SELECTION_BIAS,
}

_FIELDS = ("linearity", "structure", "teh", "n_train", "n_test", "seed")


def _enum_value(enum_cls, value: Union[str, Enum], field: str, aliases=None):
    if isinstance(value, enum_cls):
        return value
    key = str(value).strip().lower()
    if aliases and key in aliases:
        return aliases[key]
    try:
        return enum_cls(key)
    except ValueError:
        raise SpecError(f"Unknown {field} '{value}'", field=field, value=value)


@dataclass(frozen=True)
class ScenarioConfig:
    """
    One simulation setting.

    Attributes:
        linearity: Linear or nonlinear outcome model
        structure: Regular, correlated, or selection-bias design
        teh: Whether the treatment effect is heterogeneous
        n_train: Training sample size
        n_test: Test sample size
        seed: Seed for every draw of the replicate
    """

    linearity: Linearity = Linearity.LINEAR
    structure: Structure = Structure.REGULAR
    teh: bool = True
    n_train: int = 600
    n_test: int = DEFAULT_N_TEST
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "linearity", _enum_value(Linearity, self.linearity, "linearity"))
        object.__setattr__(
            self, "structure", _enum_value(Structure, self.structure, "structure", _STRUCTURE_ALIASES)
        )

    def validate(self) -> None:
        """
        Check sizes and types.

        Raises:
            SpecError: If a size is below 1 or a field has the wrong type
        """
        if not isinstance(self.teh, bool):
            raise SpecError("teh must be a boolean", field="teh", value=self.teh)
        for name in ("n_train", "n_test"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise SpecError(f"{name} must be a positive integer", field=name, value=value)
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or self.seed < 0:
            raise SpecError("seed must be a non-negative integer", field="seed", value=self.seed)

    @property
    def label(self) -> str:
        """Column label used in result tables, e.g. ``linear/reg/teh/n=600``."""
        effect = "teh" if self.teh else "noteh"
        return f"{self.linearity.value}/{self.structure.short}/{effect}/n={self.n_train}"

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return ScenarioConfig(self.linearity, self.structure, self.teh, self.n_train, self.n_test, int(seed))


def scenario_from_config(raw: Dict[str, Any]) -> ScenarioConfig:
    """
    Build a scenario from its JSON object form.

    Args:
        raw: Mapping with keys linearity, structure, teh, n_train and optionally n_test, seed

    Returns:
        ScenarioConfig: The validated scenario

    Raises:
        SpecError: On unknown keys or invalid values
    """
    if not isinstance(raw, dict):
        raise SpecError("Scenario must be an object", field="scenario", value=raw)
    unknown = sorted(set(raw) - set(_FIELDS))
    if unknown:
        raise SpecError(f"Unknown scenario fields: {', '.join(unknown)}", field=unknown[0], value=raw[unknown[0]])
    config = ScenarioConfig(**raw)
    config.validate()
    return config


def scenario_to_config(config: ScenarioConfig) -> Dict[str, Any]:
    return {
        "linearity": config.linearity.value,
        "structure": config.structure.value,
        "teh": config.teh,
        "n_train": config.n_train,
        "n_test": config.n_test,
        "seed": config.seed,
    }
