from __future__ import annotations

from dataclasses import dataclass

from bvqo.errors import ConfigError


@dataclass(frozen=True, slots=True)
class FilterCostModel:
    """Per-tuple costs of probing a hash table and checking a bitvector.

    Building the filter is charged nothing: its cost grows with the build side
    and is dwarfed by the probe-side work. Building the hash table and emitting
    join output cost the same with and without a filter, so they cancel out of
    the benefit; ``build_cost_per_tuple`` only feeds the simulated executor.
    """

    probe_cost_per_tuple: float = 10.0
    filter_check_cost_per_tuple: float = 1.0
    build_cost_per_tuple: float = 1.0
    elimination_threshold: float | None = 0.05

    def __post_init__(self) -> None:
        if self.probe_cost_per_tuple <= 0:
            raise ConfigError(f"probe cost must be positive, got {self.probe_cost_per_tuple}")
        if self.filter_check_cost_per_tuple < 0:
            raise ConfigError(f"filter check cost must be non-negative, got {self.filter_check_cost_per_tuple}")
        if self.build_cost_per_tuple < 0:
            raise ConfigError(f"build cost must be non-negative, got {self.build_cost_per_tuple}")
        if self.elimination_threshold is not None and not 0.0 <= self.elimination_threshold <= 1.0:
            raise ConfigError(f"elimination threshold must be within [0, 1], got {self.elimination_threshold}")

    def threshold(self) -> float:
        """Minimum eliminated fraction for a filter to stay in a plan."""
        if self.elimination_threshold is None:
            return gate_threshold(self)
        return self.elimination_threshold


def filter_benefit(probe_cardinality: float, eliminated: float, model: FilterCostModel) -> float:
    """Cost with the filter minus cost without it, for a probe input of ``probe_cardinality``.

    ``eliminated`` is the fraction of probe tuples the filter removes. Every
    tuple pays the check; survivors still pay the probe. Negative means the
    filter pays off.
    """
    if not 0.0 <= eliminated <= 1.0:
        raise ConfigError(f"eliminated fraction must be within [0, 1], got {eliminated}")
    with_filter = probe_cardinality * (model.filter_check_cost_per_tuple + (1.0 - eliminated) * model.probe_cost_per_tuple)
    without_filter = probe_cardinality * model.probe_cost_per_tuple
    return with_filter - without_filter


def lambda_threshold(model: FilterCostModel) -> float:
    """Largest retained fraction at which a filter still pays off: 1 - C_f / C_p."""
    if model.probe_cost_per_tuple <= 0:
        raise ConfigError("probe cost must be positive")
    value = 1.0 - model.filter_check_cost_per_tuple / model.probe_cost_per_tuple
    return min(1.0, max(0.0, value))


def gate_threshold(model: FilterCostModel) -> float:
    """Eliminated fraction at which a filter breaks even: C_f / C_p."""
    if model.probe_cost_per_tuple <= 0:
        raise ConfigError("probe cost must be positive")
    return min(1.0, max(0.0, model.filter_check_cost_per_tuple / model.probe_cost_per_tuple))
