from __future__ import annotations

import logging
from dataclasses import replace

from bvqo.costing.cardinality import CardinalityProvider
from bvqo.costing.model import FilterCostModel
from bvqo.planning.nodes import Plan

LOGGER = logging.getLogger(__name__)


def filter_elimination(plan: Plan, filter_id: int, provider: CardinalityProvider) -> float:
    """Fraction of its input that a filter removes at its landing node."""
    bv = plan.filter(filter_id)
    with_filter = plan.subexpression(bv.landing_node)
    without_filter = with_filter.without(plan.semijoin(filter_id))
    before = provider.cardinality(without_filter)
    if before <= 0:
        return 0.0
    return max(0.0, 1.0 - provider.cardinality(with_filter) / before)


def gate_bitvectors(plan: Plan, model: FilterCostModel, provider: CardinalityProvider) -> Plan:
    """Drop filters that eliminate less than the model's threshold; kept filters are renumbered densely."""
    threshold = model.threshold()
    kept = []
    for bv in plan.filters:
        eliminated = filter_elimination(plan, bv.filter_id, provider)
        if eliminated >= threshold:
            kept.append(bv)
        else:
            LOGGER.info("Dropping %s: eliminates %.3f, threshold %.3f", bv.label, eliminated, threshold)
    renumbered = tuple(replace(bv, filter_id=index) for index, bv in enumerate(kept))
    return plan.without_filters().with_filters(renumbered)
