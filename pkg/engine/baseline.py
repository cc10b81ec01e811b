"""
Brute-Force Witness Baseline

Exhaustive minimal-witness search by increasing subset size.
"""

import logging
import time
from itertools import combinations
from typing import Optional

from config import Config, resolve
from engine.witness import QUERY_MODES, meets_threshold, subsystem_value
from errors import CapExceededError, ValidationError
from models.markov import ProbabilisticModel, relevant_states
from models.result import WitnessResult
from models.scalar import EXACT, Arithmetic, Scalar

logger = logging.getLogger(__name__)


def brute_force_witness(m: ProbabilisticModel, mode: str, threshold: Scalar,
                        arith: Arithmetic = EXACT, config: Optional[Config] = None) -> WitnessResult:
    """
    Minimal witness by enumerating subsets in increasing cardinality.

    Only states that are reachable and can reach Goal are enumerated;
    dropping any other state never lowers a subsystem's value. Within a
    size the lexicographically smallest hit is returned. A zero threshold
    asks for the smallest subset with a positive value.

    Args:
        m: Model
        mode: "dtmc", "mdp-max" or "mdp-min"
        threshold: λ
        arith: Number mode
        config: Supplies brute_witness_cap

    Returns:
        WitnessResult, infeasible iff the full system misses λ

    Raises:
        CapExceededError: If the model has more states than the cap
    """
    config = resolve(config)
    if mode not in QUERY_MODES:
        raise ValidationError(f"unknown mode '{mode}'")
    if len(m.states) > config.brute_witness_cap:
        raise CapExceededError("brute_witness", config.brute_witness_cap, len(m.states),
                               "use the tree witness solver")
    reach_mode = QUERY_MODES[mode][0]
    m = m.map_probabilities(arith.coerce)
    threshold = arith.coerce(threshold)
    start = time.perf_counter()

    full_value = subsystem_value(m, m.states, reach_mode, arith, config)
    if arith.lt(full_value, threshold):
        return WitnessResult.infeasible(full_value, {"full_value": str(full_value)})
    if arith.is_zero(full_value):
        return WitnessResult(feasible=True, states=frozenset(), value=arith.zero)

    candidates = sorted(relevant_states(m))
    checked = 0
    for size in range(1, len(candidates) + 1):
        for kept in combinations(candidates, size):
            checked += 1
            value = subsystem_value(m, kept, reach_mode, arith, config)
            if meets_threshold(value, threshold, arith):
                latency_ms = int((time.perf_counter() - start) * 1000)
                logger.info("baseline witness of size %d after %d subsets", size, checked)
                return WitnessResult(
                    feasible=True,
                    states=frozenset(kept),
                    value=value,
                    stats={"subsets_checked": checked, "latency_ms": latency_ms},
                )
    # the relevant states carry the full value, so the loop always hits
    raise ValidationError("relevant states do not reach the threshold")
