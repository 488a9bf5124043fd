"""
Reward functions of the circuit-building MDP.

Both modes end the episode with +5 on success and -5 on failure at the depth
limit; in between they pay a bounded shaping signal built from the relative
free-energy improvement of the last step.
"""
from dataclasses import dataclass
from typing import Sequence

SUCCESS_REWARD = 5.0
FAILURE_REWARD = -5.0
DENOMINATOR_FLOOR = 1e-15


@dataclass(frozen=True)
class Reward:
    value: float
    done: bool
    success: bool = False


def clamp(value: float, low: float = -1.0, high: float = 1.0) -> float:
    return min(max(value, low), high)


def energy_term(f_prev: float, f_curr: float, f_exact: float) -> float:
    """clamp((F_prev - F_curr) / |F_prev - F_exact|, -1, 1); zero when F_prev already sits on F_exact"""
    denominator = abs(f_prev - f_exact)
    if denominator < DENOMINATOR_FLOOR:
        return 0.0
    return clamp((f_prev - f_curr) / denominator)


def fidelity_term(fidelity: float) -> float:
    return 2.0 * fidelity - 1.0


def reward_free_energy(
    f_error: float,
    e_term: float,
    step: int,
    max_depth: int,
    zeta_f: float,
) -> Reward:
    if f_error <= zeta_f:
        return Reward(SUCCESS_REWARD, done=True, success=True)
    if step >= max_depth:
        return Reward(FAILURE_REWARD, done=True)
    return Reward(e_term, done=False)


def reward_free_energy_fidelity(
    f_error: float,
    fidelity: float,
    e_term: float,
    step: int,
    max_depth: int,
    zeta_f: float,
    zeta_fid: float,
    weights: Sequence[float] = (0.6, 0.4),
) -> Reward:
    """
    +5 when both the free-energy error and the fidelity pass their thresholds,
    -5 when the fidelity still misses at the depth limit, otherwise
    a * E_term + b * (2 Fid - 1). Reaching the depth limit always ends the
    episode.
    """
    if f_error <= zeta_f and fidelity >= zeta_fid:
        return Reward(SUCCESS_REWARD, done=True, success=True)
    at_limit = step >= max_depth
    if at_limit and fidelity < zeta_fid:
        return Reward(FAILURE_REWARD, done=True)
    a, b = weights
    return Reward(a * e_term + b * fidelity_term(fidelity), done=at_limit)
