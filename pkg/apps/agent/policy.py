"""
Epsilon-greedy action selection and Double-DQN bootstrap targets
"""
from typing import Protocol

import numpy as np

from utils.exceptions import InvalidArgumentError, StateError


class QFunction(Protocol):
    def q_values(self, states) -> np.ndarray:
        ...


def epsilon_at(step: int, start: float = 1.0, decay: float = 0.99995, minimum: float = 0.05) -> float:
    """Exploration rate after ``step`` environment steps: max(start * decay^step, minimum)"""
    if step < 0:
        raise InvalidArgumentError(f'Step count must be non-negative, got {step}')
    return max(start * decay ** step, minimum)


def masked_argmax(q_values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Row-wise argmax over legal entries; ties go to the lowest id"""
    return np.where(mask, q_values, -np.inf).argmax(axis=-1)


def select_action(
    model: QFunction,
    state: np.ndarray,
    epsilon: float,
    legal_mask: np.ndarray,
    rng: np.random.Generator,
) -> int:
    legal = np.flatnonzero(legal_mask)
    if legal.size == 0:
        raise StateError('No legal action in this state')
    if rng.random() < epsilon:
        return int(rng.choice(legal))
    q_values = np.asarray(model.q_values(state)).reshape(-1)
    return int(masked_argmax(q_values, legal_mask))


def td_targets(
    rewards: np.ndarray,
    dones: np.ndarray,
    next_q_online: np.ndarray,
    next_q_target: np.ndarray,
    next_masks: np.ndarray,
    gamma: float,
) -> np.ndarray:
    """
    y = r + (1 - done) * gamma * Q_target(s', argmax_a Q_online(s', a)),
    with the argmax taken over the actions legal in s'.
    """
    rewards = np.asarray(rewards, dtype=np.float64)
    chosen = masked_argmax(np.asarray(next_q_online), np.asarray(next_masks, dtype=bool))
    bootstrap = np.take_along_axis(np.asarray(next_q_target, dtype=np.float64), chosen[:, None], axis=1)[:, 0]
    live = 1.0 - np.asarray(dones, dtype=np.float64)
    return rewards + live * gamma * bootstrap
