"""
Experience replay memory
"""
from collections import deque
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from apps.codec.tensor import dump_tensor, load_tensor
from utils.exceptions import InvalidArgumentError, StateError


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    done: bool
    # actions legal in next_state, for the bootstrap argmax
    next_legal_mask: np.ndarray


def pack_observation(observation: np.ndarray) -> Dict[str, Any]:
    """
    Gate plane as packed bits via ``dump_tensor``; the optional energy plane is
    constant, so only its value is kept.
    """
    observation = np.asarray(observation)
    return {
        'bits': dump_tensor(observation[0]),
        'shape': tuple(observation.shape),
        'dtype': observation.dtype.str,
        'feature': float(observation[1].flat[0]) if observation.shape[0] > 1 else None,
    }


def unpack_observation(packed: Dict[str, Any]) -> np.ndarray:
    shape = tuple(packed['shape'])
    dtype = np.dtype(packed['dtype'])
    planes = [load_tensor(packed['bits'], shape[1:]).astype(dtype)]
    if packed['feature'] is not None:
        planes.append(np.full(shape[1:], packed['feature'], dtype=dtype))
    return np.stack(planes)


def _pack_transition(transition: Transition) -> Dict[str, Any]:
    return {
        'state': pack_observation(transition.state),
        'action': int(transition.action),
        'reward': float(transition.reward),
        'next_state': pack_observation(transition.next_state),
        'done': bool(transition.done),
        'next_legal_mask': np.asarray(transition.next_legal_mask, dtype=bool),
    }


def _unpack_transition(packed: Dict[str, Any]) -> Transition:
    return Transition(
        state=unpack_observation(packed['state']),
        action=packed['action'],
        reward=packed['reward'],
        next_state=unpack_observation(packed['next_state']),
        done=packed['done'],
        next_legal_mask=packed['next_legal_mask'],
    )


class ReplayBuffer:
    """FIFO ring of transitions with a seeded sampler"""

    def __init__(self, capacity: int, seed: int = 0):
        if capacity < 1:
            raise InvalidArgumentError(f'Replay capacity must be positive, got {capacity}')
        self.capacity = capacity
        self._memory: deque = deque(maxlen=capacity)
        self._rng = np.random.default_rng([seed, 1])
        self.inserted = 0

    def __len__(self) -> int:
        return len(self._memory)

    def push(self, transition: Transition) -> None:
        self._memory.append(transition)
        self.inserted += 1

    def sample(self, batch_size: int) -> List[Transition]:
        """Uniform without replacement within the batch"""
        if batch_size > len(self._memory):
            raise StateError(f'Cannot sample {batch_size} transitions from {len(self._memory)}')
        indices = self._rng.choice(len(self._memory), size=batch_size, replace=False)
        return [self._memory[i] for i in indices]

    def state_dict(self) -> Dict[str, Any]:
        return {
            'capacity': self.capacity,
            'memory': [_pack_transition(t) for t in self._memory],
            'rng': self._rng.bit_generator.state,
            'inserted': self.inserted,
        }

    def load_state_dict(self, state: Dict[str, Any]) -> None:
        if state['capacity'] != self.capacity:
            raise InvalidArgumentError(
                f"Checkpoint buffer capacity {state['capacity']} differs from configured {self.capacity}"
            )
        self._memory = deque((_unpack_transition(t) for t in state['memory']), maxlen=self.capacity)
        self._rng.bit_generator.state = state['rng']
        self.inserted = state['inserted']


def stack_batch(batch: List[Transition], dtype: Optional[np.dtype] = None) -> Dict[str, np.ndarray]:
    return {
        'states': np.stack([t.state for t in batch]).astype(dtype or np.float32, copy=False),
        'actions': np.array([t.action for t in batch], dtype=np.int64),
        'rewards': np.array([t.reward for t in batch], dtype=np.float64),
        'next_states': np.stack([t.next_state for t in batch]).astype(dtype or np.float32, copy=False),
        'dones': np.array([t.done for t in batch], dtype=bool),
        'next_masks': np.stack([t.next_legal_mask for t in batch]),
    }
