"""
Discrete gate-append actions
"""
from typing import Dict, List, Optional

import numpy as np

from apps.quantum.coupling import CouplingMap
from apps.quantum.gates import ROTATION_KINDS, GateOp
from utils.exceptions import InvalidArgumentError


class ActionSpace:
    """
    Ids 0..3n-1 are rotations ordered qubit-major (RX, RY, RZ on qubit 0,
    then qubit 1, ...); the remaining ids are the CNOT pairs the coupling map
    allows, in sorted (control, target) order. Every action is a zero-angle
    template.
    """

    def __init__(self, qubit_count: int, coupling_map: Optional[CouplingMap] = None):
        if qubit_count < 1:
            raise InvalidArgumentError(f'Action space needs at least one qubit, got {qubit_count}')
        self.qubit_count = qubit_count
        self.coupling_map = coupling_map or CouplingMap.all_to_all(qubit_count)
        if self.coupling_map.qubit_count != qubit_count:
            raise InvalidArgumentError('Coupling map and action space disagree on the qubit count')
        self._gates: List[GateOp] = [
            GateOp(kind, (q,)) for q in range(qubit_count) for kind in ROTATION_KINDS
        ]
        self._gates.extend(GateOp.cnot(c, t) for c, t in self.coupling_map.sorted_pairs())
        self._ids: Dict[GateOp, int] = {gate: i for i, gate in enumerate(self._gates)}

    def __len__(self) -> int:
        return len(self._gates)

    @property
    def size(self) -> int:
        return len(self._gates)

    def gate(self, action: int) -> GateOp:
        if not 0 <= action < len(self._gates):
            raise InvalidArgumentError(f'Action {action} outside [0, {len(self._gates)})')
        return self._gates[action]

    def index_of(self, gate: GateOp) -> int:
        try:
            return self._ids[gate.template()]
        except KeyError:
            raise InvalidArgumentError(f'{gate} is not in the action space') from None

    def legal_mask(self, previous_action: Optional[int] = None, repeat_masking: bool = True) -> np.ndarray:
        """Boolean mask of allowed ids; a repeat of ``previous_action`` is masked when requested"""
        mask = np.ones(len(self._gates), dtype=bool)
        if repeat_masking and previous_action is not None:
            mask[previous_action] = False
        return mask

    def label(self, action: int) -> str:
        gate = self.gate(action)
        return ' '.join([gate.kind, *map(str, gate.qubits)])
