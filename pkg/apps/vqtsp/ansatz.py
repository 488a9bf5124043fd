"""
The two circuits of the variational thermal-state protocol.

PQC1 prepares a state whose measured distribution fixes the entropy; PQC2
rotates the resulting diagonal mixture towards the thermal eigenbasis.
"""
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from apps.quantum.coupling import CouplingMap
from apps.quantum.gates import GateOp
from utils.exceptions import InvalidArgumentError

ENTANGLERS = ('ring', 'all_to_all')


@dataclass(frozen=True)
class Pqc1Config:
    """RZ-RY-RZ on every qubit followed by a CNOT entangler; 3n angles"""

    qubit_count: int
    entangler: str = 'ring'

    def __post_init__(self):
        if self.qubit_count < 1:
            raise InvalidArgumentError(f'PQC1 needs at least one qubit, got {self.qubit_count}')
        if self.entangler not in ENTANGLERS:
            raise InvalidArgumentError(f'Unknown entangler {self.entangler!r}; expected one of {ENTANGLERS}')

    @property
    def parameter_count(self) -> int:
        return 3 * self.qubit_count

    def entangling_pairs(self) -> List[Tuple[int, int]]:
        n = self.qubit_count
        if n == 1:
            return []
        if self.entangler == 'ring':
            # n = 2 gives CNOT(0,1) then CNOT(1,0)
            return [(i, (i + 1) % n) for i in range(n)]
        return [(i, j) for i in range(n) for j in range(i + 1, n)]

    def gates(self, theta: Sequence[float]) -> List[GateOp]:
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.parameter_count,):
            raise InvalidArgumentError(
                f'PQC1 on {self.qubit_count} qubits takes {self.parameter_count} angles, got {theta.shape}'
            )
        gates = []
        for q in range(self.qubit_count):
            gates.append(GateOp.rz(q, theta[3 * q]))
            gates.append(GateOp.ry(q, theta[3 * q + 1]))
            gates.append(GateOp.rz(q, theta[3 * q + 2]))
        gates.extend(GateOp.cnot(c, t) for c, t in self.entangling_pairs())
        return gates


@dataclass(frozen=True)
class Pqc2Circuit:
    """Ordered gate program; ``phi`` are the angles of its rotation gates in order"""

    qubit_count: int
    gates: Tuple[GateOp, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.qubit_count < 1:
            raise InvalidArgumentError(f'PQC2 needs at least one qubit, got {self.qubit_count}')
        object.__setattr__(self, 'gates', tuple(self.gates))
        for gate in self.gates:
            gate.check_qubits(self.qubit_count)

    @property
    def parameter_count(self) -> int:
        return sum(gate.is_rotation for gate in self.gates)

    @property
    def phi(self) -> np.ndarray:
        return np.array([gate.angle for gate in self.gates if gate.is_rotation], dtype=float)

    @property
    def gate_count(self) -> int:
        return len(self.gates)

    @property
    def cnot_count(self) -> int:
        return sum(gate.kind == 'CNOT' for gate in self.gates)

    def with_phi(self, phi: Sequence[float]) -> 'Pqc2Circuit':
        phi = np.asarray(phi, dtype=float)
        if phi.shape != (self.parameter_count,):
            raise InvalidArgumentError(f'Expected {self.parameter_count} angles, got {phi.shape}')
        angles = iter(phi)
        gates = tuple(gate.with_angle(next(angles)) if gate.is_rotation else gate for gate in self.gates)
        return Pqc2Circuit(self.qubit_count, gates)

    def append(self, gate: GateOp) -> 'Pqc2Circuit':
        return Pqc2Circuit(self.qubit_count, self.gates + (gate,))

    def check_coupling(self, coupling_map: Optional[CouplingMap]) -> None:
        if coupling_map is None:
            return
        for gate in self.gates:
            if gate.kind == 'CNOT' and not coupling_map.allows(*gate.qubits):
                raise InvalidArgumentError(f'{gate} is not allowed by coupling map {coupling_map.name}')
