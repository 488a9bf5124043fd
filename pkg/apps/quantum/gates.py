"""
Gate operations for the RX/RY/RZ/CNOT gate set
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from utils.exceptions import InvalidArgumentError

ROTATION_KINDS = ('RX', 'RY', 'RZ')
GATE_KINDS = ROTATION_KINDS + ('CNOT',)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)

# Rows/columns ordered |control target> = 00, 01, 10, 11
CNOT_MATRIX = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)


@dataclass(frozen=True)
class GateOp:
    """One gate; rotations carry an angle in radians, CNOT acts on (control, target)"""

    kind: str
    qubits: Tuple[int, ...]
    angle: float = 0.0

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise InvalidArgumentError(f'Unknown gate kind: {self.kind!r}')
        object.__setattr__(self, 'qubits', tuple(int(q) for q in self.qubits))
        expected = 2 if self.kind == 'CNOT' else 1
        if len(self.qubits) != expected:
            raise InvalidArgumentError(f'{self.kind} acts on {expected} qubit(s), got {self.qubits}')
        if any(q < 0 for q in self.qubits):
            raise InvalidArgumentError(f'Negative qubit index in {self.qubits}')
        if self.kind == 'CNOT' and self.qubits[0] == self.qubits[1]:
            raise InvalidArgumentError('CNOT control and target must differ')
        object.__setattr__(self, 'angle', float(self.angle))

    @classmethod
    def rx(cls, qubit: int, angle: float = 0.0) -> 'GateOp':
        return cls('RX', (qubit,), angle)

    @classmethod
    def ry(cls, qubit: int, angle: float = 0.0) -> 'GateOp':
        return cls('RY', (qubit,), angle)

    @classmethod
    def rz(cls, qubit: int, angle: float = 0.0) -> 'GateOp':
        return cls('RZ', (qubit,), angle)

    @classmethod
    def cnot(cls, control: int, target: int) -> 'GateOp':
        return cls('CNOT', (control, target))

    @property
    def is_rotation(self) -> bool:
        return self.kind in ROTATION_KINDS

    def with_angle(self, angle: float) -> 'GateOp':
        if not self.is_rotation:
            raise InvalidArgumentError('CNOT has no angle')
        return GateOp(self.kind, self.qubits, angle)

    def template(self) -> 'GateOp':
        """The same gate with its angle zeroed"""
        return GateOp(self.kind, self.qubits, 0.0)

    def check_qubits(self, qubit_count: int) -> None:
        if any(q >= qubit_count for q in self.qubits):
            raise InvalidArgumentError(
                f'{self.kind} on qubits {self.qubits} out of range for {qubit_count} qubits'
            )

    def matrix(self) -> np.ndarray:
        if self.kind == 'CNOT':
            return CNOT_MATRIX
        return rotation_matrix(self.kind, self.angle)

    def __str__(self) -> str:
        if self.kind == 'CNOT':
            return f'CNOT({self.qubits[0]},{self.qubits[1]})'
        return f'{self.kind}({self.qubits[0]}, {self.angle:.4f})'


def rotation_matrix(kind: str, angle: float) -> np.ndarray:
    """exp(-i angle P / 2) for P in {X, Y, Z}"""
    c = np.cos(angle / 2)
    s = np.sin(angle / 2)
    if kind == 'RX':
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if kind == 'RY':
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == 'RZ':
        return np.array([[np.exp(-0.5j * angle), 0], [0, np.exp(0.5j * angle)]], dtype=complex)
    raise InvalidArgumentError(f'Not a rotation kind: {kind!r}')
