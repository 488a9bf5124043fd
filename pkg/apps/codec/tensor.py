"""
Binary 3-D tensor encoding of a gate program.

Shape [D_max, n + 3, n]: the depth axis is the moment, rows 0..n-1 hold the
control qubit of a CNOT, rows n, n+1, n+2 hold RX, RY, RZ, and the column is
the CNOT target or the rotated qubit. Angles are not encoded.

Gates are packed as soon as possible: a gate lands in the first moment after
the last moment that touched any of its qubits. A tensor is valid only if it
is packed that way, which makes encode(decode(T)) == T.
"""
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from apps.quantum.gates import ROTATION_KINDS, GateOp
from apps.vqtsp.ansatz import Pqc2Circuit
from utils.exceptions import CapacityError, InvalidArgumentError, MalformedTensorError

ROTATION_ROW = {kind: offset for offset, kind in enumerate(ROTATION_KINDS)}
BIT_ORDER = 'big'


def tensor_shape(max_depth: int, qubit_count: int) -> Tuple[int, int, int]:
    return (max_depth, qubit_count + len(ROTATION_KINDS), qubit_count)


def moment_schedule(gates: Iterable[GateOp], qubit_count: int) -> List[int]:
    """Moment index of every gate under as-soon-as-possible packing"""
    free_at = [0] * qubit_count
    moments = []
    for gate in gates:
        gate.check_qubits(qubit_count)
        moment = max(free_at[q] for q in gate.qubits)
        moments.append(moment)
        for q in gate.qubits:
            free_at[q] = moment + 1
    return moments


def circuit_depth(gates: Sequence[GateOp], qubit_count: int) -> int:
    return max((m + 1 for m in moment_schedule(gates, qubit_count)), default=0)


def _cell(gate: GateOp, qubit_count: int) -> Tuple[int, int]:
    if gate.kind == 'CNOT':
        return gate.qubits[0], gate.qubits[1]
    return qubit_count + ROTATION_ROW[gate.kind], gate.qubits[0]


def encode(circuit: Pqc2Circuit, max_depth: int) -> np.ndarray:
    if max_depth < 1:
        raise InvalidArgumentError(f'D_max must be positive, got {max_depth}')
    n = circuit.qubit_count
    tensor = np.zeros(tensor_shape(max_depth, n), dtype=np.uint8)
    for gate, moment in zip(circuit.gates, moment_schedule(circuit.gates, n)):
        if moment >= max_depth:
            raise CapacityError(f'Circuit needs more than D_max={max_depth} moments')
        row, column = _cell(gate, n)
        tensor[moment, row, column] = 1
    return tensor


def _moment_gates(layer: np.ndarray, qubit_count: int, moment: int) -> List[GateOp]:
    gates = []
    busy = set()
    for row, column in zip(*np.nonzero(layer)):
        row, column = int(row), int(column)
        if row < qubit_count:
            if row == column:
                raise MalformedTensorError(f'Moment {moment}: CNOT bit on the diagonal at qubit {row}')
            gate = GateOp.cnot(row, column)
        else:
            gate = GateOp(ROTATION_KINDS[row - qubit_count], (column,))
        if busy.intersection(gate.qubits):
            raise MalformedTensorError(f'Moment {moment}: qubit conflict at {gate}')
        busy.update(gate.qubits)
        gates.append(gate)
    return gates


def validate_tensor(tensor: np.ndarray) -> int:
    """Check shape and bit values; returns the qubit count"""
    tensor = np.asarray(tensor)
    if tensor.ndim != 3 or tensor.shape[2] < 1 or tensor.shape[1] != tensor.shape[2] + len(ROTATION_KINDS):
        raise MalformedTensorError(f'Tensor shape {tensor.shape} is not [D_max, n + 3, n]')
    if not np.isin(tensor, (0, 1)).all():
        raise MalformedTensorError('Tensor entries must be 0 or 1')
    return tensor.shape[2]


def decode(tensor: np.ndarray) -> Pqc2Circuit:
    """Gate sequence with zero angles; within a moment rows are read top to bottom, columns left to right"""
    n = validate_tensor(tensor)
    gates: List[GateOp] = []
    previous: Optional[set] = None
    for moment, layer in enumerate(np.asarray(tensor)):
        layer_gates = _moment_gates(layer, n, moment)
        if previous is not None and layer_gates and not previous:
            raise MalformedTensorError(f'Moment {moment} follows an empty moment')
        if previous:
            for gate in layer_gates:
                if not previous.intersection(gate.qubits):
                    raise MalformedTensorError(
                        f'Moment {moment}: {gate} could run earlier (tensor is not left-packed)'
                    )
        previous = {q for gate in layer_gates for q in gate.qubits}
        gates.extend(layer_gates)
    return Pqc2Circuit(n, tuple(gates))


def encode_observation(
    circuit: Pqc2Circuit,
    max_depth: int,
    energy_feature: Optional[float] = None,
    dtype=np.float32,
) -> np.ndarray:
    """
    Network input of shape [C, D_max, n + 3, n]: the gate tensor, plus a
    constant plane holding ``energy_feature`` when it is given.
    """
    planes = [encode(circuit, max_depth).astype(dtype)]
    if energy_feature is not None:
        planes.append(np.full(planes[0].shape, energy_feature, dtype=dtype))
    return np.stack(planes)


def dump_tensor(tensor: np.ndarray) -> bytes:
    """Row-major bits, most significant bit first within each byte"""
    validate_tensor(tensor)
    return np.packbits(np.asarray(tensor, dtype=np.uint8).ravel(order='C'), bitorder=BIT_ORDER).tobytes()


def load_tensor(data: bytes, shape: Sequence[int]) -> np.ndarray:
    count = int(np.prod(shape))
    if len(data) != (count + 7) // 8:
        raise MalformedTensorError(f'{len(data)} bytes cannot hold a tensor of shape {tuple(shape)}')
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), count=count, bitorder=BIT_ORDER)
    return bits.reshape(tuple(shape))


def render_grid(tensor: np.ndarray) -> str:
    """Text grid of the occupied moments, one line per tensor row"""
    n = validate_tensor(tensor)
    used = [d for d in range(tensor.shape[0]) if tensor[d].any()]
    labels = [f'c{q}' for q in range(n)] + list(ROTATION_KINDS)
    lines = ['     ' + ' | '.join(f'm{d:<{max(n * 2 - 2, 1)}}' for d in used)]
    for row, label in enumerate(labels):
        cells = [' '.join('x' if tensor[d, row, q] else '.' for q in range(n)) for d in used]
        lines.append(f'{label:<4} ' + ' | '.join(cells))
    return '\n'.join(lines)


TENSOR_SUFFIX = '.bits'


def write_tensor(tensor: np.ndarray, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(dump_tensor(tensor))
    return path


def read_tensor(path, qubit_count: int) -> np.ndarray:
    """Packed-bit tensor file; D_max follows from the file size, which is unambiguous from n = 2 on"""
    if qubit_count < 2:
        raise InvalidArgumentError(f'Tensor files need at least 2 qubits, got {qubit_count}')
    data = Path(path).read_bytes()
    _, rows, columns = tensor_shape(1, qubit_count)
    depth = len(data) * 8 // (rows * columns)
    if depth < 1:
        raise MalformedTensorError(f'{path} is too short for a {qubit_count}-qubit tensor')
    return load_tensor(data, tensor_shape(depth, qubit_count))
