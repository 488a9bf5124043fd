"""
Plain-text circuit files: one gate per line, "RX q angle" or "CNOT c t".

Lines starting with '#' are comments; a "# qubits n" header fixes the
register width, otherwise it is inferred from the largest qubit index.
"""
from pathlib import Path
from typing import Optional, Union

from apps.quantum.gates import ROTATION_KINDS, GateOp
from utils.exceptions import InvalidArgumentError
from utils.serialization import format_real

from .ansatz import Pqc2Circuit


def format_circuit(circuit: Pqc2Circuit) -> str:
    lines = [f'# qubits {circuit.qubit_count}']
    for gate in circuit.gates:
        if gate.kind == 'CNOT':
            lines.append(f'CNOT {gate.qubits[0]} {gate.qubits[1]}')
        else:
            lines.append(f'{gate.kind} {gate.qubits[0]} {format_real(gate.angle)}')
    return '\n'.join(lines) + '\n'


def parse_circuit(text: str, qubit_count: Optional[int] = None) -> Pqc2Circuit:
    gates = []
    header_qubits = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith('#'):
            words = line[1:].split()
            if len(words) == 2 and words[0] == 'qubits':
                header_qubits = int(words[1])
            continue
        words = line.split()
        try:
            if words[0] == 'CNOT' and len(words) == 3:
                gates.append(GateOp.cnot(int(words[1]), int(words[2])))
            elif words[0] in ROTATION_KINDS and len(words) == 3:
                gates.append(GateOp(words[0], (int(words[1]),), float(words[2])))
            else:
                raise InvalidArgumentError(f'unrecognized gate {line!r}')
        except (ValueError, IndexError) as exc:
            raise InvalidArgumentError(f'Circuit line {number}: {exc}') from exc

    if qubit_count is None:
        qubit_count = header_qubits
    if qubit_count is None:
        qubit_count = 1 + max((q for gate in gates for q in gate.qubits), default=0)
    return Pqc2Circuit(qubit_count, tuple(gates))


def write_circuit(circuit: Pqc2Circuit, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_circuit(circuit))
    return path


def read_circuit(path: Union[str, Path], qubit_count: Optional[int] = None) -> Pqc2Circuit:
    return parse_circuit(Path(path).read_text(), qubit_count)
