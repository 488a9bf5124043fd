"""
Dense statevector and density-matrix simulation with bit-flip and two-qubit
depolarizing channels.

Basis index convention: qubit 0 is the most significant bit, so a state of
n qubits reshapes to a tensor with one axis per qubit in qubit order. A
density matrix reshapes to 2n axes, kets first then bras.
"""
from typing import Iterable, List, Optional, Sequence

import numpy as np

from utils.exceptions import InvalidArgumentError

from .gates import PAULI_X, GateOp

DENSITY_TOLERANCE = 1e-10


def qubit_count_of(state: np.ndarray) -> int:
    dim = state.shape[0]
    n = dim.bit_length() - 1
    if dim != 1 << n or (state.ndim == 2 and state.shape[1] != dim) or state.ndim > 2:
        raise InvalidArgumentError(f'State shape {state.shape} is not a 2^n register')
    return n


def zero_state(qubit_count: int) -> np.ndarray:
    psi = np.zeros(1 << qubit_count, dtype=complex)
    psi[0] = 1.0
    return psi


def zero_density(qubit_count: int) -> np.ndarray:
    rho = np.zeros((1 << qubit_count, 1 << qubit_count), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def diagonal_density(probabilities: Sequence[float]) -> np.ndarray:
    return np.diag(np.asarray(probabilities, dtype=float)).astype(complex)


def _apply_local(tensor: np.ndarray, matrix: np.ndarray, axes: Sequence[int]) -> np.ndarray:
    """Contract a 2^k x 2^k operator into ``axes`` of a qubit tensor"""
    k = len(axes)
    operator = matrix.reshape([2] * (2 * k))
    out = np.tensordot(operator, tensor, axes=(list(range(k, 2 * k)), list(axes)))
    return np.moveaxis(out, list(range(k)), list(axes))


def _apply_to_density(rho: np.ndarray, matrix: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """U rho U^dagger on ``qubits``"""
    tensor = rho.reshape([2] * (2 * n))
    tensor = _apply_local(tensor, matrix, list(qubits))
    tensor = _apply_local(tensor, matrix.conj(), [n + q for q in qubits])
    return tensor.reshape(rho.shape)


def _check_probability(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise InvalidArgumentError(f'Probability must lie in [0, 1], got {p}')


def apply_gate(state: np.ndarray, gate: GateOp) -> np.ndarray:
    """Apply ``gate`` to a statevector (1-D) or density matrix (2-D), returning a new array"""
    n = qubit_count_of(state)
    gate.check_qubits(n)
    matrix = gate.matrix()
    if state.ndim == 1:
        tensor = _apply_local(state.reshape([2] * n), matrix, gate.qubits)
        return tensor.reshape(state.shape)
    return _apply_to_density(state, matrix, gate.qubits, n)


def apply_bitflip(rho: np.ndarray, qubit: int, p: float) -> np.ndarray:
    """(1 - p) rho + p X rho X on ``qubit``"""
    _check_probability(p)
    n = qubit_count_of(rho)
    if not 0 <= qubit < n:
        raise InvalidArgumentError(f'Qubit {qubit} out of range for {n} qubits')
    if p == 0.0:
        return rho.copy()
    flipped = _apply_to_density(rho, PAULI_X, (qubit,), n)
    return (1.0 - p) * rho + p * flipped


def apply_depolarizing2(rho: np.ndarray, qubit_a: int, qubit_b: int, p: float) -> np.ndarray:
    """(1 - p) rho + p Tr_ab(rho) ⊗ I/4 on the pair (a, b)"""
    _check_probability(p)
    n = qubit_count_of(rho)
    if qubit_a == qubit_b:
        raise InvalidArgumentError('Depolarizing channel needs two distinct qubits')
    for q in (qubit_a, qubit_b):
        if not 0 <= q < n:
            raise InvalidArgumentError(f'Qubit {q} out of range for {n} qubits')
    if p == 0.0:
        return rho.copy()

    pair_axes = [qubit_a, qubit_b, n + qubit_a, n + qubit_b]
    tensor = np.moveaxis(rho.reshape([2] * (2 * n)), pair_axes, [-4, -3, -2, -1])
    reduced = np.einsum('...ijij->...', tensor)
    maximally_mixed = (np.eye(4) / 4).reshape(2, 2, 2, 2)
    replaced = reduced[..., None, None, None, None] * maximally_mixed
    replaced = np.moveaxis(replaced, [-4, -3, -2, -1], pair_axes).reshape(rho.shape)
    return (1.0 - p) * rho + p * replaced


def probabilities(state: np.ndarray) -> np.ndarray:
    """Computational-basis outcome probabilities; the diagonal for density input"""
    if state.ndim == 1:
        p = np.abs(state) ** 2
    else:
        p = np.real(np.diagonal(state)).copy()
    return np.clip(p, 0.0, None)


def sample_probabilities(p: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Empirical frequencies from ``shots`` seeded measurements"""
    if shots < 1:
        raise InvalidArgumentError(f'Shot count must be positive, got {shots}')
    p = np.asarray(p, dtype=float)
    counts = rng.multinomial(shots, p / p.sum())
    return counts / shots


def _operator_matrix(observable) -> np.ndarray:
    matrix = getattr(observable, 'matrix', observable)
    return np.asarray(matrix)


def expectation(state: np.ndarray, observable) -> float:
    """Tr(rho H) for a density matrix, <psi|H|psi> for a statevector"""
    matrix = _operator_matrix(observable)
    if matrix.shape[0] != state.shape[0]:
        raise InvalidArgumentError(f'Observable dimension {matrix.shape[0]} != state dimension {state.shape[0]}')
    if state.ndim == 1:
        return float(np.real(np.vdot(state, matrix @ state)))
    return float(np.real(np.einsum('ij,ji->', state, matrix)))


def matrix_sqrt_psd(rho: np.ndarray) -> np.ndarray:
    """Principal square root of a Hermitian PSD matrix, negative eigenvalues clamped"""
    eigenvalues, eigenvectors = np.linalg.eigh((rho + rho.conj().T) / 2)
    roots = np.sqrt(np.clip(eigenvalues, 0.0, None))
    return (eigenvectors * roots) @ eigenvectors.conj().T


def uhlmann_fidelity(rho: np.ndarray, sigma: np.ndarray, sqrt_rho: Optional[np.ndarray] = None) -> float:
    """
    Tr sqrt(sqrt(rho) sigma sqrt(rho)), clipped to [0, 1].

    ``sqrt_rho`` may be passed when sqrt(rho) is already known (the Gibbs
    state of a fixed beta is reused across many evaluations).
    """
    if rho.shape != sigma.shape:
        raise InvalidArgumentError(f'Fidelity between shapes {rho.shape} and {sigma.shape}')
    if sqrt_rho is None:
        sqrt_rho = matrix_sqrt_psd(rho)
    inner = sqrt_rho @ sigma @ sqrt_rho
    eigenvalues = np.linalg.eigvalsh((inner + inner.conj().T) / 2)
    value = float(np.sum(np.sqrt(np.clip(eigenvalues, 0.0, None))))
    return min(max(value, 0.0), 1.0)


def unitary_of(gates: Iterable[GateOp], qubit_count: int) -> np.ndarray:
    """Dense unitary of a noiseless gate sequence (first gate applied first)"""
    dim = 1 << qubit_count
    columns = np.eye(dim, dtype=complex).reshape([2] * qubit_count + [dim])
    for gate in gates:
        gate.check_qubits(qubit_count)
        columns = _apply_local(columns, gate.matrix(), gate.qubits)
    return columns.reshape(dim, dim)


def density_matrix_violations(rho: np.ndarray, tolerance: float = DENSITY_TOLERANCE) -> List[str]:
    """Human-readable list of violated density-matrix properties; empty when valid"""
    problems = []
    hermitian_error = float(np.max(np.abs(rho - rho.conj().T)))
    if hermitian_error > tolerance:
        problems.append(f'not Hermitian (max |rho - rho^dagger| = {hermitian_error:.3e})')
    trace_error = abs(complex(np.trace(rho)) - 1.0)
    if trace_error > tolerance:
        problems.append(f'trace deviates from 1 by {trace_error:.3e}')
    min_eigenvalue = float(np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)))
    if min_eigenvalue < -10 * tolerance:
        problems.append(f'not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})')
    return problems


def run_gates(state: np.ndarray, gates: Iterable[GateOp], noise=None) -> np.ndarray:
    """Apply a gate sequence, with the noise model's channels after each gate on density input"""
    for gate in gates:
        state = apply_gate(state, gate)
        if noise is not None and noise.enabled:
            if state.ndim != 2:
                raise InvalidArgumentError('Noisy simulation needs a density matrix')
            state = noise.apply_after(state, gate)
    return state

