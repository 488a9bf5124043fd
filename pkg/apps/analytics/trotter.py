"""
CNOT cost of first-order Trotterization with staircase Pauli exponentials
"""
from apps.syk.pauli import PauliString, PauliSum
from utils.exceptions import InvalidArgumentError


def staircase_cnots(term: PauliString) -> int:
    """exp(-i t P) for a weight-w string needs 2 (w - 1) CNOTs; identity terms are free"""
    if term.weight == 0:
        return 0
    return 2 * (term.weight - 1)


def trotter_cnot_count(hamiltonian: PauliSum, layers: int = 1) -> int:
    """Per-term CNOTs summed with no cancellation between neighbouring terms, times ``layers``"""
    if layers < 1:
        raise InvalidArgumentError(f'Trotter layer count must be at least 1, got {layers}')
    return layers * sum(staircase_cnots(term) for term in hamiltonian)


def cnot_improvement(trotter_count: int, rl_count: int) -> float:
    if rl_count < 1:
        raise InvalidArgumentError('The improvement ratio needs a circuit with at least one CNOT')
    return trotter_count / rl_count
