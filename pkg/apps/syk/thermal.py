"""
Exact Gibbs-state reference quantities by dense diagonalization
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, Optional

import numpy as np

from utils.conf import domain_setting
from utils.exceptions import CapacityError, InvalidArgumentError

from .pauli import PauliSum

logger = logging.getLogger(__name__)


def shannon_entropy(probabilities: np.ndarray) -> float:
    """-sum p ln p in nats with 0 ln 0 = 0"""
    p = np.asarray(probabilities, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


@dataclass(frozen=True, eq=False)
class ExactThermalReference:
    """rho_beta = exp(-beta H) / Z with its energy, entropy and (for beta > 0) free energy"""

    beta: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    populations: np.ndarray
    energy: float
    entropy: float
    log_partition: float
    free_energy: Optional[float]

    @property
    def qubit_count(self) -> int:
        return int(np.log2(len(self.eigenvalues)))

    @cached_property
    def rho(self) -> np.ndarray:
        vectors = self.eigenvectors
        return (vectors * self.populations) @ vectors.conj().T

    @cached_property
    def sqrt_rho(self) -> np.ndarray:
        vectors = self.eigenvectors
        return (vectors * np.sqrt(self.populations)) @ vectors.conj().T

    def as_dict(self) -> Dict[str, Any]:
        return {
            'beta': self.beta,
            'energy': self.energy,
            'entropy': self.entropy,
            'free_energy': self.free_energy,
            'log_partition': self.log_partition,
            'ground_energy': float(self.eigenvalues[0]),
        }


def exact_thermal(hamiltonian: PauliSum, beta: float, max_qubits: Optional[int] = None) -> ExactThermalReference:
    """Diagonalize H and assemble the Gibbs state at inverse temperature ``beta``"""
    if beta < 0 or not np.isfinite(beta):
        raise InvalidArgumentError(f'Inverse temperature must be finite and >= 0, got {beta}')
    if max_qubits is None:
        max_qubits = domain_setting('MAX_DENSE_QUBITS', 8)
    n = hamiltonian.qubit_count
    if n > max_qubits:
        raise CapacityError(f'Dense diagonalization supports at most {max_qubits} qubits, got {n}')

    matrix = hamiltonian.matrix
    eigenvalues, eigenvectors = np.linalg.eigh((matrix + matrix.conj().T) / 2)
    ground = eigenvalues[0]
    # Shifted Boltzmann weights keep exp() finite at large beta
    weights = np.exp(-beta * (eigenvalues - ground))
    shifted_partition = weights.sum()
    populations = weights / shifted_partition

    energy = float(np.dot(populations, eigenvalues))
    entropy = shannon_entropy(populations)
    log_partition = float(-beta * ground + np.log(shifted_partition))
    free_energy = -log_partition / beta if beta > 0 else None

    logger.debug(f'Exact thermal state n={n} beta={beta}: E={energy:.6f} S={entropy:.6f}')
    return ExactThermalReference(
        beta=float(beta),
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
        populations=populations,
        energy=energy,
        entropy=entropy,
        log_partition=log_partition,
        free_energy=free_energy,
    )
