"""
Free-energy evaluation of a (theta, PQC2) candidate thermal state
"""
import math
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from apps.quantum.backend import (
    diagonal_density,
    expectation,
    probabilities,
    run_gates,
    sample_probabilities,
    uhlmann_fidelity,
    unitary_of,
    zero_density,
    zero_state,
)
from apps.quantum.noise import NoiseModel
from apps.syk.pauli import PauliSum
from apps.syk.thermal import ExactThermalReference, shannon_entropy
from utils.exceptions import InvalidArgumentError

from .ansatz import Pqc1Config, Pqc2Circuit


@dataclass(frozen=True)
class VqtspEvaluation:
    beta: float
    energy: float
    entropy: float
    free_energy: float
    fidelity: float

    def errors(self, reference: ExactThermalReference) -> Dict[str, float]:
        """Absolute deviations from the exact Gibbs quantities"""
        return {
            'delta_free_energy': abs(self.free_energy - reference.free_energy),
            'delta_energy': abs(self.energy - reference.energy),
            'delta_entropy': abs(self.entropy - reference.entropy),
        }

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _noisy(noise: Optional[NoiseModel]) -> bool:
    return noise is not None and noise.enabled


def entropy_of_pqc1(
    theta: Sequence[float],
    pqc1: Pqc1Config,
    noise: Optional[NoiseModel] = None,
    shots: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[np.ndarray, float]:
    """Measured distribution of the PQC1 output and its Shannon entropy in nats"""
    gates = pqc1.gates(theta)
    n = pqc1.qubit_count
    if _noisy(noise):
        p = probabilities(run_gates(zero_density(n), gates, noise))
    else:
        p = probabilities(run_gates(zero_state(n), gates))
    p = p / p.sum()
    if shots:
        if rng is None:
            raise InvalidArgumentError('Shot sampling needs a seeded generator')
        p = sample_probabilities(p, shots, rng)
    return p, shannon_entropy(p)


def evolve_mixture(p: np.ndarray, circuit2: Pqc2Circuit, noise: Optional[NoiseModel] = None) -> np.ndarray:
    """rho2 = U diag(p) U^dagger, gate by gate with channels when noise is on"""
    if _noisy(noise):
        return run_gates(diagonal_density(p), circuit2.gates, noise)
    unitary = unitary_of(circuit2.gates, circuit2.qubit_count)
    return (unitary * p) @ unitary.conj().T


def evaluate(
    theta: Sequence[float],
    circuit2: Pqc2Circuit,
    beta: float,
    hamiltonian: PauliSum,
    reference: Optional[ExactThermalReference] = None,
    noise: Optional[NoiseModel] = None,
    pqc1: Optional[Pqc1Config] = None,
    shots: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
) -> VqtspEvaluation:
    """
    Energy, entropy, free energy and (given a reference) fidelity of the state
    sum_i p_i U|i><i|U^dagger, where p is the PQC1 distribution and U is PQC2.
    """
    if not beta > 0 or not math.isfinite(beta):
        raise InvalidArgumentError(f'Evaluation needs a finite beta > 0, got {beta}')
    if reference is not None and not math.isclose(reference.beta, beta, rel_tol=1e-12, abs_tol=1e-12):
        raise InvalidArgumentError(f'Reference is for beta={reference.beta}, evaluation asked for {beta}')
    if pqc1 is None:
        pqc1 = Pqc1Config(circuit2.qubit_count)
    if pqc1.qubit_count != circuit2.qubit_count or hamiltonian.qubit_count != circuit2.qubit_count:
        raise InvalidArgumentError('PQC1, PQC2 and the Hamiltonian act on different qubit counts')

    p, entropy = entropy_of_pqc1(theta, pqc1, noise=noise, shots=shots, rng=rng)
    rho = evolve_mixture(p, circuit2, noise)
    energy = expectation(rho, hamiltonian)
    if reference is not None:
        fidelity = uhlmann_fidelity(reference.rho, rho, sqrt_rho=reference.sqrt_rho)
    else:
        fidelity = math.nan
    return VqtspEvaluation(
        beta=float(beta),
        energy=energy,
        entropy=entropy,
        free_energy=energy - entropy / beta,
        fidelity=fidelity,
    )
