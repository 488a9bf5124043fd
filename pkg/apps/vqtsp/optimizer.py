"""
Derivative-free free-energy minimization over the joint [theta; phi] vector
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from apps.quantum.noise import NoiseModel
from apps.syk.pauli import PauliSum
from apps.syk.thermal import ExactThermalReference
from utils.exceptions import InvalidArgumentError

from .ansatz import Pqc1Config, Pqc2Circuit
from .evaluation import VqtspEvaluation, evaluate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OptimizerConfig:
    max_evaluations: int = 1000
    initial_step: float = 0.5
    tolerance: float = 1e-10
    seed: int = 0
    restarts: int = 1

    def __post_init__(self):
        if self.max_evaluations < 1:
            raise InvalidArgumentError(f'Optimizer budget must be positive, got {self.max_evaluations}')
        if not self.initial_step > 0:
            raise InvalidArgumentError(f'Initial simplex step must be positive, got {self.initial_step}')
        if self.tolerance < 0 or self.restarts < 0:
            raise InvalidArgumentError('Tolerance and restart count must be non-negative')


class _BudgetExhausted(Exception):
    pass


class FreeEnergyObjective:
    """F(theta, phi) as a function of the flat vector [theta; phi], with a hard evaluation budget"""

    def __init__(
        self,
        circuit2: Pqc2Circuit,
        beta: float,
        hamiltonian: PauliSum,
        reference: Optional[ExactThermalReference] = None,
        noise: Optional[NoiseModel] = None,
        pqc1: Optional[Pqc1Config] = None,
        max_evaluations: Optional[int] = None,
        shots: Optional[int] = None,
        rng: Optional[np.random.Generator] = None,
    ):
        self.circuit2 = circuit2
        self.beta = beta
        self.hamiltonian = hamiltonian
        self.reference = reference
        self.noise = noise
        self.pqc1 = pqc1 or Pqc1Config(circuit2.qubit_count)
        self.max_evaluations = max_evaluations
        self.shots = shots
        self.rng = rng
        self.evaluations = 0
        self.best_x: Optional[np.ndarray] = None
        self.best_evaluation: Optional[VqtspEvaluation] = None

    @property
    def dimension(self) -> int:
        return self.pqc1.parameter_count + self.circuit2.parameter_count

    @property
    def remaining(self) -> float:
        if self.max_evaluations is None:
            return math.inf
        return self.max_evaluations - self.evaluations

    def split(self, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        x = np.asarray(x, dtype=float)
        k = self.pqc1.parameter_count
        return x[:k], x[k:]

    def evaluate(self, x: np.ndarray) -> VqtspEvaluation:
        theta, phi = self.split(x)
        return evaluate(
            theta,
            self.circuit2.with_phi(phi),
            self.beta,
            self.hamiltonian,
            reference=self.reference,
            noise=self.noise,
            pqc1=self.pqc1,
            shots=self.shots,
            rng=self.rng,
        )

    def __call__(self, x: np.ndarray) -> float:
        if self.remaining <= 0:
            raise _BudgetExhausted
        result = self.evaluate(x)
        self.evaluations += 1
        if self.best_evaluation is None or result.free_energy < self.best_evaluation.free_energy:
            self.best_x = np.array(x, dtype=float)
            self.best_evaluation = result
        return result.free_energy


@dataclass(frozen=True)
class OptimizationResult:
    theta: np.ndarray
    phi: np.ndarray
    circuit: Pqc2Circuit
    evaluation: VqtspEvaluation
    evaluations: int


def _simplex(center: np.ndarray, steps: np.ndarray) -> np.ndarray:
    return np.vstack([center, center + np.diag(steps)])


def _run_simplex(objective: FreeEnergyObjective, simplex: np.ndarray, tolerance: float) -> None:
    budget = objective.remaining
    options = {
        'initial_simplex': simplex,
        'adaptive': True,
        'xatol': tolerance,
        'fatol': tolerance,
        'maxfev': None if math.isinf(budget) else int(budget),
        'maxiter': None if math.isinf(budget) else int(budget),
    }
    minimize(objective, simplex[0], method='Nelder-Mead', options=options)


def minimize_free_energy(
    circuit2: Pqc2Circuit,
    beta: float,
    hamiltonian: PauliSum,
    reference: Optional[ExactThermalReference] = None,
    config: Optional[OptimizerConfig] = None,
    warm_start: Optional[Tuple[Sequence[float], Optional[Sequence[float]]]] = None,
    noise: Optional[NoiseModel] = None,
    pqc1: Optional[Pqc1Config] = None,
    shots: Optional[int] = None,
) -> OptimizationResult:
    """
    Nelder-Mead (adaptive coefficients) on F over [theta; phi], then one seeded
    restart around the incumbent while budget remains.

    Without ``warm_start`` theta is drawn uniformly from [0, 2 pi) and phi is
    taken from the circuit's current angles. The returned point is the best one
    ever evaluated, so it is never worse than the starting point.
    """
    config = config or OptimizerConfig()
    pqc1 = pqc1 or Pqc1Config(circuit2.qubit_count)
    rng = np.random.default_rng(config.seed)
    shot_rng = np.random.default_rng([config.seed, 1]) if shots else None

    if warm_start is None:
        theta0 = rng.uniform(0.0, 2 * np.pi, pqc1.parameter_count)
        phi0 = circuit2.phi
    else:
        theta0, phi0 = warm_start
        theta0 = np.asarray(theta0, dtype=float)
        phi0 = circuit2.phi if phi0 is None else np.asarray(phi0, dtype=float)
    if theta0.shape != (pqc1.parameter_count,) or phi0.shape != (circuit2.parameter_count,):
        raise InvalidArgumentError(
            f'Warm start shapes {theta0.shape}/{phi0.shape} do not match '
            f'{pqc1.parameter_count} theta and {circuit2.parameter_count} phi parameters'
        )

    objective = FreeEnergyObjective(
        circuit2, beta, hamiltonian, reference, noise, pqc1,
        max_evaluations=config.max_evaluations, shots=shots, rng=shot_rng,
    )
    x0 = np.concatenate([theta0, phi0])
    steps = np.full(x0.size, config.initial_step)
    try:
        _run_simplex(objective, _simplex(x0, steps), config.tolerance)
        for _ in range(config.restarts):
            if objective.remaining <= x0.size + 1:
                break
            signs = rng.choice([-1.0, 1.0], size=x0.size)
            _run_simplex(objective, _simplex(objective.best_x, signs * steps), config.tolerance)
    except _BudgetExhausted:
        pass

    theta, phi = objective.split(objective.best_x)
    best = objective.best_evaluation
    logger.debug(
        f'Free-energy minimization: {objective.evaluations} evaluations, '
        f'F={best.free_energy:.8f} S={best.entropy:.6f} E={best.energy:.6f}'
    )
    return OptimizationResult(
        theta=theta,
        phi=phi,
        circuit=circuit2.with_phi(phi),
        evaluation=best,
        evaluations=objective.evaluations,
    )
