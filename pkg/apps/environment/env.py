"""
Circuit-building environment for thermal state preparation.

The state is the encoded PQC2 gate tensor, an action appends one gate with a
zero angle, and every step re-optimizes (theta, phi) from the incumbent
before the reward is computed against the exact Gibbs free energy.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from apps.codec.tensor import encode_observation
from apps.quantum.coupling import CouplingMap
from apps.quantum.noise import NoiseModel
from apps.syk.pauli import PauliSum
from apps.syk.thermal import ExactThermalReference, exact_thermal
from apps.vqtsp.ansatz import Pqc1Config, Pqc2Circuit
from apps.vqtsp.circuit_io import format_circuit
from apps.vqtsp.evaluation import VqtspEvaluation
from apps.vqtsp.optimizer import OptimizationResult, OptimizerConfig, minimize_free_energy
from utils.conf import domain_setting
from utils.exceptions import InvalidArgumentError, StateError

from .actions import ActionSpace
from .rewards import Reward, energy_term, reward_free_energy, reward_free_energy_fidelity

logger = logging.getLogger(__name__)

REWARD_MODES = ('free_energy', 'free_energy_fidelity')


def default_max_depth(qubit_count: int) -> int:
    """D_max from the settings table; registers wider than the table use its last entry"""
    table = {int(k): int(v) for k, v in domain_setting('D_MAX', {5: 30, 7: 40}).items()}
    for width in sorted(table):
        if qubit_count <= width:
            return table[width]
    return table[max(table)]


@dataclass(frozen=True)
class EnvConfig:
    beta: float
    qubit_count: int
    reward_mode: str = 'free_energy_fidelity'
    zeta_f: float = 1e-2
    zeta_fid: float = 0.9
    max_depth: Optional[int] = None
    weights: Tuple[float, float] = (0.6, 0.4)
    step_evaluations: int = 200
    final_evaluations: int = 1000
    initial_step: float = 0.5
    noise: NoiseModel = field(default_factory=NoiseModel.noiseless)
    shots: Optional[int] = None
    coupling_map: Optional[CouplingMap] = None
    entangler: str = 'ring'
    energy_plane: bool = False
    repeat_masking: bool = True

    def __post_init__(self):
        if not self.beta > 0 or not math.isfinite(self.beta):
            raise InvalidArgumentError(f'The environment needs a finite beta > 0, got {self.beta}')
        if self.reward_mode not in REWARD_MODES:
            raise InvalidArgumentError(f'Unknown reward mode {self.reward_mode!r}')
        if not (self.zeta_f > 0 and self.zeta_fid > 0):
            raise InvalidArgumentError('Success thresholds must be positive')
        weights = tuple(float(w) for w in self.weights)
        if len(weights) != 2 or min(weights) < 0 or sum(weights) <= 0:
            raise InvalidArgumentError(f'Reward weights must be two non-negative numbers, got {self.weights}')
        object.__setattr__(self, 'weights', weights)
        if self.max_depth is None:
            object.__setattr__(self, 'max_depth', default_max_depth(self.qubit_count))
        if self.max_depth < 1:
            raise InvalidArgumentError(f'D_max must be positive, got {self.max_depth}')
        if self.coupling_map is None:
            object.__setattr__(self, 'coupling_map', CouplingMap.all_to_all(self.qubit_count))

    @classmethod
    def from_sections(
        cls, environment: Dict[str, Any], noise: Dict[str, Any], beta: float, qubit_count: int
    ) -> 'EnvConfig':
        """Build from the resolved ``environment`` and ``noise`` sections of a run config"""
        return cls(
            beta=beta,
            qubit_count=qubit_count,
            reward_mode=environment['reward_mode'],
            zeta_f=environment['zeta_f'],
            zeta_fid=environment['zeta_fid'],
            max_depth=environment.get('max_depth'),
            weights=tuple(environment['weights']),
            step_evaluations=environment['step_evaluations'],
            final_evaluations=environment['final_evaluations'],
            initial_step=environment['initial_step'],
            noise=NoiseModel.from_section(noise),
            shots=noise.get('shots'),
            coupling_map=CouplingMap.resolve(environment['coupling_map'], qubit_count),
            entangler=environment['entangler'],
            energy_plane=environment['energy_plane'],
            repeat_masking=environment['repeat_masking'],
        )

    @property
    def observation_channels(self) -> int:
        return 2 if self.energy_plane else 1


@dataclass(frozen=True)
class StepOutcome:
    observation: np.ndarray
    reward: float
    done: bool
    evaluation: VqtspEvaluation
    theta: np.ndarray
    phi: np.ndarray
    record: Dict[str, Any]
    candidate: Optional[Dict[str, Any]] = None


class ThermalStateEnv:
    """One environment per (instance, beta, seed); single-threaded"""

    def __init__(
        self,
        hamiltonian: PauliSum,
        config: EnvConfig,
        seed: int = 0,
        reference: Optional[ExactThermalReference] = None,
    ):
        if hamiltonian.qubit_count != config.qubit_count:
            raise InvalidArgumentError(
                f'Hamiltonian acts on {hamiltonian.qubit_count} qubits, config expects {config.qubit_count}'
            )
        self.hamiltonian = hamiltonian
        self.config = config
        self.seed = seed
        # Rewards compare against the exact free energy, which bounds n by the dense limit.
        self.reference = reference or exact_thermal(hamiltonian, config.beta)
        self.actions = ActionSpace(config.qubit_count, config.coupling_map)
        self.pqc1 = Pqc1Config(config.qubit_count, config.entangler)

        self.episode: Optional[int] = None
        self.step_count = 0
        self.done = False
        self.circuit: Optional[Pqc2Circuit] = None
        self.theta: Optional[np.ndarray] = None
        self.evaluation: Optional[VqtspEvaluation] = None
        self.initial_free_energy: Optional[float] = None
        self.previous_action: Optional[int] = None
        self._rng: Optional[np.random.Generator] = None

    @property
    def action_count(self) -> int:
        return self.actions.size

    @property
    def f_exact(self) -> float:
        return self.reference.free_energy

    def _optimize(self, circuit: Pqc2Circuit, budget: int, warm_start=None) -> OptimizationResult:
        config = OptimizerConfig(
            max_evaluations=budget,
            initial_step=self.config.initial_step,
            seed=int(self._rng.integers(2 ** 32)),
        )
        return minimize_free_energy(
            circuit,
            self.config.beta,
            self.hamiltonian,
            self.reference,
            config=config,
            warm_start=warm_start,
            noise=self.config.noise,
            pqc1=self.pqc1,
            shots=self.config.shots,
        )

    def observation(self) -> np.ndarray:
        if self.circuit is None:
            raise StateError('reset() must be called before reading an observation')
        feature = None
        if self.config.energy_plane:
            feature = math.tanh(self.evaluation.free_energy - self.f_exact)
        return encode_observation(self.circuit, self.config.max_depth, energy_feature=feature)

    def legal_mask(self) -> np.ndarray:
        return self.actions.legal_mask(self.previous_action, self.config.repeat_masking)

    def reset(self, episode: int = 0) -> np.ndarray:
        """Empty PQC2, fresh theta, and the theta-only baseline F0 under the step budget"""
        self.episode = episode
        self._rng = np.random.default_rng([self.seed, episode])
        self.step_count = 0
        self.done = False
        self.previous_action = None
        self.circuit = Pqc2Circuit(self.config.qubit_count)
        result = self._optimize(self.circuit, self.config.step_evaluations)
        self.theta = result.theta
        self.evaluation = result.evaluation
        self.initial_free_energy = result.evaluation.free_energy
        logger.debug(f'Episode {episode} reset: F0={self.initial_free_energy:.8f} (exact {self.f_exact:.8f})')
        return self.observation()

    def reward(self, evaluation: VqtspEvaluation, e_term: float, step: int) -> Reward:
        f_error = abs(evaluation.free_energy - self.f_exact)
        if self.config.reward_mode == 'free_energy':
            return reward_free_energy(f_error, e_term, step, self.config.max_depth, self.config.zeta_f)
        return reward_free_energy_fidelity(
            f_error,
            evaluation.fidelity,
            e_term,
            step,
            self.config.max_depth,
            self.config.zeta_f,
            self.config.zeta_fid,
            self.config.weights,
        )

    def step(self, action: int) -> StepOutcome:
        if self.circuit is None:
            raise StateError('reset() must be called before step()')
        if self.done:
            raise StateError('The episode is over; call reset()')
        gate = self.actions.gate(action)
        if not self.legal_mask()[action]:
            raise InvalidArgumentError(f'Action {action} ({self.actions.label(action)}) is masked')

        circuit = self.circuit.append(gate)
        result = self._optimize(circuit, self.config.step_evaluations, warm_start=(self.theta, circuit.phi))
        self.step_count += 1
        f_prev = self.evaluation.free_energy
        evaluation = result.evaluation
        e_term = energy_term(f_prev, evaluation.free_energy, self.f_exact)
        outcome = self.reward(evaluation, e_term, self.step_count)

        self.circuit = result.circuit
        self.theta = result.theta
        self.evaluation = evaluation
        self.previous_action = action
        self.done = outcome.done

        record = {
            'episode': self.episode,
            'step': self.step_count,
            'action': action,
            'gate': self.actions.label(action),
            'F': evaluation.free_energy,
            'E': evaluation.energy,
            'S': evaluation.entropy,
            'Fid': evaluation.fidelity,
            'reward': outcome.value,
            'done': outcome.done,
            'cnot_count': self.circuit.cnot_count,
            'gate_count': self.circuit.gate_count,
        }
        candidate = self.finalize(outcome) if outcome.done else None
        return StepOutcome(
            observation=self.observation(),
            reward=outcome.value,
            done=outcome.done,
            evaluation=evaluation,
            theta=self.theta,
            phi=self.circuit.phi,
            record=record,
            candidate=candidate,
        )

    def finalize(self, outcome: Reward) -> Dict[str, Any]:
        """Polish the terminal circuit with the full budget; the result is the stored candidate"""
        result = self._optimize(
            self.circuit, self.config.final_evaluations, warm_start=(self.theta, self.circuit.phi)
        )
        evaluation = result.evaluation
        logger.info(
            f'Episode {self.episode} ended after {self.step_count} steps '
            f'(reward {outcome.value:+.3f}): F={evaluation.free_energy:.8f}, '
            f'fidelity={evaluation.fidelity:.6f}, {result.circuit.cnot_count} CNOTs'
        )
        return {
            'episode': self.episode,
            'seed': self.seed,
            'beta': self.config.beta,
            'steps': self.step_count,
            'terminal_reward': outcome.value,
            'success': outcome.success,
            **evaluation.as_dict(),
            **evaluation.errors(self.reference),
            'cnot_count': result.circuit.cnot_count,
            'gate_count': result.circuit.gate_count,
            'theta': result.theta,
            'phi': result.phi,
            'circuit': format_circuit(result.circuit),
        }

    def replay(self, actions: Sequence[int], episode: int = 0) -> float:
        """Reset, apply ``actions`` and return the summed reward"""
        self.reset(episode)
        total = 0.0
        for action in actions:
            total += self.step(action).reward
            if self.done:
                break
        return total
