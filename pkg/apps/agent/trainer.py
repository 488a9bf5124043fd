"""
Double-DQN training loop over the circuit-building environment
"""
import logging
import math
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Dict, List, Optional

import joblib
import numpy as np
import torch

from apps.codec.tensor import render_grid
from apps.core.rundir import RunDirectory
from apps.environment.env import ThermalStateEnv
from apps.neural.model import QModel
from apps.neural.networks import NetworkSpec
from utils.exceptions import InvalidArgumentError, TrainingInterrupted
from utils.serialization import dump_json, load_json

from .policy import epsilon_at, select_action, td_targets
from .replay import ReplayBuffer, Transition, stack_batch

logger = logging.getLogger(__name__)

STATE_FILE = RunDirectory.CHECKPOINT_STATE
BUFFER_FILE = 'buffer.joblib'


@dataclass(frozen=True)
class AgentConfig:
    batch_size: int = 1000
    memory_size: int = 20000
    dropout: float = 0.0
    target_update_every: int = 500
    gamma: float = 5e-3
    epsilon_start: float = 1.0
    epsilon_decay: float = 0.99995
    epsilon_min: float = 5e-2
    max_episodes: int = 5000
    learning_rate: float = 1e-3
    checkpoint_every: int = 25

    def __post_init__(self):
        if self.memory_size < self.batch_size:
            raise InvalidArgumentError('memory_size must be at least batch_size')
        if not 0.0 <= self.epsilon_min <= self.epsilon_start <= 1.0:
            raise InvalidArgumentError('Need 0 <= epsilon_min <= epsilon_start <= 1')
        if self.target_update_every < 1 or self.max_episodes < 1 or self.checkpoint_every < 1:
            raise InvalidArgumentError('Update period, episode cap and checkpoint period must be positive')

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'AgentConfig':
        known = {f.name for f in fields(cls)}
        return cls(**{key: value for key, value in data.items() if key in known})


class DoubleDQNTrainer:
    """
    Owns the online and target networks, the replay memory and the exploration
    RNG. One gradient step follows every environment step once the memory
    holds a full batch; the target network is a hard copy refreshed every
    ``target_update_every`` gradient steps.
    """

    def __init__(
        self,
        env: ThermalStateEnv,
        agent: AgentConfig,
        network: Dict[str, Any],
        seed: int = 0,
        run: Optional[RunDirectory] = None,
    ):
        self.env = env
        self.agent = agent
        self.seed = seed
        self.run = run
        config = env.config
        input_shape = (config.observation_channels, config.max_depth, config.qubit_count + 3, config.qubit_count)
        self.spec = NetworkSpec.from_config(network, input_shape, env.action_count, dropout=agent.dropout)
        self.online = QModel(self.spec, seed=seed, learning_rate=agent.learning_rate)
        self.target = QModel(self.spec, seed=seed, learning_rate=agent.learning_rate)
        self.target.copy_from(self.online)
        self.buffer = ReplayBuffer(agent.memory_size, seed=seed)
        self.rng = np.random.default_rng([seed, 2])

        self.episode = 0
        self.env_steps = 0
        self.train_steps = 0
        self.elapsed_seconds = 0.0
        self.successes = 0

    @property
    def epsilon(self) -> float:
        return epsilon_at(self.env_steps, self.agent.epsilon_start, self.agent.epsilon_decay, self.agent.epsilon_min)

    def train_step(self) -> float:
        batch = stack_batch(self.buffer.sample(self.agent.batch_size))
        next_online = self.online.q_values(batch['next_states'])
        next_target = self.target.q_values(batch['next_states'])
        targets = td_targets(
            batch['rewards'], batch['dones'], next_online, next_target, batch['next_masks'], self.agent.gamma
        )
        q_values = self.online.forward(batch['states'])
        actions = torch.as_tensor(batch['actions'])
        chosen = q_values.gather(1, actions[:, None])[:, 0]
        loss = self.online.loss(chosen, targets)
        self.online.backward(loss)
        self.online.adam_step()
        self.train_steps += 1
        if self.train_steps % self.agent.target_update_every == 0:
            self.target.copy_from(self.online)
            logger.debug(f'Target network synced at gradient step {self.train_steps}')
        return float(loss.item())

    def run_episode(self) -> Dict[str, Any]:
        state = self.env.reset(self.episode)
        total = 0.0
        losses: List[float] = []
        while True:
            epsilon = self.epsilon
            action = select_action(self.online, state, epsilon, self.env.legal_mask(), self.rng)
            outcome = self.env.step(action)
            self.env_steps += 1
            self.buffer.push(Transition(
                state=state,
                action=action,
                reward=outcome.reward,
                next_state=outcome.observation,
                done=outcome.done,
                next_legal_mask=self.env.legal_mask(),
            ))
            if len(self.buffer) >= self.agent.batch_size:
                losses.append(self.train_step())
            if self.run:
                self.run.log_step({**outcome.record, 'epsilon': epsilon})
            total += outcome.reward
            state = outcome.observation
            if outcome.done:
                break

        if logger.isEnabledFor(logging.DEBUG):
            logger.debug(f'Episode {self.episode} final circuit:\n{render_grid(state[0])}')

        candidate = outcome.candidate
        if candidate['success']:
            self.successes += 1
        record = {
            'episode': self.episode,
            'return': total,
            'terminal_reward': outcome.reward,
            'steps': self.env.step_count,
            'delta_free_energy': candidate['delta_free_energy'],
            'fidelity': candidate['fidelity'],
            'cnot_count': candidate['cnot_count'],
            'epsilon': self.epsilon,
            'loss': float(np.mean(losses)) if losses else None,
        }
        if self.run:
            self.run.add_candidate(candidate)
            self.run.log_episode(record)
        self.episode += 1
        return record

    def train(self, max_episodes: Optional[int] = None, wall_clock_hours: Optional[float] = None) -> Dict[str, Any]:
        """
        Run episodes until ``max_episodes`` in total or the wall-clock budget
        is spent. A KeyboardInterrupt raises TrainingInterrupted pointing at
        the last checkpoint; partial-episode records are dropped on resume.
        """
        max_episodes = max_episodes or self.agent.max_episodes
        budget = math.inf if wall_clock_hours is None else wall_clock_hours * 3600.0
        started = time.monotonic() - self.elapsed_seconds
        stopped = 'max_episodes'
        if self.run and not self.run.has_checkpoint():
            self.save_checkpoint()
        try:
            while self.episode < max_episodes:
                if time.monotonic() - started >= budget:
                    stopped = 'wall_clock'
                    logger.warning(f'Wall-clock budget of {wall_clock_hours} h reached after {self.episode} episodes')
                    break
                record = self.run_episode()
                self.elapsed_seconds = time.monotonic() - started
                if record['terminal_reward'] > 0 or self.episode % 50 == 0:
                    logger.info(
                        f"Episode {record['episode']}: return {record['return']:+.3f}, "
                        f"dF={record['delta_free_energy']:.3e}, fidelity={record['fidelity']:.4f}, "
                        f"{record['cnot_count']} CNOTs, eps={record['epsilon']:.4f}"
                    )
                if self.run and self.episode % self.agent.checkpoint_every == 0:
                    self.save_checkpoint()
        except KeyboardInterrupt:
            checkpoint = self.run.checkpoint_dir if self.run else None
            raise TrainingInterrupted(f'Training stopped during episode {self.episode}', checkpoint) from None

        self.elapsed_seconds = time.monotonic() - started
        if self.run:
            self.save_checkpoint()
        return self.summary(stopped)

    def summary(self, stopped: str) -> Dict[str, Any]:
        return {
            'beta': self.env.config.beta,
            'seed': self.seed,
            'architecture': self.spec.architecture,
            'episodes': self.episode,
            'env_steps': self.env_steps,
            'train_steps': self.train_steps,
            'successes': self.successes,
            'stopped': stopped,
            'elapsed_hours': self.elapsed_seconds / 3600.0,
        }

    def save_checkpoint(self) -> Path:
        directory = self.run.stage_checkpoint()
        self.online.save(directory, 'online')
        self.target.save(directory, 'target')
        joblib.dump(self.buffer.state_dict(), directory / BUFFER_FILE)
        dump_json(
            {
                'episode': self.episode,
                'env_steps': self.env_steps,
                'train_steps': self.train_steps,
                'successes': self.successes,
                'elapsed_seconds': self.elapsed_seconds,
                'seed': self.seed,
                'rng': self.rng.bit_generator.state,
                'agent': asdict(self.agent),
                'spec': self.spec.as_dict(),
            },
            directory / STATE_FILE,
        )
        committed = self.run.commit_checkpoint(directory)
        logger.debug(f'Checkpoint written at episode {self.episode} to {committed}')
        return committed

    def restore(self) -> None:
        """Load the run's checkpoint and drop metrics recorded after it"""
        if not self.run.has_checkpoint():
            raise InvalidArgumentError(f'{self.run.path} has no checkpoint to resume from')
        directory = self.run.checkpoint_dir
        state = load_json(directory / STATE_FILE)
        if NetworkSpec(**state['spec']) != self.spec:
            raise InvalidArgumentError('Checkpoint network does not match the configured network')
        self.online = QModel.load(directory, 'online')
        self.target = QModel.load(directory, 'target')
        self.buffer.load_state_dict(joblib.load(directory / BUFFER_FILE))
        self.rng.bit_generator.state = state['rng']
        self.episode = state['episode']
        self.env_steps = state['env_steps']
        self.train_steps = state['train_steps']
        self.successes = state['successes']
        self.elapsed_seconds = state['elapsed_seconds']
        self.run.truncate_after(self.episode - 1)
        logger.info(f'Resumed from checkpoint at episode {self.episode} ({self.env_steps} env steps)')
