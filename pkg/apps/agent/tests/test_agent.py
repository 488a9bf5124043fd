import tempfile
from pathlib import Path
from unittest import mock

import joblib
import numpy as np
from django.test import SimpleTestCase
from scipy.stats import chisquare

from apps.core.rundir import RunDirectory
from apps.environment.env import EnvConfig, ThermalStateEnv
from apps.syk.pauli import PauliString, PauliSum
from utils.exceptions import InvalidArgumentError, MalformedTensorError, StateError, TrainingInterrupted

from ..policy import epsilon_at, masked_argmax, select_action, td_targets
from ..replay import ReplayBuffer, Transition, pack_observation, stack_batch, unpack_observation
from ..trainer import BUFFER_FILE, AgentConfig, DoubleDQNTrainer

NETWORK = {
    'architecture': 'fnn',
    'channels': [4],
    'neurons': [16, 16],
    'leaky_slope': 0.01,
    'hidden_head': None,
    'dtype': 'float64',
}


class FixedQ:
    def __init__(self, values):
        self.values = np.asarray(values, dtype=float)

    def q_values(self, states):
        return self.values[None, :]


def tiny_env(seed=0):
    hamiltonian = PauliSum.from_terms([
        PauliString(0.7, 'ZZ'),
        PauliString(0.3, 'XI'),
        PauliString(-0.4, 'IZ'),
    ])
    config = EnvConfig(
        beta=1.5, qubit_count=2, reward_mode='free_energy', max_depth=3, zeta_f=1e-9,
        step_evaluations=10, final_evaluations=10,
    )
    return ThermalStateEnv(hamiltonian, config, seed=seed)


def tiny_agent(**overrides):
    values = {
        'batch_size': 4, 'memory_size': 50, 'target_update_every': 3, 'gamma': 0.5,
        'epsilon_decay': 0.9, 'max_episodes': 4, 'checkpoint_every': 2, 'learning_rate': 1e-2,
    }
    values.update(overrides)
    return AgentConfig.from_dict(values)


class EpsilonTestCase(SimpleTestCase):
    def test_schedule(self):
        self.assertEqual(epsilon_at(0), 1.0)
        self.assertAlmostEqual(epsilon_at(1000), 0.99995 ** 1000, places=15)
        self.assertEqual(epsilon_at(10 ** 6), 0.05)
        self.assertEqual(epsilon_at(3, start=1.0, decay=0.5, minimum=0.2), 0.2)
        with self.assertRaises(InvalidArgumentError):
            epsilon_at(-1)

    def test_trainer_epsilon_follows_env_steps(self):
        trainer = DoubleDQNTrainer(tiny_env(), tiny_agent(), NETWORK)
        trainer.env_steps = 7
        self.assertAlmostEqual(trainer.epsilon, max(0.9 ** 7, 0.05), places=15)


class SelectActionTestCase(SimpleTestCase):
    def test_greedy_picks_masked_argmax(self):
        rng = np.random.default_rng(0)
        model = FixedQ([0.1, 5.0, 0.3, 2.0])
        self.assertEqual(select_action(model, None, 0.0, np.array([True, True, True, True]), rng), 1)
        self.assertEqual(select_action(model, None, 0.0, np.array([True, False, True, True]), rng), 3)
        self.assertEqual(select_action(model, None, 1.0, np.array([False, False, True, False]), rng), 2)

    def test_ties_go_to_lowest_id(self):
        self.assertEqual(int(masked_argmax(np.array([1.0, 3.0, 3.0]), np.array([True, True, True]))), 1)

    def test_no_legal_action(self):
        with self.assertRaises(StateError):
            select_action(FixedQ([0.0, 0.0]), None, 0.5, np.zeros(2, dtype=bool), np.random.default_rng(0))

    def test_uniform_exploration_over_legal_ids(self):
        rng = np.random.default_rng(123)
        mask = np.array([True, False, True, True, False, True, True, False, True, False])
        model = FixedQ(np.arange(10.0))
        draws = [select_action(model, None, 1.0, mask, rng) for _ in range(10 ** 4)]
        legal = np.flatnonzero(mask)
        self.assertTrue(set(draws) <= set(legal.tolist()))
        counts = np.array([draws.count(a) for a in legal])
        self.assertGreater(chisquare(counts).pvalue, 1e-3)


class TdTargetTestCase(SimpleTestCase):
    def test_double_dqn_target(self):
        online = np.array([[0.1, 0.2, 0.9]])
        target = np.array([[7.0, 8.0, 4.0]])
        y = td_targets(np.array([1.0]), np.array([False]), online, target, np.ones((1, 3), bool), gamma=0.5)
        self.assertEqual(y[0], 3.0)

    def test_terminal_and_zero_discount(self):
        online = np.array([[0.1, 0.2, 0.9]])
        target = np.array([[7.0, 8.0, 4.0]])
        mask = np.ones((1, 3), bool)
        self.assertEqual(td_targets([1.5], [True], online, target, mask, gamma=0.5)[0], 1.5)
        self.assertEqual(td_targets([1.5], [False], online, target, mask, gamma=0.0)[0], 1.5)

    def test_target_weights_never_change_the_selection(self):
        online = np.array([[0.1, 0.2, 0.9], [3.0, 0.0, 1.0]])
        mask = np.array([[True, True, False], [True, True, True]])
        first = td_targets([0.0, 0.0], [False, False], online, np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]), mask, 1.0)
        second = td_targets([0.0, 0.0], [False, False], online, np.array([[10.0, 20.0, 30.0], [40.0, 50.0, 60.0]]), mask, 1.0)
        # the masked argmax picks action 1 in row 0 and action 0 in row 1 either way
        np.testing.assert_array_equal(first, [2.0, 4.0])
        np.testing.assert_array_equal(second, [20.0, 40.0])


def transition(action, reward=1.0, done=True, shape=(1, 3, 5, 2)):
    state = np.zeros(shape, dtype=np.float32)
    return Transition(state, action, reward, state.copy(), done, np.ones(12, dtype=bool))


class ReplayBufferTestCase(SimpleTestCase):
    def test_fifo_eviction(self):
        buffer = ReplayBuffer(3, seed=0)
        for action in range(5):
            buffer.push(transition(action))
        self.assertEqual(len(buffer), 3)
        self.assertEqual(buffer.inserted, 5)
        self.assertEqual(sorted(t.action for t in buffer.sample(3)), [2, 3, 4])

    def test_sampling(self):
        buffer = ReplayBuffer(10, seed=1)
        for action in range(10):
            buffer.push(transition(action))
        batch = buffer.sample(10)
        self.assertEqual(len({t.action for t in batch}), 10)
        with self.assertRaises(StateError):
            buffer.sample(11)
        stacked = stack_batch(batch[:4])
        self.assertEqual(stacked['states'].shape, (4, 1, 3, 5, 2))
        self.assertEqual(stacked['actions'].dtype, np.int64)
        self.assertEqual(stacked['next_masks'].shape, (4, 12))

    def test_state_round_trip_continues_the_sampler(self):
        buffer = ReplayBuffer(10, seed=2)
        for action in range(10):
            buffer.push(transition(action))
        state = buffer.state_dict()
        expected = [t.action for t in buffer.sample(5)]
        restored = ReplayBuffer(10, seed=99)
        restored.load_state_dict(state)
        self.assertEqual([t.action for t in restored.sample(5)], expected)
        with self.assertRaises(InvalidArgumentError):
            ReplayBuffer(5).load_state_dict(state)

    def test_observations_are_stored_as_packed_bits(self):
        gates = np.zeros((3, 5, 2), dtype=np.float64)
        gates[0, 0, 1] = 1.0
        gates[1, 3, 0] = 1.0
        observation = np.stack([gates, np.full(gates.shape, np.tanh(0.3))])
        packed = pack_observation(observation)
        self.assertIsInstance(packed['bits'], bytes)
        self.assertEqual(len(packed['bits']), (3 * 5 * 2 + 7) // 8)
        restored = unpack_observation(packed)
        self.assertEqual(restored.dtype, np.float64)
        np.testing.assert_array_equal(restored, observation)

        plain = observation[:1].astype(np.float32)
        np.testing.assert_array_equal(unpack_observation(pack_observation(plain)), plain)
        gates[2, 4, 1] = 0.5
        with self.assertRaises(MalformedTensorError):
            pack_observation(gates[None])


class AgentConfigTestCase(SimpleTestCase):
    def test_defaults_and_validation(self):
        config = AgentConfig()
        self.assertEqual((config.batch_size, config.memory_size, config.target_update_every), (1000, 20000, 500))
        self.assertEqual(config.gamma, 5e-3)
        self.assertEqual(AgentConfig.from_dict({'batch_size': 8, 'unknown': 1}).batch_size, 8)
        with self.assertRaises(InvalidArgumentError):
            AgentConfig(batch_size=10, memory_size=5)
        with self.assertRaises(InvalidArgumentError):
            AgentConfig(epsilon_min=0.5, epsilon_start=0.2)


class TrainStepTestCase(SimpleTestCase):
    def setUp(self):
        self.env = tiny_env()
        self.state = self.env.reset(0)

    def fill(self, trainer, count=8):
        mask = self.env.legal_mask()
        for _ in range(count):
            trainer.buffer.push(Transition(self.state, 3, 1.0, self.state, True, mask))

    def test_loss_decreases_on_identical_transitions(self):
        trainer = DoubleDQNTrainer(self.env, tiny_agent(target_update_every=1000), NETWORK, seed=1)
        self.fill(trainer)
        losses = [trainer.train_step() for _ in range(50)]
        self.assertLess(losses[-1], losses[0])
        self.assertEqual(trainer.train_steps, 50)

    def test_target_synced_only_on_schedule(self):
        trainer = DoubleDQNTrainer(self.env, tiny_agent(target_update_every=3), NETWORK, seed=1)
        self.fill(trainer)
        initial = trainer.target.parameter_vector()
        trainer.train_step()
        trainer.train_step()
        np.testing.assert_array_equal(trainer.target.parameter_vector(), initial)
        self.assertFalse(np.array_equal(trainer.online.parameter_vector(), initial))
        trainer.train_step()
        np.testing.assert_array_equal(trainer.target.parameter_vector(), trainer.online.parameter_vector())


class TrainerTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.root = Path(self.tmp.name)

    def run_dir(self, name):
        return RunDirectory.create(self.root / name, 'test', {'agent': 'tiny'}, {'training': 0})

    def test_episodes_are_logged_and_checkpointed(self):
        run = self.run_dir('run')
        trainer = DoubleDQNTrainer(tiny_env(), tiny_agent(), NETWORK, seed=0, run=run)
        summary = trainer.train(max_episodes=3)

        self.assertEqual(summary['episodes'], 3)
        self.assertEqual(summary['stopped'], 'max_episodes')
        self.assertEqual([r['episode'] for r in run.episodes()], [0, 1, 2])
        self.assertEqual(len(run.candidates()), 3)
        self.assertEqual(sum(1 for _ in run.steps()), summary['env_steps'])
        self.assertTrue(run.has_checkpoint())
        self.assertGreater(summary['train_steps'], 0)
        for record in run.episodes():
            self.assertIn(record['terminal_reward'], (-5.0, 5.0))

    def test_seeded_runs_are_reproducible(self):
        first = DoubleDQNTrainer(tiny_env(), tiny_agent(), NETWORK, seed=4)
        second = DoubleDQNTrainer(tiny_env(), tiny_agent(), NETWORK, seed=4)
        self.assertEqual(first.run_episode(), second.run_episode())

    def test_resume_continues_the_same_trajectory(self):
        straight_run = self.run_dir('straight')
        DoubleDQNTrainer(tiny_env(), tiny_agent(), NETWORK, seed=3, run=straight_run).train(max_episodes=4)

        resumed_run = self.run_dir('resumed')
        DoubleDQNTrainer(tiny_env(), tiny_agent(), NETWORK, seed=3, run=resumed_run).train(max_episodes=2)
        trainer = DoubleDQNTrainer(tiny_env(), tiny_agent(), NETWORK, seed=3, run=resumed_run)
        trainer.restore()
        self.assertEqual(trainer.episode, 2)
        trainer.train(max_episodes=4)

        straight = straight_run.episodes()
        resumed = resumed_run.episodes()
        self.assertEqual([r['episode'] for r in resumed], [0, 1, 2, 3])
        for a, b in zip(straight, resumed):
            self.assertEqual(a['cnot_count'], b['cnot_count'])
            self.assertEqual(a['steps'], b['steps'])
            self.assertAlmostEqual(a['return'], b['return'], places=12)

    def test_zero_wall_clock_budget(self):
        trainer = DoubleDQNTrainer(tiny_env(), tiny_agent(), NETWORK, seed=0, run=self.run_dir('run'))
        summary = trainer.train(wall_clock_hours=0.0)
        self.assertEqual(summary['stopped'], 'wall_clock')
        self.assertEqual(summary['episodes'], 0)

    def test_interrupt_points_at_checkpoint(self):
        run = self.run_dir('run')
        trainer = DoubleDQNTrainer(tiny_env(), tiny_agent(), NETWORK, seed=0, run=run)
        with mock.patch.object(trainer, 'run_episode', side_effect=KeyboardInterrupt):
            with self.assertRaises(TrainingInterrupted) as ctx:
                trainer.train(max_episodes=2)
        self.assertEqual(ctx.exception.checkpoint_dir, run.checkpoint_dir)
        self.assertTrue(run.has_checkpoint())

    def test_interrupted_checkpoint_keeps_the_previous_one(self):
        run = self.run_dir('run')
        DoubleDQNTrainer(tiny_env(), tiny_agent(), NETWORK, seed=3, run=run).train(max_episodes=2)
        saved = DoubleDQNTrainer(tiny_env(), tiny_agent(), NETWORK, seed=3, run=run)
        saved.restore()
        parameters = saved.online.parameter_vector()

        trainer = DoubleDQNTrainer(tiny_env(), tiny_agent(), NETWORK, seed=3, run=run)
        trainer.restore()
        real_dump = joblib.dump

        def dump(value, filename, *args, **kwargs):
            # network files are already written when the buffer fails
            if Path(filename).name == BUFFER_FILE:
                raise KeyboardInterrupt
            return real_dump(value, filename, *args, **kwargs)

        with mock.patch('joblib.dump', side_effect=dump):
            with self.assertRaises(TrainingInterrupted):
                trainer.train(max_episodes=4)
        self.assertEqual(trainer.episode, 4)

        restored = DoubleDQNTrainer(tiny_env(), tiny_agent(), NETWORK, seed=3, run=run)
        restored.restore()
        self.assertEqual(restored.episode, 2)
        self.assertEqual(restored.env_steps, saved.env_steps)
        self.assertEqual(restored.train_steps, saved.train_steps)
        self.assertEqual(len(restored.buffer), len(saved.buffer))
        np.testing.assert_array_equal(restored.online.parameter_vector(), parameters)
        self.assertEqual([r['episode'] for r in run.episodes()], [0, 1])
