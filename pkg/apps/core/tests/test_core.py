import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings
from rest_framework import serializers

from utils.exceptions import CapacityError, InvalidArgumentError, TrainingInterrupted
from utils.serialization import format_real, to_jsonable

from ..commands import EXIT_CAPACITY, EXIT_INTERRUPTED, EXIT_VALIDATION, ExperimentCommand
from ..rundir import RunDirectory
from ..serializers import TrainRunConfigSerializer, deep_merge, read_config_document, resolve_run_config


class RunConfigTestCase(SimpleTestCase):
    def test_defaults_are_filled_in(self):
        config = resolve_run_config(TrainRunConfigSerializer, overrides={'instance': {'majoranas': 8, 'seed': 3}})
        self.assertEqual(config['betas'], [5.2, 18.0, 35.0])
        self.assertEqual(config['environment']['reward_mode'], 'free_energy_fidelity')
        self.assertEqual(config['environment']['weights'], [0.6, 0.4])
        self.assertEqual(config['agent']['gamma'], 5e-3)
        self.assertEqual(config['network']['channels'], [32, 64, 128, 256])
        self.assertEqual(config['noise']['depolarizing_2q'], 8.043e-3)
        self.assertEqual(config['filter'], {'w_a': None, 'w_b': None})

    @override_settings(THERMALQAS={'ZETA_F': 0.05, 'DEFAULT_BETAS': [2.0]})
    def test_defaults_follow_settings(self):
        config = resolve_run_config(TrainRunConfigSerializer, overrides={'instance': {'majoranas': 8, 'seed': 3}})
        self.assertEqual(config['environment']['zeta_f'], 0.05)
        self.assertEqual(config['betas'], [2.0])

    def test_unknown_keys_are_rejected_at_every_level(self):
        for document in (
            {'instance': {'majoranas': 8, 'seed': 3}, 'betass': [1.0]},
            {'instance': {'majoranas': 8, 'seed': 3}, 'environment': {'zeta': 0.1}},
        ):
            with self.assertRaises(serializers.ValidationError):
                resolve_run_config(TrainRunConfigSerializer, overrides=document)

    def test_invalid_values(self):
        for document in (
            {'instance': {'majoranas': 9, 'seed': 3}},
            {'instance': {'majoranas': 8}},
            {'instance': {'majoranas': 8, 'seed': 3}, 'betas': [0.0]},
            {'instance': {'majoranas': 8, 'seed': 3}, 'agent': {'batch_size': 10, 'memory_size': 5}},
            {'instance': {'majoranas': 8, 'seed': 3}, 'environment': {'weights': [0.0, 0.0]}},
        ):
            with self.assertRaises(serializers.ValidationError):
                resolve_run_config(TrainRunConfigSerializer, overrides=document)

    def test_yaml_document_and_overrides(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'run.yaml'
            path.write_text('instance:\n  majoranas: 8\n  seed: 3\nagent:\n  gamma: 0.1\n  batch_size: 8\n')
            config = resolve_run_config(TrainRunConfigSerializer, path, {'agent': {'gamma': 0.2}})
            self.assertEqual(config['agent']['gamma'], 0.2)
            self.assertEqual(config['agent']['batch_size'], 8)

            path.write_text('- just\n- a list\n')
            with self.assertRaises(InvalidArgumentError):
                read_config_document(path)
            path.write_text('key: [unclosed\n')
            with self.assertRaises(InvalidArgumentError):
                read_config_document(path)

    def test_deep_merge(self):
        merged = deep_merge({'a': {'b': 1, 'c': 2}, 'd': 3}, {'a': {'b': 5}, 'e': 6})
        self.assertEqual(merged, {'a': {'b': 5, 'c': 2}, 'd': 3, 'e': 6})


class RunDirectoryTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.path = Path(self.tmp.name) / 'run'

    def test_manifest(self):
        run = RunDirectory.create(self.path, 'train_agent', {'betas': [5.2]}, {'training': 7}, extra={'beta': 5.2})
        manifest = run.manifest
        self.assertEqual(manifest['command'], 'train_agent')
        self.assertEqual(manifest['seeds'], {'training': 7})
        self.assertEqual(run.config, {'betas': [5.2]})
        self.assertIn('numpy', manifest['versions'])
        run.update_manifest(summary={'episodes': 3})
        self.assertEqual(RunDirectory.open(self.path).manifest['summary'], {'episodes': 3})
        with self.assertRaises(InvalidArgumentError):
            RunDirectory.create(self.path, 'train_agent', {}, {})
        with self.assertRaises(InvalidArgumentError):
            RunDirectory.open(self.path.parent / 'missing')

    def test_truncate_after(self):
        run = RunDirectory.create(self.path, 'train_agent', {}, {})
        for episode in range(4):
            run.log_step({'episode': episode, 'step': 1})
            run.log_episode({'episode': episode})
            run.add_candidate({'episode': episode})
        run.truncate_after(1)
        self.assertEqual([r['episode'] for r in run.episodes()], [0, 1])
        self.assertEqual([r['episode'] for r in run.candidates()], [0, 1])
        self.assertEqual([r['episode'] for r in run.steps()], [0, 1])

    def test_checkpoint_swap(self):
        run = RunDirectory.create(self.path, 'train_agent', {}, {})
        self.assertFalse(run.has_checkpoint())
        for episode in (2, 4):
            staging = run.stage_checkpoint()
            (staging / 'state.json').write_text(f'{{"episode": {episode}}}')
            run.commit_checkpoint(staging)
        self.assertEqual(sorted(p.name for p in self.path.iterdir() if p.name.startswith('checkpoint')), ['checkpoint'])
        self.assertIn('"episode": 4', (run.checkpoint_dir / 'state.json').read_text())

        # a half-written staging directory never replaces the checkpoint
        staging = run.stage_checkpoint()
        (staging / 'online.params').write_bytes(b'partial')
        with self.assertRaises(InvalidArgumentError):
            run.commit_checkpoint(staging)
        self.assertIn('"episode": 4', (run.checkpoint_dir / 'state.json').read_text())

        # cut off between parking the old checkpoint and moving the new one in
        run.checkpoint_dir.rename(self.path / 'checkpoint.old')
        self.assertTrue(run.has_checkpoint())
        self.assertIn('"episode": 4', (run.checkpoint_dir / 'state.json').read_text())
        self.assertFalse((self.path / 'checkpoint.old').exists())


class SerializationTestCase(SimpleTestCase):
    def test_to_jsonable(self):
        value = to_jsonable({'a': np.arange(3), 'b': np.float64('nan'), 'c': (np.int64(2), np.bool_(True))})
        self.assertEqual(value, {'a': [0, 1, 2], 'b': None, 'c': [2, True]})
        self.assertEqual(float(format_real(0.1 + 0.2)), 0.1 + 0.2)


class RaisingCommand(ExperimentCommand):
    def __init__(self, error):
        super().__init__(stdout=StringIO(), stderr=StringIO())
        self.error = error

    def handle(self, *args, **options):
        raise self.error


class ExitCodeTestCase(SimpleTestCase):
    def returncode(self, error):
        with self.assertRaises(CommandError) as ctx:
            RaisingCommand(error).execute(force_color=False, no_color=True, skip_checks=True)
        return ctx.exception.returncode

    def test_mapping(self):
        self.assertEqual(self.returncode(InvalidArgumentError('bad')), EXIT_VALIDATION)
        self.assertEqual(self.returncode(FileNotFoundError('missing')), EXIT_VALIDATION)
        self.assertEqual(self.returncode(serializers.ValidationError({'agent': {'gamma': ['bad']}})), EXIT_VALIDATION)
        self.assertEqual(self.returncode(CapacityError('too big')), EXIT_CAPACITY)
        self.assertEqual(self.returncode(TrainingInterrupted('stop', '/tmp/ckpt')), EXIT_INTERRUPTED)

    def test_validation_message_names_the_path(self):
        with self.assertRaises(CommandError) as ctx:
            RaisingCommand(serializers.ValidationError({'agent': {'gamma': ['bad']}})).execute(
                force_color=False, no_color=True, skip_checks=True
            )
        self.assertIn('agent.gamma: bad', str(ctx.exception))
