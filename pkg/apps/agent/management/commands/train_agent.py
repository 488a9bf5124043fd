import logging
from typing import Any, Dict

import pandas as pd

from apps.agent.runs import experiment_root, train_runs
from apps.core.commands import ExperimentCommand
from apps.core.serializers import ARCHITECTURES, REWARD_MODES, TrainRunConfigSerializer, resolve_run_config

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = [
    'beta', 'seed', 'architecture', 'episodes', 'successes', 'stopped', 'score',
    'delta_free_energy', 'delta_energy', 'delta_entropy', 'fidelity', 'cnot_count', 'run_dir',
]


def add_run_arguments(parser) -> None:
    parser.add_argument('--config', help='YAML run config; command-line options override it')
    parser.add_argument('--name', help='Experiment directory name under the output directory')
    parser.add_argument('--instance', dest='instance_path', help='SYK instance JSON')
    parser.add_argument('--majoranas', type=int, help='Generate an instance with this many Majoranas')
    parser.add_argument('--instance-seed', type=int, help='Seed of the generated instance')
    parser.add_argument('--betas', type=float, nargs='+')
    parser.add_argument('--seeds', type=int, nargs='+', help='Training seeds')
    parser.add_argument('--episodes', type=int, help='Episode cap per run')
    parser.add_argument('--reward-mode', choices=REWARD_MODES)
    parser.add_argument('--noise', action='store_true', default=None, help='Enable the hardware noise model')
    parser.add_argument('--output-dir')
    parser.add_argument('--wall-clock-hours', type=float)
    parser.add_argument('--jobs', type=int, help='Parallel worker processes')


def run_overrides(options: Dict[str, Any]) -> Dict[str, Any]:
    """Nested config overrides from the options that were given"""
    overrides: Dict[str, Any] = {}

    def put(section, key, value):
        if value is not None:
            target = overrides.setdefault(section, {}) if section else overrides
            target[key] = value

    put(None, 'name', options.get('name'))
    put('instance', 'path', options.get('instance_path'))
    put('instance', 'majoranas', options.get('majoranas'))
    put('instance', 'seed', options.get('instance_seed'))
    put(None, 'betas', options.get('betas'))
    put(None, 'seeds', options.get('seeds'))
    put('agent', 'max_episodes', options.get('episodes'))
    put('environment', 'reward_mode', options.get('reward_mode'))
    put('noise', 'enabled', options.get('noise'))
    put(None, 'output_dir', options.get('output_dir'))
    put(None, 'wall_clock_hours', options.get('wall_clock_hours'))
    put(None, 'jobs', options.get('jobs'))
    put('network', 'architecture', options.get('architecture'))
    return overrides


def summary_frame(summaries) -> pd.DataFrame:
    return pd.DataFrame([{key: summary.get(key) for key in SUMMARY_COLUMNS} for summary in summaries], columns=SUMMARY_COLUMNS)


class Command(ExperimentCommand):
    help = 'Train Double-DQN circuit-building agents for every configured (beta, seed)'

    def add_arguments(self, parser):
        add_run_arguments(parser)
        parser.add_argument('--architecture', choices=ARCHITECTURES)
        parser.add_argument('--resume', action='store_true', help='Continue runs from their last checkpoint')

    def handle(self, *args, **options):
        config = resolve_run_config(TrainRunConfigSerializer, options.get('config'), run_overrides(options))
        summaries = train_runs(config, resume=options['resume'])

        root = experiment_root(config)
        frame = summary_frame(summaries)
        frame.to_csv(root / 'summary.csv', index=False, float_format='%.17g')
        self.stdout.write(frame.drop(columns=['run_dir']).to_string(index=False))
        successes = sum(summary['successes'] for summary in summaries)
        self.success(f'Trained {len(summaries)} run(s), {successes} successful episode(s) -> {root}')
