"""
Training orchestration: one run directory per (beta, seed, architecture),
fanned out over processes with joblib.
"""
import logging
from itertools import product
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import torch
from joblib import Parallel, delayed

from apps.analytics.filtering import filter_best, weights_from_config
from apps.analytics.reports import summarize_best
from apps.core.rundir import RunDirectory
from apps.environment.env import EnvConfig, ThermalStateEnv
from apps.syk.hamiltonian import SykInstance
from apps.syk.thermal import exact_thermal
from utils.exceptions import InvalidArgumentError
from utils.serialization import dump_json

from .trainer import AgentConfig, DoubleDQNTrainer

logger = logging.getLogger(__name__)


def build_environment(config: Dict[str, Any], beta: float, seed: int) -> Tuple[SykInstance, ThermalStateEnv]:
    instance = SykInstance.from_section(config['instance'])
    hamiltonian = instance.hamiltonian(prefactor=config['instance'].get('prefactor'))
    env_config = EnvConfig.from_sections(config['environment'], config['noise'], beta, instance.qubit_count)
    env = ThermalStateEnv(hamiltonian, env_config, seed=seed, reference=exact_thermal(hamiltonian, beta))
    return instance, env


# budgets and parallelism may change between an interrupted run and its resume
RESUMABLE_KEYS = ('jobs', 'wall_clock_hours', 'output_dir')


def _comparable(config: Dict[str, Any]) -> Dict[str, Any]:
    kept = {key: value for key, value in config.items() if key not in RESUMABLE_KEYS}
    kept['agent'] = {key: value for key, value in kept.get('agent', {}).items() if key != 'max_episodes'}
    return kept


def run_name(beta: float, seed: int, architecture: Optional[str] = None) -> str:
    name = f'beta{beta:g}_seed{seed}'
    return f'{name}_{architecture}' if architecture else name


def experiment_root(config: Dict[str, Any]) -> Path:
    name = config.get('name')
    if not name:
        section = config['instance']
        name = Path(section['path']).stem if section.get('path') else f"syk_N{section['majoranas']}_s{section['seed']}"
    return Path(config['output_dir']) / name


def train_single(
    root: Path,
    config: Dict[str, Any],
    beta: float,
    seed: int,
    resume: bool = False,
    architecture: Optional[str] = None,
    command: str = 'train_agent',
) -> Dict[str, Any]:
    """Train one agent into ``root/<run name>`` and return its summary with the best candidate"""
    # one BLAS/torch thread per run keeps a run bit-reproducible
    torch.set_num_threads(1)
    network = dict(config['network'])
    if architecture:
        network['architecture'] = architecture
    instance, env = build_environment(config, beta, seed)
    path = Path(root) / run_name(beta, seed, architecture)

    if resume and (path / RunDirectory.MANIFEST).exists():
        run = RunDirectory.open(path)
        if _comparable(run.config) != _comparable(config):
            raise InvalidArgumentError(f'{path} was created with a different configuration; refusing to resume')
        run.update_manifest(config=config)
    else:
        run = RunDirectory.create(
            path,
            command,
            config,
            seeds={'training': seed, 'instance': instance.seed},
            extra={
                'beta': beta,
                'majoranas': instance.majorana_count,
                'architecture': network['architecture'],
                'reward_mode': config['environment']['reward_mode'],
            },
        )

    trainer = DoubleDQNTrainer(env, AgentConfig.from_dict(config['agent']), network, seed=seed, run=run)
    if run.has_checkpoint():
        trainer.restore()
    summary = trainer.train(wall_clock_hours=config.get('wall_clock_hours'))

    candidates = run.candidates()
    if candidates:
        best = filter_best(candidates, weights_from_config(config, instance.majorana_count))
        summary.update(summarize_best(best))
    summary['run_dir'] = str(run.path)
    run.update_manifest(summary=summary)
    logger.info(f"Run {run.path.name} finished: {summary['episodes']} episodes, {summary['successes']} successes")
    return summary


def train_runs(
    config: Dict[str, Any],
    resume: bool = False,
    architectures: Optional[Sequence[str]] = None,
    command: str = 'train_agent',
) -> List[Dict[str, Any]]:
    """Every (beta, seed[, architecture]) combination; ``config['jobs']`` worker processes"""
    root = experiment_root(config)
    root.mkdir(parents=True, exist_ok=True)
    dump_json(config, root / 'config.json')
    tasks = list(product(config['betas'], config['seeds'], architectures or [None]))
    jobs = min(config.get('jobs', 1), len(tasks))
    logger.info(f'Training {len(tasks)} run(s) under {root} with {jobs} worker(s)')
    return Parallel(n_jobs=jobs)(
        delayed(train_single)(root, config, beta, seed, resume, architecture, command)
        for beta, seed, architecture in tasks
    )
