"""
Run directories: manifest, JSONL metrics, candidate store and checkpoints
"""
import logging
import os
import platform
import shutil
import sys
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Union

from utils.exceptions import InvalidArgumentError
from utils.serialization import append_jsonl, dump_json, load_json, read_jsonl, write_jsonl

logger = logging.getLogger(__name__)

TRACKED_PACKAGES = ('numpy', 'scipy', 'torch', 'pandas', 'Django', 'djangorestframework')


def package_versions() -> Dict[str, Optional[str]]:
    versions = {'python': sys.version.split()[0], 'platform': platform.platform()}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = None
    return versions


class RunDirectory:
    """One training run on disk"""

    MANIFEST = 'manifest.json'
    STEPS = 'steps.jsonl'
    EPISODES = 'episodes.jsonl'
    CANDIDATES = 'candidates.jsonl'
    CHECKPOINT = 'checkpoint'
    CHECKPOINT_STATE = 'state.json'
    REPORTS = 'reports'

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)

    @classmethod
    def create(
        cls,
        path: Union[str, Path],
        command: str,
        config: Dict[str, Any],
        seeds: Dict[str, Any],
        extra: Optional[Dict[str, Any]] = None,
    ) -> 'RunDirectory':
        run = cls(path)
        if (run.path / cls.MANIFEST).exists():
            raise InvalidArgumentError(f'Run directory {run.path} already exists; resume it or choose another name')
        run.path.mkdir(parents=True, exist_ok=True)
        manifest = {
            'command': command,
            'created': datetime.now(timezone.utc).isoformat(),
            'config': config,
            'seeds': seeds,
            'versions': package_versions(),
        }
        if extra:
            manifest.update(extra)
        dump_json(manifest, run.path / cls.MANIFEST)
        logger.info(f'Created run directory {run.path}')
        return run

    @classmethod
    def open(cls, path: Union[str, Path]) -> 'RunDirectory':
        run = cls(path)
        if not (run.path / cls.MANIFEST).exists():
            raise InvalidArgumentError(f'{run.path} is not a run directory (no {cls.MANIFEST})')
        return run

    @property
    def manifest(self) -> Dict[str, Any]:
        return load_json(self.path / self.MANIFEST)

    @property
    def config(self) -> Dict[str, Any]:
        return self.manifest['config']

    def update_manifest(self, **fields) -> None:
        manifest = self.manifest
        manifest.update(fields)
        dump_json(manifest, self.path / self.MANIFEST)

    @property
    def checkpoint_dir(self) -> Path:
        return self.path / self.CHECKPOINT

    @property
    def reports_dir(self) -> Path:
        return self.path / self.REPORTS

    def has_checkpoint(self) -> bool:
        self.recover_checkpoint()
        return (self.checkpoint_dir / self.CHECKPOINT_STATE).exists()

    def _sibling(self, suffix: str) -> Path:
        return self.path / f'{self.CHECKPOINT}.{suffix}'

    def stage_checkpoint(self) -> Path:
        """Empty directory the next checkpoint is written into before ``commit_checkpoint``"""
        staging = self._sibling('new')
        if staging.exists():
            shutil.rmtree(staging)
        staging.mkdir(parents=True)
        return staging

    def commit_checkpoint(self, staging: Path) -> Path:
        """
        Swap a fully written staging directory in for the current checkpoint.
        The previous checkpoint is parked as ``checkpoint.old`` until the new
        one is in place, so an interruption at any point leaves one complete
        checkpoint that ``recover_checkpoint`` can find.
        """
        if not (staging / self.CHECKPOINT_STATE).exists():
            raise InvalidArgumentError(f'{staging} holds no {self.CHECKPOINT_STATE}; refusing to commit it')
        previous = self._sibling('old')
        if previous.exists():
            shutil.rmtree(previous)
        if self.checkpoint_dir.exists():
            os.replace(self.checkpoint_dir, previous)
        os.replace(staging, self.checkpoint_dir)
        if previous.exists():
            shutil.rmtree(previous)
        return self.checkpoint_dir

    def recover_checkpoint(self) -> None:
        """Put a parked checkpoint back when a swap was cut off between its two renames"""
        previous = self._sibling('old')
        if not self.checkpoint_dir.exists() and (previous / self.CHECKPOINT_STATE).exists():
            os.replace(previous, self.checkpoint_dir)
            logger.warning(f'Recovered checkpoint of {self.path} from an interrupted swap')

    def log_step(self, record: Dict[str, Any]) -> None:
        append_jsonl(record, self.path / self.STEPS)

    def log_episode(self, record: Dict[str, Any]) -> None:
        append_jsonl(record, self.path / self.EPISODES)

    def add_candidate(self, record: Dict[str, Any]) -> None:
        append_jsonl(record, self.path / self.CANDIDATES)

    def steps(self) -> Iterator[Dict[str, Any]]:
        return read_jsonl(self.path / self.STEPS)

    def episodes(self) -> List[Dict[str, Any]]:
        return list(read_jsonl(self.path / self.EPISODES))

    def candidates(self) -> List[Dict[str, Any]]:
        return list(read_jsonl(self.path / self.CANDIDATES))

    def truncate_after(self, episode: int) -> None:
        """Drop records of episodes later than ``episode`` (used when resuming from a checkpoint)"""
        for name in (self.STEPS, self.EPISODES, self.CANDIDATES):
            path = self.path / name
            if path.exists():
                kept = [record for record in read_jsonl(path) if record.get('episode', -1) <= episode]
                write_jsonl(kept, path)
