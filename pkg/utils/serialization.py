"""
Round-trip exact number formatting and JSON/JSONL helpers
"""
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, Union

import numpy as np

PathLike = Union[str, Path]


def format_real(value: float) -> str:
    """17 significant digits, enough for an exact float64 round trip"""
    return f'{float(value):.17g}'


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays and tuples into plain JSON types"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isnan(value) or math.isinf(value):
            return None
        return value
    if isinstance(value, Path):
        return str(value)
    return value


def dump_json(data: Any, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # repr-based float output is already shortest-round-trip
    path.write_text(json.dumps(to_jsonable(data), indent=2, sort_keys=True) + '\n')
    return path


def load_json(path: PathLike) -> Any:
    return json.loads(Path(path).read_text())


def append_jsonl(record: Dict[str, Any], path: PathLike) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('a') as handle:
        handle.write(json.dumps(to_jsonable(record), sort_keys=True) + '\n')


def read_jsonl(path: PathLike) -> Iterator[Dict[str, Any]]:
    path = Path(path)
    if not path.exists():
        return
    with path.open() as handle:
        for line in handle:
            line = line.strip()
            if line:
                yield json.loads(line)


def write_jsonl(records: Iterable[Dict[str, Any]], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w') as handle:
        for record in records:
            handle.write(json.dumps(to_jsonable(record), sort_keys=True) + '\n')
    return path
