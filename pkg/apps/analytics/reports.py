"""
Tabular reports: candidate rankings, CNOT improvement tables and fit bands
"""
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd

from utils.exceptions import InvalidArgumentError

from .fitting import FitResult, ci_delta_method

logger = logging.getLogger(__name__)

FLOAT_FORMAT = '%.17g'
BAND_COLUMNS = ['x', 'y', 'fit', 'lower', 'upper']
IMPROVEMENT_COLUMNS = ['label', 'beta', 'trotter_cnots', 'rl_cnots', 'improvement']


def markdown_table(frame: pd.DataFrame, digits: int = 4) -> str:
    """Pipe table through tabulate; floats fixed to ``digits`` decimals, NaN left blank"""
    cells = frame.astype(object).where(frame.notna(), None)
    return cells.to_markdown(index=False, floatfmt=f'.{digits}f', missingval='') + '\n'


def improvement_table(rows: Iterable[Mapping[str, Any]]) -> pd.DataFrame:
    frame = pd.DataFrame(list(rows), columns=IMPROVEMENT_COLUMNS)
    if frame.empty:
        raise InvalidArgumentError('No circuits to compare against the Trotter baseline')
    return frame


def band_frame(fit: FitResult, xs: Optional[Sequence[float]] = None, alpha: float = 0.05) -> pd.DataFrame:
    """
    Fitted curve and delta-method band over ``xs`` (the data x values when
    omitted). ``y`` holds the observation at that x, NaN off the data.
    """
    xs = fit.x if xs is None else np.asarray(xs, dtype=float)
    band = ci_delta_method(fit, xs, alpha=alpha)
    observed = dict(zip(fit.x.tolist(), fit.y.tolist()))
    return pd.DataFrame({
        'x': band.x,
        'y': [observed.get(x, np.nan) for x in band.x.tolist()],
        'fit': band.fit,
        'lower': band.lower,
        'upper': band.upper,
    })


def write_band_csv(
    fit: FitResult, path: Union[str, Path], xs: Optional[Sequence[float]] = None, alpha: float = 0.05
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    band_frame(fit, xs, alpha).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.debug(f'Wrote {fit.model} fit band to {path}')
    return path


def write_table(frame: pd.DataFrame, path: Union[str, Path], digits: int = 4) -> List[Path]:
    """CSV at ``path`` plus a Markdown copy with the .md suffix"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    markdown = path.with_suffix('.md')
    markdown.write_text(markdown_table(frame, digits))
    return [path, markdown]


def architecture_table(results: Iterable[Mapping[str, Any]]) -> pd.DataFrame:
    """Best-candidate errors of each (architecture, beta, seed) run next to each other"""
    columns = [
        'architecture', 'beta', 'seed', 'episodes', 'successes',
        'delta_free_energy', 'delta_energy', 'delta_entropy', 'fidelity', 'cnot_count',
    ]
    frame = pd.DataFrame([{key: result.get(key) for key in columns} for result in results], columns=columns)
    return frame.sort_values(['beta', 'seed', 'architecture'], kind='mergesort').reset_index(drop=True)


def summarize_best(best: Dict[str, Any]) -> Dict[str, Any]:
    keys = ('episode', 'beta', 'seed', 'score', 'delta_free_energy', 'delta_energy', 'delta_entropy',
            'fidelity', 'cnot_count', 'gate_count')
    return {key: best[key] for key in keys if key in best}
