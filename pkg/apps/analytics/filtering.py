"""
Best-circuit selection over the candidate store
"""
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Mapping, Optional

import pandas as pd

from utils.conf import domain_setting
from utils.exceptions import InvalidArgumentError

ERROR_COLUMNS = ('delta_free_energy', 'delta_energy', 'delta_entropy')


@dataclass(frozen=True)
class FilterWeights:
    w_a: float = 0.0
    w_b: float = 0.0

    def __post_init__(self):
        if self.w_a < 0 or self.w_b < 0:
            raise InvalidArgumentError(f'Filter weights must be non-negative, got ({self.w_a}, {self.w_b})')


def default_weights(reward_mode: str, majorana_count: int) -> FilterWeights:
    """
    Table lookup by reward mode and N; an N missing from the table uses the
    closest smaller entry (or the smallest entry when N is below the table).
    """
    table = domain_setting('FILTER_WEIGHTS', {}).get(reward_mode)
    if not table:
        return FilterWeights()
    sizes = sorted(int(n) for n in table)
    smaller = [n for n in sizes if n <= majorana_count]
    chosen = smaller[-1] if smaller else sizes[0]
    w_a, w_b = {int(k): v for k, v in table.items()}[chosen]
    return FilterWeights(float(w_a), float(w_b))


def filter_score(candidate: Mapping[str, Any], weights: FilterWeights) -> float:
    """dF + w_a * d<H> + w_b * dS"""
    return (
        candidate['delta_free_energy']
        + weights.w_a * candidate['delta_energy']
        + weights.w_b * candidate['delta_entropy']
    )


def _sort_key(candidate: Mapping[str, Any], weights: FilterWeights):
    return (
        filter_score(candidate, weights),
        candidate.get('cnot_count', 0),
        candidate.get('gate_count', 0),
        candidate.get('episode', 0),
    )


def filter_best(candidates: Iterable[Mapping[str, Any]], weights: Optional[FilterWeights] = None) -> Dict[str, Any]:
    """Lowest score; ties go to fewer CNOTs, then fewer gates, then the earliest episode"""
    weights = weights or FilterWeights()
    pool = list(candidates)
    if not pool:
        raise InvalidArgumentError('No candidates to filter')
    for candidate in pool:
        missing = [column for column in ERROR_COLUMNS if column not in candidate]
        if missing:
            raise InvalidArgumentError(f"Candidate is missing {', '.join(missing)}")
    best = min(pool, key=lambda candidate: _sort_key(candidate, weights))
    return {**best, 'score': filter_score(best, weights)}


def rank_candidates(candidates: Iterable[Mapping[str, Any]], weights: Optional[FilterWeights] = None) -> pd.DataFrame:
    weights = weights or FilterWeights()
    rows: List[Dict[str, Any]] = [
        {key: value for key, value in candidate.items() if not isinstance(value, (list, dict))}
        for candidate in candidates
    ]
    if not rows:
        raise InvalidArgumentError('No candidates to rank')
    frame = pd.DataFrame(rows)
    frame['score'] = frame.apply(lambda row: filter_score(row, weights), axis=1)
    sort_columns = [c for c in ('score', 'cnot_count', 'gate_count', 'episode') if c in frame.columns]
    return frame.sort_values(sort_columns, kind='mergesort').reset_index(drop=True)


def weights_from_config(
    config: Mapping[str, Any], majorana_count: int, w_a: Optional[float] = None, w_b: Optional[float] = None
) -> FilterWeights:
    """Explicit value, else the config's filter section, else the default table for its reward mode and N"""
    stored = config.get('filter') or {}
    reward_mode = (config.get('environment') or {}).get('reward_mode', 'free_energy_fidelity')
    fallback = default_weights(reward_mode, majorana_count)
    w_a = w_a if w_a is not None else stored.get('w_a')
    w_b = w_b if w_b is not None else stored.get('w_b')
    return FilterWeights(
        fallback.w_a if w_a is None else float(w_a),
        fallback.w_b if w_b is None else float(w_b),
    )
