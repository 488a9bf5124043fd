"""
Seeded dense SYK instances (q = 4) and their Jordan-Wigner qubit Hamiltonians
"""
import json
import logging
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from utils.conf import domain_setting
from utils.exceptions import InvalidArgumentError
from utils.serialization import format_real

from .pauli import PauliString, PauliSum

logger = logging.getLogger(__name__)

Quadruple = Tuple[int, int, int, int]

INTERACTION_ORDER = 4
MIN_MAJORANAS = 4
SUPPORTED_MAJORANAS = range(8, 15, 2)
_UNIT_53 = 2.0 ** -53


def coupling_variance(majorana_count: int) -> float:
    """Variance 3!/N^3 of each coupling, with J = 1"""
    return math.factorial(INTERACTION_ORDER - 1) / majorana_count ** 3


def _validate_majorana_count(majorana_count: int) -> None:
    if not isinstance(majorana_count, (int, np.integer)) or isinstance(majorana_count, bool):
        raise InvalidArgumentError(f'Majorana count must be an integer, got {majorana_count!r}')
    if majorana_count < MIN_MAJORANAS or majorana_count % 2:
        raise InvalidArgumentError(
            f'Majorana count must be even and at least {MIN_MAJORANAS}, got {majorana_count}'
        )


def _validate_seed(seed: int) -> None:
    if not isinstance(seed, (int, np.integer)) or not 0 <= seed < 2 ** 64:
        raise InvalidArgumentError(f'Seed must be an unsigned 64-bit integer, got {seed!r}')


def standard_normals(seed: int, count: int) -> np.ndarray:
    """
    Portable Gaussian stream.

    Raw 64-bit words come from Philox-4x64-10 keyed directly with ``seed``
    (counter starting at 0). Each word w maps to the uniform ((w >> 11) + 1) * 2^-53
    in (0, 1]; consecutive uniforms (u1, u2) yield two normals through Box-Muller,
    sqrt(-2 ln u1) cos(2 pi u2) first and sqrt(-2 ln u1) sin(2 pi u2) second.
    """
    _validate_seed(seed)
    pairs = (count + 1) // 2
    bit_generator = np.random.Philox(key=int(seed))
    words = bit_generator.random_raw(2 * pairs).astype(np.uint64)
    uniforms = ((words >> np.uint64(11)).astype(np.float64) + 1.0) * _UNIT_53
    u1, u2 = uniforms[0::2], uniforms[1::2]
    radius = np.sqrt(-2.0 * np.log(u1))
    normals = np.empty(2 * pairs)
    normals[0::2] = radius * np.cos(2.0 * np.pi * u2)
    normals[1::2] = radius * np.sin(2.0 * np.pi * u2)
    return normals[:count]


def sample_couplings(majorana_count: int, seed: int) -> Dict[Quadruple, float]:
    """C(N,4) i.i.d. N(0, 3!/N^3) couplings keyed by 1-based i1<i2<i3<i4, drawn in lexicographic order"""
    _validate_majorana_count(majorana_count)
    quadruples = list(combinations(range(1, majorana_count + 1), INTERACTION_ORDER))
    scale = math.sqrt(coupling_variance(majorana_count))
    draws = standard_normals(seed, len(quadruples)) * scale
    return {quadruple: float(value) for quadruple, value in zip(quadruples, draws)}


def majorana_to_pauli(index: int, qubit_count: int) -> PauliString:
    """
    Jordan-Wigner Majorana, normalized so that {chi_i, chi_j} = delta_ij.

    chi_{2k-1} = Z...Z X_k / sqrt(2), chi_{2k} = Z...Z Y_k / sqrt(2) with 1-based k.
    """
    if qubit_count < 1 or not 1 <= index <= 2 * qubit_count:
        raise InvalidArgumentError(
            f'Majorana index {index} out of range 1..{2 * qubit_count}'
        )
    site = (index + 1) // 2
    letter = 'X' if index % 2 else 'Y'
    letters = 'Z' * (site - 1) + letter + 'I' * (qubit_count - site)
    return PauliString(1 / math.sqrt(2), letters)


@dataclass(frozen=True, eq=False)
class SykInstance:
    """One disorder realization of the dense q=4 SYK model"""

    majorana_count: int
    seed: int
    couplings: Dict[Quadruple, float]

    def __post_init__(self):
        _validate_majorana_count(self.majorana_count)
        expected = math.comb(self.majorana_count, INTERACTION_ORDER)
        if len(self.couplings) != expected:
            raise InvalidArgumentError(
                f'Expected {expected} couplings for N={self.majorana_count}, got {len(self.couplings)}'
            )

    @classmethod
    def generate(cls, majorana_count: int, seed: int) -> 'SykInstance':
        if majorana_count not in SUPPORTED_MAJORANAS:
            logger.warning(f'N={majorana_count} is outside the supported range 8..14')
        return cls(majorana_count, int(seed), sample_couplings(majorana_count, seed))

    @classmethod
    def from_section(cls, section: Dict[str, Any]) -> 'SykInstance':
        """From a run config ``instance`` section: a saved file when ``path`` is set, else a fresh draw"""
        if section.get('path'):
            return cls.load(section['path'])
        return cls.generate(section['majoranas'], section['seed'])

    @property
    def qubit_count(self) -> int:
        return self.majorana_count // 2

    def hamiltonian(self, prefactor: Optional[float] = None) -> PauliSum:
        return build_hamiltonian(self, prefactor)

    def to_json(self) -> str:
        """JSON text with couplings printed at 17 significant digits"""
        rows = ',\n    '.join(
            f'[{i1}, {i2}, {i3}, {i4}, {format_real(value)}]'
            for (i1, i2, i3, i4), value in sorted(self.couplings.items())
        )
        return (
            '{\n'
            f'  "N": {self.majorana_count},\n'
            f'  "seed": {self.seed},\n'
            f'  "couplings": [\n    {rows}\n  ]\n'
            '}\n'
        )

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json())
        return path

    @classmethod
    def from_json(cls, text: str) -> 'SykInstance':
        data = json.loads(text)
        try:
            couplings = {
                (int(i1), int(i2), int(i3), int(i4)): float(value)
                for i1, i2, i3, i4, value in data['couplings']
            }
            return cls(int(data['N']), int(data['seed']), couplings)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidArgumentError(f'Malformed SYK instance document: {exc}') from exc

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'SykInstance':
        return cls.from_json(Path(path).read_text())


def build_hamiltonian(instance: SykInstance, prefactor: Optional[float] = None) -> PauliSum:
    """
    H = prefactor * i^{q/2} * sum_{i1<i2<i3<i4} J chi chi chi chi with q = 4.

    The ordered sum carries no 1/q!; ``prefactor`` (settings HAMILTONIAN_PREFACTOR,
    default 1) rescales the whole operator.
    """
    if prefactor is None:
        prefactor = domain_setting('HAMILTONIAN_PREFACTOR', 1.0)
    n = instance.qubit_count
    majoranas = [majorana_to_pauli(i, n) for i in range(1, instance.majorana_count + 1)]
    phase = 1j ** (INTERACTION_ORDER // 2)
    terms = []
    for (i1, i2, i3, i4), value in instance.couplings.items():
        product = majoranas[i1 - 1] * majoranas[i2 - 1] * majoranas[i3 - 1] * majoranas[i4 - 1]
        terms.append(product.scaled(prefactor * phase * value))
    hamiltonian = PauliSum.from_terms(terms)
    logger.debug(f'Built SYK Hamiltonian N={instance.majorana_count} with {len(hamiltonian)} Pauli terms')
    return hamiltonian
