"""
Pauli strings and weighted sums of them
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, Iterator, Tuple

import numpy as np

from utils.exceptions import InvalidArgumentError

PAULI_LETTERS = 'IXYZ'

# (left, right) -> (phase, product)
_LETTER_PRODUCT = {
    ('I', 'I'): (1, 'I'), ('I', 'X'): (1, 'X'), ('I', 'Y'): (1, 'Y'), ('I', 'Z'): (1, 'Z'),
    ('X', 'I'): (1, 'X'), ('X', 'X'): (1, 'I'), ('X', 'Y'): (1j, 'Z'), ('X', 'Z'): (-1j, 'Y'),
    ('Y', 'I'): (1, 'Y'), ('Y', 'X'): (-1j, 'Z'), ('Y', 'Y'): (1, 'I'), ('Y', 'Z'): (1j, 'X'),
    ('Z', 'I'): (1, 'Z'), ('Z', 'X'): (1j, 'Y'), ('Z', 'Y'): (-1j, 'X'), ('Z', 'Z'): (1, 'I'),
}

COEFFICIENT_TOLERANCE = 1e-14


@dataclass(frozen=True)
class PauliString:
    """coefficient * P_0 ⊗ P_1 ⊗ ... with letters[q] acting on qubit q"""

    coefficient: complex
    letters: str

    def __post_init__(self):
        if not self.letters or any(letter not in PAULI_LETTERS for letter in self.letters):
            raise InvalidArgumentError(f'Invalid Pauli letters: {self.letters!r}')

    @property
    def qubit_count(self) -> int:
        return len(self.letters)

    @property
    def weight(self) -> int:
        return sum(letter != 'I' for letter in self.letters)

    @property
    def is_identity(self) -> bool:
        return self.weight == 0

    def scaled(self, factor: complex) -> 'PauliString':
        return PauliString(self.coefficient * factor, self.letters)

    def __mul__(self, other: 'PauliString') -> 'PauliString':
        if not isinstance(other, PauliString):
            return NotImplemented
        if other.qubit_count != self.qubit_count:
            raise InvalidArgumentError('Pauli strings act on different qubit counts')
        phase = 1
        letters = []
        for left, right in zip(self.letters, other.letters):
            step_phase, letter = _LETTER_PRODUCT[(left, right)]
            phase *= step_phase
            letters.append(letter)
        return PauliString(self.coefficient * other.coefficient * phase, ''.join(letters))

    def masks(self) -> Tuple[int, int, int]:
        """(x_mask, z_mask, y_count); qubit 0 is the most significant bit"""
        n = self.qubit_count
        x_mask = z_mask = 0
        y_count = 0
        for q, letter in enumerate(self.letters):
            bit = 1 << (n - 1 - q)
            if letter in 'XY':
                x_mask |= bit
            if letter in 'ZY':
                z_mask |= bit
            if letter == 'Y':
                y_count += 1
        return x_mask, z_mask, y_count

    def to_matrix(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix built column by column as a signed permutation"""
        n = self.qubit_count
        dim = 1 << n
        x_mask, z_mask, y_count = self.masks()
        basis = np.arange(dim)
        parity = np.array([bin(b & z_mask).count('1') & 1 for b in range(dim)])
        values = self.coefficient * (1j ** y_count) * np.where(parity, -1.0, 1.0)
        matrix = np.zeros((dim, dim), dtype=complex)
        matrix[basis ^ x_mask, basis] = values
        return matrix


@dataclass(frozen=True, eq=False)
class PauliSum:
    """Canonical sum of Pauli strings: merged duplicates, sorted letters, no zero terms"""

    terms: Tuple[PauliString, ...] = field(default_factory=tuple)

    @classmethod
    def from_terms(cls, terms: Iterable[PauliString], tolerance: float = COEFFICIENT_TOLERANCE) -> 'PauliSum':
        merged: Dict[str, complex] = {}
        width = None
        for term in terms:
            if width is None:
                width = term.qubit_count
            elif term.qubit_count != width:
                raise InvalidArgumentError('All terms of a PauliSum must act on the same qubits')
            merged[term.letters] = merged.get(term.letters, 0) + term.coefficient
        canonical = []
        for letters in sorted(merged):
            coefficient = complex(merged[letters])
            if abs(coefficient) <= tolerance:
                continue
            if abs(coefficient.imag) <= tolerance:
                coefficient = complex(coefficient.real, 0.0)
            canonical.append(PauliString(coefficient, letters))
        return cls(tuple(canonical))

    def __iter__(self) -> Iterator[PauliString]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: 'PauliSum') -> 'PauliSum':
        return PauliSum.from_terms(self.terms + other.terms)

    def scaled(self, factor: complex) -> 'PauliSum':
        return PauliSum.from_terms(term.scaled(factor) for term in self.terms)

    @property
    def qubit_count(self) -> int:
        if not self.terms:
            raise InvalidArgumentError('Empty PauliSum has no qubit count')
        return self.terms[0].qubit_count

    @property
    def is_hermitian(self) -> bool:
        return all(abs(term.coefficient.imag) <= COEFFICIENT_TOLERANCE for term in self.terms)

    def trace(self) -> float:
        identity = sum(term.coefficient for term in self.terms if term.is_identity)
        return complex(identity * (1 << self.qubit_count)).real

    @cached_property
    def matrix(self) -> np.ndarray:
        n = self.qubit_count
        dense = np.zeros((1 << n, 1 << n), dtype=complex)
        for term in self.terms:
            dense += term.to_matrix()
        return dense

    def to_matrix(self) -> np.ndarray:
        return self.matrix.copy()

    @classmethod
    def single(cls, letters: str, coefficient: complex = 1.0) -> 'PauliSum':
        return cls.from_terms([PauliString(coefficient, letters)])
