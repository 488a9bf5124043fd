"""
Directed CNOT connectivity graphs
"""
import json
from dataclasses import dataclass
from pathlib import Path
from typing import FrozenSet, List, Tuple, Union

from utils.exceptions import InvalidArgumentError

DATA_DIR = Path(__file__).resolve().parent / 'data'
ALL_TO_ALL = 'all_to_all'
BUNDLED_MAPS = {'eagle-r3-T4': DATA_DIR / 'eagle_r3_t4.json'}

Pair = Tuple[int, int]


@dataclass(frozen=True)
class CouplingMap:
    name: str
    qubit_count: int
    pairs: FrozenSet[Pair]

    def __post_init__(self):
        if self.qubit_count < 1:
            raise InvalidArgumentError(f'Coupling map needs at least one qubit, got {self.qubit_count}')
        pairs = frozenset((int(c), int(t)) for c, t in self.pairs)
        for control, target in pairs:
            if control == target or not (0 <= control < self.qubit_count and 0 <= target < self.qubit_count):
                raise InvalidArgumentError(f'Invalid coupling pair ({control}, {target}) on {self.qubit_count} qubits')
        object.__setattr__(self, 'pairs', pairs)

    @classmethod
    def all_to_all(cls, qubit_count: int) -> 'CouplingMap':
        pairs = {(c, t) for c in range(qubit_count) for t in range(qubit_count) if c != t}
        return cls(ALL_TO_ALL, qubit_count, frozenset(pairs))

    @classmethod
    def from_dict(cls, data: dict) -> 'CouplingMap':
        try:
            return cls(str(data['name']), int(data['n']), frozenset(tuple(pair) for pair in data['pairs']))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidArgumentError(f'Malformed coupling map document: {exc}') from exc

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'CouplingMap':
        return cls.from_dict(json.loads(Path(path).read_text()))

    @classmethod
    def resolve(cls, spec: str, qubit_count: int) -> 'CouplingMap':
        """``all_to_all``, a bundled map name, or a path to a JSON map"""
        if spec == ALL_TO_ALL:
            return cls.all_to_all(qubit_count)
        path = BUNDLED_MAPS.get(spec, Path(spec))
        if not Path(path).exists():
            raise InvalidArgumentError(f'Unknown coupling map {spec!r}')
        coupling = cls.load(path)
        if coupling.qubit_count != qubit_count:
            raise InvalidArgumentError(
                f'Coupling map {coupling.name} covers {coupling.qubit_count} qubits, circuit has {qubit_count}'
            )
        return coupling

    def allows(self, control: int, target: int) -> bool:
        return (control, target) in self.pairs

    def sorted_pairs(self) -> List[Pair]:
        return sorted(self.pairs)

    def to_dict(self) -> dict:
        return {'name': self.name, 'n': self.qubit_count, 'pairs': [list(pair) for pair in self.sorted_pairs()]}
