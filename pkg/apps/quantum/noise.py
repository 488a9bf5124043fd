"""
Gate-level noise model: bit flip after one-qubit gates, depolarizing after CNOTs
"""
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from utils.conf import domain_setting
from utils.exceptions import InvalidArgumentError

from .backend import apply_bitflip, apply_depolarizing2
from .gates import GateOp


@dataclass(frozen=True)
class NoiseModel:
    p_bitflip_1q: float = 0.0
    p_depol_2q: float = 0.0
    enabled: bool = False

    def __post_init__(self):
        for name in ('p_bitflip_1q', 'p_depol_2q'):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidArgumentError(f'{name} must lie in [0, 1], got {value}')

    @classmethod
    def noiseless(cls) -> 'NoiseModel':
        return cls()

    @classmethod
    def from_section(cls, noise: Dict[str, Any]) -> 'NoiseModel':
        """From the resolved ``noise`` section of a run config"""
        return cls(
            p_bitflip_1q=noise.get('bitflip_1q', 0.0),
            p_depol_2q=noise.get('depolarizing_2q', 0.0),
            enabled=noise.get('enabled', False),
        )

    @classmethod
    def hardware_default(cls) -> 'NoiseModel':
        """Median single-qubit bit-flip and CNOT depolarizing strengths from settings"""
        return cls(
            p_bitflip_1q=domain_setting('NOISE_BITFLIP_1Q', 2.342e-4),
            p_depol_2q=domain_setting('NOISE_DEPOLARIZING_2Q', 8.043e-3),
            enabled=True,
        )

    def apply_after(self, rho: np.ndarray, gate: GateOp) -> np.ndarray:
        if not self.enabled:
            return rho
        if gate.kind == 'CNOT':
            return apply_depolarizing2(rho, gate.qubits[0], gate.qubits[1], self.p_depol_2q)
        return apply_bitflip(rho, gate.qubits[0], self.p_bitflip_1q)

    def as_dict(self):
        return {'enabled': self.enabled, 'p_bitflip_1q': self.p_bitflip_1q, 'p_depol_2q': self.p_depol_2q}
