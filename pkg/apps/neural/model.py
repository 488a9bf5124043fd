"""
Trainable Q-model: a network, its Adam optimizer and the Huber TD loss
"""
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import joblib
import numpy as np
import torch
from torch import nn

from utils.exceptions import InvalidArgumentError, StateError, ThermalQASError
from utils.serialization import dump_json, load_json

from .networks import NetworkSpec, build_network

logger = logging.getLogger(__name__)

ADAM_BETAS = (0.9, 0.999)
ADAM_EPS = 1e-8
HUBER_DELTA = 1.0
PARAMETER_DTYPE = '<f8'


class QModel:
    def __init__(self, spec: NetworkSpec, seed: int = 0, learning_rate: float = 1e-3):
        if learning_rate < 0:
            raise InvalidArgumentError(f'Learning rate must be non-negative, got {learning_rate}')
        self.spec = spec
        self.seed = seed
        self.learning_rate = learning_rate
        self.network = build_network(spec, seed)
        self.optimizer = torch.optim.Adam(
            self.network.parameters(), lr=learning_rate, betas=ADAM_BETAS, eps=ADAM_EPS
        )
        self.loss_fn = nn.HuberLoss(delta=HUBER_DELTA)
        self.updates = 0
        self._output: Optional[torch.Tensor] = None

    def as_batch(self, states) -> torch.Tensor:
        batch = torch.as_tensor(np.asarray(states), dtype=self.spec.torch_dtype)
        if batch.dim() == 4:
            batch = batch.unsqueeze(0)
        if tuple(batch.shape[1:]) != self.spec.input_shape:
            raise InvalidArgumentError(
                f'State shape {tuple(batch.shape[1:])} does not match network input {self.spec.input_shape}'
            )
        return batch

    def forward(self, states) -> torch.Tensor:
        """Q-values [B, |A|] with gradient tracking; the next backward() consumes them"""
        self.network.train()
        output = self.network(self.as_batch(states))
        if not torch.isfinite(output).all():
            raise ThermalQASError('Network produced non-finite Q-values')
        self._output = output
        return output

    @torch.no_grad()
    def q_values(self, states) -> np.ndarray:
        self.network.eval()
        output = self.network(self.as_batch(states))
        return output.double().numpy()

    def loss(self, predicted: torch.Tensor, targets) -> torch.Tensor:
        targets = torch.as_tensor(np.asarray(targets), dtype=predicted.dtype)
        return self.loss_fn(predicted, targets)

    def backward(self, loss: torch.Tensor) -> None:
        if self._output is None:
            raise StateError('backward() called before forward()')
        self.optimizer.zero_grad()
        loss.backward()
        self._output = None

    def adam_step(self) -> None:
        self.optimizer.step()
        self.updates += 1

    def copy_from(self, other: 'QModel') -> None:
        """Hard copy of the other model's weights"""
        self.network.load_state_dict(other.network.state_dict())

    def parameter_vector(self) -> np.ndarray:
        """All parameters in declaration order, as float64"""
        with torch.no_grad():
            return np.concatenate([p.detach().double().reshape(-1).numpy() for p in self.network.parameters()])

    def load_parameter_vector(self, vector: np.ndarray) -> None:
        vector = np.asarray(vector, dtype=np.float64)
        expected = sum(p.numel() for p in self.network.parameters())
        if vector.shape != (expected,):
            raise InvalidArgumentError(f'Expected {expected} parameters, got {vector.shape}')
        offset = 0
        with torch.no_grad():
            for parameter in self.network.parameters():
                size = parameter.numel()
                chunk = torch.from_numpy(vector[offset:offset + size].copy()).reshape(parameter.shape)
                parameter.copy_(chunk.to(parameter.dtype))
                offset += size

    def save(self, directory: Union[str, Path], name: str) -> Dict[str, Any]:
        """
        ``<name>.json`` manifest, ``<name>.params`` raw little-endian float64
        parameters in declaration order, ``<name>.optimizer.joblib`` Adam state.
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        vector = self.parameter_vector()
        (directory / f'{name}.params').write_bytes(vector.astype(PARAMETER_DTYPE).tobytes())
        joblib.dump(self.optimizer.state_dict(), directory / f'{name}.optimizer.joblib')
        manifest = {
            'spec': self.spec.as_dict(),
            'seed': self.seed,
            'learning_rate': self.learning_rate,
            'updates': self.updates,
            'parameter_count': int(vector.size),
            'parameter_dtype': PARAMETER_DTYPE,
            'shapes': [list(p.shape) for p in self.network.parameters()],
        }
        dump_json(manifest, directory / f'{name}.json')
        return manifest

    @classmethod
    def load(cls, directory: Union[str, Path], name: str) -> 'QModel':
        directory = Path(directory)
        manifest = load_json(directory / f'{name}.json')
        spec_fields = dict(manifest['spec'])
        spec = NetworkSpec(**spec_fields)
        model = cls(spec, seed=manifest['seed'], learning_rate=manifest['learning_rate'])
        data = (directory / f'{name}.params').read_bytes()
        model.load_parameter_vector(np.frombuffer(data, dtype=PARAMETER_DTYPE))
        model.optimizer.load_state_dict(joblib.load(directory / f'{name}.optimizer.joblib'))
        model.updates = manifest['updates']
        logger.debug(f"Loaded {name} ({manifest['parameter_count']} parameters, {model.updates} updates)")
        return model
