"""
Q-networks over the encoded circuit: the 3-D CNN and the fully connected baseline
"""
import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import torch
from torch import nn

from utils.exceptions import InvalidArgumentError

from .layers import KERNEL, PADDING, conv3d_forward, maxpool3d, pooled_shape

logger = logging.getLogger(__name__)

ARCHITECTURES = ('cnn', 'fnn')
DTYPES = {'float32': torch.float32, 'float64': torch.float64}


@dataclass(frozen=True)
class NetworkSpec:
    architecture: str
    input_shape: Tuple[int, int, int, int]
    action_count: int
    channels: Tuple[int, ...] = (32, 64, 128, 256)
    neurons: Tuple[int, ...] = (1000, 1000, 1000, 1000)
    leaky_slope: float = 0.01
    dropout: float = 0.0
    hidden_head: Optional[int] = None
    dtype: str = 'float32'

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise InvalidArgumentError(f'Unknown architecture {self.architecture!r}')
        object.__setattr__(self, 'input_shape', tuple(int(s) for s in self.input_shape))
        object.__setattr__(self, 'channels', tuple(int(c) for c in self.channels))
        object.__setattr__(self, 'neurons', tuple(int(c) for c in self.neurons))
        if len(self.input_shape) != 4 or min(self.input_shape) < 1:
            raise InvalidArgumentError(f'Input shape must be [C, D, H, W], got {self.input_shape}')
        if self.action_count < 1:
            raise InvalidArgumentError('The network needs at least one output')
        if self.dtype not in DTYPES:
            raise InvalidArgumentError(f'Unknown dtype {self.dtype!r}')
        if not 0.0 <= self.dropout < 1.0:
            raise InvalidArgumentError(f'Dropout must lie in [0, 1), got {self.dropout}')

    @classmethod
    def from_config(
        cls, network: Dict[str, Any], input_shape, action_count: int, dropout: float = 0.0
    ) -> 'NetworkSpec':
        """From the resolved ``network`` section of a run config"""
        return cls(
            architecture=network['architecture'],
            input_shape=tuple(input_shape),
            action_count=action_count,
            channels=tuple(network['channels']),
            neurons=tuple(network['neurons']),
            leaky_slope=network['leaky_slope'],
            dropout=dropout,
            hidden_head=network.get('hidden_head'),
            dtype=network['dtype'],
        )

    @property
    def torch_dtype(self) -> torch.dtype:
        return DTYPES[self.dtype]

    @property
    def flatten_width(self) -> int:
        if self.architecture == 'fnn':
            return int(np.prod(self.input_shape))
        return self.channels[-1] * int(np.prod(pooled_shape(self.input_shape[1:], len(self.channels))))

    def as_dict(self) -> Dict[str, Any]:
        return asdict(self)


class CircuitConv3d(nn.Conv3d):
    """3x3x3, stride 1, padding 1; parameters live in ``nn.Conv3d``, the math in ``conv3d_forward``"""

    def __init__(self, in_channels: int, out_channels: int):
        super().__init__(in_channels, out_channels, kernel_size=KERNEL, stride=1, padding=PADDING)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return conv3d_forward(x, self.weight, self.bias)


class Subsample3d(nn.Module):
    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return maxpool3d(x)


def _head(spec: NetworkSpec, width: int) -> List[nn.Module]:
    layers: List[nn.Module] = []
    if spec.hidden_head:
        layers += [nn.Linear(width, spec.hidden_head), nn.LeakyReLU(spec.leaky_slope)]
        width = spec.hidden_head
    if spec.dropout:
        layers.append(nn.Dropout(spec.dropout))
    layers.append(nn.Linear(width, spec.action_count))
    return layers


class CircuitCNN(nn.Module):
    """Conv3d -> LeakyReLU -> stride-2 subsampling per channel entry, then a linear head"""

    def __init__(self, spec: NetworkSpec):
        super().__init__()
        blocks: List[nn.Module] = []
        in_channels = spec.input_shape[0]
        for out_channels in spec.channels:
            blocks += [
                CircuitConv3d(in_channels, out_channels),
                nn.LeakyReLU(spec.leaky_slope),
                Subsample3d(),
            ]
            in_channels = out_channels
        self.features = nn.Sequential(*blocks)
        self.head = nn.Sequential(nn.Flatten(), *_head(spec, spec.flatten_width))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.head(self.features(x))


class CircuitFNN(nn.Module):
    """Flattened tensor through Linear -> LeakyReLU (-> Dropout) layers"""

    def __init__(self, spec: NetworkSpec):
        super().__init__()
        layers: List[nn.Module] = [nn.Flatten()]
        width = spec.flatten_width
        for neurons in spec.neurons:
            layers += [nn.Linear(width, neurons), nn.LeakyReLU(spec.leaky_slope)]
            if spec.dropout:
                layers.append(nn.Dropout(spec.dropout))
            width = neurons
        layers.append(nn.Linear(width, spec.action_count))
        self.body = nn.Sequential(*layers)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.body(x)


def _initialize(module: nn.Module, slope: float) -> None:
    for layer in module.modules():
        if isinstance(layer, (nn.Conv3d, nn.Linear)):
            nn.init.kaiming_uniform_(layer.weight, a=slope, nonlinearity='leaky_relu')
            nn.init.zeros_(layer.bias)


def build_network(spec: NetworkSpec, seed: int = 0) -> nn.Module:
    """He-uniform weights from a private generator state, zero biases"""
    network_class = CircuitCNN if spec.architecture == 'cnn' else CircuitFNN
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        network = network_class(spec).to(spec.torch_dtype)
        _initialize(network, spec.leaky_slope)
    parameters = sum(p.numel() for p in network.parameters())
    logger.debug(f'Built {spec.architecture} with {parameters} parameters, flatten width {spec.flatten_width}')
    return network
