"""
Shape-preserving 3-D convolution and stride-2 subsampling used by the circuit CNN
"""
import math
from typing import Sequence, Tuple

import torch
import torch.nn.functional as F

from utils.exceptions import InvalidArgumentError

KERNEL = 3
PADDING = 1
POOL_STRIDE = 2


def conv3d_forward(x: torch.Tensor, weight: torch.Tensor, bias: torch.Tensor) -> torch.Tensor:
    """
    Cross-correlation with a 3x3x3 kernel, stride 1 and zero padding 1.

    ``x`` is [C_in, D, H, W] or batched [B, C_in, D, H, W]; ``weight`` is
    [C_out, C_in, 3, 3, 3]. The spatial shape is preserved.
    """
    if x.dim() not in (4, 5):
        raise InvalidArgumentError(f'conv3d expects a 4-D or 5-D input, got shape {tuple(x.shape)}')
    if weight.dim() != 5 or tuple(weight.shape[2:]) != (KERNEL,) * 3:
        raise InvalidArgumentError(f'conv3d kernel must be [C_out, C_in, 3, 3, 3], got {tuple(weight.shape)}')
    channels = x.shape[-4]
    if weight.shape[1] != channels:
        raise InvalidArgumentError(f'Kernel expects {weight.shape[1]} input channels, input has {channels}')
    if bias.shape != (weight.shape[0],):
        raise InvalidArgumentError(f'Bias shape {tuple(bias.shape)} does not match {weight.shape[0]} output channels')
    return F.conv3d(x, weight, bias, stride=1, padding=PADDING)


def maxpool3d(x: torch.Tensor) -> torch.Tensor:
    """Kernel 1, stride 2: keeps every other index per spatial axis, ceil(d / 2) outputs"""
    return F.max_pool3d(x, kernel_size=1, stride=POOL_STRIDE, ceil_mode=True)


def pooled_dim(size: int) -> int:
    return max(1, math.ceil(size / POOL_STRIDE))


def pooled_shape(spatial: Sequence[int], layers: int) -> Tuple[int, ...]:
    shape = tuple(int(s) for s in spatial)
    for _ in range(layers):
        shape = tuple(pooled_dim(s) for s in shape)
    return shape
