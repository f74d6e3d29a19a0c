"""Convolutional sentence model with parallel kernel branches and max pooling."""

from .config import CnnConfig
from .model import (
    CnnWeights,
    cnn_forward,
    cnn_train,
    grad_check,
    init_weights,
    load_weights,
    save_weights,
)
from . import kernels

__all__ = [
    "CnnConfig", "CnnWeights", "cnn_forward", "cnn_train", "grad_check",
    "init_weights", "kernels", "load_weights", "save_weights",
]
