from .base import Surrogate, Normalizer, encode_inputs, load_model, FAMILIES, make_surrogate
from .gbt import GBTSurrogate, GBTConfig
from .mlp import MLPSurrogate, MLPConfig
from .gp import GPSurrogate, GPConfig
from .active_learning import ALConfig, kriging_active_learning

__all__ = [
    "Surrogate",
    "Normalizer",
    "encode_inputs",
    "load_model",
    "make_surrogate",
    "FAMILIES",
    "GBTSurrogate",
    "GBTConfig",
    "MLPSurrogate",
    "MLPConfig",
    "GPSurrogate",
    "GPConfig",
    "ALConfig",
    "kriging_active_learning",
]
