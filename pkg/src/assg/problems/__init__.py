from .leb import LebSpec, UnknownLeb, leb_catalog
from .libsvm import load_libsvm, write_libsvm
from .losses import Loss, Regularizer, loss_subgrad, loss_value
from .objective import (
    RNG_ALGORITHM,
    Dataset,
    Objective,
    Sample,
    StreamingGaussian,
    full_objective,
    full_subgrad,
    make_rng,
    stochastic_subgrad,
)
from .synthetic import generate_synthetic

__all__ = [
    "Dataset", "LebSpec", "Loss", "Objective", "RNG_ALGORITHM", "Regularizer",
    "Sample", "StreamingGaussian", "UnknownLeb", "full_objective", "full_subgrad",
    "generate_synthetic", "leb_catalog", "load_libsvm", "loss_subgrad", "loss_value",
    "make_rng", "stochastic_subgrad", "write_libsvm",
]
