"""Latent-state representation learning for haptic feedback sequences.

A variational recurrent state-space model encodes 44-channel tactile
sequences into a Gaussian latent space; an offline Q-learning stage uses
the learned representation and transition model to decide when to
advance the phases of a nominal manipulation plan. A built-in
detent-knob simulator provides data generation and closed-loop
evaluation.
"""

from .dataset import HapticSequence, NormalizationProfile, load_dataset, \
    normalize, save_dataset
from .gaussian import GaussianDiag, kl_diag, log_likelihood
from .genmodel import GenerativeModel
from .recognition import RecognitionNetwork
from .qcontrol import QConfig, QNetwork, TransitionTuple

__version__ = "0.1.0"

__all__ = [
    "GaussianDiag", "GenerativeModel", "HapticSequence",
    "NormalizationProfile", "QConfig", "QNetwork", "RecognitionNetwork",
    "TransitionTuple", "kl_diag", "load_dataset", "log_likelihood",
    "normalize", "save_dataset",
]
