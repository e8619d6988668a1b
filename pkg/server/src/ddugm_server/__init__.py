"""Score-model training and serving for the dual-domain reconstruction engine.

Implements denoising score matching over the variance-exploding perturbation
in either the image or the frequency-weighted k-space domain at toy scale,
and serves trained (or analytic) scores over a length-prefixed socket
protocol the engine's remote provider speaks.
"""

from .dsm import dsm_loss, sample_sigmas
from .model import ScoreNet
from .server import AnalyticBackend, CheckpointBackend, ScoreServer, serve_forever
from .train import TrainConfig, load_model, train

__all__ = [
    "AnalyticBackend",
    "CheckpointBackend",
    "ScoreNet",
    "ScoreServer",
    "TrainConfig",
    "dsm_loss",
    "load_model",
    "sample_sigmas",
    "serve_forever",
    "train",
]

__version__ = "0.1.0"
