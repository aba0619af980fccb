"""Script-style identification from scanned handwriting via clouds of
contour line-segment distributions and a Gaussian-kernel SVM."""

from .config import PipelineConfig
from .errors import (
    ColdScriptError,
    ConfigError,
    DegenerateDataError,
    InvalidInputError,
    ModelFormatError,
)

__version__ = "0.1.0"

__all__ = [
    "PipelineConfig",
    "ColdScriptError",
    "ConfigError",
    "DegenerateDataError",
    "InvalidInputError",
    "ModelFormatError",
    "__version__",
]
