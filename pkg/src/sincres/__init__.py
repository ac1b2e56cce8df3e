"""Raw-waveform music genre classifier.

A learnable multi-scale sinc band-pass filter bank turns 3-second audio
clips into 2D time-frequency representations; a residual 2D CNN with
spatial pyramid pooling classifies them; track labels come from voting
over clip predictions. Training runs on a self-contained reverse-mode
autodiff engine whose hot convolutions live in an optional compiled core.
"""

from .backend import backend_name, has_compiled, set_threads

__version__ = "0.1.0"

__all__ = ["backend_name", "has_compiled", "set_threads", "__version__"]
