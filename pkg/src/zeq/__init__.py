"""Zero-error superactivation toolkit: channels, bipartite subspaces,
unextendible product bases and the constrained subspace sampler."""

from .numerics import AmbientDimensionError

__version__ = "0.1.0"

__all__ = ["AmbientDimensionError", "__version__"]
