"""Deep sparse subspace clustering toolkit.

Joint learning of a small fully connected feature network and a sparse
self-expressive coefficient matrix, plus the shallow SSC baseline,
spectral clustering, and the four standard clustering metrics.
"""

from deepssc._kernels import BACKEND

__all__ = ["BACKEND"]
__version__ = "0.1.0"
