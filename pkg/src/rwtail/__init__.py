"""Tail asymptotics of randomly weighted sums of regularly varying variables.

Submodules: :mod:`rv_core` (laws), :mod:`weights` (weight sequences and
condition reports), :mod:`measures` (product convolution), :mod:`montecarlo`
(simulation and estimators) and :mod:`harness` (configs and the CLI).
"""

from importlib import metadata as _metadata

try:
    __version__ = _metadata.version("artifact")
except _metadata.PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0+local"

from .errors import RWTailError  # noqa: E402

__all__ = ["RWTailError", "__version__"]
