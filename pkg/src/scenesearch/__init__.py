"""Active-vision search benchmark with an expected-free-energy agent.

Subpackages follow the pipeline: camera geometry, the benchmark scene
environment, a synthetic perception channel, particle-filter position
beliefs, expected-free-energy planning, and the benchmark harness.
"""

from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"
__all__ = ["KERNEL_BACKEND", "__version__"]
