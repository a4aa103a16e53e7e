"""Slithering-robot navigation stack.

Four control layers over a rigid-body ground-contact simulation: grid path
planning, learned local navigation, coupled-oscillator gait generation and
per-joint PID gait tracking.
"""

from .backend import HAS_NATIVE, backend_name

__version__ = "0.1.0"

__all__ = ["HAS_NATIVE", "backend_name", "__version__"]
