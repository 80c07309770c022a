"""Convex geometry of quantum state space: nets, polytopes, witnesses."""

__version__ = "0.1.0"

from . import approx, bodies, dims, hermitian, nets, rng, witness  # noqa: F401
