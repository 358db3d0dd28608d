"""Statevector simulation of quantum algorithms for advection-diffusion transport."""

from .record import VERSION as __version__

__all__ = ["__version__"]
