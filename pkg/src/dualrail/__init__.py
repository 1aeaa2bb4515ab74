"""Simulation, decoding and tomography tools for a dual-rail cavity erasure qubit."""

from .params import DEVICE, SystemParams

__all__ = ["SystemParams", "DEVICE"]
__version__ = "0.1.0"
