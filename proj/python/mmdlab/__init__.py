"""Metric mean dimension estimates for interval maps and transition sets."""

from ._core import Error, box_dimension, config_hash, covering_number, ladder, run, sandwich, spectral_radius

__all__ = [
    "Error",
    "box_dimension",
    "config_hash",
    "covering_number",
    "ladder",
    "run",
    "sandwich",
    "spectral_radius",
]
