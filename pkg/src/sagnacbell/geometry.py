"""Sagnac scale factor, phase and fiber-length inversion."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

SPEED_OF_LIGHT = 299_792_458.0  # m/s, exact SI value


@dataclass(frozen=True)
class SagnacGeometry:
    """Fiber coil interferometer.

    Only the fiber length and coil radius enter the phase; the shape of the
    enclosed area and the position of the rotation axis do not.
    """

    fiber_length: float  # m
    coil_radius: float  # m
    wavelength: float  # m

    def __post_init__(self):
        for name in ("fiber_length", "coil_radius", "wavelength"):
            value = getattr(self, name)
            if not value > 0.0:
                raise DomainError(f"{name} must be strictly positive, got {value}")

    @property
    def scale_factor(self):
        return scale_factor(self)


def scale_factor(geom):
    """S_T = 4 pi L r / (lambda c), in seconds (radians per rad/s)."""
    return 4.0 * math.pi * geom.fiber_length * geom.coil_radius / (geom.wavelength * SPEED_OF_LIGHT)


def sagnac_phase(scale, omega):
    return scale * omega


def fiber_length_from_scale(scale, sigma_scale, coil_radius, wavelength):
    """Invert the scale factor to a fiber length with first-order error.

    Only the scale-factor uncertainty is propagated; the coil radius and
    wavelength are treated as exact.
    """
    if not coil_radius > 0.0:
        raise DomainError(f"coil radius must be strictly positive, got {coil_radius}")
    if not wavelength > 0.0:
        raise DomainError(f"wavelength must be strictly positive, got {wavelength}")
    if not scale > 0.0:
        raise DomainError(f"scale factor must be strictly positive, got {scale}")
    if sigma_scale < 0.0:
        raise DomainError(f"scale-factor uncertainty must be non-negative, got {sigma_scale}")
    length = scale * wavelength * SPEED_OF_LIGHT / (4.0 * math.pi * coil_radius)
    return length, length * sigma_scale / scale


# parameters of the rotating-platform experiment
REFERENCE_GEOMETRY = SagnacGeometry(fiber_length=251.46, coil_radius=0.078, wavelength=810e-9)
