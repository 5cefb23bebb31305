"""Bilinear forms that can be assembled."""
from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import InvalidEpsilon
from ..geometry import MaterialParams, ProfileSpec


@dataclass(frozen=True)
class PlateForm:
    """(1 - s) D2u:D2v + s Lap u Lap v + t grad u . grad v + u v."""
    params: MaterialParams = field(default_factory=MaterialParams)


@dataclass(frozen=True)
class ChannelEpsForm:
    """Plate form of the channel ``R_eps`` pulled back to the unit square.

    The unit square maps to ``R_1`` by ``(x, y) -> (x, g(x) y)``; y-derivatives
    in ``R_1`` then carry the weights ``1/eps``. The form equals ``1/eps`` times
    the plate form on ``R_eps``, and pairs with ``WeightedMass(profile)``.
    """
    params: MaterialParams
    epsilon: float
    profile: ProfileSpec

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidEpsilon(f"epsilon must be positive, got {self.epsilon}")


@dataclass(frozen=True)
class Mass:
    pass


@dataclass(frozen=True)
class WeightedMass:
    """L2 product weighted by g: on the mapped unit square this is the
    mass of ``R_1``; on [0, 1] it is the inner product of ``L2_g``."""
    profile: ProfileSpec


@dataclass(frozen=True)
class Limit1DForm:
    """(1 - s^2) int h'' p'' g + t int h' p' g + int h p g."""
    params: MaterialParams
    profile: ProfileSpec


def bending_density(sigma, uxx, uxy, uyy):
    """Pointwise bending integrand (1 - s)|D2u|^2 + s (Lap u)^2 of PlateForm."""
    return (1.0 - sigma) * (uxx * uxx + 2.0 * uxy * uxy + uyy * uyy) + sigma * (uxx + uyy) ** 2
