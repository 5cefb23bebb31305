"""Dumbbell geometry: material parameters, channel profiles and the
monotone-profile check near the channel ends.

The dumbbell is ``(-l, 0) x (-1, 1)`` on the left, ``(1, 1 + r) x (-1, 1)``
on the right, and the channel ``{0 < x < 1, 0 < y < eps * g(x)}`` between
them.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
from numpy.polynomial import Polynomial

from .errors import InvalidEpsilon, InvalidParameters, NonPositiveProfile, OutOfDomain

PROFILE_KINDS = ("constant", "polynomial", "cosine_bump")

# dense sample used for positivity and max/min of g
_N_SAMPLE = 4001
# monotonicity samples per end window
_N_WINDOW = 2001


@dataclass(frozen=True)
class MaterialParams:
    """Poisson-type coefficient ``sigma`` and lateral tension ``tau``."""

    sigma: float = 0.0
    tau: float = 0.0

    def __post_init__(self):
        if not (-1.0 < self.sigma < 1.0):
            raise InvalidParameters(f"sigma must lie in (-1, 1), got {self.sigma}")
        if not self.tau >= 0.0:
            raise InvalidParameters(f"tau must be >= 0, got {self.tau}")


@dataclass(frozen=True)
class ProfileSpec:
    """Channel profile ``g`` on [0, 1] with closed-form derivatives.

    ``params`` holds ``(c,)`` for ``constant``, the ascending monomial
    coefficients for ``polynomial`` and ``(a, b)`` for ``cosine_bump``,
    where ``g(x) = a + b * (1 - cos(2 pi x))``.
    """

    kind: str
    params: Tuple[float, ...]
    delta: float = 0.25

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise InvalidParameters(f"unknown profile kind {self.kind!r}")
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if self.kind == "constant" and len(self.params) != 1:
            raise InvalidParameters("constant profile takes exactly one value")
        if self.kind == "cosine_bump" and len(self.params) != 2:
            raise InvalidParameters("cosine_bump profile takes (a, b)")
        if self.kind == "polynomial" and len(self.params) == 0:
            raise InvalidParameters("polynomial profile needs coefficients")
        if not (0.0 < self.delta < 0.5):
            raise InvalidParameters(f"delta must lie in (0, 1/2), got {self.delta}")
        gmin = float(np.min(self.value(_sample_points())))
        if not gmin > 0.0:
            raise NonPositiveProfile(f"profile {self.kind}{self.params} has min g = {gmin:g} <= 0")

    @classmethod
    def constant(cls, c: float = 1.0, delta: float = 0.25) -> "ProfileSpec":
        return cls("constant", (c,), delta)

    @classmethod
    def polynomial(cls, coeffs, delta: float = 0.25) -> "ProfileSpec":
        return cls("polynomial", tuple(coeffs), delta)

    @classmethod
    def cosine_bump(cls, a: float, b: float, delta: float = 0.25) -> "ProfileSpec":
        return cls("cosine_bump", (a, b), delta)

    @property
    def is_constant(self) -> bool:
        if self.kind == "constant":
            return True
        if self.kind == "polynomial":
            return all(c == 0.0 for c in self.params[1:])
        return self.params[1] == 0.0

    def derivatives(self, x):
        """Return ``(g, g', g'')`` evaluated at ``x`` (array-like)."""
        x = np.asarray(x, dtype=float)
        if self.kind == "constant":
            c = self.params[0]
            return np.full_like(x, c), np.zeros_like(x), np.zeros_like(x)
        if self.kind == "polynomial":
            p = Polynomial(self.params)
            return p(x), p.deriv(1)(x), p.deriv(2)(x)
        a, b = self.params
        w = 2.0 * np.pi
        return (a + b * (1.0 - np.cos(w * x)),
                b * w * np.sin(w * x),
                b * w * w * np.cos(w * x))

    def value(self, x):
        return self.derivatives(x)[0]

    __call__ = value

    def max_value(self) -> float:
        return float(np.max(self.value(_sample_points())))

    def min_value(self) -> float:
        return float(np.min(self.value(_sample_points())))

    def integral(self) -> float:
        """Exact integral of g over [0, 1]."""
        if self.kind == "constant":
            return self.params[0]
        if self.kind == "polynomial":
            P = Polynomial(self.params).integ()
            return float(P(1.0) - P(0.0))
        a, b = self.params
        return a + b

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": list(self.params), "delta": self.delta}


def _sample_points() -> np.ndarray:
    return np.linspace(0.0, 1.0, _N_SAMPLE)


@dataclass(frozen=True)
class DumbbellSpec:
    """Two rectangles joined by the channel of height ``epsilon * g``."""

    left_length: float = 1.0
    right_length: float = 1.0
    profile: ProfileSpec = field(default_factory=ProfileSpec.constant)
    epsilon: float = 0.1

    def __post_init__(self):
        if not (self.left_length > 0 and self.right_length > 0):
            raise InvalidParameters("box lengths must be positive")
        if not self.epsilon > 0:
            raise InvalidEpsilon(f"epsilon must be positive, got {self.epsilon}")
        gmax = self.profile.max_value()
        if not self.epsilon * gmax < 1.0:
            raise InvalidEpsilon(
                f"epsilon * max g = {self.epsilon * gmax:g} must be < 1 "
                "so the channel stays inside the attachment segments")

    def channel_area(self) -> float:
        return self.epsilon * self.profile.integral()

    def omega_area(self) -> float:
        return 2.0 * (self.left_length + self.right_length)

    def area(self) -> float:
        return self.omega_area() + self.channel_area()

    def with_epsilon(self, epsilon: float) -> "DumbbellSpec":
        return DumbbellSpec(self.left_length, self.right_length, self.profile, epsilon)


@dataclass(frozen=True)
class MPReport:
    holds: bool
    delta_used: float
    violations: Tuple[Tuple[float, float], ...] = ()


def validate_profile(profile: ProfileSpec, n_samples: int = _N_WINDOW) -> MPReport:
    """Check that g is non-increasing on [0, delta] and non-decreasing on
    [1 - delta, 1] by sampling the sign of g'.

    Raises
    ------
    NonPositiveProfile
        If g is not strictly positive on the dense sample of [0, 1].
    """
    if profile.min_value() <= 0.0:
        raise NonPositiveProfile("profile must be strictly positive on [0, 1]")
    d = profile.delta
    left = np.linspace(0.0, d, n_samples)
    right = np.linspace(1.0 - d, 1.0, n_samples)
    _, dl, _ = profile.derivatives(left)
    _, dr, _ = profile.derivatives(right)
    bad = [(float(x), float(s)) for x, s in zip(left, dl) if s > 0.0]
    bad += [(float(x), float(s)) for x, s in zip(right, dr) if s < 0.0]
    return MPReport(holds=not bad, delta_used=d, violations=tuple(bad))


def channel_height(profile: ProfileSpec, epsilon: float, x: float) -> float:
    """Height ``epsilon * g(x)`` of the channel above ``x``."""
    if not epsilon > 0:
        raise InvalidEpsilon(f"epsilon must be positive, got {epsilon}")
    if not (0.0 <= x <= 1.0):
        raise OutOfDomain(f"x = {x} lies outside [0, 1]")
    return float(epsilon * profile.value(x))
