"""Water states on a canal cross-section and the homogeneous shallow-water algebra.

A state is stored in conservative variables ``(h, q)`` with ``q = h v`` the
discharge per unit width.  Everything here is a pure function of the state
and the gravitational acceleration.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

GRAVITY = 9.81
H_MIN = 1e-10
CRITICAL_TOL = 1e-9


class DryStateError(ValueError):
    """Raised when a depth at or below the dry threshold is used as a state."""

    def __init__(self, message: str, x: float | None = None):
        super().__init__(message)
        self.x = x


class Regime(enum.Enum):
    FLUVIAL = "fluvial"
    CRITICAL_PLUS = "critical+"
    CRITICAL_MINUS = "critical-"
    TORRENTIAL_PLUS = "torrential+"
    TORRENTIAL_MINUS = "torrential-"

    @property
    def is_torrential(self) -> bool:
        return self in (Regime.TORRENTIAL_PLUS, Regime.TORRENTIAL_MINUS)


@dataclass(frozen=True)
class State:
    """Depth ``h`` and discharge ``q`` of a wet cross-section."""

    h: float
    q: float

    def __post_init__(self):
        if not (self.h > H_MIN) or not math.isfinite(self.h):
            raise DryStateError(f"depth h={self.h!r} is not a wet state (h_min={H_MIN})")
        if not math.isfinite(self.q):
            raise ValueError(f"discharge q={self.q!r} is not finite")

    @classmethod
    def from_velocity(cls, h: float, v: float) -> "State":
        return cls(h, h * v)

    @property
    def v(self) -> float:
        return self.q / self.h

    def reflect(self) -> "State":
        """Mirror image under ``x -> -x`` (the discharge changes sign)."""
        return State(self.h, -self.q)

    def __iter__(self):
        yield self.h
        yield self.q


def flux(u: State, g: float = GRAVITY) -> tuple[float, float]:
    """Physical flux ``(q, q^2/h + g h^2/2)``."""
    return u.q, u.q * u.q / u.h + 0.5 * g * u.h * u.h


def momentum_flux(u: State, g: float = GRAVITY) -> float:
    return flux(u, g)[1]


def celerity(h: float, g: float = GRAVITY) -> float:
    """Speed ``sqrt(g h)`` of infinitesimal surface waves."""
    return math.sqrt(g * h)


def eigenvalues(u: State, g: float = GRAVITY) -> tuple[float, float]:
    c = celerity(u.h, g)
    v = u.v
    return v - c, v + c


def froude(u: State, g: float = GRAVITY) -> float:
    """Signed Froude number ``v / sqrt(g h)``."""
    return u.v / celerity(u.h, g)


def classify(u: State, tol: float = CRITICAL_TOL, g: float = GRAVITY) -> Regime:
    """Flow regime of ``u``; ``||F| - 1| <= tol`` counts as critical."""
    f = froude(u, g)
    if abs(abs(f) - 1.0) <= tol:
        return Regime.CRITICAL_PLUS if f > 0 else Regime.CRITICAL_MINUS
    if f > 1.0:
        return Regime.TORRENTIAL_PLUS
    if f < -1.0:
        return Regime.TORRENTIAL_MINUS
    return Regime.FLUVIAL


def specific_energy(u: State, g: float = GRAVITY) -> float:
    """Specific energy ``h + v^2 / (2 g)``."""
    v = u.v
    return u.h + v * v / (2.0 * g)


def critical_depth(q: float, g: float = GRAVITY) -> float:
    """Depth minimising the specific energy at fixed discharge, ``(q^2/g)^(1/3)``."""
    return (q * q / g) ** (1.0 / 3.0)
