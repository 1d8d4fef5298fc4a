"""Modal discontinuous Galerkin discretisation of a single canal.

The solution on cell ``C_m`` is ``u(x) = sum_l c_{m,l} P_l(xi)`` with ``P_l``
the Legendre polynomials and ``xi in [-1, 1]`` the reference coordinate, so
``c_{m,0}`` is the cell average.  Coefficients are stored as an array of
shape ``(M, 2, k + 1)``: cell, component ``(h, q)``, mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import legendre

from .state import GRAVITY, H_MIN, DryStateError, State


# ---------------------------------------------------------------------------
# Flux models


class ShallowWater:
    """Homogeneous shallow-water system in conservative variables."""

    def __init__(self, g: float = GRAVITY):
        self.g = g

    def flux(self, U: np.ndarray) -> np.ndarray:
        h, q = U[..., 0], U[..., 1]
        return np.stack([q, q * q / h + 0.5 * self.g * h * h], axis=-1)

    def max_speed(self, U: np.ndarray) -> np.ndarray:
        h, q = U[..., 0], U[..., 1]
        return np.abs(q / h) + np.sqrt(self.g * h)

    def check(self, U: np.ndarray, x: np.ndarray) -> None:
        bad = ~(U[..., 0] > H_MIN)
        if np.any(bad):
            where = float(np.asarray(x)[bad].flat[0])
            raise DryStateError(f"dry state at x={where!r}", where)

    def eigenvectors(self, ubar: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Right eigenvectors of the flux Jacobian (columns) and their inverse, per state."""
        h, q = ubar[..., 0], ubar[..., 1]
        v, c = q / h, np.sqrt(self.g * h)
        one = np.ones_like(h)
        R = np.stack([np.stack([one, one], -1), np.stack([v - c, v + c], -1)], -2)
        L = np.stack([np.stack([v + c, -one], -1), np.stack([c - v, one], -1)], -2) / (2.0 * c)[..., None, None]
        return R, L


class LinearAdvection:
    """Both components advected at speed ``a``; a sanity seam for the DG machinery."""

    def __init__(self, a: float = 1.0):
        self.a = a

    def flux(self, U: np.ndarray) -> np.ndarray:
        return self.a * U

    def max_speed(self, U: np.ndarray) -> np.ndarray:
        return np.full(U.shape[:-1], abs(self.a))

    def check(self, U: np.ndarray, x: np.ndarray) -> None:
        return None

    def eigenvectors(self, ubar: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        eye = np.broadcast_to(np.eye(2), ubar.shape[:-1] + (2, 2))
        return eye, eye


# ---------------------------------------------------------------------------
# Grid and field


@dataclass(frozen=True)
class CanalGrid:
    """Uniform partition of ``[x_left, x_left + length]`` into ``cells`` cells."""

    length: float
    cells: int
    degree: int = 2
    x_left: float = 0.0

    def __post_init__(self):
        if not self.length > 0.0:
            raise ValueError(f"length must be positive, got {self.length!r}")
        if self.cells < 4:
            raise ValueError(f"need at least 4 cells, got {self.cells!r}")
        if self.degree not in (0, 1, 2):
            raise ValueError(f"degree must be 0, 1 or 2, got {self.degree!r}")

    @property
    def dx(self) -> float:
        return self.length / self.cells

    @property
    def x_right(self) -> float:
        return self.x_left + self.length

    @property
    def edges(self) -> np.ndarray:
        return self.x_left + self.dx * np.arange(self.cells + 1)

    @property
    def centers(self) -> np.ndarray:
        return self.x_left + self.dx * (np.arange(self.cells) + 0.5)


class _Basis:
    """Legendre values and derivatives at the Gauss points of ``[-1, 1]``."""

    _cache: dict[int, "_Basis"] = {}

    def __init__(self, k: int):
        self.k = k
        self.nodes, self.weights = legendre.leggauss(k + 2)
        eye = np.eye(k + 1)
        self.phi = np.array([legendre.legval(self.nodes, eye[l]) for l in range(k + 1)])
        self.dphi = np.array([legendre.legval(self.nodes, legendre.legder(eye[l])) for l in range(k + 1)])
        self.right = np.ones(k + 1)
        self.left = (-1.0) ** np.arange(k + 1)
        self.scale = 2.0 * np.arange(k + 1) + 1.0  # inverse of the Legendre mass, times 2

    @classmethod
    def get(cls, k: int) -> "_Basis":
        if k not in cls._cache:
            cls._cache[k] = cls(k)
        return cls._cache[k]


class DGField:
    """Modal coefficients of ``(h, q)`` on a :class:`CanalGrid`."""

    def __init__(self, grid: CanalGrid, coeffs: np.ndarray):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (grid.cells, 2, grid.degree + 1):
            raise ValueError(f"coefficient shape {coeffs.shape} does not fit the grid")
        self.grid = grid
        self.coeffs = coeffs

    def copy(self) -> "DGField":
        return DGField(self.grid, self.coeffs.copy())

    @property
    def basis(self) -> _Basis:
        return _Basis.get(self.grid.degree)

    def averages(self) -> np.ndarray:
        return self.coeffs[:, :, 0].copy()

    def right_traces(self) -> np.ndarray:
        return self.coeffs @ self.basis.right

    def left_traces(self) -> np.ndarray:
        return self.coeffs @ self.basis.left

    def at_nodes(self) -> np.ndarray:
        """Values at the Gauss points, shape ``(M, n_q, 2)``."""
        return np.einsum("mcl,lq->mqc", self.coeffs, self.basis.phi)

    def node_positions(self) -> np.ndarray:
        g = self.grid
        return g.centers[:, None] + 0.5 * g.dx * self.basis.nodes[None, :]

    def volume(self) -> float:
        """Total water volume ``sum_m dx * h_avg``."""
        return float(self.grid.dx * np.sum(self.coeffs[:, 0, 0]))


def project_initial(profile: Callable[[np.ndarray], tuple], grid: CanalGrid, wet: bool = True) -> DGField:
    """L2 projection of ``profile(x) -> (h, q)`` by Gauss quadrature.

    ``profile`` must accept an array of positions.  Constants and polynomials
    of degree ``<= k + 1`` are projected exactly; cells where the data is
    constant get that constant bit-for-bit.  ``wet=False`` skips the
    positivity check on the first component (for non-shallow-water tests).
    """
    basis = _Basis.get(grid.degree)
    x = grid.centers[:, None] + 0.5 * grid.dx * basis.nodes[None, :]
    h, q = profile(x)
    h = np.broadcast_to(np.asarray(h, dtype=float), x.shape)
    q = np.broadcast_to(np.asarray(q, dtype=float), x.shape)
    if wet and not np.all(h > H_MIN):
        bad = float(x[~(h > H_MIN)].flat[0])
        raise DryStateError(f"initial profile is dry at x={bad!r}", bad)
    vals = np.stack([h, q], axis=1)  # (M, 2, n_q)
    coeffs = 0.5 * basis.scale * np.einsum("mcq,q,lq->mcl", vals, basis.weights, basis.phi)
    # quadrature rounding would otherwise perturb constant cells
    flat = np.all(vals == vals[:, :, :1], axis=2)
    coeffs[:, :, 0] = np.where(flat, vals[:, :, 0], coeffs[:, :, 0])
    coeffs[:, :, 1:] = np.where(flat[:, :, None], 0.0, coeffs[:, :, 1:])
    return DGField(grid, coeffs)


def constant_field(grid: CanalGrid, u: State) -> DGField:
    coeffs = np.zeros((grid.cells, 2, grid.degree + 1))
    coeffs[:, 0, 0] = u.h
    coeffs[:, 1, 0] = u.q
    return DGField(grid, coeffs)


def evaluate(field: DGField, x: float) -> State:
    """Point value of the modal expansion; at a cell edge the right cell is used."""
    g = field.grid
    if not g.x_left <= x <= g.x_right:
        raise ValueError(f"x={x!r} outside [{g.x_left}, {g.x_right}]")
    m = min(int((x - g.x_left) / g.dx), g.cells - 1)
    xi = 2.0 * (x - g.centers[m]) / g.dx
    h, q = legendre.legval(xi, field.coeffs[m].T)
    return State(float(h), float(q))


def cell_averages(field: DGField) -> list[State]:
    return [State(float(h), float(q)) for h, q in field.coeffs[:, :, 0]]


# ---------------------------------------------------------------------------
# Fluxes and residual


def lax_friedrichs_flux(uL: State, uR: State, alpha: float, g: float = GRAVITY) -> tuple[float, float]:
    """``(f(uL) + f(uR)) / 2 - alpha (uR - uL) / 2``."""
    phys = ShallowWater(g)
    f = phys.flux(np.array([[uL.h, uL.q], [uR.h, uR.q]]))
    return (
        float(0.5 * (f[0, 0] + f[1, 0]) - 0.5 * alpha * (uR.h - uL.h)),
        float(0.5 * (f[0, 1] + f[1, 1]) - 0.5 * alpha * (uR.q - uL.q)),
    )


def local_lf(physics, UL: np.ndarray, UR: np.ndarray) -> np.ndarray:
    """Vectorised local Lax-Friedrichs flux, ``alpha`` from both traces."""
    alpha = np.maximum(physics.max_speed(UL), physics.max_speed(UR))[..., None]
    return 0.5 * (physics.flux(UL) + physics.flux(UR)) - 0.5 * alpha * (UR - UL)


def interface_fluxes(field: DGField, physics, flux_left, flux_right) -> np.ndarray:
    """Numerical fluxes at all ``M + 1`` cell edges, outer two supplied."""
    R = field.right_traces()
    L = field.left_traces()
    F = np.empty((field.grid.cells + 1, 2))
    F[0] = flux_left
    F[-1] = flux_right
    F[1:-1] = local_lf(physics, R[:-1], L[1:])
    return F


def check_wet(field: DGField, physics) -> None:
    physics.check(field.at_nodes(), field.node_positions())
    physics.check(field.left_traces(), field.grid.edges[:-1])
    physics.check(field.right_traces(), field.grid.edges[1:])


def spatial_residual(field: DGField, flux_left, flux_right, physics=None) -> np.ndarray:
    """Time derivative of the modal coefficients.

    ``dc_l/dt = (2l+1)/dx [ int f(u) P_l' dxi - (F_R - (-1)^l F_L) ]``
    """
    physics = ShallowWater() if physics is None else physics
    check_wet(field, physics)
    b = field.basis
    F = interface_fluxes(field, physics, flux_left, flux_right)
    fq = physics.flux(field.at_nodes())  # (M, n_q, 2)
    vol = np.einsum("mqc,q,lq->mcl", fq, b.weights, b.dphi)
    surf = F[1:, :, None] * b.right[None, None, :] - F[:-1, :, None] * b.left[None, None, :]
    return (b.scale / field.grid.dx) * (vol - surf)


# ---------------------------------------------------------------------------
# Limiter


def _minmod(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    s = np.sign(a)
    same = (s == np.sign(b)) & (s == np.sign(c))
    return np.where(same, s * np.minimum(np.abs(a), np.minimum(np.abs(b), np.abs(c))), 0.0)


def tvb_limit(field: DGField, left_avg, right_avg, physics=None, m_tvb: float = 0.0) -> DGField:
    """TVB minmod limiter applied to characteristic variables.

    ``left_avg`` / ``right_avg`` are the neighbour averages beyond the first
    and last cells.  Cells whose edge deviations are left untouched keep all
    their modes; flagged cells are reduced to a limited linear polynomial.
    """
    physics = ShallowWater() if physics is None else physics
    k = field.grid.degree
    if k == 0:
        return field.copy()
    c = field.coeffs
    avg = c[:, :, 0]
    physics.check(avg, field.grid.centers)
    ext = np.vstack([np.asarray(left_avg, float)[None], avg, np.asarray(right_avg, float)[None]])
    d_plus = ext[2:] - avg
    d_minus = avg - ext[:-2]
    dev_r = field.right_traces() - avg
    dev_l = avg - field.left_traces()
    thresh = m_tvb * field.grid.dx ** 2
    R, L = physics.eigenvectors(avg)

    def char(a):
        return np.einsum("mij,mj->mi", L, a)

    wr, wl, wp, wm = char(dev_r), char(dev_l), char(d_plus), char(d_minus)
    lr = np.where(np.abs(wr) <= thresh, wr, _minmod(wr, wp, wm))
    ll = np.where(np.abs(wl) <= thresh, wl, _minmod(wl, wp, wm))
    flagged = np.any(lr != wr, axis=1) | np.any(ll != wl, axis=1)
    out = c.copy()
    if np.any(flagged):
        slope = np.einsum("mij,mj->mi", R, _minmod(char(c[:, :, 1]), wp, wm))
        out[flagged, :, 1] = slope[flagged]
        out[flagged, :, 2:] = 0.0
    return DGField(field.grid, out)


def stable_dt(fields, physics, cfl: float) -> float:
    """Largest step with ``dt * max|lambda| <= cfl * dx`` on every field."""
    dt = np.inf
    for f in fields:
        check_wet(f, physics)
        s = max(
            float(np.max(physics.max_speed(f.at_nodes()))),
            float(np.max(physics.max_speed(f.left_traces()))),
            float(np.max(physics.max_speed(f.right_traces()))),
        )
        if s > 0.0:
            dt = min(dt, cfl * f.grid.dx / s)
    return dt
