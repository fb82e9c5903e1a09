"""Uniform-grid discretization of 1D Schrodinger operators.

Everything downstream works with plain complex numpy arrays sampled on a
:class:`SpatialGrid`; inner products carry the quadrature weight ``h`` so that
discrete quantities converge to their L^2 counterparts.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Union

import numpy as np
from scipy.linalg import LinAlgError, eigh_tridiagonal, solve_banded

from .errors import InvalidModelError, NearSpectrumError, SizeError

DENSE_SOLVE_CAP = 8192

PotentialLike = Union[Callable[[np.ndarray], np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform grid ``x_j = x_min + j*h`` on ``[x_min, x_max]``."""

    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise InvalidModelError(f"n_points must be an integer >= 3, got {self.n_points}")
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)) or self.x_max <= self.x_min:
            raise InvalidModelError(f"need finite x_min < x_max, got [{self.x_min}, {self.x_max}]")

    @classmethod
    def symmetric(cls, half_width: float, n_points: int) -> "SpatialGrid":
        return cls(-float(half_width), float(half_width), int(n_points))

    @classmethod
    def with_spacing(cls, half_width: float, h: float) -> "SpatialGrid":
        """Symmetric grid whose spacing is exactly ``h`` (half-width rounded up)."""
        m = int(np.ceil(half_width / h - 1e-9))
        return cls(-m * h, m * h, 2 * m + 1)

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.h * np.arange(self.n_points)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.x_max - self.x_min)

    def inner(self, f, g):
        """``<f, g> = h * sum(conj(f) g)``, antilinear in the first slot."""
        return self.h * np.vdot(f, g) if np.ndim(f) == 1 else self.h * (np.conj(f).T @ g)

    def norm(self, f) -> float:
        return float(np.sqrt(self.h) * np.linalg.norm(f))

    def normalize(self, f):
        return f / self.norm(f)

    def padded(self, extra: int) -> "SpatialGrid":
        """Same spacing, ``extra`` points added on each side."""
        h = self.h
        return SpatialGrid(self.x_min - extra * h, self.x_max + extra * h, self.n_points + 2 * extra)


@dataclass(frozen=True, eq=False)
class DiscreteHamiltonian:
    """Three-point finite-difference ``-d^2/dx^2 + V`` with Dirichlet walls.

    Real symmetric tridiagonal: ``diagonal = 2/h^2 + V(x_j)``, constant
    ``off_diagonal = -1/h^2``.
    """

    grid: SpatialGrid
    diagonal: np.ndarray = field(repr=False)
    off_diagonal: float
    potential_samples: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.grid.n_points

    def apply(self, f):
        """Matrix-vector product ``H f`` (``f`` may be 1D or (n, k))."""
        f = np.asarray(f)
        d = self.diagonal if f.ndim == 1 else self.diagonal[:, None]
        out = d * f
        out[:-1] += self.off_diagonal * f[1:]
        out[1:] += self.off_diagonal * f[:-1]
        return out

    def to_dense(self) -> np.ndarray:
        n = self.n
        return (np.diag(self.diagonal) + np.diag(np.full(n - 1, self.off_diagonal), 1)
                + np.diag(np.full(n - 1, self.off_diagonal), -1))

    def with_potential(self, extra: np.ndarray) -> "DiscreteHamiltonian":
        """Hamiltonian with ``extra`` added to the potential."""
        v = self.potential_samples + extra
        return DiscreteHamiltonian(self.grid, self.diagonal + extra, self.off_diagonal, v)

    def extended(self, half_width: float) -> "DiscreteHamiltonian":
        """Zero-pad the potential out to at least ``half_width`` on both sides.

        Only meaningful when ``V`` has decayed to zero at the original walls.
        """
        extra = int(np.ceil(max(0.0, half_width - self.grid.half_width) / self.grid.h))
        if extra == 0:
            return self
        v = np.pad(self.potential_samples, extra)
        return build_hamiltonian(v, self.grid.padded(extra))


def build_hamiltonian(V: PotentialLike, grid: SpatialGrid) -> DiscreteHamiltonian:
    """Discretize ``-d^2/dx^2 + V`` on ``grid``.

    ``V`` is either a vectorized callable or an array of samples at ``grid.x``.
    """
    v = np.asarray(V(grid.x) if callable(V) else V, dtype=float)
    if v.shape != (grid.n_points,):
        raise InvalidModelError(f"potential has shape {v.shape}, expected ({grid.n_points},)")
    if not np.all(np.isfinite(v)):
        bad = int(np.flatnonzero(~np.isfinite(v))[0])
        raise InvalidModelError(f"non-finite potential sample at x = {grid.x[bad]!r}")
    h = grid.h
    return DiscreteHamiltonian(grid, 2.0 / h**2 + v, -1.0 / h**2, v)


def _banded(H: DiscreteHamiltonian, z: complex) -> np.ndarray:
    ab = np.empty((3, H.n), dtype=complex)
    ab[0, 0] = ab[2, -1] = 0.0
    ab[0, 1:] = H.off_diagonal
    ab[2, :-1] = H.off_diagonal
    ab[1] = H.diagonal - z
    return ab


def solve_shifted(H: DiscreteHamiltonian, z: complex, rhs, rtol: float = 1e-10):
    """Solve ``(H - z) u = rhs`` by banded elimination.

    Raises :class:`NearSpectrumError` when the elimination breaks down or the
    residual exceeds ``rtol * ||rhs||``.
    """
    rhs = np.asarray(rhs, dtype=complex)
    scale = np.linalg.norm(rhs)
    if scale == 0.0:
        return np.zeros_like(rhs)
    try:
        u = solve_banded((1, 1), _banded(H, z), rhs, check_finite=False)
    except (LinAlgError, ValueError) as exc:
        raise NearSpectrumError(z) from exc
    if not np.all(np.isfinite(u)):
        raise NearSpectrumError(z)
    residual = np.linalg.norm(H.apply(u) - z * u - rhs)
    if residual > rtol * scale:
        raise NearSpectrumError(z, f"residual {residual:.3e} of (H - z)u = rhs too large at z = {z!r}")
    return u


class Eigenpairs(NamedTuple):
    values: np.ndarray
    vectors: np.ndarray  # columns, h-orthonormal
    boundary_amplitude: np.ndarray  # max |phi| over the two wall-adjacent points


def boundary_amplitude(vectors: np.ndarray, width: int = 2) -> np.ndarray:
    v = np.abs(np.atleast_2d(vectors.T).T)
    return np.maximum(v[:width].max(axis=0), v[-width:].max(axis=0))


def eigensolve(H: DiscreteHamiltonian, cap: int = DENSE_SOLVE_CAP, upper: float | None = None) -> Eigenpairs:
    """All eigenpairs (ascending) of the tridiagonal matrix.

    With ``upper`` set, only eigenvalues below ``upper`` are computed.
    """
    if H.n > cap:
        raise SizeError(f"dense eigensolve of size {H.n} exceeds cap {cap}")
    off = np.full(H.n - 1, H.off_diagonal)
    if upper is None:
        w, v = eigh_tridiagonal(H.diagonal, off)
    else:
        lower = float(H.diagonal.min() - 2.0 * abs(H.off_diagonal)) - 1.0
        if upper <= lower:
            return Eigenpairs(np.empty(0), np.empty((H.n, 0)), np.empty(0))
        w, v = eigh_tridiagonal(H.diagonal, off, select="v", select_range=(lower, upper))
    v = v / np.sqrt(H.grid.h)
    # fix the sign so that the largest-magnitude entry is positive
    if v.shape[1]:
        idx = np.argmax(np.abs(v), axis=0)
        v = v * np.sign(v[idx, np.arange(v.shape[1])])
    return Eigenpairs(w, v, boundary_amplitude(v))
