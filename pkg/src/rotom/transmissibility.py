"""RoToM, transmissibility ellipsoid and transmissibility index.

The ellipsoid is the image of the unit sphere of force directions under the
mobility matrix ``T``; its semi-axes are the eigenpairs of ``T`` and it is
centred at the CoM.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEllipsoid, ZeroForce

DEGENERACY = 1e-9
EIG_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class TransmissibilityEllipsoid:
    center: np.ndarray
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns, matching eigenvalues
    index: float

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    @property
    def matrix(self) -> np.ndarray:
        V = self.eigenvectors
        return V @ np.diag(self.eigenvalues) @ V.T


def _unit(direction, dim: int) -> np.ndarray:
    u = np.asarray(direction, dtype=float).reshape(-1)
    if u.shape != (dim,):
        raise ValueError(f"direction must have {dim} components, got {u.size}")
    norm = np.linalg.norm(u)
    if not norm > 0.0:
        raise ZeroForce("direction vector is zero")
    return u / norm


def rotom(state, direction) -> float:
    """``||T u||`` for the unit vector ``u`` along ``direction`` (normalised if needed)."""
    return rotom_from_matrix(state.T, direction)


def rotom_from_matrix(T, direction) -> float:
    T = np.asarray(T, dtype=float)
    return float(np.linalg.norm(T @ _unit(direction, T.shape[0])))


def _sign_fix(V: np.ndarray) -> np.ndarray:
    V = V.copy()
    for k in range(V.shape[1]):
        col = V[:, k]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size and col[nz[0]] < 0:
            V[:, k] = -col
    return V


def ellipsoid_from_matrix(T, center=None) -> TransmissibilityEllipsoid:
    """Ellipsoid of a symmetric mobility matrix ``T`` (eigenvalues expected in [0, 1])."""
    T = np.asarray(T, dtype=float)
    d = T.shape[0]
    if T.shape != (d, d) or np.max(np.abs(T - T.T)) > 1e-10:
        raise ValueError("mobility matrix must be square and symmetric")
    w, V = np.linalg.eigh(0.5 * (T + T.T))
    order = np.argsort(w)[::-1]
    w, V = w[order], V[:, order]
    if w[0] > 1.0 + EIG_TOL or w[-1] < -EIG_TOL:
        raise ArithmeticError(f"mobility eigenvalues {w.tolist()} fall outside [0, 1]")
    if w[0] < DEGENERACY:
        raise DegenerateEllipsoid(f"largest eigenvalue {w[0]:.3e} below {DEGENERACY:.0e}")
    w = np.clip(w, 0.0, 1.0)
    V = _sign_fix(V)
    center = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    for a in (w, V, center):
        a.setflags(write=False)
    return TransmissibilityEllipsoid(center=center, eigenvalues=w, eigenvectors=V,
                                     index=float(w[-1] / w[0]))


def ellipsoid(state) -> TransmissibilityEllipsoid:
    return ellipsoid_from_matrix(state.T, state.com_position)


def transmissibility_index(state) -> float:
    """Smallest over largest eigenvalue of ``T``; 1 means isotropic transmission."""
    return ellipsoid(state).index


def ellipsoid_ray_reading(ell: TransmissibilityEllipsoid, direction) -> float:
    """Distance from the centre to the ellipsoid surface along ``direction``.

    Coincides with :func:`rotom` only on eigen-directions. A direction with no
    component in the non-null eigenspace gives 0.
    """
    u = _unit(direction, ell.dim)
    c = ell.eigenvectors.T @ u
    live = ell.eigenvalues > DEGENERACY
    if np.all(np.abs(c[live]) < 1e-15):
        return 0.0
    if np.any(np.abs(c[~live]) > 1e-12):
        # the ray leaves the flat ellipsoid's subspace immediately
        return 0.0
    return float(1.0 / np.linalg.norm(c[live] / ell.eigenvalues[live]))


def unit_directions(dim: int, n_samples: int) -> np.ndarray:
    """Deterministic unit vectors: a circle of ``n_samples`` or a lat-long sphere grid."""
    if dim == 2:
        theta = 2.0 * np.pi * np.arange(n_samples) / n_samples
        return np.column_stack([np.cos(theta), np.sin(theta)])
    n_lat = max(n_samples // 2, 3)
    lat = np.linspace(-0.5 * np.pi, 0.5 * np.pi, n_lat)
    lon = 2.0 * np.pi * np.arange(n_samples) / n_samples
    la, lo = np.meshgrid(lat, lon, indexing="ij")
    return np.column_stack([
        (np.cos(la) * np.cos(lo)).ravel(),
        (np.cos(la) * np.sin(lo)).ravel(),
        np.sin(la).ravel(),
    ])


def sample_ellipsoid_boundary(ell: TransmissibilityEllipsoid, n_samples: int) -> np.ndarray:
    """Boundary points ``center + T u`` for sampled unit ``u``.

    In 2-D exactly ``n_samples`` points; in 3-D ``n_samples`` longitudes times
    ``max(n_samples // 2, 3)`` latitudes (poles included).
    """
    if n_samples < 8:
        raise ValueError("n_samples must be at least 8")
    U = unit_directions(ell.dim, n_samples)
    return ell.center + U @ ell.matrix.T
