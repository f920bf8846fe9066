"""Centroidal mobility matrix, fictitious force and passive reaction.

The mobility matrix ``T = m Jc M^-1 Jc^T`` is the mass-normalised inverse of
the centroidal inertia seen at the CoM. ``Jc`` itself is never inverted, so
the quantity is well defined for any Jacobian rank.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .chain import ChainModel, Configuration, as_q
from .errors import DimensionMismatch, SingularMassMatrix, ZeroForce

COND_LIMIT = 1e12
BOUND_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class CentroidalState:
    """Kinematic/dynamic snapshot of a model at one configuration."""

    model: ChainModel
    q: Configuration
    m_total: float
    J_c: np.ndarray
    M: np.ndarray
    T: np.ndarray
    com_position: np.ndarray
    mass_matrix_cond: float = 1.0

    @property
    def task_dim(self) -> int:
        return self.model.task_dim


@dataclass(frozen=True, eq=False)
class RotomResult:
    rotom: float
    f: np.ndarray
    reaction: np.ndarray
    accel: np.ndarray


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def centroidal_state(model: ChainModel, q, *, cond_limit: float = COND_LIMIT) -> CentroidalState:
    """Evaluate ``Jc``, ``M`` and ``T`` at ``q``.

    Raises SingularMassMatrix when the 1-norm condition number of ``M``
    exceeds ``cond_limit`` (or ``M`` is not positive definite).
    """
    qv = as_q(model, q)
    T, com, Jc, M, cond = _backend.mobility(model.packed, qv)
    if not cond <= cond_limit:
        raise SingularMassMatrix(
            f"mass matrix condition number {cond:.3e} exceeds {cond_limit:.0e} at q = {qv.tolist()}"
        )
    return CentroidalState(
        model=model,
        q=Configuration(model, qv),
        m_total=model.total_mass,
        J_c=_frozen(Jc),
        M=_frozen(M),
        T=_frozen(T),
        com_position=_frozen(com),
        mass_matrix_cond=float(cond),
    )


def _force(state, F) -> np.ndarray:
    F = np.asarray(F, dtype=float).reshape(-1)
    d = state.T.shape[0]
    if F.shape != (d,):
        raise DimensionMismatch(f"force must have {d} components, got {F.size}")
    if not np.all(np.isfinite(F)):
        raise ValueError("force must be finite")
    if not np.linalg.norm(F) > 0.0:
        raise ZeroForce("the ratio of transmission is undefined for a zero force")
    return F


def fictitious_force(state: CentroidalState, F) -> RotomResult:
    """Split the CoM force ``F`` into transmitted force ``f`` and reaction ``R = f - F``."""
    F = _force(state, F)
    f = state.T @ F
    reaction = f - F
    return RotomResult(
        rotom=float(np.linalg.norm(f) / np.linalg.norm(F)),
        f=_frozen(f),
        reaction=_frozen(reaction),
        accel=_frozen(f / state.m_total),
    )


def com_acceleration_bound_check(state: CentroidalState, F, tol: float = BOUND_TOL) -> bool:
    """True iff the CoM acceleration does not exceed that of a free point mass."""
    res = fictitious_force(state, F)
    return bool(np.linalg.norm(res.accel) <= np.linalg.norm(F) / state.m_total + tol)
