"""Pure numpy kinematics/dynamics kernels.

This is the readable reference path and the fallback used when the compiled
``rotom._ckernels`` extension is unavailable. Everything works on a
:class:`PackedChain`, a flat array view of a :class:`~rotom.chain.ChainModel`.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np


class PackedChain(NamedTuple):
    axes: np.ndarray  # (n, 3) joint axes in the parent frame
    origins: np.ndarray  # (n, 3) joint origins in the parent frame
    coms: np.ndarray  # (n, 3) link CoM in the link frame
    masses: np.ndarray  # (n,)
    inertias: np.ndarray  # (n, 3, 3) about link CoM, zeros when absent
    base: np.ndarray  # (4, 4)
    task_dim: int


class Kinematics(NamedTuple):
    rotations: np.ndarray  # (n, 3, 3) world orientation of each link frame
    positions: np.ndarray  # (n, 3) world position of each link frame origin
    joint_axes: np.ndarray  # (n, 3) world joint axes
    link_coms: np.ndarray  # (n, 3) world link CoM positions


def axis_angle(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rotation matrix for a rotation of ``angle`` about the unit ``axis``."""
    x, y, z = axis
    c, s = np.cos(angle), np.sin(angle)
    v = 1.0 - c
    return np.array(
        [
            [c + x * x * v, x * y * v - z * s, x * z * v + y * s],
            [y * x * v + z * s, c + y * y * v, y * z * v - x * s],
            [z * x * v - y * s, z * y * v + x * s, c + z * z * v],
        ]
    )


def kinematics(chain: PackedChain, q: np.ndarray) -> Kinematics:
    n = len(q)
    rotations = np.empty((n, 3, 3))
    positions = np.empty((n, 3))
    joint_axes = np.empty((n, 3))
    link_coms = np.empty((n, 3))
    R = chain.base[:3, :3]
    p = chain.base[:3, 3]
    for i in range(n):
        p = p + R @ chain.origins[i]
        joint_axes[i] = R @ chain.axes[i]
        R = R @ axis_angle(chain.axes[i], q[i])
        rotations[i] = R
        positions[i] = p
        link_coms[i] = p + R @ chain.coms[i]
    return Kinematics(rotations, positions, joint_axes, link_coms)


def link_jacobians(kin: Kinematics) -> tuple[np.ndarray, np.ndarray]:
    """Linear and angular Jacobians of every link CoM, each of shape (n, 3, n)."""
    n = len(kin.positions)
    Jv = np.zeros((n, 3, n))
    Jw = np.zeros((n, 3, n))
    for i in range(n):
        for j in range(i + 1):
            Jv[i, :, j] = np.cross(kin.joint_axes[j], kin.link_coms[i] - kin.positions[j])
            Jw[i, :, j] = kin.joint_axes[j]
    return Jv, Jw


def mass_matrix(chain: PackedChain, kin: Kinematics, Jv: np.ndarray, Jw: np.ndarray) -> np.ndarray:
    n = len(chain.masses)
    M = np.zeros((n, n))
    for i in range(n):
        M += chain.masses[i] * Jv[i].T @ Jv[i]
        I = chain.inertias[i]
        if I.any():
            Iw = kin.rotations[i] @ I @ kin.rotations[i].T
            M += Jw[i].T @ Iw @ Jw[i]
    return 0.5 * (M + M.T)


def _cholesky_cond(M: np.ndarray) -> tuple[np.ndarray | None, float]:
    """Cholesky factor of M and its 1-norm condition number (inf if not PD)."""
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        return None, np.inf
    if not np.all(np.diag(L) > 0.0):
        return None, np.inf
    n = len(M)
    Linv = np.linalg.solve(L, np.eye(n))
    Minv = Linv.T @ Linv
    cond = np.abs(M).sum(axis=0).max() * np.abs(Minv).sum(axis=0).max()
    return L, float(cond)


def mobility(chain: PackedChain, q: np.ndarray):
    """Return ``(T, com, Jc, M, cond)`` at configuration ``q``.

    ``T = m Jc M^-1 Jc^T`` is assembled as ``m X^T X`` with ``X = L^-1 Jc^T``
    where ``L`` is the Cholesky factor of ``M``; ``T`` is NaN when ``M`` is
    not positive definite (``cond`` is then ``inf``).
    """
    d = chain.task_dim
    kin = kinematics(chain, np.asarray(q, dtype=float))
    Jv, Jw = link_jacobians(kin)
    M = mass_matrix(chain, kin, Jv, Jw)
    m = chain.masses.sum()
    w = chain.masses / m
    Jc = np.einsum("i,irj->rj", w, Jv)[:d]
    com = (w @ kin.link_coms)[:d]
    L, cond = _cholesky_cond(M)
    if L is None:
        T = np.full((d, d), np.nan)
    else:
        X = np.linalg.solve(L, Jc.T)
        T = m * (X.T @ X)
        T = 0.5 * (T + T.T)
    return T, com, Jc, M, cond


def mobility_batch(chain: PackedChain, Q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mobility matrices ``(k, d, d)`` and condition numbers ``(k,)`` for rows of Q."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    d = chain.task_dim
    Ts = np.empty((len(Q), d, d))
    conds = np.empty(len(Q))
    for k, q in enumerate(Q):
        T, _, _, _, cond = mobility(chain, q)
        Ts[k] = T
        conds[k] = cond
    return Ts, conds
