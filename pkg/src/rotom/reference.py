"""Reference material: single-pendulum closed form, preset chains, simulation oracle.

Pendulum angle convention: ``q`` is the direction of the rod (pivot to mass)
measured counterclockwise from the world +x axis, and ``alpha`` is the force
direction measured the same way. The ``pendulum`` preset is built so that its
joint angle *is* this ``q``; no conversion is needed.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from . import _kernels_py as kern
from .chain import ChainModel, JointSpec, LinkSpec, as_q
from .errors import DimensionMismatch, SingularMassMatrix

PRESETS = ("pendulum", "double_pendulum", "arm4dof")

# arm4dof: artifact constants, not taken from any measured robot
ARM_LINK_LENGTH = 0.5
ARM_LINK_MASS = 1.0
ARM_ROD_INERTIA = (ARM_LINK_MASS * ARM_LINK_LENGTH**2 / 12.0, ARM_LINK_MASS * ARM_LINK_LENGTH**2 / 12.0, 1e-3)


@dataclass(frozen=True)
class PendulumClosedForm:
    q: float
    alpha: float


def pendulum_f(qa: PendulumClosedForm, F_mag: float = 1.0) -> tuple[float, float]:
    """Transmitted force of a point-mass pendulum, term by term from the tangential split."""
    if F_mag < 0:
        raise ValueError("force magnitude must be non-negative")
    s, c = np.sin(qa.q), np.cos(qa.q)
    Fx = F_mag * np.cos(qa.alpha)
    Fy = F_mag * np.sin(qa.alpha)
    fx = Fx * s * s - Fy * s * c
    fy = -Fx * s * c + Fy * c * c
    return float(fx), float(fy)


def pendulum_mobility(q: float) -> np.ndarray:
    s, c = np.sin(q), np.cos(q)
    return np.array([[s * s, -s * c], [-s * c, c * c]])


def pendulum_rotom(qa: PendulumClosedForm) -> float:
    """Norm of the unit-force transmitted vector, evaluated without simplification."""
    q, a = qa.q, qa.alpha
    s, c = np.sin(q), np.cos(q)
    v0 = s * s * np.cos(a) - s * c * np.sin(a)
    v1 = -s * c * np.cos(a) + c * c * np.sin(a)
    return float(np.hypot(v0, v1))


def _planar_joint(x: float) -> JointSpec:
    return JointSpec(np.array([0.0, 0.0, 1.0]), np.array([x, 0.0, 0.0]))


def preset(name: str) -> ChainModel:
    """Built-in chains: ``pendulum``, ``double_pendulum`` (unit links/masses), ``arm4dof``."""
    if name == "pendulum":
        return ChainModel((_planar_joint(0.0),), (LinkSpec(1.0, [1.0, 0.0, 0.0]),), 2, name=name)
    if name == "double_pendulum":
        return ChainModel(
            (_planar_joint(0.0), _planar_joint(1.0)),
            (LinkSpec(1.0, [1.0, 0.0, 0.0]), LinkSpec(1.0, [1.0, 0.0, 0.0])),
            2,
            name=name,
        )
    if name == "arm4dof":
        L = ARM_LINK_LENGTH
        rod = np.diag(ARM_ROD_INERTIA)
        joints = (
            JointSpec([0.0, 0.0, 1.0], [0.0, 0.0, 0.0], (-np.pi, np.pi)),
            JointSpec([0.0, 1.0, 0.0], [0.0, 0.0, 0.0], (-1.4, 1.4)),
            JointSpec([1.0, 0.0, 0.0], [0.0, 0.0, 0.0], (-np.pi, np.pi)),
            JointSpec([0.0, 1.0, 0.0], [0.0, 0.0, -L], (0.0, 2.6)),
        )
        links = (
            LinkSpec(0.0, [0.0, 0.0, 0.0]),
            LinkSpec(0.0, [0.0, 0.0, 0.0]),
            LinkSpec(ARM_LINK_MASS, [0.0, 0.0, -0.5 * L], rod),
            LinkSpec(ARM_LINK_MASS, [0.0, 0.0, -0.5 * L], rod),
        )
        return ChainModel(joints, links, 3, name=name)
    raise ValueError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}")


@dataclass(frozen=True)
class SimOracleSettings:
    """Fixed-step RK4 integration from rest.

    ``extrapolate`` combines the half- and full-horizon displacement estimates
    so the leading horizon-squared bias cancels (the motion from rest is even
    in time, so the combined estimate is accurate to horizon**4).
    """

    dt: float = 1e-5
    horizon: float = 1e-3
    extrapolate: bool = True
    fd_step: float = 1e-6

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not self.horizon >= 10 * self.dt * (1 - 1e-12):
            raise ValueError("horizon must be at least 10 * dt")

    @property
    def steps(self) -> int:
        n = int(round(self.horizon / self.dt))
        return n + (n % 2)


class _Dynamics:
    """Joint-space dynamics with gravity off and a constant CoM force.

    ``M`` and ``Jc`` come from the selected kernel; CoM positions are measured
    with the separate numpy forward kinematics.
    """

    def __init__(self, model: ChainModel, F: np.ndarray, eps: float):
        self.p = model.packed
        self.d = model.task_dim
        self.F = F
        self.eps = eps
        self.w = self.p.masses / self.p.masses.sum()

    def mass(self, q):
        _, _, Jc, M, _ = _backend.mobility(self.p, q)
        return M, Jc

    def com(self, q):
        return (self.w @ kern.kinematics(self.p, q).link_coms)[: self.d]

    def bias(self, q, qd):
        """Coriolis/centrifugal generalized force from finite differences of M."""
        speed = np.linalg.norm(qd)
        if speed == 0.0:
            return np.zeros_like(q)
        h = self.eps
        v = qd / speed
        Mdot = (self.mass(q + h * v)[0] - self.mass(q - h * v)[0]) * (speed / (2 * h))
        grad = np.empty_like(q)
        for k in range(len(q)):
            e = np.zeros_like(q)
            e[k] = h
            grad[k] = qd @ (self.mass(q + e)[0] - self.mass(q - e)[0]) @ qd / (2 * h)
        return Mdot @ qd - 0.5 * grad

    def qdd(self, q, qd):
        M, Jc = self.mass(q)
        return np.linalg.solve(M, Jc.T @ self.F - self.bias(q, qd))


def sim_com_acceleration(model: ChainModel, q, F, settings: SimOracleSettings | None = None) -> np.ndarray:
    """Initial CoM acceleration estimated from a short simulated displacement from rest."""
    settings = settings or SimOracleSettings()
    q0 = as_q(model, q).copy()
    F = np.asarray(F, dtype=float).reshape(-1)
    if F.shape != (model.task_dim,):
        raise DimensionMismatch(f"force must have {model.task_dim} components")
    dyn = _Dynamics(model, F, settings.fd_step)
    _, cond = kern._cholesky_cond(dyn.mass(q0)[0])
    if not cond <= 1e12:
        raise SingularMassMatrix(f"mass matrix condition number {cond:.3e} at q = {q0.tolist()}")

    n_steps = settings.steps
    h = settings.horizon / n_steps
    x0 = dyn.com(q0)
    q, qd = q0.copy(), np.zeros_like(q0)
    x_half = None
    for step in range(1, n_steps + 1):
        k1q, k1v = qd, dyn.qdd(q, qd)
        k2q, k2v = qd + 0.5 * h * k1v, dyn.qdd(q + 0.5 * h * k1q, qd + 0.5 * h * k1v)
        k3q, k3v = qd + 0.5 * h * k2v, dyn.qdd(q + 0.5 * h * k2q, qd + 0.5 * h * k2v)
        k4q, k4v = qd + h * k3v, dyn.qdd(q + h * k3q, qd + h * k3v)
        q = q + h / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q)
        qd = qd + h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v)
        if step == n_steps // 2:
            x_half = dyn.com(q)
    H = settings.horizon
    a_full = 2.0 * (dyn.com(q) - x0) / H**2
    if not settings.extrapolate:
        return a_full
    a_half = 2.0 * (x_half - x0) / (0.5 * H) ** 2
    return (4.0 * a_half - a_full) / 3.0
