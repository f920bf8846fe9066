"""Local minimisation of the RoToM and multistart search for its zeros."""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .chain import ChainModel, Configuration, as_q
from .errors import DimensionMismatch, NormSingularity, ZeroForce

NORM_FLOOR = 1e-12
MAX_HALVINGS = 60


def _force(model: ChainModel, F) -> np.ndarray:
    F = np.asarray(F, dtype=float).reshape(-1)
    if F.shape != (model.task_dim,):
        raise DimensionMismatch(f"force must have {model.task_dim} components, got {F.size}")
    if not np.linalg.norm(F) > 0.0:
        raise ZeroForce("zero force")
    return F


def _objective(model: ChainModel, q: np.ndarray, F: np.ndarray) -> float:
    T = _backend.mobility(model.packed, q)[0]
    return float(np.linalg.norm(T @ F))


def _perturbed(q: np.ndarray, h: float) -> np.ndarray:
    n = len(q)
    E = h * np.eye(n)
    return np.concatenate([q + E, q - E])


def _gradient(model: ChainModel, q: np.ndarray, F: np.ndarray, h: float) -> np.ndarray:
    Ts, _ = _backend.mobility_batch(model.packed, _perturbed(q, h))
    vals = np.linalg.norm(Ts @ F, axis=1)
    n = len(q)
    return (vals[:n] - vals[n:]) / (2.0 * h)


def rotom_gradient(model: ChainModel, q, F, fd_step: float = 1e-6) -> np.ndarray:
    """Central-difference gradient of ``q -> ||T(q) F||`` with ``F`` fixed in the world."""
    q = as_q(model, q)
    F = _force(model, F)
    if _objective(model, q, F) <= NORM_FLOOR:
        raise NormSingularity("||T F|| is zero here; the norm has no gradient")
    return _gradient(model, q, F, fd_step)


# -- descent -----------------------------------------------------------------


class StopReason(str, enum.Enum):
    GRADIENT_SMALL = "GradientSmall"
    OBJECTIVE_FLAT = "ObjectiveFlat"
    MAX_ITERS = "MaxIters"
    JOINT_LIMIT = "JointLimit"


@dataclass(frozen=True)
class DescentSettings:
    gain: float = 1.0
    fd_step: float = 1e-6
    step_size: float = 1e-2
    max_iters: int = 10_000
    grad_tol: float = 1e-8
    objective_tol: float = 1e-12

    def __post_init__(self):
        for name in ("gain", "fd_step", "step_size", "max_iters", "grad_tol", "objective_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.fd_step < self.step_size:
            raise ValueError("fd_step must be smaller than step_size")


@dataclass
class DescentTrace:
    iterates: list = field(default_factory=list)  # (q, objective) pairs
    converged: bool = False
    reason: StopReason = StopReason.MAX_ITERS

    @property
    def final_q(self) -> np.ndarray:
        return self.iterates[-1][0]

    @property
    def objectives(self) -> np.ndarray:
        return np.array([obj for _, obj in self.iterates])


def _limit_box(model: ChainModel) -> tuple[np.ndarray, np.ndarray]:
    lo = np.array([-np.inf if j.limits is None else j.limits[0] for j in model.joints])
    hi = np.array([np.inf if j.limits is None else j.limits[1] for j in model.joints])
    return lo, hi


def minimize_rotom(model: ChainModel, q0, F, settings: DescentSettings | None = None) -> DescentTrace:
    """Backtracking gradient descent of ``||T(q) F||`` in configuration space.

    Steps use the gradient of the force-normalised objective, so the iterate
    sequence does not depend on ``||F||``. A step is accepted only if it
    strictly decreases the objective; each iteration starts from the full
    step ``gain * step_size`` and halves on rejection.
    """
    s = settings or DescentSettings()
    q = as_q(model, q0).copy()
    F = _force(model, F)
    scale = float(np.linalg.norm(F))
    u = F / scale
    lo, hi = _limit_box(model)

    obj = _objective(model, q, u)
    trace = DescentTrace(iterates=[(q.copy(), obj * scale)])

    for _ in range(s.max_iters):
        if obj <= NORM_FLOOR:
            trace.converged, trace.reason = True, StopReason.GRADIENT_SMALL
            return trace
        g = _gradient(model, q, u, s.fd_step)
        if np.linalg.norm(g) < s.grad_tol:
            trace.converged, trace.reason = True, StopReason.GRADIENT_SMALL
            return trace
        step = s.gain * s.step_size
        for _ in range(MAX_HALVINGS):
            trial = q - step * g
            clipped = np.clip(trial, lo, hi)
            hit_limit = bool(np.any(clipped != trial))
            obj_new = _objective(model, clipped, u)
            if obj_new < obj:
                break
            step *= 0.5
        else:
            trace.converged, trace.reason = True, StopReason.OBJECTIVE_FLAT
            return trace
        decrease = obj - obj_new
        q, obj = clipped, obj_new
        trace.iterates.append((q.copy(), obj * scale))
        if hit_limit:
            trace.converged, trace.reason = False, StopReason.JOINT_LIMIT
            return trace
        if decrease < s.objective_tol:
            trace.converged, trace.reason = True, StopReason.OBJECTIVE_FLAT
            return trace
    trace.converged, trace.reason = False, StopReason.MAX_ITERS
    return trace


# -- zero search ---------------------------------------------------------------


@dataclass(frozen=True)
class ZeroSearchSettings:
    seeds_per_joint: int = 8
    residual_tol: float = 1e-10
    dedupe_tol: float = 1e-3
    max_newton_iters: int = 50
    fd_step: float = 1e-7

    def __post_init__(self):
        for name in ("seeds_per_joint", "residual_tol", "dedupe_tol", "max_newton_iters", "fd_step"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class SeedOutcome:
    seed: np.ndarray
    q: np.ndarray
    residual: float
    iterations: int
    status: str  # "zero", "duplicate", "out_of_limits", "not_converged", "singular"


@dataclass
class ZeroSearchResult:
    """Representative zero-RoToM configurations plus per-seed diagnostics.

    For chains whose zero set is a continuum (typically three or more joints)
    the solutions are representatives of it, not an enumeration.
    """

    solutions: list
    residuals: list
    seeds: list

    def __len__(self):
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)


def wrap_angle(q):
    return (np.asarray(q, dtype=float) + np.pi) % (2.0 * np.pi) - np.pi


def _search_box(model: ChainModel):
    lo, hi = _limit_box(model)
    lo = np.where(np.isfinite(lo), lo, -np.pi)
    hi = np.where(np.isfinite(hi), hi, np.pi)
    return lo, hi


def _seed_grid(lo: np.ndarray, hi: np.ndarray, per_joint: int) -> np.ndarray:
    axes = [a + (np.arange(per_joint) + 0.5) * (b - a) / per_joint for a, b in zip(lo, hi)]
    return np.array(list(itertools.product(*axes)))


def _normalise(model: ChainModel, q: np.ndarray) -> np.ndarray | None:
    """Map a solution into the search box by 2*pi shifts; None if unreachable."""
    out = q.copy()
    for i, joint in enumerate(model.joints):
        if joint.limits is None:
            out[i] = wrap_angle(q[i])
        else:
            lo, hi = joint.limits
            v = lo + (q[i] - lo) % (2.0 * np.pi)
            if v > hi:
                return None
            out[i] = v
    return out


def _residual(model: ChainModel, q: np.ndarray, u: np.ndarray) -> np.ndarray:
    return _backend.mobility(model.packed, q)[0] @ u


def _levenberg_marquardt(model, q, u, tol_unit, settings):
    r = _residual(model, q, u)
    norm = float(np.linalg.norm(r))
    mu = 1e-3
    it = 0
    h = settings.fd_step
    n = len(q)
    # keep polishing past the acceptance threshold: zeros where the residual
    # is quadratic in q converge only linearly
    polish = tol_unit * 1e-6
    while it < settings.max_newton_iters and not norm <= polish:
        if not np.isfinite(norm):
            break
        it += 1
        Ts, _ = _backend.mobility_batch(model.packed, _perturbed(q, h))
        R = Ts @ u
        J = ((R[:n] - R[n:]) / (2.0 * h)).T
        JtJ = J.T @ J
        g = J.T @ r
        improved = False
        for _ in range(20):
            try:
                delta = np.linalg.solve(JtJ + mu * np.eye(n), -g)
            except np.linalg.LinAlgError:
                mu *= 10.0
                continue
            trial = q + delta
            r_new = _residual(model, trial, u)
            norm_new = float(np.linalg.norm(r_new))
            if norm_new < norm:
                q, r, norm = trial, r_new, norm_new
                mu = max(mu / 3.0, 1e-12)
                improved = True
                break
            mu *= 4.0
        if not improved:
            break
    return q, norm, it


def _angular_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(wrap_angle(a - b))))


def find_rotom_zeros(model: ChainModel, F, settings: ZeroSearchSettings | None = None) -> ZeroSearchResult:
    """Configurations with ``T(q) F = 0`` from a deterministic multistart grid.

    Unlimited joints are searched over one period ``[-pi, pi)``; limited ones
    over their range. Solutions outside the limits are discarded, near
    duplicates (wrapped max-norm below ``dedupe_tol``) merged, and the result
    sorted lexicographically.
    """
    s = settings or ZeroSearchSettings()
    F = _force(model, F)
    scale = float(np.linalg.norm(F))
    u = F / scale
    tol_unit = s.residual_tol / scale
    lo, hi = _search_box(model)

    found: list[tuple[np.ndarray, float]] = []
    outcomes = []
    for seed in _seed_grid(lo, hi, s.seeds_per_joint):
        q, norm, it = _levenberg_marquardt(model, seed.copy(), u, tol_unit, s)
        residual = norm * scale
        if not np.isfinite(residual):
            status = "singular"
        elif not residual < s.residual_tol:
            status = "not_converged"
        else:
            qn = _normalise(model, q)
            if qn is None:
                status = "out_of_limits"
            else:
                # the certificate must survive re-evaluation at the wrapped angles
                q = qn
                residual = float(np.linalg.norm(_residual(model, qn, F)))
                if not residual < s.residual_tol:
                    status = "not_converged"
                elif any(_angular_distance(qn, other) < s.dedupe_tol for other, _ in found):
                    status = "duplicate"
                else:
                    status = "zero"
                    found.append((qn, residual))
        outcomes.append(SeedOutcome(seed, q, residual, it, status))

    found.sort(key=lambda item: tuple(item[0]))
    return ZeroSearchResult(
        solutions=[Configuration(model, q) for q, _ in found],
        residuals=[res for _, res in found],
        seeds=outcomes,
    )
