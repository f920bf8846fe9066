"""Serial revolute chains: description, forward kinematics, Jacobians, mass matrix.

Conventions
-----------
Joint ``i`` sits at ``origin`` in the frame of link ``i - 1`` (the base frame
for the first joint) and rotates link ``i`` about ``axis`` by ``q[i]``. Link
``i`` carries a point mass at ``com`` in its own frame, plus an optional
rotational inertia about that point. Indices are 0-based throughout the
Python API.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels_py
from .errors import DimensionMismatch, JointLimitViolation, SchemaError

_UNIT_TOL = 1e-12
_PLANAR_TOL = 1e-12
_PSD_TOL = 1e-10


def _vec3(value, what: str) -> np.ndarray:
    arr = np.array(value, dtype=float)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise SchemaError(f"{what} must be a finite 3-vector, got {value!r}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class JointSpec:
    """Revolute joint: unit ``axis`` and ``origin`` in the parent frame, optional limits (rad)."""

    axis: np.ndarray
    origin: np.ndarray = field(default_factory=lambda: np.zeros(3))
    limits: tuple[float, float] | None = None

    def __post_init__(self):
        axis = _vec3(self.axis, "joint axis")
        if abs(np.linalg.norm(axis) - 1.0) > _UNIT_TOL:
            raise SchemaError(f"joint axis must have unit norm, got |axis| = {np.linalg.norm(axis)!r}")
        object.__setattr__(self, "axis", axis)
        object.__setattr__(self, "origin", _vec3(self.origin, "joint origin"))
        if self.limits is not None:
            lo, hi = (float(v) for v in self.limits)
            if not lo < hi:
                raise SchemaError(f"joint limits must satisfy lower < upper, got ({lo}, {hi})")
            object.__setattr__(self, "limits", (lo, hi))


@dataclass(frozen=True, eq=False)
class LinkSpec:
    """Link with point ``mass`` (kg) at ``com`` (link frame) and optional ``inertia`` about it."""

    mass: float
    com: np.ndarray = field(default_factory=lambda: np.zeros(3))
    inertia: np.ndarray | None = None

    def __post_init__(self):
        mass = float(self.mass)
        if not (np.isfinite(mass) and mass >= 0.0):
            raise SchemaError(f"link mass must be finite and >= 0, got {self.mass!r}")
        object.__setattr__(self, "mass", mass)
        object.__setattr__(self, "com", _vec3(self.com, "link com"))
        if self.inertia is not None:
            I = np.array(self.inertia, dtype=float)
            if I.shape == (9,):
                I = I.reshape(3, 3)
            if I.shape != (3, 3) or not np.all(np.isfinite(I)):
                raise SchemaError("link inertia must be a finite 3x3 matrix")
            if np.max(np.abs(I - I.T)) > _PSD_TOL:
                raise SchemaError("link inertia must be symmetric")
            if np.linalg.eigvalsh(0.5 * (I + I.T)).min() < -_PSD_TOL:
                raise SchemaError("link inertia must be positive semidefinite")
            I.setflags(write=False)
            object.__setattr__(self, "inertia", I)


@dataclass(frozen=True, eq=False)
class ChainModel:
    """Immutable serial chain; link ``i`` is distal to joint ``i``."""

    joints: tuple[JointSpec, ...]
    links: tuple[LinkSpec, ...]
    task_dim: int = 3
    base_frame: np.ndarray = field(default_factory=lambda: np.eye(4))
    name: str = "chain"

    def __post_init__(self):
        joints = tuple(self.joints)
        links = tuple(self.links)
        object.__setattr__(self, "joints", joints)
        object.__setattr__(self, "links", links)
        if len(joints) < 1 or len(joints) != len(links):
            raise SchemaError(
                f"a chain needs as many links as joints (>= 1), got {len(joints)} joints "
                f"and {len(links)} links"
            )
        if not any(link.mass > 0.0 for link in links):
            raise SchemaError("at least one link must have positive mass")
        base = np.array(self.base_frame, dtype=float)
        if base.shape != (4, 4) or not np.all(np.isfinite(base)):
            raise SchemaError("base_frame must be a finite 4x4 homogeneous transform")
        R = base[:3, :3]
        if np.max(np.abs(R.T @ R - np.eye(3))) > 1e-9 or np.linalg.det(R) < 0:
            raise SchemaError("base_frame rotation must be a proper rotation")
        if np.any(base[3] != (0.0, 0.0, 0.0, 1.0)):
            raise SchemaError("base_frame last row must be (0, 0, 0, 1)")
        base.setflags(write=False)
        object.__setattr__(self, "base_frame", base)
        if self.task_dim not in (2, 3):
            raise SchemaError(f"task_dim must be 2 or 3, got {self.task_dim!r}")
        if self.task_dim == 2 and not self.is_planar():
            raise SchemaError(
                "task_dim 2 requires a planar chain: joint axes along world z, offsets in the xy-plane"
            )

    @property
    def n(self) -> int:
        return len(self.joints)

    @property
    def total_mass(self) -> float:
        return float(sum(link.mass for link in self.links))

    def is_planar(self) -> bool:
        R = self.base_frame[:3, :3]
        if abs(abs(R[2, 2]) - 1.0) > _PLANAR_TOL:
            return False
        for joint, link in zip(self.joints, self.links):
            if np.linalg.norm(joint.axis[:2]) > _PLANAR_TOL:
                return False
            if abs(joint.origin[2]) > _PLANAR_TOL or abs(link.com[2]) > _PLANAR_TOL:
                return False
        return True

    @cached_property
    def packed(self) -> _kernels_py.PackedChain:
        """Flat-array view consumed by the numeric kernels."""
        inertias = np.zeros((self.n, 3, 3))
        for i, link in enumerate(self.links):
            if link.inertia is not None:
                inertias[i] = link.inertia
        return _kernels_py.PackedChain(
            axes=np.array([j.axis for j in self.joints]),
            origins=np.array([j.origin for j in self.joints]),
            coms=np.array([lk.com for lk in self.links]),
            masses=np.array([lk.mass for lk in self.links]),
            inertias=inertias,
            base=np.array(self.base_frame),
            task_dim=self.task_dim,
        )

    def configuration(self, q) -> "Configuration":
        return Configuration(self, q)

    def with_masses_scaled(self, factor: float) -> "ChainModel":
        links = tuple(LinkSpec(lk.mass * factor, lk.com, None if lk.inertia is None else lk.inertia * factor)
                      for lk in self.links)
        return ChainModel(self.joints, links, self.task_dim, self.base_frame, self.name)

    def with_base_frame(self, base_frame) -> "ChainModel":
        return ChainModel(self.joints, self.links, self.task_dim, base_frame, self.name)


class Configuration:
    """Joint-angle vector validated against a model (dimension and joint limits)."""

    __slots__ = ("model", "q")

    def __init__(self, model: ChainModel, q):
        arr = np.array(q, dtype=float).reshape(-1)
        if arr.shape != (model.n,):
            raise DimensionMismatch(f"model has {model.n} joints, got {arr.size} joint values")
        if not np.all(np.isfinite(arr)):
            raise ValueError("joint values must be finite")
        for i, (qi, joint) in enumerate(zip(arr, model.joints)):
            if joint.limits is not None and not joint.limits[0] <= qi <= joint.limits[1]:
                raise JointLimitViolation(
                    f"q[{i}] = {qi!r} outside joint limits [{joint.limits[0]!r}, {joint.limits[1]!r}]"
                )
        arr.setflags(write=False)
        self.model = model
        self.q = arr

    def __array__(self, dtype=None, copy=None):
        return self.q if dtype is None else self.q.astype(dtype)

    def __len__(self):
        return len(self.q)

    def __repr__(self):
        return f"Configuration({self.q.tolist()!r})"


def as_q(model: ChainModel, q) -> np.ndarray:
    """Validated joint vector for ``model`` from a Configuration or array-like."""
    if isinstance(q, Configuration):
        if q.model is not model:
            return Configuration(model, q.q).q
        return q.q
    return Configuration(model, q).q


class ForwardKinematics(NamedTuple):
    frames: list  # world 4x4 transform of each link frame
    link_coms: np.ndarray  # (n, 3)
    joint_origins: np.ndarray  # (n, 3)
    joint_axes: np.ndarray  # (n, 3) world frame


def forward_kinematics(model: ChainModel, q) -> ForwardKinematics:
    q = as_q(model, q)
    kin = _kernels_py.kinematics(model.packed, q)
    frames = []
    for R, p in zip(kin.rotations, kin.positions):
        X = np.eye(4)
        X[:3, :3] = R
        X[:3, 3] = p
        frames.append(X)
    return ForwardKinematics(frames, kin.link_coms, kin.positions, kin.joint_axes)


def com_position(model: ChainModel, q) -> np.ndarray:
    """Whole-chain CoM in the world frame, truncated to ``task_dim``."""
    q = as_q(model, q)
    p = model.packed
    kin = _kernels_py.kinematics(p, q)
    return (p.masses @ kin.link_coms / p.masses.sum())[: model.task_dim]


def _jacobians(model: ChainModel, q: np.ndarray):
    kin = _kernels_py.kinematics(model.packed, q)
    return kin, *_kernels_py.link_jacobians(kin)


def link_com_jacobian(model: ChainModel, q, link_index: int) -> np.ndarray:
    """``task_dim x n`` Jacobian of link ``link_index``'s CoM; distal columns are zero."""
    q = as_q(model, q)
    if not 0 <= link_index < model.n:
        raise IndexError(f"link index {link_index} out of range for {model.n} links")
    _, Jv, _ = _jacobians(model, q)
    return Jv[link_index, : model.task_dim].copy()


def robot_com_jacobian(model: ChainModel, q) -> tuple[np.ndarray, float]:
    """Mass-weighted average of the link-CoM Jacobians, and the total mass."""
    q = as_q(model, q)
    masses = model.packed.masses
    m = float(masses.sum())
    _, Jv, _ = _jacobians(model, q)
    Jc = np.einsum("i,irj->rj", masses, Jv) / m
    return Jc[: model.task_dim], m


def mass_matrix(model: ChainModel, q) -> np.ndarray:
    q = as_q(model, q)
    kin, Jv, Jw = _jacobians(model, q)
    return _kernels_py.mass_matrix(model.packed, kin, Jv, Jw)


def chain_from_arrays(
    axes: Sequence,
    origins: Sequence,
    coms: Sequence,
    masses: Sequence[float],
    *,
    task_dim: int = 3,
    limits: Sequence | None = None,
    inertias: Sequence | None = None,
    base_frame=None,
    name: str = "chain",
) -> ChainModel:
    """Convenience constructor from parallel per-joint sequences."""
    n = len(masses)
    limits = limits if limits is not None else [None] * n
    inertias = inertias if inertias is not None else [None] * n
    joints = [JointSpec(np.asarray(a, float) / np.linalg.norm(a), o, lim)
              for a, o, lim in zip(axes, origins, limits)]
    links = [LinkSpec(mass, c, I) for mass, c, I in zip(masses, coms, inertias)]
    return ChainModel(tuple(joints), tuple(links), task_dim,
                      np.eye(4) if base_frame is None else base_frame, name)
