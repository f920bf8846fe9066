"""Independent reference computations used by the tests.

Nothing here calls the package's Jacobian, mass-matrix or mobility code:
positions come from a separate homogeneous-transform composition built on
scipy rotations, and derivatives from central finite differences of it.
"""
import numpy as np
from scipy.spatial.transform import Rotation

from rotom.chain import ChainModel, chain_from_arrays


def homogeneous_fk(model: ChainModel, q):
    """World transforms of every link frame, composed with 4x4 matrices."""
    X = np.array(model.base_frame, dtype=float)
    frames = []
    for joint, qi in zip(model.joints, q):
        step = np.eye(4)
        step[:3, 3] = joint.origin
        rot = np.eye(4)
        rot[:3, :3] = Rotation.from_rotvec(np.asarray(joint.axis) * qi).as_matrix()
        X = X @ step @ rot
        frames.append(X)
    return frames


def link_com_positions(model: ChainModel, q) -> np.ndarray:
    return np.array([(X @ np.append(link.com, 1.0))[:3] for X, link in zip(homogeneous_fk(model, q), model.links)])


def robot_com(model: ChainModel, q) -> np.ndarray:
    m = np.array([lk.mass for lk in model.links])
    return m @ link_com_positions(model, q) / m.sum()


def fd_jacobian(fun, q, h=1e-6) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    cols = []
    for k in range(len(q)):
        e = np.zeros_like(q)
        e[k] = h
        cols.append((np.asarray(fun(q + e)) - np.asarray(fun(q - e))) / (2 * h))
    return np.stack(cols, axis=-1)


def fd_link_jacobians(model: ChainModel, q, h=1e-6):
    """(n, 3, n) linear Jacobians of link CoMs and (n, 3, n) angular Jacobians."""
    Jv = fd_jacobian(lambda x: link_com_positions(model, x), q, h)
    n = model.n
    Jw = np.zeros((n, 3, n))
    R0 = [X[:3, :3] for X in homogeneous_fk(model, q)]
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        Rp = homogeneous_fk(model, np.asarray(q) + e)
        Rm = homogeneous_fk(model, np.asarray(q) - e)
        for i in range(n):
            W = (Rp[i][:3, :3] - Rm[i][:3, :3]) / (2 * h) @ R0[i].T
            Jw[i, :, k] = [W[2, 1], W[0, 2], W[1, 0]]
    return Jv, Jw


def fd_mass_matrix(model: ChainModel, q, h=1e-6) -> np.ndarray:
    Jv, Jw = fd_link_jacobians(model, q, h)
    frames = homogeneous_fk(model, q)
    M = np.zeros((model.n, model.n))
    for i, link in enumerate(model.links):
        M += link.mass * Jv[i].T @ Jv[i]
        if link.inertia is not None:
            R = frames[i][:3, :3]
            M += Jw[i].T @ (R @ link.inertia @ R.T) @ Jw[i]
    return M


def dense_mobility(model: ChainModel, q, h=1e-6) -> np.ndarray:
    """``m J M^-1 J^T`` with FD Jacobians and an explicit dense inverse."""
    d = model.task_dim
    Jc = fd_jacobian(lambda x: robot_com(model, x), q, h)[:d]
    M = fd_mass_matrix(model, q, h)
    m = sum(lk.mass for lk in model.links)
    return m * Jc @ np.linalg.inv(M) @ Jc.T


def eig2_closed_form(T) -> np.ndarray:
    """Descending eigenvalues of a symmetric 2x2 matrix from the quadratic formula."""
    a, b, c = T[0, 0], T[0, 1], T[1, 1]
    mean = 0.5 * (a + c)
    rad = np.hypot(0.5 * (a - c), b)
    return np.array([mean + rad, mean - rad])


def eig_jacobi(T, sweeps=50) -> np.ndarray:
    """Descending eigenvalues of a small symmetric matrix by cyclic Jacobi rotations."""
    A = np.array(T, dtype=float)
    n = len(A)
    for _ in range(sweeps):
        off = np.sqrt(np.sum(np.tril(A, -1) ** 2))
        if off < 1e-15:
            break
        for p in range(n - 1):
            for r in range(p + 1, n):
                if abs(A[p, r]) < 1e-300:
                    continue
                theta = 0.5 * np.arctan2(2 * A[p, r], A[r, r] - A[p, p])
                c, s = np.cos(theta), np.sin(theta)
                G = np.eye(n)
                G[p, p] = c
                G[r, r] = c
                G[p, r] = s
                G[r, p] = -s
                A = G.T @ A @ G
    return np.sort(np.diag(A))[::-1]


def random_rotation(rng) -> np.ndarray:
    return Rotation.random(random_state=rng).as_matrix()


def random_chain(rng, n=None, planar=None, inertia=False, random_base=True) -> ChainModel:
    """Random serial chain: 1-6 links, masses U[0.1, 10] kg, lengths U[0.1, 2] m."""
    n = int(rng.integers(1, 7)) if n is None else n
    planar = bool(rng.random() < 0.5) if planar is None else planar
    lengths = rng.uniform(0.1, 2.0, n)
    masses = rng.uniform(0.1, 10.0, n)
    base = np.eye(4)
    if planar:
        axes = [[0.0, 0.0, 1.0]] * n
        dirs = [[np.cos(a), np.sin(a), 0.0] for a in rng.uniform(-np.pi, np.pi, n)]
        if random_base:
            yaw = rng.uniform(-np.pi, np.pi)
            base[:3, :3] = Rotation.from_rotvec([0, 0, yaw]).as_matrix()
            base[:2, 3] = rng.normal(size=2)
    else:
        axes = [v / np.linalg.norm(v) for v in rng.normal(size=(n, 3))]
        dirs = [v / np.linalg.norm(v) for v in rng.normal(size=(n, 3))]
        if random_base:
            base[:3, :3] = random_rotation(rng)
            base[:3, 3] = rng.normal(size=3)
    coms = [L * np.asarray(d) for L, d in zip(lengths, dirs)]
    origins = [np.zeros(3)] + coms[:-1]
    inertias = None
    if inertia:
        inertias = []
        for m, L in zip(masses, lengths):
            A = rng.normal(size=(3, 3))
            inertias.append(m * L**2 / 12.0 * (A @ A.T) / np.trace(A @ A.T))
    return chain_from_arrays(axes, origins, coms, masses, task_dim=2 if planar else 3,
                             inertias=inertias, base_frame=base)


def random_q(rng, model: ChainModel) -> np.ndarray:
    return rng.uniform(-np.pi, np.pi, model.n)


def random_direction(rng, dim: int) -> np.ndarray:
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v)
