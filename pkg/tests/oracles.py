"""Reference implementations used to check the library.

Nothing here imports purfit.  Tables are plain 3-axis arrays indexed
(y, s, x); the constraint rows are written out by explicit loops and the
constrained KL minimum is found by Newton's method on the null space of the
constraint matrix, so agreement with IPF is an independent check.
"""

import itertools

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog


def pur_system(f, kinds=("parity", "utility", "realism")):
    """Rows C and targets b of the constraints, built cell by cell."""
    ny, ns, nx = f.shape
    cells = list(itertools.product(range(ny), range(ns), range(nx)))
    fy = f.sum(axis=(1, 2))
    fs = f.sum(axis=(0, 2))
    rows, rhs = [], []
    if "parity" in kinds:
        for y, s in itertools.product(range(ny), range(ns)):
            rows.append([float(c[0] == y and c[1] == s) for c in cells])
            rhs.append(fy[y] * fs[s])
    if "utility" in kinds:
        for y, x in itertools.product(range(ny), range(nx)):
            rows.append([float(c[0] == y and c[2] == x) for c in cells])
            rhs.append(f[y, :, x].sum())
    if "realism" in kinds:
        for s, x in itertools.product(range(ns), range(nx)):
            rows.append([float(c[1] == s and c[2] == x) for c in cells])
            rhs.append(f[:, s, x].sum())
    return np.array(rows), np.array(rhs)


def interior_point(C, b):
    """Feasible point maximizing its smallest cell, or None if infeasible.

    Returns ``(p, margin)``; ``margin`` is the smallest cell of ``p``.
    """
    m, n = C.shape
    # variables (p, t): maximize t subject to C p = b, p >= t
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-np.eye(n), np.ones((n, 1))])
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=np.zeros(n),
        A_eq=np.hstack([C, np.zeros((m, 1))]),
        b_eq=b,
        bounds=[(0, None)] * n + [(None, None)],
        method="highs",
    )
    if res.status != 0:
        return None, -np.inf
    return res.x[:n], res.x[-1]


def is_feasible(C, b):
    res = linprog(np.zeros(C.shape[1]), A_eq=C, b_eq=b,
                  bounds=[(0, None)] * C.shape[1], method="highs")
    return res.status == 0


def kl_minimizer(q0, C, b, tol=1e-14, max_iter=200):
    """argmin_p sum p log(p / q0) subject to C p = b, p > 0.

    Damped Newton on p = p0 + N z, with N a basis of ker C and p0 a strictly
    interior feasible point.  Requires q0 > 0 and a feasible set with
    interior.
    """
    q0 = np.asarray(q0, float).reshape(-1)
    p0, margin = interior_point(C, b)
    if p0 is None or margin <= 0:
        raise ValueError("constraint set has no strictly positive point")
    # polish onto the affine subspace
    p0 = p0 - np.linalg.lstsq(C, C @ p0 - b, rcond=None)[0]
    N = null_space(C)
    z = np.zeros(N.shape[1])

    def obj(z):
        p = p0 + N @ z
        return np.sum(p * np.log(p / q0)) if np.all(p > 0) else np.inf

    for _ in range(max_iter):
        p = p0 + N @ z
        g = N.T @ (np.log(p / q0) + 1.0)
        if np.linalg.norm(g, np.inf) < tol:
            break
        H = N.T @ (N / p[:, None])
        step = np.linalg.solve(H, -g)
        t, f0 = 1.0, obj(z)
        while obj(z + t * step) > f0 + 1e-4 * t * (g @ step) and t > 1e-12:
            t *= 0.5
        z = z + t * step
    return p0 + N @ z


def kl(p, q):
    p, q = np.asarray(p, float).ravel(), np.asarray(q, float).ravel()
    m = p > 0
    if np.any(q[m] == 0):
        return np.inf
    return float(np.sum(p[m] * np.log(p[m] / q[m])))


def random_positive(rng, shape, concentration=1.0):
    return rng.dirichlet(np.full(int(np.prod(shape)), concentration)).reshape(shape)
