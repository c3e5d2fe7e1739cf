"""Reflection matrices of the rank-routed gap process and the associated
Skorokhod problem on discrete time grids.

The reflection matrix R has unit diagonal, R[i, i+1] = -1/2, R[i, i-1] = -1/2
for i >= 3 (1-based) and R[2, 1] = -1. Its inverse is known in closed form:
the first row is (K, K-1, ..., 1) and row i >= 2 has entries 2(K-i+1) left of
the diagonal and 2(K-j+1) from the diagonal on. The dispersion matrix A is
lower bidiagonal with sqrt(2) on the diagonal and -sqrt(2) below; the
covariance structure satisfies 2AA' = R Lam + Lam R' exactly with
Lam = diag(AA') = diag(2, 4, ..., 4).

solve() computes the constrained version (eta, y) of an input path x with
x(0) >= 0: y = x + M eta >= 0, eta nondecreasing from 0, and eta_i grows
only while y_i sits at zero. Inputs are grid functions evaluated at grid
points; the solution is the exact discrete fixed point on that grid.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "ModelMatrices",
    "MClassReport",
    "DiscretePath",
    "SkorokhodSolution",
    "build_matrices",
    "check_m_class",
    "solve",
    "r_inverse_apply",
    "write_path_csv",
    "read_path_csv",
    "write_solution_csv",
]

SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ModelMatrices:
    K: int
    R: np.ndarray
    A: np.ndarray
    Lam: np.ndarray
    R_inv: np.ndarray


def build_matrices(K: int) -> ModelMatrices:
    if not (isinstance(K, int) and K >= 1):
        raise ValueError(f"K must be a positive integer, got {K!r}")
    R = np.eye(K)
    for i in range(K - 1):
        R[i, i + 1] = -0.5
    for i in range(2, K):
        R[i, i - 1] = -0.5
    if K >= 2:
        R[1, 0] = -1.0
    A = np.zeros((K, K))
    for i in range(K):
        A[i, i] = SQRT2
        if i >= 1:
            A[i, i - 1] = -SQRT2
    # diag(AA') = (2, 4, ..., 4) exactly; building it from float sqrt(2)
    # products would pick up one-ulp noise
    Lam = np.diag([2.0] + [4.0] * (K - 1))
    # closed-form inverse, integer valued
    R_inv = np.empty((K, K))
    R_inv[0] = np.arange(K, 0, -1, dtype=float)
    for i in range(2, K + 1):
        for j in range(1, K + 1):
            R_inv[i - 1, j - 1] = 2.0 * ((K - i + 1) if j < i else (K - j + 1))
    return ModelMatrices(K=K, R=R, A=A, Lam=Lam, R_inv=R_inv)


def r_inverse_apply(m: ModelMatrices, v: np.ndarray) -> np.ndarray:
    """R^-1 v via the stored closed-form inverse (no factorization)."""
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != m.K:
        raise ValueError(f"vector length {v.shape[-1]} != K={m.K}")
    return v @ m.R_inv.T


@dataclass(frozen=True)
class MClassReport:
    ok: bool
    reason: str
    spectral_estimate: float
    certified_bound: float

    def __bool__(self) -> bool:
        return self.ok


def _certified_radius_bound(Q: np.ndarray, squarings: int = 8) -> float:
    """Upper bound on the spectral radius: min_j ||Q^(2^j)||_inf^(1/2^j).

    Rigorous for any matrix; log-scaled squaring avoids overflow. The plain
    row-sum bound (j=0) is too weak for the model matrices, whose Q has unit
    row sums, but powers contract.
    """
    B = np.abs(Q).astype(float)
    best = float(B.sum(axis=1).max())
    if best == 0.0:
        return 0.0
    log_scale = 0.0
    m = 1
    for _ in range(squarings):
        s = B.sum(axis=1).max()
        if s == 0.0:
            return 0.0
        B = (B / s) @ (B / s)
        log_scale = 2.0 * (log_scale + math.log(s))
        m *= 2
        norm = B.sum(axis=1).max()
        if norm == 0.0:
            return 0.0
        best = min(best, math.exp((log_scale + math.log(norm)) / m))
    return best


def check_m_class(M: np.ndarray, power_iters: int = 200) -> MClassReport:
    """Certify M = I - Q' with Q >= 0, zero diagonal, spectral radius < 1.

    The radius is estimated by power iteration and certified by the normed
    powers bound; if the estimate says < 1 but the certificate disagrees the
    matrix is rejected.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return MClassReport(False, f"not a square matrix: shape {M.shape}", math.nan, math.nan)
    K = M.shape[0]
    Q = (np.eye(K) - M).T
    if np.any(np.abs(np.diag(Q)) > 0.0):
        return MClassReport(False, "diagonal of M is not identically 1", math.nan, math.nan)
    if np.any(Q < 0.0):
        i, j = np.argwhere(Q < 0.0)[0]
        return MClassReport(
            False, f"off-diagonal M[{j},{i}] > 0 (Q has a negative entry)", math.nan, math.nan
        )
    # power iteration on the nonnegative matrix
    v = np.ones(K)
    est = 0.0
    for _ in range(power_iters):
        w = Q @ v
        nrm = float(np.max(w))
        if nrm == 0.0:
            est = 0.0
            break
        new_est = nrm
        w = w / nrm
        if abs(new_est - est) <= 1e-10 * max(new_est, 1e-300):
            v, est = w, new_est
            break
        v, est = w, new_est
    cert = _certified_radius_bound(Q)
    if cert < 1.0:
        return MClassReport(True, "", est, cert)
    if est < 1.0:
        reason = (
            f"spectral radius estimate {est:.6g} < 1 but certified bound "
            f"{cert:.6g} >= 1; rejected conservatively"
        )
    else:
        reason = f"spectral radius >= 1 (estimate {est:.6g}, certified bound {cert:.6g})"
    return MClassReport(False, reason, est, cert)


@dataclass(frozen=True)
class DiscretePath:
    """A vector path sampled on a strictly increasing grid starting at 0."""

    t: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != t.shape[0]:
            raise ValueError(f"values shape {v.shape} does not match grid length {t.shape[0]}")
        if t.shape[0] < 1 or np.any(np.diff(t) <= 0.0):
            raise ValueError("time grid must be nonempty and strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)

    @property
    def K(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class SkorokhodSolution:
    x: DiscretePath
    eta: DiscretePath
    y: DiscretePath
    iterations: int
    residual: float


def _solve_grid(x, Q, tol, max_iter):
    """Least fixed point of eta = runmax(Q' eta - x)+ on the grid.

    x has shape (..., T, K); row t of the trailing 2-d block is x(t)', so
    (Q' eta(t))' = eta(t)' Q. Iteration from zero is monotone increasing
    and converges geometrically at the spectral radius of Q.
    """
    eta = np.zeros_like(x)
    work = np.empty_like(x)
    change = math.inf
    for it in range(1, max_iter + 1):
        np.matmul(eta, Q, out=work)
        work -= x
        np.maximum.accumulate(work, axis=-2, out=work)
        np.maximum(work, 0.0, out=work)
        change = float(np.max(work - eta)) if work.size else 0.0
        eta, work = work, eta
        if change < tol:
            return eta, it, change
    raise RuntimeError(
        f"pushing-term iteration exhausted {max_iter} iterations, last sup-change {change:.3e}"
    )


def default_iteration_budget(K: int, radius: float) -> int:
    return max(50, math.ceil(25.0 * K / max(1.0 - radius, 1e-6)))


def solve(
    x: DiscretePath,
    M: np.ndarray,
    tol: float = 1e-12,
    max_iter: int | None = None,
) -> SkorokhodSolution:
    """Solve the reflection problem for input x and constraint matrix M."""
    M = np.asarray(M, dtype=float)
    rep = check_m_class(M)
    if not rep.ok:
        raise ValueError(f"constraint matrix rejected: {rep.reason}")
    if M.shape[0] != x.K:
        raise ValueError(f"matrix is {M.shape[0]}x{M.shape[0]} but path has K={x.K}")
    if np.any(x.values[0] < 0.0):
        raise ValueError("x(0) must be componentwise nonnegative")
    Q = (np.eye(x.K) - M).T
    if max_iter is None:
        max_iter = default_iteration_budget(x.K, rep.certified_bound)
    eta, iters, change = _solve_grid(x.values, Q, tol, max_iter)
    y = x.values + eta @ M.T
    return SkorokhodSolution(
        x=x,
        eta=DiscretePath(t=x.t, values=eta),
        y=DiscretePath(t=x.t, values=y),
        iterations=iters,
        residual=change,
    )


def write_path_csv(path: DiscretePath, dest) -> None:
    dest = Path(dest)
    with dest.open("w", newline="\n") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"x{i + 1}" for i in range(path.K)])
        for tk, row in zip(path.t, path.values):
            w.writerow([repr(float(tk))] + [repr(float(v)) for v in row])


def read_path_csv(src) -> DiscretePath:
    src = Path(src)
    with src.open(newline="") as fh:
        rows = list(csv.reader(fh))
    data = np.array([[float(v) for v in row] for row in rows[1:]])
    return DiscretePath(t=data[:, 0], values=data[:, 1:])


def write_solution_csv(sol: SkorokhodSolution, stem) -> tuple[Path, Path]:
    """Write the pushing term and constrained path as <stem>.eta.csv, <stem>.y.csv."""
    stem = Path(stem)
    eta_file = stem.with_name(stem.name + ".eta.csv")
    y_file = stem.with_name(stem.name + ".y.csv")
    write_path_csv(sol.eta, eta_file)
    write_path_csv(sol.y, y_file)
    return eta_file, y_file
