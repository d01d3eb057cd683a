"""Real-matrix kernels consumed by the dual algorithms.

Householder QR and the column-pivoted variant come from LAPACK (``geqrf``,
``geqp3``) through SciPy.  Full Q factors are formed with ``ormqr`` applied to
the identity, which is considerably faster than ``orgqr`` for skinny inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class QRFactorsReal:
    """``A[:, perm] = q @ r``."""

    q: np.ndarray
    r: np.ndarray
    perm: np.ndarray
    rank: int


@dataclass(frozen=True)
class SylvesterSolution:
    x: np.ndarray
    y: np.ndarray
    solvable: bool
    condition_residual: float


@dataclass(frozen=True)
class SketchConfig:
    """Target rank ``k``, oversampling ``p`` (sample rank ``l = k + p``) and RNG seed."""

    target_rank: int
    oversampling: int = 8
    seed: int = 0

    def __post_init__(self):
        if self.target_rank < 1:
            raise ValueError(f"target_rank must be >= 1, got {self.target_rank}")
        if self.oversampling < 0:
            raise ValueError(f"oversampling must be >= 0, got {self.oversampling}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def sample_rank(self) -> int:
        return self.target_rank + self.oversampling


def rank_tolerance(shape, ref: float) -> float:
    return max(shape) * _EPS * ref


def diagonal_rank(r: np.ndarray, ref: float | None = None) -> int:
    """Count diagonal entries with ``|r_jj| > max(m, n) * eps * ref``.

    ``ref`` defaults to the largest diagonal magnitude, which equals ``|r_11|``
    for a pivoted factor.
    """
    d = np.abs(np.diag(r))
    if d.size == 0:
        return 0
    if ref is None:
        ref = d.max()
    if ref == 0:
        return 0
    return int(np.count_nonzero(d > rank_tolerance(r.shape, ref)))


def _sign_normalize(q: np.ndarray, r: np.ndarray, upto: int) -> None:
    # in place: flip column j of q and row j of r where r_jj < 0, j < upto
    d = np.diag(r)[:upto]
    flip = np.flatnonzero(d < 0)
    if flip.size:
        q[:, flip] *= -1
        r[flip, :] *= -1


def _full_q(qr_raw: np.ndarray, tau: np.ndarray) -> np.ndarray:
    m = qr_raw.shape[0]
    if tau.size == 0:
        return np.eye(m)
    eye = np.eye(m, order="F")
    lwork = max(1, m * 64)
    q, _, info = lapack.dormqr("L", "N", qr_raw[:, : tau.size], tau, eye, lwork=lwork, overwrite_c=1)
    if info != 0:
        raise RuntimeError(f"dormqr failed with info={info}")
    return q


def qr_real(a, pivot: bool = False, thin: bool = False) -> QRFactorsReal:
    """Householder QR, optionally with column pivoting.

    thin=True returns ``q`` of shape m x min(m, n) and forces a positive
    diagonal on the leading ``rank`` block of ``r``.  thin=False returns a
    square m x m ``q`` with signs as LAPACK produces them.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2:
        raise ValueError("qr_real expects a 2-D array")
    m, n = a.shape
    if not np.isfinite(a).all():
        raise ValueError("qr_real input contains non-finite values")
    kmin = min(m, n)
    if kmin == 0:
        q = np.eye(m)[:, : (kmin if thin else m)]
        return QRFactorsReal(q, np.zeros((q.shape[1], n)), np.arange(n), 0)

    if thin:
        if pivot:
            q, r, perm = sla.qr(a, mode="economic", pivoting=True)
        else:
            q, r = sla.qr(a, mode="economic")
            perm = np.arange(n)
        q = np.ascontiguousarray(q)
        r = np.triu(r)
    else:
        if pivot:
            (raw, tau), r, perm = sla.qr(a, mode="raw", pivoting=True)
        else:
            (raw, tau), r = sla.qr(a, mode="raw")
            perm = np.arange(n)
        q = _full_q(raw, tau)
        r = np.triu(r)
        if r.shape[0] < m:
            r = np.vstack([r, np.zeros((m - r.shape[0], n))])

    ref = abs(r[0, 0]) if pivot else None
    rank = diagonal_rank(r, ref)
    if thin:
        _sign_normalize(q, r, rank)
    return QRFactorsReal(q, r, np.asarray(perm, dtype=np.intp), rank)


def pinv(a) -> np.ndarray:
    """Moore-Penrose inverse from the SVD with cutoff ``max(m, n) * eps * sigma_1``."""
    a = np.asarray(a, dtype=float)
    m, n = a.shape
    if m == 0 or n == 0:
        return np.zeros((n, m))
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if s[0] == 0:
        return np.zeros((n, m))
    keep = s > max(m, n) * _EPS * s[0]
    return (vt[keep].T / s[keep]) @ u[:, keep].T


def sylvester_general(a, b, c, z=None, w=None, tol: float | None = None) -> SylvesterSolution:
    """Solve ``A X - Y B = C`` with the pseudoinverse-based general solution.

    The system is consistent iff ``(I - A A+) C (I - B+ B) = 0``.  ``z`` (m x l)
    and ``w`` (k x n) are the free parameters of the solution family, zero by
    default.  ``tol`` defaults to ``sqrt(eps) * (1 + ||C||_F)``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, k = a.shape
    l, n = b.shape
    if c.shape != (m, n):
        raise ValueError(f"C must be {(m, n)}, got {c.shape}")
    z = np.zeros((m, l)) if z is None else np.asarray(z, dtype=float)
    w = np.zeros((k, n)) if w is None else np.asarray(w, dtype=float)
    if z.shape != (m, l) or w.shape != (k, n):
        raise ValueError("free parameters have wrong shape")

    ap = pinv(a)
    bp = pinv(b)
    left = np.eye(m) - a @ ap
    right = np.eye(n) - bp @ b
    cond = float(np.linalg.norm(left @ c @ right))
    if tol is None:
        tol = np.sqrt(_EPS) * (1.0 + np.linalg.norm(c))

    x = ap @ c + ap @ z @ b + (np.eye(k) - ap @ a) @ w
    y = -left @ c @ bp + z - left @ z @ b @ bp
    return SylvesterSolution(x, y, cond <= tol, cond)


def gaussian_sketch(rows: int, cols: int, seed: int) -> np.ndarray:
    """GIID matrix drawn row-major from PCG64 keyed by ``seed``."""
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.standard_normal((rows, cols))


def rqrcp(a, cfg: SketchConfig) -> QRFactorsReal:
    """Single-sample randomized QRCP.

    Pivots are chosen by QRCP of the sketch ``Omega @ A`` (Omega is l x m
    GIID, l clamped to m); the first k permuted columns are orthogonalized
    and the remaining k rows of R are filled as ``Q^T A[:, perm[k:]]``.
    """
    a = np.asarray(a, dtype=float)
    m, n = a.shape
    k = cfg.target_rank
    if k > min(m, n):
        raise ValueError(f"target rank {k} exceeds min(m, n) = {min(m, n)}")
    l = min(cfg.sample_rank, m)
    omega = gaussian_sketch(l, m, cfg.seed)
    sample = omega @ a
    _, perm = sla.qr(sample, mode="r", pivoting=True)
    perm = np.asarray(perm, dtype=np.intp)
    ap = a[:, perm]
    q, r11 = sla.qr(ap[:, :k], mode="economic")
    q = np.ascontiguousarray(q)
    r11 = np.triu(r11)
    _sign_normalize(q, r11, k)
    r12 = q.T @ ap[:, k:]
    r = np.hstack([r11, r12])
    rank = diagonal_rank(r11)
    return QRFactorsReal(q, r, perm, rank)
