"""QR decompositions of dual matrices.

Every variant factors the standard part with a real kernel and then solves
``A_i P_s = Q_s R_i + Q_i R_s`` for the infinitesimal factors.  The free
part of the solution is a skew-symmetric matrix ``P`` whose strict lower
triangle is fixed column by column by requiring ``R_i`` to be upper
triangular; see :func:`build_skew_p`.

Variants
--------
dqr, dqrcp
    Full m x m dual-orthogonal Q, ``Q_i = Q_s P``.
tdqr, tdqrcp
    Thin Q with ``min(m, n)`` columns, positive ``diag(R_s)``,
    ``Q_i = (I - Q_s Q_s^T) A_i P_s R_s^+ + Q_s P``.
rdqrcp
    Truncated rank-k factors from a randomized sketch of ``A_s``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .dual_core import DualMatrix
from .errors import DegenerateDiagonal, ExistenceConditionViolated, RankDeficient
from .real_backend import SketchConfig, pinv, qr_real, rank_tolerance, rqrcp

VARIANTS = ("full", "full-pivoted", "thin", "thin-pivoted", "randomized-pivoted")


@dataclass(frozen=True)
class SkewGenerator:
    p: np.ndarray
    rhs: np.ndarray
    dim: int


@dataclass(frozen=True)
class DualQRFactors:
    """``A[:, perm] = Q R`` in dual arithmetic."""

    q: DualMatrix
    r: DualMatrix
    perm: np.ndarray
    rank: int
    variant: str
    generator: SkewGenerator = field(repr=False)
    existence_residual: float = 0.0

    @property
    def perm_matrix(self) -> np.ndarray:
        n = self.perm.size
        pm = np.zeros((n, n))
        pm[self.perm, np.arange(n)] = 1.0
        return pm


def existence_tolerance(a_i: np.ndarray) -> float:
    return 1e-8 * (1.0 + float(np.linalg.norm(a_i)))


def build_skew_p(rhs, r_s, rank: int, tol: float | None = None) -> SkewGenerator:
    """Skew-symmetric ``P`` making ``rhs - P @ r_s`` upper triangular.

    Column ``j < rank`` of the strict lower triangle is

        p_j[j+1:] = (b_j[j+1:] - sum_{t<j} r_s[t, j] p_t[j+1:]) / r_s[j, j]

    and later columns are zero.  The upper triangle is the negated mirror, so
    ``p + p.T`` vanishes exactly.  ``rhs`` has ``d`` rows and ``P`` is d x d.
    """
    rhs = np.asarray(rhs, dtype=float)
    r_s = np.asarray(r_s, dtype=float)
    d = rhs.shape[0]
    if r_s.shape[0] != d or r_s.shape[1] != rhs.shape[1]:
        raise ValueError(f"rhs {rhs.shape} and r_s {r_s.shape} are incompatible")
    diag = np.abs(np.diag(r_s))
    k = min(rank, diag.size)
    if tol is None:
        tol = rank_tolerance(r_s.shape, diag.max()) if diag.size else 0.0
    small = np.flatnonzero(diag[:k] <= tol)
    if small.size:
        j = int(small[0])
        raise DegenerateDiagonal(
            f"|r_s[{j},{j}]| = {diag[j]:.3e} is below tolerance {tol:.3e} inside rank {k}",
            index=j,
            value=float(diag[j]),
        )

    low = np.zeros((d, d), order="F")
    for j in range(min(k, d - 1)):
        acc = rhs[j + 1 :, j] - low[j + 1 :, :j] @ r_s[:j, j]
        low[j + 1 :, j] = acc / r_s[j, j]
    return SkewGenerator(low - low.T, rhs, d)


def _full_variant(a: DualMatrix, pivot: bool) -> DualQRFactors:
    a_s, a_i = a.standard, a.infinitesimal
    m, n = a.shape
    f = qr_real(a_s, pivot=pivot, thin=False)
    q_s, r_s, perm, rank = f.q, f.r, f.perm, f.rank
    a_ip = a_i[:, perm]
    b = q_s.T @ a_ip
    gen = build_skew_p(b, r_s, rank)
    p = gen.p
    kmin = min(m, n)

    r_i = b - p[:, :kmin] @ r_s[:kmin, :]
    _check_and_clear_lower(r_i, a_i)

    # P vanishes outside its first `rank` rows and columns
    k = min(rank, m)
    q_i = q_s[:, :k] @ p[:k, :]
    if k < m:
        q_i[:, :k] += q_s[:, k:] @ p[k:, :k]

    return DualQRFactors(
        DualMatrix(q_s, q_i),
        DualMatrix(r_s, r_i),
        perm,
        rank,
        "full-pivoted" if pivot else "full",
        gen,
    )


def _check_and_clear_lower(r_i: np.ndarray, a_i: np.ndarray) -> None:
    lower = np.tril(r_i, -1)
    resid = float(np.linalg.norm(lower))
    tol = existence_tolerance(a_i)
    if resid > tol:
        raise ExistenceConditionViolated(
            f"infinitesimal part cannot be made upper triangular (residual {resid:.3e} > {tol:.3e})",
            residual=resid,
            tolerance=tol,
        )
    r_i[np.tril_indices(r_i.shape[0], -1, r_i.shape[1])] = 0.0


def _right_pinv_product(x: np.ndarray, r_s: np.ndarray) -> np.ndarray:
    """``x @ pinv(r_s)`` for a k x n ``r_s`` of full row rank."""
    k, n = r_s.shape
    if k == n:
        # x R^-1 = (R^-T x^T)^T
        return sla.solve_triangular(r_s, x.T, trans="T", lower=False).T
    u, t = np.linalg.qr(r_s.T)
    # R = T^T U^T, so R^+ = U T^-T
    return sla.solve_triangular(t, (x @ u).T, trans="N", lower=False).T


def _projected_variant(q_s, r_s, perm, rank, a_i, variant, check_existence=False, strict=True):
    m = q_s.shape[0]
    k = q_s.shape[1]
    a_ip = a_i[:, perm]
    b = q_s.T @ a_ip
    gen = build_skew_p(b, r_s, rank)
    p = gen.p

    exist = 0.0
    if check_existence:
        exist = existence_residual(q_s, r_s, a_ip)
        tol = existence_tolerance(a_i)
        if strict and exist > tol:
            raise ExistenceConditionViolated(
                f"existence condition fails: residual {exist:.3e} > tolerance {tol:.3e}",
                residual=exist,
                tolerance=tol,
            )

    r_i = b - p @ r_s
    r_i[np.tril_indices(k, -1, r_i.shape[1])] = 0.0

    # (I - Q Q^T) A_i P_s R^+ = A_i P_s R^+ - Q (B R^+)
    q_i = _right_pinv_product(a_ip, r_s) - q_s @ _right_pinv_product(b, r_s)
    q_i += q_s @ p
    return DualQRFactors(
        DualMatrix(q_s, q_i), DualMatrix(r_s, r_i), perm, rank, variant, gen, exist
    )


def _thin_variant(a: DualMatrix, pivot: bool, truncate: bool = False) -> DualQRFactors:
    m, n = a.shape
    f = qr_real(a.standard, pivot=pivot, thin=True)
    need = min(m, n)
    variant = "thin-pivoted" if pivot else "thin"
    if f.rank < need:
        if not truncate or f.rank == 0:
            raise RankDeficient(
                f"standard part has numerical rank {f.rank} < {need}", rank=f.rank, required=need
            )
        r = f.rank
        return _projected_variant(
            f.q[:, :r], f.r[:r, :], f.perm, r, a.infinitesimal, variant, check_existence=True
        )
    return _projected_variant(f.q, f.r, f.perm, f.rank, a.infinitesimal, variant)


def dqr(a: DualMatrix) -> DualQRFactors:
    """Full QR of a dual matrix: ``A = Q R`` with Q m x m dual-orthogonal."""
    return _full_variant(a, pivot=False)


def dqrcp(a: DualMatrix) -> DualQRFactors:
    """Full QR with column pivoting chosen on the standard part."""
    return _full_variant(a, pivot=True)


def tdqr(a: DualMatrix) -> DualQRFactors:
    """Thin QR; requires ``rank(A_s) = min(m, n)``.

    For wide input the thin standard factors are m x m and m x n and the
    projector term uses the pseudoinverse of the trapezoidal ``R_s``.
    """
    return _thin_variant(a, pivot=False)


def tdqrcp(a: DualMatrix, truncate: bool = False) -> DualQRFactors:
    """Thin QR with column pivoting on the standard part.

    With ``truncate`` a rank-deficient standard part is not an error: the
    factors are cut to the numerical rank r (Q is m x r, R is r x n) and
    exist under the same condition as the randomized variant, which is
    checked.
    """
    return _thin_variant(a, pivot=True, truncate=truncate)


def rdqrcp(a: DualMatrix, cfg: SketchConfig, strict: bool = True) -> DualQRFactors:
    """Randomized truncated QR with column pivoting on the standard part.

    The factors exist iff ``(I - Q_s Q_s^T) A_i P_s (I - R_s^+ R_s) = 0``.
    With ``strict`` a violation raises ExistenceConditionViolated; otherwise
    the factors are returned with the residual recorded in
    ``existence_residual`` (the coupling equation then holds only up to it).
    """
    f = rqrcp(a.standard, cfg)
    k = cfg.target_rank
    if f.rank < k:
        raise RankDeficient(
            f"sampled columns have numerical rank {f.rank} < target rank {k}",
            rank=f.rank,
            required=k,
        )
    return _projected_variant(
        f.q, f.r, f.perm, k, a.infinitesimal, "randomized-pivoted",
        check_existence=True, strict=strict,
    )


def existence_residual(q_s, r_s, a_i_permuted) -> float:
    """``||(I - Q_s Q_s^T) A_i P_s (I - R_s^+ R_s)||_F``."""
    q_s = np.asarray(q_s, dtype=float)
    r_s = np.asarray(r_s, dtype=float)
    x = np.asarray(a_i_permuted, dtype=float)
    w = x - q_s @ (q_s.T @ x)
    w = w - (w @ pinv(r_s)) @ r_s
    return float(np.linalg.norm(w))


def factor_residuals(a: DualMatrix, f: DualQRFactors) -> dict[str, float]:
    """Invariant residuals of a factorization.

    Reconstruction is relative to ``||A_s||_F``, coupling to ``||A_i||_F + 1``;
    orthogonality and triangularity defects are absolute.
    """
    a_s = a.standard[:, f.perm]
    a_i = a.infinitesimal[:, f.perm]
    qs, qi = f.q.standard, f.q.infinitesimal
    rs, ri = f.r.standard, f.r.infinitesimal
    ns = float(np.linalg.norm(a_s))
    k = qs.shape[1]
    return {
        "reconstruction": float(np.linalg.norm(a_s - qs @ rs)) / (ns if ns > 0 else 1.0),
        "coupling": float(np.linalg.norm(a_i - qs @ ri - qi @ rs))
        / (float(np.linalg.norm(a_i)) + 1.0),
        "orthogonality_standard": float(np.linalg.norm(qs.T @ qs - np.eye(k))),
        "orthogonality_infinitesimal": float(np.linalg.norm(qs.T @ qi + qi.T @ qs)),
        "lower_standard": float(np.linalg.norm(np.tril(rs, -1))),
        "lower_infinitesimal": float(np.linalg.norm(np.tril(ri, -1))),
        "skew_defect": float(np.abs(f.generator.p + f.generator.p.T).max(initial=0.0)),
    }


DECOMPOSITIONS = {
    "dqr": dqr,
    "dqrcp": dqrcp,
    "tdqr": tdqr,
    "tdqrcp": tdqrcp,
}
