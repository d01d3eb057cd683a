"""Dual Moore-Penrose generalized inverse from the thin dual QR."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .dual_core import DualMatrix, dmul, dtranspose
from .dual_qr import tdqr
from .errors import RankDeficient

CONDITIONS = ("AGA=A", "GAG=G", "(AG)^T=AG", "(GA)^T=GA")


@dataclass(frozen=True)
class PenroseReport:
    """Per-part Frobenius defects, one ``(standard, infinitesimal)`` pair per condition."""

    residuals: tuple[tuple[float, float], ...]

    def max(self) -> float:
        return max(max(pair) for pair in self.residuals)

    def as_dict(self) -> dict:
        return {
            name: {"standard": s, "infinitesimal": i}
            for name, (s, i) in zip(CONDITIONS, self.residuals)
        }


def _tall_dmpgi(a: DualMatrix) -> DualMatrix:
    f = tdqr(a)
    qs, qi = f.q.standard, f.q.infinitesimal
    rs, ri = f.r.standard, f.r.infinitesimal
    # R_s^-1 Q_s^T and R_s^-1 Q_i^T via triangular solves
    g_s = sla.solve_triangular(rs, qs.T)
    g_i = sla.solve_triangular(rs, qi.T) - sla.solve_triangular(rs, ri @ g_s)
    return DualMatrix(g_s, g_i)


def dmpgi(a: DualMatrix) -> DualMatrix:
    """``A^+ = R_s^-1 Q_s^T + (R_s^-1 Q_i^T - R_s^-1 R_i R_s^-1 Q_s^T) eps``.

    Needs a full-column-rank standard part.  Wide input with full row rank is
    handled through ``(A^T)^+ = (A^+)^T``.
    """
    m, n = a.shape
    if m >= n:
        try:
            return _tall_dmpgi(a)
        except RankDeficient:
            if m != n:
                raise
    if m <= n:
        try:
            return dtranspose(_tall_dmpgi(dtranspose(a)))
        except RankDeficient as exc:
            raise RankDeficient(
                "standard part has neither full column nor full row rank",
                rank=exc.rank,
                required=min(m, n),
            ) from None
    raise AssertionError("unreachable")


def penrose_residuals(a: DualMatrix, g: DualMatrix) -> PenroseReport:
    m, n = a.shape
    if g.shape != (n, m):
        raise ValueError(f"G must be {(n, m)} for A of shape {a.shape}, got {g.shape}")
    ag = dmul(a, g)
    ga = dmul(g, a)
    pairs = (
        (dmul(ag, a), a),
        (dmul(ga, g), g),
        (dtranspose(ag), ag),
        (dtranspose(ga), ga),
    )
    res = tuple(
        (
            float(np.linalg.norm(lhs.standard - rhs.standard)),
            float(np.linalg.norm(lhs.infinitesimal - rhs.infinitesimal)),
        )
        for lhs, rhs in pairs
    )
    return PenroseReport(res)

