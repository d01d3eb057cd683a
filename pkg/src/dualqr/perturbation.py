"""First-order perturbation of the thin QR Q-factor.

Viewing ``A_s + A_i eps`` as a perturbed matrix, ``Q_i`` from the thin dual
QR is the exact first-order change of Q.  This module compares it with the
finite difference of two real thin QR factors and with the two classical
norm bounds

    ||dQ||_F <~ (1 + sqrt 2) ||A_s^+||_2 ||A_i||_F     (Stewart)
    ||dQ||_F <~ sqrt 2 ||A_s^+||_2 ||A_i||_F           (Sun)
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .dual_core import DualMatrix
from .dual_qr import tdqr
from .errors import RankDeficient
from .real_backend import qr_real

TABLE_TAUS = (1e-1, 1e-2, 1e-5, 1e-8)


@dataclass(frozen=True)
class PerturbationRecord:
    tau: float
    norm_ai: float
    norm_dq_empirical: float
    norm_qi: float
    bound_stewart: float
    bound_sun: float

    def as_dict(self) -> dict:
        return asdict(self)


def _pinv_2norm(a_s: np.ndarray) -> float:
    m, n = a_s.shape
    sv = np.linalg.svd(a_s, compute_uv=False)
    if m < n or sv[-1] <= max(m, n) * np.finfo(float).eps * sv[0]:
        raise RankDeficient("standard part must have full column rank")
    return 1.0 / sv[-1]


def bounds(a_s, a_i) -> tuple[float, float, float]:
    """Return ``(bound_stewart, bound_sun, ||a_i||_F)``."""
    a_s = np.asarray(a_s, dtype=float)
    a_i = np.asarray(a_i, dtype=float)
    inv2 = _pinv_2norm(a_s)
    nai = float(np.linalg.norm(a_i))
    return float((1 + math.sqrt(2)) * inv2 * nai), float(math.sqrt(2) * inv2 * nai), nai


def _thin_q(a: np.ndarray) -> np.ndarray:
    f = qr_real(a, thin=True)
    if f.rank < a.shape[1]:
        raise RankDeficient("perturbed matrix lost full column rank", rank=f.rank, required=a.shape[1])
    return f.q


def empirical_record(a_s, a_i_base, tau: float) -> PerturbationRecord:
    """One row comparing ``||Q(A_s + tau A_i) - Q(A_s)||_F`` with ``||Q_i||_F``.

    Both real Q factors are sign-normalized to a positive R diagonal.
    """
    a_s = np.asarray(a_s, dtype=float)
    a_i = tau * np.asarray(a_i_base, dtype=float)
    stewart, sun, nai = bounds(a_s, a_i)
    dq = float(np.linalg.norm(_thin_q(a_s + a_i) - _thin_q(a_s)))
    qi = float(np.linalg.norm(tdqr(DualMatrix(a_s, a_i)).q.infinitesimal))
    return PerturbationRecord(float(tau), nai, dq, qi, stewart, sun)


def table(a_s, a_i_base, taus=TABLE_TAUS) -> list[PerturbationRecord]:
    return [empirical_record(a_s, a_i_base, t) for t in taus]
