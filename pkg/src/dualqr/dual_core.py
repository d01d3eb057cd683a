"""Dual numbers and dual matrices under the rule eps**2 = 0.

A dual matrix ``A = A_s + A_i eps`` is stored as two dense float64 arrays of
identical shape.  Everything downstream works on the two parts separately, so
the container is deliberately thin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SingularStandardPart

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class DualScalar:
    """A dual number ``s + i*eps``."""

    s: float
    i: float = 0.0

    def __add__(self, other):
        other = _as_scalar(other)
        return DualScalar(self.s + other.s, self.i + other.i)

    __radd__ = __add__

    def __sub__(self, other):
        other = _as_scalar(other)
        return DualScalar(self.s - other.s, self.i - other.i)

    def __rsub__(self, other):
        return _as_scalar(other) - self

    def __neg__(self):
        return DualScalar(-self.s, -self.i)

    def __mul__(self, other):
        other = _as_scalar(other)
        return DualScalar(self.s * other.s, self.s * other.i + self.i * other.s)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _as_scalar(other)
        if other.s == 0:
            raise ZeroDivisionError("division by a dual number with zero standard part")
        return DualScalar(self.s / other.s, (self.i * other.s - self.s * other.i) / other.s**2)

    @property
    def appreciable(self) -> bool:
        return self.s != 0

    def __repr__(self):
        return f"DualScalar({self.s!r} + {self.i!r}ε)"


def _as_scalar(x) -> DualScalar:
    if isinstance(x, DualScalar):
        return x
    return DualScalar(float(x), 0.0)


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D array, got {arr.ndim}-D")
    arr.setflags(write=False)
    return arr


class DualMatrix:
    """Dual real matrix with standard part ``standard`` and infinitesimal part ``infinitesimal``.

    Both parts are copied to read-only float64 arrays; entries must be finite.
    """

    __slots__ = ("standard", "infinitesimal")

    def __init__(self, standard, infinitesimal=None):
        s = _frozen(standard)
        i = np.zeros_like(s) if infinitesimal is None else _frozen(infinitesimal)
        if s.shape != i.shape:
            raise ValueError(f"part shapes differ: {s.shape} vs {i.shape}")
        if not (np.isfinite(s).all() and np.isfinite(i).all()):
            raise ValueError("dual matrix entries must be finite")
        i.setflags(write=False)
        object.__setattr__(self, "standard", s)
        object.__setattr__(self, "infinitesimal", i)

    def __setattr__(self, name, value):
        raise AttributeError("DualMatrix is immutable")

    @classmethod
    def identity(cls, n: int) -> "DualMatrix":
        return cls(np.eye(n))

    @classmethod
    def zeros(cls, m: int, n: int) -> "DualMatrix":
        return cls(np.zeros((m, n)))

    @property
    def shape(self) -> tuple[int, int]:
        return self.standard.shape

    @property
    def T(self) -> "DualMatrix":
        return dtranspose(self)

    def __matmul__(self, other):
        return dmul(self, other)

    def __add__(self, other):
        return DualMatrix(self.standard + other.standard, self.infinitesimal + other.infinitesimal)

    def __sub__(self, other):
        return DualMatrix(self.standard - other.standard, self.infinitesimal - other.infinitesimal)

    def __neg__(self):
        return DualMatrix(-self.standard, -self.infinitesimal)

    def __getitem__(self, key):
        return DualMatrix(self.standard[key], self.infinitesimal[key])

    def __eq__(self, other):
        if not isinstance(other, DualMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.standard, other.standard)
            and np.array_equal(self.infinitesimal, other.infinitesimal)
        )

    __hash__ = None

    def entry(self, r: int, c: int) -> DualScalar:
        return DualScalar(float(self.standard[r, c]), float(self.infinitesimal[r, c]))

    def __repr__(self):
        return f"DualMatrix(shape={self.shape},\n  standard={self.standard!r},\n  infinitesimal={self.infinitesimal!r})"


def dmul(a: DualMatrix, b: DualMatrix) -> DualMatrix:
    """Product of dual matrices: ``(A_s B_s) + (A_s B_i + A_i B_s) eps``."""
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"inner dimensions disagree: {a.shape} @ {b.shape}")
    s = a.standard @ b.standard
    i = a.standard @ b.infinitesimal + a.infinitesimal @ b.standard
    return DualMatrix(s, i)


def dtranspose(a: DualMatrix) -> DualMatrix:
    return DualMatrix(a.standard.T, a.infinitesimal.T)


def dinverse(c: DualMatrix) -> DualMatrix:
    """Inverse ``C_s^-1 - C_s^-1 C_i C_s^-1 eps`` of a square dual matrix.

    Raises SingularStandardPart when the reciprocal condition number of C_s
    falls below ``n * machine epsilon``.
    """
    m, n = c.shape
    if m != n:
        raise ValueError(f"dinverse needs a square matrix, got {c.shape}")
    if n == 0:
        return DualMatrix(np.zeros((0, 0)))
    sv = np.linalg.svd(c.standard, compute_uv=False)
    rcond = sv[-1] / sv[0] if sv[0] > 0 else 0.0
    if rcond < n * _EPS:
        raise SingularStandardPart(f"standard part is singular (rcond={rcond:.3e})")
    inv_s = np.linalg.inv(c.standard)
    inv_i = -inv_s @ c.infinitesimal @ inv_s
    return DualMatrix(inv_s, inv_i)


def _strict_lower(x: np.ndarray) -> np.ndarray:
    return np.tril(x, -1)


def structure_residuals(a: DualMatrix, kind: str) -> tuple[float, ...]:
    """Frobenius norms of the defects of a structural property.

    ``orthogonal``/``columns-orthogonal`` return ``(||A_s^T A_s - I||, ||A_s^T A_i + A_i^T A_s||)``;
    ``orthogonal`` additionally requires a square matrix.  ``upper-triangular``
    and ``diagonal`` return the norm of the offending entries of each part.
    """
    s, i = a.standard, a.infinitesimal
    m, n = a.shape
    if kind in ("orthogonal", "diagonal") and m != n:
        raise ValueError(f"kind={kind!r} needs a square matrix, got {a.shape}")
    if kind in ("orthogonal", "columns-orthogonal"):
        if kind == "columns-orthogonal" and m < n:
            raise ValueError(f"columns-orthogonal needs m >= n, got {a.shape}")
        r_s = np.linalg.norm(s.T @ s - np.eye(n))
        r_i = np.linalg.norm(s.T @ i + i.T @ s)
        return float(r_s), float(r_i)
    if kind == "upper-triangular":
        return float(np.linalg.norm(_strict_lower(s))), float(np.linalg.norm(_strict_lower(i)))
    if kind == "diagonal":
        off = ~np.eye(n, dtype=bool)
        return float(np.linalg.norm(s[off])), float(np.linalg.norm(i[off]))
    raise ValueError(f"unknown structure kind {kind!r}")


def random_dual(rng: np.random.Generator, m: int, n: int) -> DualMatrix:
    """GIID dual matrix: both parts standard normal."""
    return DualMatrix(rng.standard_normal((m, n)), rng.standard_normal((m, n)))
