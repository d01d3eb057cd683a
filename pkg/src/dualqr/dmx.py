"""Plain-text ``.dmx`` format for dual matrices.

::

    dmx 1 <m> <n>
    <m rows of the standard part>

    <m rows of the infinitesimal part>

Values are whitespace-separated decimals written with 17 significant
digits, which round-trips every float64 exactly.
"""

from __future__ import annotations

import math
import os
import warnings

import numpy as np

from .dual_core import DualMatrix
from .errors import ParseError

VERSION = 1


def format_dmx(a: DualMatrix) -> str:
    m, n = a.shape
    row = " ".join(["%.17g"] * n)
    lines = [f"dmx {VERSION} {m} {n}"]
    lines += [row % tuple(r) for r in a.standard.tolist()]
    lines.append("")
    lines += [row % tuple(r) for r in a.infinitesimal.tolist()]
    return "\n".join(lines) + "\n"


def write_dmx(path, a: DualMatrix) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_dmx(a))


def _parse_header(line: str) -> tuple[int, int]:
    toks = line.split()
    if not toks or toks[0] != "dmx":
        raise ParseError("expected header 'dmx <version> <m> <n>'", line=1, column=1)
    if len(toks) != 4:
        raise ParseError(f"header needs 4 fields, found {len(toks)}", line=1, column=1)
    try:
        version, m, n = (int(t) for t in toks[1:])
    except ValueError:
        raise ParseError("header fields must be integers", line=1, column=line.index(toks[1]) + 1) from None
    if version != VERSION:
        raise ParseError(f"unsupported version {version}", line=1, column=line.index(toks[1]) + 1)
    if m < 0 or n < 0:
        raise ParseError("negative dimension in header", line=1)
    return m, n


def _parse_row(text: str, lineno: int, n: int) -> list[float]:
    values = []
    pos = 0
    for tok in text.split():
        col = text.index(tok, pos) + 1
        pos = col - 1 + len(tok)
        try:
            v = float(tok)
        except ValueError:
            raise ParseError(f"not a number: {tok!r}", line=lineno, column=col) from None
        if not math.isfinite(v):
            raise ParseError(f"non-finite value {tok!r}", line=lineno, column=col)
        values.append(v)
    if len(values) != n:
        raise ParseError(f"expected {n} values, found {len(values)}", line=lineno, column=1)
    return values


def parse_dmx(text: str) -> DualMatrix:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty input", line=1, column=1)
    m, n = _parse_header(lines[0])
    body = lines[1:]
    # trailing blank lines are tolerated
    while len(body) > 2 * m + 1 and not body[-1].strip():
        body.pop()

    def block(start: int) -> np.ndarray:
        lines = body[start : start + m]
        if len(lines) == m and all(line.strip() for line in lines):
            # fast path: one vectorized conversion; fall through for diagnostics
            counts = [len(line.split()) for line in lines]
            if all(c == n for c in counts):
                try:
                    with warnings.catch_warnings():
                        # numpy only warns when it stops at an unparsable token
                        warnings.simplefilter("error")
                        vals = np.fromstring("\n".join(lines), sep=" ")
                except (ValueError, DeprecationWarning):
                    vals = None
                if vals is not None and vals.size != m * n:
                    vals = None
                if vals is not None and np.isfinite(vals).all():
                    return vals.reshape(m, n)
        rows = []
        for r in range(m):
            idx = start + r
            lineno = idx + 2
            if idx >= len(body):
                raise ParseError(f"expected {m} rows, input ended", line=lineno)
            if not body[idx].strip():
                raise ParseError(f"expected {m} rows, found blank line", line=lineno)
            rows.append(_parse_row(body[idx], lineno, n))
        return np.array(rows, dtype=float).reshape(m, n)

    std = block(0)
    sep = m
    if sep >= len(body):
        raise ParseError("missing blank line separating the infinitesimal block", line=sep + 2)
    if body[sep].strip():
        raise ParseError(
            "expected blank line separating the infinitesimal block (too many standard rows?)",
            line=sep + 2,
            column=1,
        )
    inf = block(sep + 1)
    extra = 2 * m + 1
    if len(body) > extra:
        raise ParseError("unexpected content after infinitesimal block", line=extra + 2, column=1)
    return DualMatrix(std, inf)


def read_dmx(path: str | os.PathLike) -> DualMatrix:
    with open(path, encoding="ascii") as fh:
        return parse_dmx(fh.read())
