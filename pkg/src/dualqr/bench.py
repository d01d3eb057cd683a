"""Wall-clock benchmark harness for the dual QR variants.

Inputs are fixed-seed GIID dual matrices.  A size written ``MxN+K`` asks for
a low-rank input ``A = L R`` (dual product of GIID ``m x r`` and ``r x n``
factors, ``r = round(n / 10)``) and target rank K for the randomized kernel.
Only the decomposition call is timed.
"""

from __future__ import annotations

import csv
import re
import statistics
import time
from dataclasses import asdict, dataclass, fields

import numpy as np

from .dual_core import DualMatrix, dmul
from .dual_qr import dqr, dqrcp, rdqrcp, tdqr, tdqrcp
from .real_backend import SketchConfig

ALGORITHMS = ("dqr", "dqrcp", "tdqr", "tdqrcp", "rdqrcp")
DEFAULT_TARGET_RANK = 10
DEFAULT_OVERSAMPLING = 8

_SIZE = re.compile(r"^\s*(\d+)\s*[xX]\s*(\d+)\s*(?:\+\s*(\d+))?\s*$")


@dataclass(frozen=True)
class BenchCase:
    m: int
    n: int
    k: int = 0  # 0: full-rank GIID input

    @property
    def low_rank(self) -> bool:
        return self.k > 0

    def label(self) -> str:
        return f"{self.m}x{self.n}" + (f"+{self.k}" if self.k else "")


@dataclass(frozen=True)
class BenchRecord:
    algorithm: str
    m: int
    n: int
    k: int
    repetition: int
    seconds: float
    seed: int

    def __post_init__(self):
        if not self.seconds > 0:
            raise ValueError("seconds must be positive")


@dataclass(frozen=True)
class BenchSummary:
    algorithm: str
    m: int
    n: int
    k: int
    reps: int
    median_seconds: float
    min_seconds: float
    max_seconds: float


def parse_size(text: str) -> BenchCase:
    match = _SIZE.match(text)
    if not match:
        raise ValueError(f"size {text!r} is not of the form MxN or MxN+K")
    m, n = int(match[1]), int(match[2])
    k = int(match[3]) if match[3] else 0
    if m < 1 or n < 1:
        raise ValueError(f"size {text!r} has an empty dimension")
    if k > min(m, n):
        raise ValueError(f"target rank {k} exceeds min(m, n) in {text!r}")
    return BenchCase(m, n, k)


def parse_sizes(text: str) -> list[BenchCase]:
    return [parse_size(t) for t in text.split(",") if t.strip()]


def parse_algorithms(text: str) -> list[str]:
    algos = [t.strip() for t in text.split(",") if t.strip()]
    bad = [a for a in algos if a not in ALGORITHMS]
    if bad:
        raise ValueError(f"unknown algorithm(s) {bad}; choose from {list(ALGORITHMS)}")
    return algos


def giid_dual(m: int, n: int, rng: np.random.Generator) -> DualMatrix:
    return DualMatrix(rng.standard_normal((m, n)), rng.standard_normal((m, n)))


def make_input(case: BenchCase, seed: int) -> DualMatrix:
    rng = np.random.default_rng(seed)
    if not case.low_rank:
        return giid_dual(case.m, case.n, rng)
    r = max(1, round(case.n / 10))
    return dmul(giid_dual(case.m, r, rng), giid_dual(r, case.n, rng))


def kernel(algorithm: str, case: BenchCase, seed: int):
    """Callable taking the input matrix and running ``algorithm`` on it."""
    if algorithm == "dqr":
        return dqr
    if algorithm == "dqrcp":
        return dqrcp
    if algorithm == "tdqr":
        if case.low_rank:
            raise ValueError("tdqr needs a full-rank input; drop the +K suffix")
        return tdqr
    if algorithm == "tdqrcp":
        return lambda a: tdqrcp(a, truncate=case.low_rank)
    if algorithm == "rdqrcp":
        cfg = SketchConfig(case.k or DEFAULT_TARGET_RANK, DEFAULT_OVERSAMPLING, seed)
        # the truncated factors are wanted even when A_i leaves Ran(Q_s)
        return lambda a: rdqrcp(a, cfg, strict=False)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def run(
    algorithms, cases, reps: int = 5, seed: int = 0, clock=time.perf_counter
) -> list[BenchRecord]:
    if reps < 1:
        raise ValueError("reps must be >= 1")
    records = []
    for case in cases:
        a = make_input(case, seed)
        for algo in algorithms:
            fn = kernel(algo, case, seed)
            k = case.k or (DEFAULT_TARGET_RANK if algo == "rdqrcp" else 0)
            for rep in range(reps):
                t0 = clock()
                fn(a)
                elapsed = clock() - t0
                records.append(
                    BenchRecord(algo, case.m, case.n, k, rep, max(elapsed, 1e-9), seed)
                )
    return records


def summarize(records) -> list[BenchSummary]:
    groups: dict[tuple, list[float]] = {}
    for r in records:
        groups.setdefault((r.algorithm, r.m, r.n, r.k), []).append(r.seconds)
    return [
        BenchSummary(algo, m, n, k, len(ts), statistics.median(ts), min(ts), max(ts))
        for (algo, m, n, k), ts in groups.items()
    ]


def _write(path, rows, cls) -> None:
    names = [f.name for f in fields(cls)]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=names)
        w.writeheader()
        for row in rows:
            w.writerow(asdict(row))


def write_records(path, records) -> None:
    _write(path, records, BenchRecord)


def write_summary(path, summary) -> None:
    _write(path, summary, BenchSummary)


def read_records(path) -> list[BenchRecord]:
    with open(path, newline="") as fh:
        return [
            BenchRecord(
                row["algorithm"], int(row["m"]), int(row["n"]), int(row["k"]),
                int(row["repetition"]), float(row["seconds"]), int(row["seed"]),
            )
            for row in csv.DictReader(fh)
        ]
