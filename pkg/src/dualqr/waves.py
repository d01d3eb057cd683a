"""Standing/traveling wave identification with the dual QR.

A field is sampled on an ``h x w`` pixel grid.  Each mode contributes

    x(t) = 2 weight exp(gamma t) [cos(omega t) c - sin(omega t) d]

with ``c`` and ``d`` unnormalized 2-D Gaussians.  ``c == d`` gives a rank-1
standing oscillation, distinct centers a rank-2 traveling one.  The ensemble
(pixels x frames) is the standard part, its time derivative the infinitesimal
part.  In the Q factor of the dual QR a traveling pair shows up as two
columns whose standard and infinitesimal parts are cross-correlated with
opposite signs (``Q_i = Q_s P`` with skew ``P``), while a standing mode has a
negligible infinitesimal part.

Grid coordinates are 0-based ``(row, col)`` and vectors are flattened
row-major.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .dual_core import DualMatrix
from .dual_qr import dqrcp, rdqrcp
from .errors import RankDeficient
from .real_backend import SketchConfig, qr_real

DQRCP_MAX_ROWS = 5000
ENERGY_FLOOR = 1e-10


@dataclass(frozen=True)
class WaveMode:
    center_c: tuple[int, int]
    center_d: tuple[int, int]
    sigma: float
    omega: float | None = None  # None: one period over the record
    gamma: float = 0.0
    weight: float = 1.0

    @property
    def standing(self) -> bool:
        return tuple(self.center_c) == tuple(self.center_d)


@dataclass(frozen=True)
class WaveParams:
    grid: tuple[int, int]
    modes: tuple[WaveMode, ...]
    frames: int = 100
    noise_peak: float = 0.0
    seed: int = 0
    dt: float = 1.0

    def __post_init__(self):
        h, w = self.grid
        if h < 1 or w < 1:
            raise ValueError(f"bad grid {self.grid}")
        if self.frames < 2:
            raise ValueError("need at least 2 frames")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        for mode in self.modes:
            if mode.sigma <= 0:
                raise ValueError("sigma must be positive")
            for c in (mode.center_c, mode.center_d):
                _check_center(self.grid, c)


@dataclass(frozen=True)
class WaveField:
    ensemble: np.ndarray
    dt: float
    grid: tuple[int, int]

    def __post_init__(self):
        h, w = self.grid
        if self.ensemble.shape[0] != h * w:
            raise ValueError(
                f"ensemble has {self.ensemble.shape[0]} rows, grid {self.grid} needs {h * w}"
            )


@dataclass(frozen=True)
class Component:
    index: int
    kind: str
    partner: int | None
    pairing_cosine: float
    peak: tuple[int, int]
    infinitesimal_energy: float

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "kind": self.kind,
            "partner": self.partner,
            "pairing_cosine": self.pairing_cosine,
            "peak": list(self.peak),
            "infinitesimal_energy": self.infinitesimal_energy,
        }


@dataclass(frozen=True)
class WaveReport:
    components: list[Component]
    backend: str
    grid: tuple[int, int]
    pairing: np.ndarray = field(repr=False)
    modes: DualMatrix = field(repr=False)

    def standing(self) -> list[Component]:
        return [c for c in self.components if c.kind == "standing"]

    def traveling_pairs(self) -> list[tuple[Component, Component]]:
        by_index = {c.index: c for c in self.components}
        return [
            (c, by_index[c.partner])
            for c in self.components
            if c.kind == "traveling" and c.partner is not None and c.index < c.partner
        ]

    def as_dict(self) -> dict:
        return {
            "grid": list(self.grid),
            "backend": self.backend,
            "components": [c.as_dict() for c in self.components],
            "pairing_matrix": self.pairing.tolist(),
        }


def _check_center(grid, center):
    h, w = grid
    r, c = center
    if not (0 <= r < h and 0 <= c < w):
        raise ValueError(f"center {tuple(center)} outside grid {tuple(grid)}")


def gaussian_mode(grid, center, sigma: float) -> np.ndarray:
    """Unnormalized Gaussian bump, peak value 1 at ``center``, flattened row-major."""
    _check_center(grid, center)
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    h, w = grid
    rows = np.exp(-((np.arange(h) - center[0]) ** 2) / (2 * sigma**2))
    cols = np.exp(-((np.arange(w) - center[1]) ** 2) / (2 * sigma**2))
    return np.outer(rows, cols).ravel()


def simulate(params: WaveParams) -> WaveField:
    h, w = params.grid
    n = params.frames
    t = np.arange(n) * params.dt
    x = np.zeros((h * w, n))
    for mode in params.modes:
        omega = 2 * math.pi / (n * params.dt) if mode.omega is None else mode.omega
        envelope = 2 * mode.weight * np.exp(mode.gamma * t)
        c = gaussian_mode(params.grid, mode.center_c, mode.sigma)
        d = c if mode.standing else gaussian_mode(params.grid, mode.center_d, mode.sigma)
        x += np.outer(c, envelope * np.cos(omega * t))
        x -= np.outer(d, envelope * np.sin(omega * t))
    if params.noise_peak > 0:
        rng = np.random.default_rng(params.seed)
        x += params.noise_peak * rng.standard_normal(x.shape)
    return WaveField(x, params.dt, tuple(params.grid))


def to_dual_series(fld: WaveField) -> DualMatrix:
    """Ensemble as standard part, its time derivative as infinitesimal part.

    Central differences inside, second-order one-sided differences at the
    two end frames (first-order when only two frames exist).
    """
    x = fld.ensemble
    n = x.shape[1]
    if n < 2:
        raise ValueError("need at least 2 frames")
    deriv = np.gradient(x, fld.dt, axis=1, edge_order=2 if n >= 3 else 1)
    return DualMatrix(x, deriv)


def _check_k(d: DualMatrix, k: int):
    if not 1 <= k <= min(d.shape):
        raise ValueError(f"k={k} out of range 1..{min(d.shape)}")


def range_residual(d: DualMatrix, k: int) -> float:
    """``||(I - Q_s Q_s^T) X_i||_F / ||X_i||_F`` with Q_s the first k pivoted QR columns."""
    _check_k(d, k)
    xi = d.infinitesimal
    norm = float(np.linalg.norm(xi))
    if norm == 0:
        return 0.0
    q = qr_real(d.standard, pivot=True, thin=True).q[:, :k]
    return float(np.linalg.norm(xi - q @ (q.T @ xi))) / norm


def _cosines(qs: np.ndarray, qi: np.ndarray) -> np.ndarray:
    ns = np.linalg.norm(qs, axis=0)
    ni = np.linalg.norm(qi, axis=0)
    denom = np.outer(ns, ni)
    gram = qs.T @ qi
    with np.errstate(invalid="ignore", divide="ignore"):
        m = np.where(denom > 0, gram / np.where(denom > 0, denom, 1.0), 0.0)
    return np.clip(m, -1.0, 1.0)


def noise_floor(a_s: np.ndarray, q_s: np.ndarray, r_s: np.ndarray, perm, k: int) -> float:
    """Expected norm of a pure-noise frame, estimated from what k columns leave.

    The residual ``E = A_s[:, perm[k:]] - Q_s[:, :k] R_s[:k, k:]`` holds the
    noise plus any signal past column k.  Localized modes touch few pixels,
    so the median absolute entry of E tracks the noise alone; divided by
    0.6745 it estimates the per-pixel standard deviation.  Projecting onto
    pivot columns that carry noise themselves inflates the residual, so the
    estimate runs high by up to a factor of about sqrt(2).
    """
    perm = np.asarray(perm)
    if k >= perm.size:
        return 0.0
    e = a_s[:, perm[k:]] - q_s[:, :k] @ r_s[:k, k:]
    sigma = float(np.median(np.abs(e))) / 0.6745
    return sigma * math.sqrt(a_s.shape[0])


def _signal_columns(rdiag: np.ndarray, floor: float, snr: float) -> int:
    above = rdiag > snr * floor
    return int(rdiag.size) if above.all() else int(np.argmin(above))


def identify(
    d: DualMatrix,
    k: int,
    theta: float = 0.6,
    eta: float = 0.1,
    *,
    grid,
    snr: float = 10.0,
    seed: int = 0,
) -> WaveReport:
    """Classify the leading k columns of the dual Q factor.

    Columns past the numerical rank are dropped, and so is everything from the
    first column with ``|R_s[j, j]| <= snr * noise_floor(...)``: such a column
    is no stronger than a frame of noise.  Column ``j`` is standing when
    ``||Q_i[:, j]|| <= eta * max_t ||Q_i[:, t]||``; columns ``j, l`` form a
    traveling pair when ``cos(Q_s[:, j], Q_i[:, l])`` and
    ``cos(Q_s[:, l], Q_i[:, j])`` both exceed ``theta`` in magnitude with
    opposite signs.  Pairs are matched greedily, strongest first; unmatched
    columns are standing.
    """
    _check_k(d, k)
    h, w = grid
    if d.shape[0] != h * w:
        raise ValueError(f"{d.shape[0]} rows do not match grid {tuple(grid)}")

    if d.shape[0] <= DQRCP_MAX_ROWS:
        f = dqrcp(d)
        backend = "dqrcp"
    else:
        backend = "rdqrcp"
        try:
            f = rdqrcp(d, SketchConfig(k, 8, seed), strict=False)
        except RankDeficient as exc:
            if exc.rank == 0:
                return WaveReport([], backend, (h, w), np.zeros((0, 0)), DualMatrix.zeros(d.shape[0], 0))
            # fewer signal columns than requested: truncate at the detected rank
            f = rdqrcp(d, SketchConfig(exc.rank, 8, seed), strict=False)

    kk = min(k, f.rank)
    floor = noise_floor(d.standard, f.q.standard, f.r.standard, f.perm, kk)
    keep = _signal_columns(np.abs(np.diag(f.r.standard))[:kk], floor, snr)
    qs = f.q.standard[:, :keep]
    qi = f.q.infinitesimal[:, :keep]
    modes = DualMatrix(qs, qi)
    if keep == 0:
        return WaveReport([], backend, (h, w), np.zeros((0, 0)), modes)

    m = _cosines(qs, qi)
    energy = np.linalg.norm(qi, axis=0)
    emax = energy.max()
    # Q_s columns are unit vectors, so a tiny Q_i is rounding, not motion
    rel = energy / emax if emax > ENERGY_FLOOR else np.zeros_like(energy)
    quiet = rel <= eta

    candidates = []
    for j in range(keep):
        for l in range(j + 1, keep):
            if quiet[j] or quiet[l]:
                continue
            a, b = m[j, l], m[l, j]
            if abs(a) >= theta and abs(b) >= theta and np.sign(a) == -np.sign(b):
                candidates.append((min(abs(a), abs(b)), j, l))
    candidates.sort(reverse=True)
    partner: dict[int, int] = {}
    for _, j, l in candidates:
        if j not in partner and l not in partner:
            partner[j] = l
            partner[l] = j

    comps = []
    for j in range(keep):
        img = np.abs(qs[:, j]).reshape(h, w)
        peak = tuple(int(v) for v in np.unravel_index(np.argmax(img), img.shape))
        if j in partner:
            kind, mate, cosv = "traveling", partner[j], float(m[j, partner[j]])
        else:
            others = [l for l in range(keep) if l != j]
            cosv = float(m[j, max(others, key=lambda l: abs(m[j, l]))]) if others else 0.0
            kind, mate = "standing", None
        comps.append(Component(j, kind, mate, cosv, peak, float(rel[j])))
    return WaveReport(comps, backend, (h, w), m, modes)


STANDING_CENTERS_COMBO = ((50, 50), (100, 100), (150, 70), (170, 180))
TRAVELING_CENTERS_COMBO = (((50, 100), (100, 50)), ((70, 150), (120, 150)))

# Pivoted QR peels off one amplitude level per step, and within the span of
# the standing modes the skew coupling makes any two columns look like a
# pair, so only a small Q_i separates standing from traveling.  Leakage into
# a standing column grows with its weight relative to the traveling modes and
# with the ratio between neighbouring standing weights.  Standing modes are
# therefore graded by 16 and the traveling modes sit 256x above them; with
# distinct harmonics this keeps standing Q_i energy near 0.05 of the maximum.
COMBO_TRAVELING_WEIGHTS = (4194304.0, 1048576.0)
COMBO_STANDING_WEIGHTS = (4096.0, 256.0, 16.0, 1.0)
COMBO_TRAVELING_HARMONICS = (5, 6)
COMBO_STANDING_HARMONICS = (1, 2, 3, 4)

PRESETS = ("standing", "traveling", "combo")


def preset(name: str, noise_peak: float = 1e-3, seed: int = 0) -> WaveParams:
    """Named synthetic fields: ``standing``, ``traveling`` or ``combo``.

    All modes are undamped; omega defaults to one period over 100 frames.
    """
    if name == "standing":
        modes = (WaveMode((25, 50), (25, 50), sigma=5.0),)
        return WaveParams((50, 100), modes, 100, noise_peak, seed)
    if name == "traveling":
        modes = (WaveMode((25, 20), (25, 80), sigma=5.0),)
        return WaveParams((50, 100), modes, 100, noise_peak, seed)
    if name == "combo":
        frames = 100
        base = 2 * math.pi / frames
        modes = [
            WaveMode(c, c, 1.0, omega=base * h, weight=wt)
            for c, h, wt in zip(STANDING_CENTERS_COMBO, COMBO_STANDING_HARMONICS, COMBO_STANDING_WEIGHTS)
        ]
        modes += [
            WaveMode(c, d, 1.0, omega=base * h, weight=wt)
            for (c, d), h, wt in zip(TRAVELING_CENTERS_COMBO, COMBO_TRAVELING_HARMONICS, COMBO_TRAVELING_WEIGHTS)
        ]
        return WaveParams((200, 200), tuple(modes), frames, noise_peak, seed)
    raise ValueError(f"unknown preset {name!r}")


def with_noise(params: WaveParams, noise_peak: float, seed: int) -> WaveParams:
    return replace(params, noise_peak=noise_peak, seed=seed)


def params_from_dict(data: dict) -> WaveParams:
    """Build WaveParams from plain JSON-style data (lists for coordinates)."""
    try:
        modes = tuple(
            WaveMode(
                tuple(m["center_c"]),
                tuple(m.get("center_d", m["center_c"])),
                float(m["sigma"]),
                None if m.get("omega") is None else float(m["omega"]),
                float(m.get("gamma", 0.0)),
                float(m.get("weight", 1.0)),
            )
            for m in data["modes"]
        )
        return WaveParams(
            tuple(data["grid"]),
            modes,
            int(data.get("frames", 100)),
            float(data.get("noise_peak", 0.0)),
            int(data.get("seed", 0)),
            float(data.get("dt", 1.0)),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed wave parameters: {exc}") from None


def params_to_dict(params: WaveParams) -> dict:
    return {
        "grid": list(params.grid),
        "frames": params.frames,
        "noise_peak": params.noise_peak,
        "seed": params.seed,
        "dt": params.dt,
        "modes": [
            {
                "center_c": list(m.center_c),
                "center_d": list(m.center_d),
                "sigma": m.sigma,
                "omega": m.omega,
                "gamma": m.gamma,
                "weight": m.weight,
            }
            for m in params.modes
        ],
    }
