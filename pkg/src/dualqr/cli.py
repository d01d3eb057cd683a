"""``dualqr`` command-line interface.

Exit codes: 0 success, 1 other library error, 2 rank/singularity
precondition, 3 existence condition, 4 malformed ``.dmx`` input, 5 file
I/O, 64 bad command-line usage.  Failures print one line of JSON on stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import bench as benchmod
from . import waves
from .dmpgi import dmpgi, penrose_residuals
from .dmx import read_dmx, write_dmx
from .dual_qr import DECOMPOSITIONS, factor_residuals, rdqrcp
from .errors import DualQRError
from .fixtures import A1, A2, PERTURB_A_I, PERTURB_A_S
from .perturbation import TABLE_TAUS, table
from .real_backend import SketchConfig

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_IO = 5
EXIT_USAGE = 64

SEED_ENV = "DUALQR_SEED"
FIXTURES = {"A1": A1, "A2": A2}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        seed = int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV}={raw!r} is not an integer") from None
    if seed < 0:
        raise UsageError(f"{SEED_ENV} must be non-negative")
    return seed


def _emit_error(kind: str, message: str, code: int, **extra) -> int:
    payload = {"error": kind, "exit_code": code, "message": message}
    payload.update({k: v for k, v in extra.items() if v is not None})
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return code


def _dump_json(path, data) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_perm(path, perm: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["position", "column"])
        for j, p in enumerate(perm):
            w.writerow([j + 1, int(p) + 1])


def _write_grid(path, values: np.ndarray) -> None:
    np.savetxt(path, values, delimiter=",", fmt="%.17g")


def _sidecar(path) -> Path:
    return Path(path).with_suffix(".meta.json")


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        h, w = (int(t) for t in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"grid {text!r} is not of the form HxW") from None
    return h, w


def _parse_taus(text: str) -> list[float]:
    try:
        taus = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"bad tau list {text!r}") from None
    if not taus:
        raise UsageError("empty tau list")
    return taus


# ---------------------------------------------------------------- decompose


def cmd_decompose(args) -> int:
    a = read_dmx(args.input)
    if args.algo == "rdqrcp":
        if args.k is None:
            raise UsageError("rdqrcp needs --k")
        f = rdqrcp(a, SketchConfig(args.k, args.oversample, args.seed), strict=not args.allow_inexact)
    else:
        f = DECOMPOSITIONS[args.algo](a)
    prefix = args.out
    write_dmx(f"{prefix}.Q.dmx", f.q)
    write_dmx(f"{prefix}.R.dmx", f.r)
    _write_perm(f"{prefix}.perm.csv", f.perm)
    report = {
        "algorithm": args.algo,
        "variant": f.variant,
        "shape": list(a.shape),
        "rank": int(f.rank),
        "k": args.k if args.algo == "rdqrcp" else None,
        "oversample": args.oversample if args.algo == "rdqrcp" else None,
        "seed": args.seed if args.algo == "rdqrcp" else None,
        "existence_residual": float(f.existence_residual),
        "residuals": factor_residuals(a, f),
    }
    _dump_json(f"{prefix}.report.json", report)
    return EXIT_OK


# -------------------------------------------------------------------- waves


def cmd_waves_simulate(args) -> int:
    if args.params:
        with open(args.params) as fh:
            params = waves.params_from_dict(json.load(fh))
        if args.noise is not None:
            params = waves.with_noise(params, args.noise, params.seed)
        if args.seed_given:
            params = waves.with_noise(params, params.noise_peak, args.seed)
        name = None
    else:
        noise = 1e-3 if args.noise is None else args.noise
        params = waves.preset(args.preset, noise, args.seed)
        name = args.preset
    field = waves.simulate(params)
    write_dmx(args.out, waves.to_dual_series(field))
    meta = {"grid": list(params.grid), "dt": params.dt, "preset": name, "params": waves.params_to_dict(params)}
    _dump_json(_sidecar(args.out), meta)
    return EXIT_OK


def cmd_waves_identify(args) -> int:
    d = read_dmx(args.input)
    if args.grid:
        grid = _parse_grid(args.grid)
    else:
        meta_path = _sidecar(args.input)
        if not meta_path.exists():
            raise UsageError(f"no --grid given and no {meta_path.name} next to the input")
        with open(meta_path) as fh:
            grid = tuple(json.load(fh)["grid"])
    if args.k < 1:
        raise UsageError("--k must be at least 1")
    # asking for more columns than the field has is not an error here
    k = min(args.k, min(d.shape))
    prefix = args.out or str(Path(args.input).with_suffix(""))
    report = waves.identify(d, k, args.theta, args.eta, grid=grid, snr=args.snr, seed=args.seed)
    _dump_json(f"{prefix}.report.json", report.as_dict())
    h, w = grid
    for c in report.components:
        j = c.index
        _write_grid(f"{prefix}.component{j}.standard.csv", report.modes.standard[:, j].reshape(h, w))
        _write_grid(f"{prefix}.component{j}.infinitesimal.csv", report.modes.infinitesimal[:, j].reshape(h, w))
    print(f"{len(report.standing())} standing, {len(report.traveling_pairs())} traveling pairs")
    return EXIT_OK


# -------------------------------------------------------------------- bench


def cmd_bench(args) -> int:
    try:
        algos = benchmod.parse_algorithms(args.algos)
        cases = benchmod.parse_sizes(args.sizes)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    records = benchmod.run(algos, cases, reps=args.reps, seed=args.seed)
    summary = benchmod.summarize(records)
    if args.out:
        benchmod.write_records(args.out, records)
    if args.summary:
        benchmod.write_summary(args.summary, summary)
    for s in summary:
        k = f"+{s.k}" if s.k else ""
        print(f"{s.algorithm:8s} {s.m}x{s.n}{k:5s} median {s.median_seconds:.4f} s over {s.reps}")
    return EXIT_OK


# ------------------------------------------------------------ dmpgi/perturb


def cmd_dmpgi(args) -> int:
    a = FIXTURES[args.fixture] if args.fixture else read_dmx(args.input)
    g = dmpgi(a)
    write_dmx(args.out, g)
    report_path = args.report or str(Path(args.out).with_suffix(".penrose.json"))
    _dump_json(report_path, {"shape": list(a.shape), "penrose": penrose_residuals(a, g).as_dict()})
    return EXIT_OK


def cmd_perturb(args) -> int:
    taus = _parse_taus(args.tau) if args.tau else list(TABLE_TAUS)
    if args.input:
        base = read_dmx(args.input)
        a_s, a_i = base.standard, base.infinitesimal
    else:
        a_s, a_i = PERTURB_A_S, PERTURB_A_I
    rows = table(a_s, a_i, taus)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(["tau", "norm_ai", "norm_dq_empirical", "norm_qi", "bound_sun", "bound_stewart"])
        for r in rows:
            w.writerow(
                [repr(v) for v in (r.tau, r.norm_ai, r.norm_dq_empirical, r.norm_qi, r.bound_sun, r.bound_stewart)]
            )
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


# ------------------------------------------------------------------- parser


def build_parser(default_seed: int) -> argparse.ArgumentParser:
    p = _Parser(prog="dualqr", description="QR decompositions of dual matrices and their applications.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decompose", help="factor a .dmx dual matrix")
    d.add_argument("--algo", required=True, choices=[*DECOMPOSITIONS, "rdqrcp"])
    d.add_argument("--input", required=True)
    d.add_argument("--out", required=True, help="output prefix")
    d.add_argument("--k", type=int, help="target rank (rdqrcp)")
    d.add_argument("--oversample", type=int, default=8)
    d.add_argument("--seed", type=int, default=default_seed)
    d.add_argument(
        "--allow-inexact", action="store_true",
        help="rdqrcp: return factors even when the existence condition fails",
    )
    d.set_defaults(func=cmd_decompose)

    w = sub.add_parser("waves", help="simulate or identify standing/traveling waves")
    wsub = w.add_subparsers(dest="waves_command", required=True)
    ws = wsub.add_parser("simulate")
    src = ws.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=waves.PRESETS)
    src.add_argument("--params", help="JSON file with wave parameters")
    ws.add_argument("--noise", type=float, help="noise standard deviation (preset default 1e-3)")
    ws.add_argument("--seed", type=int)
    ws.add_argument("--out", required=True, help="output .dmx path")
    ws.set_defaults(func=cmd_waves_simulate)
    wi = wsub.add_parser("identify")
    wi.add_argument("--input", required=True)
    wi.add_argument("--grid", help="HxW; read from the simulate sidecar when omitted")
    wi.add_argument("--k", type=int, default=8)
    wi.add_argument("--theta", type=float, default=0.6, help="pairing cosine threshold")
    wi.add_argument("--eta", type=float, default=0.1, help="relative Q_i energy at or below which a column is standing")
    wi.add_argument("--snr", type=float, default=10.0, help="keep columns with |R_s[j,j]| above snr times the noise floor")
    wi.add_argument("--seed", type=int, default=default_seed)
    wi.add_argument("--out", help="output prefix (default: input path without suffix)")
    wi.set_defaults(func=cmd_waves_identify)

    b = sub.add_parser("bench", help="time decompositions on GIID inputs")
    b.add_argument("--algos", required=True, help="comma list, e.g. dqr,tdqr")
    b.add_argument("--sizes", required=True, help="comma list of MxN or MxN+K")
    b.add_argument("--reps", type=int, default=5)
    b.add_argument("--seed", type=int, default=default_seed)
    b.add_argument("--out", help="per-run CSV")
    b.add_argument("--summary", help="median summary CSV")
    b.set_defaults(func=cmd_bench)

    g = sub.add_parser("dmpgi", help="dual Moore-Penrose inverse")
    gsrc = g.add_mutually_exclusive_group(required=True)
    gsrc.add_argument("--input")
    gsrc.add_argument("--fixture", choices=sorted(FIXTURES))
    g.add_argument("--out", required=True)
    g.add_argument("--report", help="Penrose residual JSON (default: <out>.penrose.json)")
    g.set_defaults(func=cmd_dmpgi)

    t = sub.add_parser("perturb", help="first-order Q perturbation table")
    t.add_argument("--tau", help="comma list of scale factors")
    t.add_argument("--input", help=".dmx with A_s and the unscaled A_i (default: built-in 8x5 example)")
    t.add_argument("--out", help="CSV path (default stdout)")
    t.set_defaults(func=cmd_perturb)
    return p


def main(argv=None) -> int:
    try:
        seed = _default_seed()
        parser = build_parser(seed)
        raw = list(sys.argv[1:] if argv is None else argv)
        args = parser.parse_args(raw)
        if getattr(args, "func", None) is cmd_waves_simulate:
            args.seed_given = args.seed is not None
            if args.seed is None:
                args.seed = seed
        for name in ("k", "reps", "oversample", "seed"):
            v = getattr(args, name, None)
            if v is not None and v < 0:
                raise UsageError(f"--{name} must be non-negative")
        return args.func(args)
    except UsageError as exc:
        return _emit_error("UsageError", str(exc), EXIT_USAGE)
    except DualQRError as exc:
        extra = {
            k: getattr(exc, k, None)
            for k in ("rank", "required", "residual", "tolerance", "line", "column", "index", "value")
        }
        return _emit_error(type(exc).__name__, str(exc), exc.exit_code, **extra)
    except OSError as exc:
        return _emit_error("IOError", str(exc), EXIT_IO, path=getattr(exc, "filename", None))
    except ValueError as exc:
        return _emit_error("ValueError", str(exc), EXIT_ERROR)


if __name__ == "__main__":
    sys.exit(main())
