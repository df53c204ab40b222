"""Command-line front end: ``gzkstab <command> [options]``.

Exit codes: 0 success (an inconclusive verdict included), 1 usage error,
2 computation failure. Options may also come from a ``key=value`` file
given with ``--config``; command-line flags take precedence over it.
"""

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

import numpy as np

from . import index as index_mod
from . import instability, operators, serialize
from .errors import GZKError
from .wave import DEFAULT_N, NEWTON_TOL, QUAD_TOL, Branch, solve_wave

log = logging.getLogger("gzkstab")

FORMATS = ("json", "csv", "svg")


class UsageError(Exception):
    pass


def _range(text):
    """``lo:hi:steps`` or a single value."""
    parts = str(text).split(":")
    if len(parts) == 1:
        v = float(parts[0])
        return (v, v, 1)
    if len(parts) != 3:
        raise UsageError(f"range must be lo:hi:steps, got {text!r}")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if not lo < hi or n < 2:
        raise UsageError(f"range needs lo < hi and steps >= 2, got {text!r}")
    return (lo, hi, n)


@dataclass
class RunConfig:
    p: float = 1.0
    c: float = 1.0
    L: float = 7.0
    branch: str = Branch.POSITIVE.value
    N: int = DEFAULT_N
    quad_tol: float = QUAD_TOL
    newton_tol: float = NEWTON_TOL
    zero_tol: Optional[float] = None
    verdict_threshold: float = instability.GROWTH_THRESHOLD
    k_points: int = instability.LOG_POINTS
    tail_points: int = instability.TAIL_POINTS
    out: str = "."
    formats: str = "json,csv"
    c_range: Optional[str] = None
    L_range: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        self.p, self.c, self.L = float(self.p), float(self.c), float(self.L)
        self.N = int(self.N)
        self.k_points, self.tail_points, self.workers = int(self.k_points), int(self.tail_points), int(self.workers)
        for name in ("quad_tol", "newton_tol", "verdict_threshold"):
            setattr(self, name, float(getattr(self, name)))
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be positive")
        if self.zero_tol is not None:
            self.zero_tol = float(self.zero_tol)
            if not self.zero_tol > 0:
                raise UsageError("zero_tol must be positive")
        if self.branch not in {b.value for b in Branch}:
            raise UsageError(f"unknown branch {self.branch!r}")
        if self.N < 4 or self.N % 2:
            raise UsageError("N must be an even integer >= 4")
        if self.k_points < 2 or self.tail_points < 1 or self.workers < 1:
            raise UsageError("k_points >= 2, tail_points >= 1 and workers >= 1 are required")
        bad = set(self.format_set) - set(FORMATS)
        if bad:
            raise UsageError(f"unknown output formats {sorted(bad)}")
        for name in ("c_range", "L_range"):
            if getattr(self, name) is not None:
                _range(getattr(self, name))

    @property
    def format_set(self):
        return [f.strip() for f in str(self.formats).split(",") if f.strip()]

    def wants(self, fmt):
        return fmt in self.format_set

    def path(self, name):
        d = Path(self.out)
        d.mkdir(parents=True, exist_ok=True)
        return d / name

    def k_grid(self, k0):
        return instability.default_k_grid(k0, self.k_points, self.tail_points)


def read_config_file(path):
    known = {f.name for f in fields(RunConfig)}
    out = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in known:
            raise UsageError(f"{path}:{n}: unknown key {key!r}")
        out[key] = value
    return out


# ---------------------------------------------------------------------------
# commands


def _wave(cfg, wave_file=None):
    if wave_file:
        return serialize.load_wave(wave_file)
    return solve_wave(cfg.p, cfg.c, cfg.L, cfg.branch, N=cfg.N, tol=cfg.newton_tol, quad_tol=cfg.quad_tol)


def cmd_wave(cfg, args):
    w = _wave(cfg)
    if cfg.wants("json"):
        serialize.save_wave(cfg.path("wave.json"), w)
    if cfg.wants("svg"):
        from . import plots
        plots.wave_figure(w, cfg.path("wave.svg"))
    lo, hi = w.extrema
    print(f"B={w.params.B!r} N={w.N} residual={w.residual:.3e} min={lo:.10g} max={hi:.10g} "
          f"mean={float(np.mean(w.phi)):.3e}")
    return 0


_ASSEMBLERS = {
    "L": lambda w, N, k: operators.assemble_L(w, N),
    "QL": lambda w, N, k: operators.assemble_QL(w, N),
    "R": lambda w, N, k: operators.assemble_R(w, N, k),
    "P": lambda w, N, k: operators.assemble_P(w, N, k),
    "T": lambda w, N, k: operators.assemble_transverse(w, N, k),
}


def cmd_spectrum(cfg, args):
    w = _wave(cfg, args.wave)
    op = _ASSEMBLERS[args.operator](w, w.N, args.k)
    rep = operators.spectrum(op, cfg.zero_tol)
    name = f"spectrum_{args.operator}"
    if cfg.wants("json"):
        serialize.write_json(cfg.path(name + ".json"), "spectrum", serialize.spectrum_to_dict(rep))
    if cfg.wants("svg"):
        from . import plots
        plots.spectrum_figure(rep, cfg.path(name + ".svg"))
    neg = "n/a" if rep.neg_count is None else rep.neg_count
    print(f"{args.operator}: dim={rep.dim} neg_count={neg} kernel_dim={rep.kernel_dim} "
          f"max_re={rep.max_real:.6e} zero_tol={rep.zero_tol:.3e}")
    return 0


def cmd_index(cfg, args):
    if args.scan:
        lo, hi, n = _range(args.scan)
        res = index_mod.threshold_scan(int(cfg.p), cfg.L, lo, hi, n, N=cfg.N)
        if cfg.wants("csv"):
            serialize.write_csv(cfg.path("threshold_scan.csv"), ["c", "q", "nR0"], res.rows)
        if cfg.wants("json"):
            serialize.write_json(cfg.path("threshold.json"), "threshold", {
                "p": res.p, "L0": res.L0, "c_star": res.c_star, "bracket": res.bracket,
                "reference": res.reference, "rel_error": res.rel_error})
        print(f"c_star={res.c_star:.10g} reference={res.reference:.10g} rel_error={res.rel_error:.3e}")
        return 0
    w = _wave(cfg, args.wave)
    rep = index_mod.index_quantity(w)
    if cfg.wants("json"):
        serialize.write_json(cfg.path("index.json"), "index", rep.as_dict())
    print(f"q={rep.q:.10g} n0={rep.n0} z0={rep.z0} n(L)={rep.nL} "
          f"n(R0) formula={rep.nR0_formula} direct={rep.nR0_direct} consistent={rep.consistent}")
    return 0


def _analyze(cfg, w):
    k0 = None
    try:
        k0 = instability.find_k0(w)
    except GZKError:
        pass
    grid = cfg.k_grid(k0) if k0 else None
    return instability.verdict(w, k_grid=grid, threshold_rel=cfg.verdict_threshold)


def cmd_analyze(cfg, args):
    w = _wave(cfg, args.wave)
    v = _analyze(cfg, w)
    if cfg.wants("json"):
        serialize.write_json(cfg.path("verdict.json"), "verdict", serialize.verdict_to_dict(v, w))
        QL = operators.assemble_QL(w)
        for tag, k in (("0", 0.0), ("k0_half", 0.5 * v.k0), ("k0", v.k0)):
            rep = instability.transverse_spectrum(w, k=k, QL=QL)
            serialize.write_json(cfg.path(f"spectrum_{tag}.json"), "spectrum", serialize.spectrum_to_dict(rep))
    if cfg.wants("csv"):
        serialize.write_csv(cfg.path("growth.csv"), ["k", "max_re_lambda", "im_at_max"], v.growth.rows())
    if cfg.wants("svg"):
        from . import plots
        plots.growth_figure(v.growth, cfg.path("growth.svg"), v.threshold)
        plots.wave_figure(w, cfg.path("wave.svg"))
    print(f"verdict={v.verdict.value} criterion={v.criterion} nR0={v.nR0} k0={v.k0:.10g} "
          f"max_growth={v.max_growth:.10g} at k={v.growth.k_at_max:.10g}")
    return 0


SWEEP_HEADER = ["p", "c", "L", "branch", "status", "B", "residual", "nL", "q", "nR0", "k0",
                "max_growth", "verdict"]


def _sweep_cell(item):
    cfg_dict, c, L = item
    cfg = RunConfig(**{**cfg_dict, "c": c, "L": L})
    row = [cfg.p, c, L, cfg.branch]
    try:
        w = _wave(cfg)
        v = _analyze(cfg, w)
        idx = v.index
        return row + ["ok", w.params.B, w.residual, idx.nL, idx.q, v.nR0, v.k0, v.max_growth, v.verdict.value]
    except GZKError as exc:
        return row + [f"failed: {type(exc).__name__}"] + [None] * 7


def _axis(spec, fallback):
    if spec is None:
        return [fallback]
    lo, hi, n = _range(spec)
    return [lo] if n == 1 else np.linspace(lo, hi, n).tolist()


def cmd_sweep(cfg, args):
    if cfg.c_range is None and cfg.L_range is None:
        raise UsageError("sweep needs --c-range and/or --L-range")
    cells = [(asdict(cfg), c, L) for c in _axis(cfg.c_range, cfg.c) for L in _axis(cfg.L_range, cfg.L)]
    if cfg.workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
            rows = list(ex.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(x) for x in cells]
    serialize.write_csv(cfg.path("sweep.csv"), SWEEP_HEADER, rows)
    failed = sum(1 for r in rows if r[4] != "ok")
    print(f"{len(rows)} cells, {failed} failed -> {cfg.path('sweep.csv')}")
    return 0


def cmd_evolve(cfg, args):
    w = _wave(cfg, args.wave)
    if args.k is not None:
        k = args.k
    else:
        k = args.k_frac * instability.find_k0(w)
    eig = instability.transverse_spectrum(w, k=k).max_real
    res = instability.evolve_linearized(w, k=k, T=args.T, dt=args.dt, expected_rate=max(eig, 0.0),
                                        seed=args.seed)
    payload = {"k": k, "rate": res.rate, "eigenvalue_max_real": eig, "T": res.T, "dt": res.dt,
               "steps": res.steps}
    if cfg.wants("json"):
        serialize.write_json(cfg.path("evolve.json"), "evolve", payload)
    if cfg.wants("csv"):
        serialize.write_csv(cfg.path("evolve.csv"), ["t", "log_norm"], zip(res.times, res.log_norm))
    print(f"k={k:.10g} rate={res.rate:.10g} eigenvalue={eig:.10g} steps={res.steps}")
    return 0


def cmd_defaults(cfg, args):
    for f in fields(RunConfig):
        print(f"{f.name}={'' if f.default is None else f.default}")
    return 0


COMMANDS = {
    "wave": cmd_wave, "spectrum": cmd_spectrum, "index": cmd_index, "analyze": cmd_analyze,
    "sweep": cmd_sweep, "evolve": cmd_evolve, "defaults": cmd_defaults,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    common = _Parser(add_help=False)
    g = common.add_argument_group("run configuration")
    g.add_argument("--config", help="key=value file; flags override it")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        g.add_argument(flag, dest=f.name, default=None, help=f"(default {f.default})")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="gzkstab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("wave", parents=[common], help="construct a periodic wave")
    sp = sub.add_parser("spectrum", parents=[common], help="eigenvalues of one operator")
    sp.add_argument("--operator", choices=sorted(_ASSEMBLERS), default="QL")
    sp.add_argument("--k", type=float, default=0.0)
    sp.add_argument("--wave", help="reuse a wave JSON file")
    ip = sub.add_parser("index", parents=[common], help="(L^-1 1, 1) and the negative-eigenvalue count")
    ip.add_argument("--wave")
    ip.add_argument("--scan", help="c_lo:c_hi:steps, locate the sign change of q on the sign-changing family")
    ap = sub.add_parser("analyze", parents=[common], help="full transverse-stability verdict")
    ap.add_argument("--wave")
    sub.add_parser("sweep", parents=[common], help="verdicts over a (c, L) grid")
    ep = sub.add_parser("evolve", parents=[common], help="growth rate from linearized time evolution")
    ep.add_argument("--wave")
    ep.add_argument("--k", type=float)
    ep.add_argument("--k-frac", type=float, default=0.5, help="k as a fraction of k0 when --k is absent")
    ep.add_argument("--T", type=float)
    ep.add_argument("--dt", type=float)
    ep.add_argument("--seed", type=int, default=0)
    sub.add_parser("defaults", parents=[common], help="print default settings")
    return parser


def make_config(args):
    values = {}
    if args.config:
        values.update(read_config_file(args.config))
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is not None:
            values[f.name] = v
    try:
        return RunConfig(**values)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        cfg = make_config(args)
    except UsageError as exc:
        print(f"gzkstab: usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return COMMANDS[args.command](cfg, args)
    except UsageError as exc:
        print(f"gzkstab: usage error: {exc}", file=sys.stderr)
        return 1
    except (GZKError, ValueError, OSError) as exc:
        print(f"gzkstab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
