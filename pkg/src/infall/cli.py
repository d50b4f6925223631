"""Command-line front end: scenario tables (CSV/JSON) and SVG plots.

Examples::

    infall figure1 --samples 32
    infall general --m1 1 --s 2 --eb-max auto --format json --out general.json
    infall figure3 --plot fig3.svg --with-time
"""

from __future__ import annotations

import argparse
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import __version__
from .binding import TwoBodyConfig, critical_binding_energy, printed_forms, solve_state
from .dynamics import (
    ScenarioResult,
    TrajectorySample,
    _celestial_limit_state,
    celestial_speed_printed,
    reconstruct_time,
    riccati_residual,
    solve_celestial,
    solve_equal_mass,
    solve_general,
)
from .plot import render_plot
from .sta import DomainError
from .tables import OutputTable, write_table

KINDS = ("general", "celestial", "equal-mass", "figure1", "figure2", "figure3", "figure4")

EXIT_OK, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2

ERRATA_NOTE = ("mass/fraction closed forms use denominator c^2 m1_inf (s+1) - eb "
               "(printed sign flipped); celestial speed c sqrt(1 - exp(-2 G m2_inf/(c^2 r)))")

# figure presets: (m1_inf, s) plus the default range of the independent variable
PRESETS = {
    "figure1": {"m1": 1.0, "s": math.sqrt(2.0), "G": 1.0, "c": 1.0},
    "figure2": {"m1": 1.0, "s": math.sqrt(2.0), "G": 1.0, "c": 1.0},
    "figure3": {"m1": 1.0, "s": 1.0e4, "G": 1.0, "c": 1.0, "r_max": 60000.0},
    "figure4": {"m1": 1.0, "s": 1.0, "G": 1.0, "c": 1.0, "r_max": 3.0},
}

COLUMNS = {
    "binding": ["eb", "m1", "m2", "v1_abs", "f1"],
    "general": ["eb", "m1", "m2", "v1_abs", "f1", "r"],
    "celestial": ["r", "m1", "eb", "v1_abs"],
    "equal-mass": ["r", "m1", "eb1", "v1_abs"],
}

EB_MIN_FRACTION = 1e-6
R_MIN_FRACTION = 1e-6


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class GridSpec:
    variable: str
    lo: float
    hi: float
    count: int


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    cfg: TwoBodyConfig
    grid: GridSpec
    fmt: str = "csv"
    out: str | None = None
    plot: str | None = None
    units: str = "geom"
    with_time: bool = False
    errata_diagnostic: bool = False
    extras: dict = field(default_factory=dict)


def family(kind: str) -> str:
    return {"figure1": "binding", "figure2": "general", "general": "general",
            "figure3": "celestial", "celestial": "celestial",
            "figure4": "equal-mass", "equal-mass": "equal-mass"}[kind]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _real_or_auto(text: str):
    if text == "auto":
        return "auto"
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a real number or 'auto', got {text!r}")
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return v


def _real(text: str) -> float:
    v = _real_or_auto(text)
    if v == "auto":
        raise argparse.ArgumentTypeError("'auto' is not allowed here")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--m1", type=_real, help="rest-mass of the lighter body")
    common.add_argument("--s", type=_real, help="mass ratio m2_inf / m1_inf (>= 1)")
    common.add_argument("--G", type=_real, help="gravitational constant")
    common.add_argument("--c", type=_real, help="speed of light")
    common.add_argument("--units", choices=("geom", "si"), default="geom")
    for flag in ("--eb-min", "--eb-max", "--r-min", "--r-max"):
        common.add_argument(flag, type=_real_or_auto, default="auto")
    common.add_argument("--samples", type=int, default=512)
    common.add_argument("--rtol", type=_real, default=1e-9)
    common.add_argument("--atol", type=_real, default=1e-12)
    common.add_argument("--eb0", type=_real, help="anchor binding energy for the numerical solver")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="output path (default: standard output)")
    common.add_argument("--plot", default=None, help="SVG plot path")
    common.add_argument("--with-time", action="store_true", help="add coordinate time t")
    common.add_argument("--errata-diagnostic", action="store_true",
                        help="also evaluate the verbatim printed formulas")

    parser = _Parser(prog="infall", description="Two-body infall with rest-mass paying for kinetic energy.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    for kind in KINDS:
        sub.add_parser(kind, parents=[common])
    return parser


def _flag_error(flag: str, msg: str):
    raise UsageError(f"argument {flag}: {msg}")


def parse_args(argv: Sequence[str]) -> ScenarioSpec:
    """Validate ``argv`` into a :class:`ScenarioSpec`; raises :class:`UsageError`."""
    ns = build_parser().parse_args(list(argv))
    kind = ns.kind
    preset = PRESETS.get(kind, {})
    si = ns.units == "si"
    defaults = {"m1": 1.0, "s": math.sqrt(2.0), "G": 6.6743e-11 if si else 1.0,
                "c": 299_792_458.0 if si else 1.0}
    defaults.update({k: v for k, v in preset.items() if k in defaults})
    vals = {k: getattr(ns, k) if getattr(ns, k) is not None else defaults[k] for k in defaults}
    for key, flag in (("m1", "--m1"), ("G", "--G"), ("c", "--c")):
        if not vals[key] > 0:
            _flag_error(flag, f"must be positive (got {vals[key]!r})")
    if vals["s"] < 1:
        _flag_error("--s", f"must be >= 1 (got {vals['s']!r})")
    for key, flag in (("rtol", "--rtol"), ("atol", "--atol")):
        if not getattr(ns, key) > 0:
            _flag_error(flag, "must be positive")
    if ns.samples < 2:
        _flag_error("--samples", f"must be >= 2 (got {ns.samples})")
    if ns.eb0 is not None and not ns.eb0 > 0:
        _flag_error("--eb0", "must be positive")
    cfg = TwoBodyConfig(m1_inf=vals["m1"], s=vals["s"], G=vals["G"], c=vals["c"],
                        tol_rel=ns.rtol, tol_abs=ns.atol)

    fam = family(kind)
    if fam == "equal-mass" and cfg.s != 1.0:
        _flag_error("--s", f"equal-mass scenarios need s = 1 (got {cfg.s!r})")
    if fam == "binding" and ns.with_time:
        _flag_error("--with-time", f"{kind} has no trajectory")
    if fam in ("binding", "general"):
        for flag in ("r_min", "r_max"):
            if getattr(ns, flag) != "auto":
                _flag_error("--" + flag.replace("_", "-"), f"not used by {kind}")
        ec = critical_binding_energy(cfg)
        lo_auto = 0.0 if fam == "binding" else EB_MIN_FRACTION * ec
        lo = lo_auto if ns.eb_min == "auto" else ns.eb_min
        hi = ec if ns.eb_max == "auto" else ns.eb_max
        lo_ok = lo >= 0.0 if fam == "binding" else lo > 0.0
        if not lo_ok or lo >= ec:
            _flag_error("--eb-min", f"must lie in {'[0' if fam == 'binding' else '(0'}, {ec!r})")
        if not (lo < hi <= ec * (1.0 + 1e-15)):
            _flag_error("--eb-max", f"must lie in (eb-min, E_c = {ec!r}]")
        grid = GridSpec("eb", lo, min(hi, ec), ns.samples)
    else:
        for flag in ("eb_min", "eb_max"):
            if getattr(ns, flag) != "auto":
                _flag_error("--" + flag.replace("_", "-"), f"not used by {kind}")
        scale = cfg.G * (cfg.m2_inf if fam == "celestial" else cfg.m1_inf) / cfg.c**2
        hi_auto = preset.get("r_max", (6.0 if fam == "celestial" else 3.0) * scale)
        hi = hi_auto if ns.r_max == "auto" else ns.r_max
        if not hi > 0:
            _flag_error("--r-max", "must be positive")
        lo = hi * R_MIN_FRACTION if ns.r_min == "auto" else ns.r_min
        if not lo >= 0 or not lo < hi:
            _flag_error("--r-min", f"must lie in [0, r-max = {hi!r})")
        grid = GridSpec("r", lo, hi, ns.samples)

    extras = {}
    if ns.eb0 is not None:
        extras["eb0"] = ns.eb0
    return ScenarioSpec(kind=kind, cfg=cfg, grid=grid, fmt=ns.fmt, out=ns.out, plot=ns.plot,
                        units=ns.units, with_time=ns.with_time,
                        errata_diagnostic=ns.errata_diagnostic, extras=extras)


# --- running ----------------------------------------------------------------------

def _stats_dict(result: ScenarioResult | None) -> dict:
    if result is None:
        return {}
    st = result.solver_stats
    out = {
        "steps": st.steps, "rejected": st.rejected, "evaluations": st.evaluations,
        "max_residual": st.max_residual, "status": st.status, "stop_reason": st.stop_reason,
        "diagnostics": list(st.diagnostics),
    }
    for key in ("terminal_eb", "terminal_r", "terminal_m1", "eb0"):
        v = float(getattr(st, key))
        if math.isfinite(v):
            out[key] = v
    return out


def _binding_rows(spec: ScenarioSpec, ebs: np.ndarray) -> list[list[float]]:
    rows = []
    for eb in ebs:
        st = solve_state(float(eb), spec.cfg)
        rows.append([st.eb, st.m1, st.m2, st.v1_abs, st.f1])
    return rows


def _printed_columns(spec: ScenarioSpec, ebs) -> list[list[float]]:
    out = []
    for eb in ebs:
        p = printed_forms(float(eb), spec.cfg)
        out.append([p["m1"], p["m2"], p["f1"]])
    return out


def run(spec: ScenarioSpec) -> OutputTable:
    """Evaluate a scenario into a table sorted by its independent variable."""
    cfg, grid = spec.cfg, spec.grid
    fam = family(spec.kind)
    columns = list(COLUMNS[fam])
    meta = {
        "artifact": "infall",
        "version": __version__,
        "kind": spec.kind,
        "units": spec.units,
        "config": cfg.to_dict(),
        "grid": {"variable": grid.variable, "min": grid.lo, "max": grid.hi, "count": grid.count},
        "errata": ERRATA_NOTE,
    }
    result: ScenarioResult | None = None
    limit_rows: list[int] = []
    xs = np.linspace(grid.lo, grid.hi, grid.count)

    if fam == "binding":
        rows = _binding_rows(spec, xs)
        if spec.errata_diagnostic:
            columns += ["m1_printed", "m2_printed", "f1_printed"]
            rows = [r + p for r, p in zip(rows, _printed_columns(spec, xs))]
    elif fam == "general":
        ec = critical_binding_energy(cfg)
        at_limit = xs[-1] >= ec
        numeric = xs[:-1] if at_limit else xs
        result = solve_general(cfg, numeric, eb0=spec.extras.get("eb0"))
        samples = list(result.samples)
        if at_limit and not result.solver_stats.partial:
            samples.append(TrajectorySample(r=0.0, state=solve_state(ec, cfg)))
            limit_rows.append(len(samples) - 1)
        result = replace(result, samples=tuple(samples))
        if spec.with_time:
            result = reconstruct_time(result)
            columns.append("t")
        rows = []
        for smp in result.samples:
            st = smp.state
            row = [st.eb, st.m1, st.m2, st.v1_abs, st.f1, smp.r]
            if spec.with_time:
                row.append(math.nan if smp.t is None else smp.t)
            rows.append(row)
        if spec.errata_diagnostic:
            columns += ["m1_printed", "m2_printed", "f1_printed"]
            rows = [r + p for r, p in zip(rows, _printed_columns(spec, [r[0] for r in rows]))]
            worst = 0.0
            for smp in result.samples:
                if smp.r > 0:
                    st = smp.state
                    slope = -cfg.G * st.m1 * st.m2 / smp.r**2
                    worst = max(worst, abs(riccati_residual(st.eb, slope, smp.r, cfg, printed=True, scaled=True)))
            meta["riccati_printed_max_scaled_residual"] = worst
    else:
        rs = [float(r) for r in xs if r > 0.0]
        if fam == "celestial":
            result = solve_celestial(cfg, rs)
            limit = TrajectorySample(r=0.0, state=_celestial_limit_state(cfg))
        else:
            result = solve_equal_mass(cfg, rs + [0.0])
            limit = None
        samples = list(result.samples)
        if limit is not None:
            samples.append(limit)
        result = replace(result, samples=tuple(samples))
        limit_rows.append(len(samples) - 1)
        if spec.with_time:
            result = reconstruct_time(result)
            columns.append("t")
        rows = []
        for smp in result.samples:
            st = smp.state
            e = st.eb / 2.0 if fam == "equal-mass" else st.eb
            row = [smp.r, st.m1, e, st.v1_abs]
            if spec.with_time:
                row.append(math.nan if smp.t is None else smp.t)
            if spec.errata_diagnostic and fam == "celestial":
                row.append(celestial_speed_printed(smp.r, cfg) if smp.r > 0 else cfg.c)
            rows.append(row)
        if spec.errata_diagnostic and fam == "celestial":
            columns.append("v1_printed")
        rows.reverse()
        limit_rows = [len(rows) - 1 - i for i in limit_rows]

    meta["solver"] = _stats_dict(result)
    meta["partial"] = bool(result is not None and result.solver_stats.partial)
    meta["limit_rows"] = sorted(limit_rows)
    if spec.errata_diagnostic and fam in ("binding", "general"):
        p0 = printed_forms(0.0, cfg)
        meta["errata_diagnostic"] = {
            "m2_printed_at_0": p0["m2"],
            "m2_corrected_at_0": solve_state(0.0, cfg).m2,
            "expected_printed": -cfg.s * cfg.m1_inf,
        }
    return OutputTable(columns, rows, meta)


def plot_table(table: OutputTable, drop_time: bool = False) -> OutputTable:
    """Columns worth drawing: diagnostics (and optionally time) left out."""
    drop = {"m1_printed", "m2_printed", "f1_printed", "v1_printed"} | ({"t"} if drop_time else set())
    keep = [i for i, c in enumerate(table.columns) if c not in drop]
    return OutputTable([table.columns[i] for i in keep], [[r[i] for i in keep] for r in table.rows],
                       table.metadata)


def execute(spec: ScenarioSpec) -> tuple[OutputTable, int]:
    table = run(spec)
    write_table(table, spec.fmt, spec.out)
    if spec.plot:
        render_plot(plot_table(table), spec.plot, title=spec.kind)
    return table, EXIT_SOLVER if table.metadata.get("partial") else EXIT_OK


def run_many(specs: Sequence[ScenarioSpec], workers: int | None = None) -> list[OutputTable]:
    """Run independent scenarios on a process pool (order preserved)."""
    if workers == 1 or len(specs) <= 1:
        return [run(s) for s in specs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, specs))


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        spec = parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"infall: usage error: {exc}\n")
        return EXIT_USAGE
    except DomainError as exc:
        sys.stderr.write(f"infall: usage error: {exc}\n")
        return EXIT_USAGE
    try:
        _, code = execute(spec)
    except DomainError as exc:
        sys.stderr.write(f"infall: solver failure: {exc}\n")
        return EXIT_SOLVER
    except OSError as exc:
        sys.stderr.write(f"infall: {exc}\n")
        return EXIT_SOLVER
    if code == EXIT_SOLVER:
        sys.stderr.write("infall: partial result (see solver diagnostics in metadata)\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
