"""Command-line interface.

    htype verify    --k 2 --mult 1
    htype table     --n 5 --format csv
    htype density   --k 2 --mult 1 --rho-max 3 --samples 50
    htype geodesic  --k 2 --mult 1 --directions 4
    htype heat      --k 2 --mult 1 --t-end 1
    htype curvature --k 3 --mult 1+1

Exit status: 0 when every check passes, 1 on a verification failure, 2 on a
usage or configuration error.  ``--config FILE`` reads a flat JSON object
whose keys are option names (``rho_max`` or ``rho-max``); flags given on the
command line win.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__, catalog, checks, geometry, radial
from .algebra import CliffordSpec, has_chirality
from .group import Space, make_space

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# report
# --------------------------------------------------------------------------


@dataclass
class Table:
    columns: list
    rows: list


@dataclass
class Report:
    command: str
    config: dict
    space: dict | None = None
    checks: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    primary: str | None = None
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def document(self, timing: bool = False) -> dict:
        doc = {
            "tool": "htype",
            "version": __version__,
            "command": self.command,
            "config": self.config,
        }
        if self.space is not None:
            doc["space"] = self.space
        if self.checks:
            doc["checks"] = [c.as_dict(timing) for c in self.checks]
            doc["summary"] = {
                "checks": len(self.checks),
                "failed": sum(not c.passed for c in self.checks),
                "ok": self.ok,
            }
        if self.results:
            doc["results"] = self.results
        if self.tables:
            doc["tables"] = {
                name: {"columns": t.columns, "rows": t.rows} for name, t in self.tables.items()
            }
        if timing:
            doc["seconds"] = round(self.elapsed, 4)
        return doc


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "yes" if v else "no"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _aligned(columns, rows) -> list:
    cells = [list(map(str, columns))] + [[_fmt(v) for v in r] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    return ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in cells]


def render_text(report: Report, timing: bool = False) -> str:
    lines = [f"# htype {__version__} {report.command}"]
    lines.append("# config: " + json.dumps(report.config, sort_keys=True))
    if report.space:
        lines.append("# space: " + ", ".join(f"{k}={v}" for k, v in report.space.items()))
    if report.checks:
        lines.append("")
        cols = ["check", "value", "relation", "tol", "status"] + (["suite s"] if timing else [])
        rows = [
            [c.name, c.value, c.relation, c.tol, "PASS" if c.passed else "FAIL"]
            + ([round(c.seconds, 3)] if timing else [])
            for c in report.checks
        ]
        lines += _aligned(cols, rows)
        failed = sum(not c.passed for c in report.checks)
        lines.append(f"{len(report.checks) - failed}/{len(report.checks)} checks passed")
    if report.results:
        lines.append("")
        for k, v in report.results.items():
            lines.append(f"{k}: {_fmt(v)}")
    for name, t in report.tables.items():
        lines.append("")
        lines.append(f"[{name}]")
        lines += _aligned(t.columns, t.rows)
    if timing:
        lines.append(f"# wall time {report.elapsed:.3f} s")
    return "\n".join(lines) + "\n"


def render_csv(report: Report, table: str | None = None) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    name = table or report.primary
    if name is None or name == "checks":
        writer.writerow(["check", "value", "relation", "tol", "passed"])
        for c in report.checks:
            writer.writerow([c.name, repr(c.value), c.relation, repr(c.tol), c.passed])
        return buf.getvalue()
    if name not in report.tables:
        raise UsageError(f"unknown table {name!r}; choose from {sorted(report.tables)} or 'checks'")
    t = report.tables[name]
    writer.writerow(t.columns)
    for row in t.rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def render(report: Report, fmt: str, timing: bool, table: str | None) -> str:
    if fmt == "json":
        return json.dumps(report.document(timing), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if fmt == "csv":
        return render_csv(report, table)
    return render_text(report, timing)


# --------------------------------------------------------------------------
# configuration
# --------------------------------------------------------------------------


def parse_mult(text: str, k: int):
    text = str(text).strip()
    try:
        if "+" in text:
            parts = tuple(int(p) for p in text.split("+"))
            if len(parts) != 2:
                raise ValueError
            return parts
        n = int(text)
    except ValueError:
        raise UsageError(f"cannot parse multiplicity {text!r}; use N or N+M") from None
    return (n, 0) if has_chirality(k) else n


def build_space(args) -> Space:
    try:
        mult = parse_mult(args.mult, args.k)
        if isinstance(mult, tuple) and not has_chirality(args.k):
            raise UsageError(f"k={args.k} has no chirality; give a single multiplicity")
        return make_space(args.k, mult)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def space_summary(space: Space) -> dict:
    spec: CliffordSpec = space.spec
    mult = f"{spec.mult[0]}+{spec.mult[1]}" if isinstance(spec.mult, tuple) else str(spec.mult)
    return {"k": space.k, "mult": mult, "m": space.m, "dim": space.dim, "Q": str(space.Q)}


_NON_CONFIG = {"command", "config", "handler", "out"}  # destinations do not change results


def config_echo(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NON_CONFIG}


def load_config(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict) or any(isinstance(v, (dict, list)) for v in data.values()):
        raise UsageError("config must be a flat JSON object")
    return {key.replace("-", "_"): value for key, value in data.items()}


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def _tolerances(args) -> dict:
    return {
        key: getattr(args, "tol_" + key.replace("-", "_"), default)
        for key, default in checks.DEFAULT_TOLERANCES.items()
    }


def cmd_verify(args) -> Report:
    space = build_space(args)
    suites = [s.strip() for s in args.suites.split(",")] if args.suites else None
    unknown = set(suites or ()) - set(checks.SUITES)
    if unknown:
        raise UsageError(f"unknown suites {sorted(unknown)}; choose from {list(checks.SUITES)}")
    options = {
        "geodesic": {"n_directions": args.geodesic_directions, "step": args.geodesic_step},
        "harmonic": {"n_directions": args.harmonic_directions},
    }
    results = checks.run_suites(space, seed=args.seed, tol=_tolerances(args), only=suites, options=options)
    report = Report("verify", config_echo(args), space_summary(space), results, primary="checks")
    if suites is None or "curvature" in suites:
        report.results["symmetric"] = geometry.is_symmetric(space)
        report.results["expected_symmetric"] = catalog.expected_symmetric(space.spec)
    return report


def cmd_table(args) -> Report:
    rows = [catalog.table_row(k) for k in range(1, args.kmax + 1)]
    report = Report("table", config_echo(args), primary="dims")
    report.tables["table"] = Table(
        ["k", "dim S", *[f"n={n}" for n in range(args.n + 1)], "note"],
        [[r.k, r.descriptor, *(r.values(args.n) or ["—"] * (args.n + 1)), r.note] for r in rows],
    )
    report.tables["dims"] = Table(
        ["k", "n", "dim"], [[r.k, n, d] for r in rows for n, d in enumerate(r.values(args.n))]
    )
    return report


def cmd_density(args) -> Report:
    space = build_space(args)
    rng = np.random.default_rng(args.seed)
    dirs = checks.unit_vectors(rng, args.directions, space.dim)
    rhos = np.linspace(args.rho_max / args.samples, args.rho_max, args.samples)
    rows, worst, spread, forms = [], 0.0, 0.0, 0.0
    for rho in rhos:
        closed = float(radial.density_omega(space, rho))
        numeric = np.array([radial.volume_density_numeric(space, rho, w) for w in dirs])
        rel = float(np.abs(numeric / closed - 1.0).max())
        sp = float((numeric.max() - numeric.min()) / closed)
        forms = max(forms, abs(float(radial.density_omega_r(space, rho)) / closed - 1.0))
        worst, spread = max(worst, rel), max(spread, sp)
        rows.append([float(rho), closed, float(numeric.mean()), rel, sp])
    report = Report("density", config_echo(args), space_summary(space), primary="density")
    report.tables["density"] = Table(["rho", "omega_closed", "omega_numeric", "rel_error", "direction_spread"], rows)
    report.checks = [
        checks.at_most("density_closed_forms_agree", forms, args.tol_density_forms),
        checks.at_most("density_numeric_vs_closed", worst, args.tol_density),
        checks.at_most("density_direction_spread", spread, args.tol_density_spread),
    ]
    return report


def cmd_geodesic(args) -> Report:
    space = build_space(args)
    rng = np.random.default_rng(args.seed)
    dirs = checks.unit_vectors(rng, args.directions, space.dim)
    paths = geometry.geodesic_fan(space, dirs, args.length, args.step)
    rows = []
    for j, p in enumerate(paths):
        idx = list(range(0, len(p.arc), args.every))
        if idx[-1] != len(p.arc) - 1:
            idx.append(len(p.arc) - 1)
        for i in idx:
            x = p.points[i]
            r = float(np.linalg.norm(x))
            transverse = float(np.linalg.norm(x - (x @ p.direction) * p.direction))
            rows.append([j, float(p.arc[i]), r, float(2 * np.arctanh(r)), transverse])
    report = Report("geodesic", config_echo(args), space_summary(space), primary="path")
    report.tables["path"] = Table(["direction", "arc", "r", "rho", "transverse"], rows)
    report.checks = [
        checks.at_most("geodesic_transverse_deviation", max(p.transverse_deviation() for p in paths), args.tol_geodesic),
        checks.at_most("geodesic_distance_formula", max(p.distance_error() for p in paths), args.tol_distance),
        checks.at_most("geodesic_unit_speed", max(p.speed_error for p in paths), args.tol_geodesic),
    ]
    report.results["truncated_paths"] = sum(p.truncated for p in paths)
    return report


def cmd_heat(args) -> Report:
    space = build_space(args)
    grid = np.linspace(0.0, args.rho_max, args.n_grid)
    width = args.width if args.width is not None else 3.0 * grid[1]
    if width < 3.0 * grid[1] * (1 - 1e-12):
        raise UsageError("initial bump width must cover at least 3 grid cells")
    sol = radial.heat_solve(
        space,
        rho_max=args.rho_max,
        n_grid=args.n_grid,
        t_end=args.t_end,
        n_steps=args.n_steps,
        init=radial.gaussian_bump(space, grid, width),
        boundary=args.boundary,
        n_record=args.record,
        mass_tol=args.tol_heat_mass,
    )
    report = Report("heat", config_echo(args), space_summary(space), primary="ledger")
    m0 = float(sol.mass[0])
    report.tables["ledger"] = Table(
        ["t", "mass", "mass_drift", "second_moment", "min_value"],
        [
            [float(t), float(m), abs(float(m) - m0) / abs(m0), float(mom), float(p.values.min())]
            for t, m, mom, p in zip(sol.times, sol.mass, sol.second_moment, sol.profiles)
        ],
    )
    report.tables["profiles"] = Table(
        ["t", "rho", "u"],
        [[float(t), float(r), float(u)] for t, p in zip(sol.times, sol.profiles) for r, u in zip(p.grid, p.values)],
    )
    if args.boundary == "zero-flux":
        report.checks.append(checks.at_most("heat_mass_drift", sol.mass_drift, args.tol_heat_mass))
    report.checks += [
        checks.at_least("heat_min_value", sol.min_value, -args.tol_heat_positivity),
        checks.Check("heat_second_moment_increasing", float(np.diff(sol.second_moment).min()), 0.0, sol.spreading, ">"),
    ]
    return report


def cmd_curvature(args) -> Report:
    space = build_space(args)
    cd = geometry.curvature(space)
    ratio = cd.DR_norm / cd.R_norm
    if ratio <= args.rel_tol:
        verdict = "symmetric"
    elif ratio >= geometry.NONSYMMETRIC_SEPARATION:
        verdict = "nonsymmetric"
    else:
        verdict = "indeterminate"
    expected = catalog.expected_symmetric(space.spec)
    report = Report("curvature", config_echo(args), space_summary(space), primary="sectional")
    report.results.update({
        "R_norm": cd.R_norm,
        "nabla_R_norm": cd.DR_norm,
        "ratio": ratio,
        "verdict": verdict,
        "expected": "symmetric" if expected else "nonsymmetric",
    })
    e = np.eye(space.dim)
    m = space.m
    JX = np.zeros(space.dim)
    JX[:m] = space.algebra.E[0] @ e[0, :m]
    planes = [("X1", e[0], "T", e[-1]), ("Z1", e[m], "T", e[-1]), ("X1", e[0], "J1X1", JX), ("X1", e[0], "Z1", e[m])]
    rng = np.random.default_rng(args.seed)
    for i in range(args.samples):
        u, v = rng.normal(size=(2, space.dim))
        planes.append((f"random{i}a", u, f"random{i}b", v))
    report.tables["sectional"] = Table(
        ["u", "v", "K"], [[a, b, geometry.sectional_curvature(space, u, v)] for a, u, b, v in planes]
    )
    report.checks = checks.curvature_suite(space, rng, _tolerances(args), n_subgroups=args.subgroups)
    report.checks.append(checks.Check(
        "verdict_matches_expected", ratio, args.rel_tol, verdict == report.results["expected"], "verdict",
    ))
    return report


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def _common(space: bool = True) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    if space:
        p.add_argument("--k", type=_positive_int, default=2, help="center dimension (default 2)")
        p.add_argument("--mult", default="1", help="multiplicity N, or N+M (chirality) for k = 3 mod 4")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.add_argument("--table", default=None, help="table emitted in CSV mode")
    p.add_argument("--out", default=None, help="write output here instead of stdout")
    p.add_argument("--config", default=None, help="flat JSON file of option values")
    p.add_argument("--timing", action="store_true", help="include wall times (breaks byte-stable output)")
    return p


def _add_tolerances(p: argparse.ArgumentParser, keys) -> None:
    for key in keys:
        p.add_argument(
            f"--tol-{key}", type=_positive_float, default=checks.DEFAULT_TOLERANCES[key],
            help=f"default {checks.DEFAULT_TOLERANCES[key]:g}",
        )


def build_parser() -> tuple:
    parser = argparse.ArgumentParser(prog="htype", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"htype {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("verify", parents=[_common()], help="run the invariant suites")
    p.add_argument("--suites", default=None, help=f"comma list from {','.join(checks.SUITES)}")
    p.add_argument("--geodesic-directions", type=_positive_int, default=20)
    p.add_argument("--geodesic-step", type=_positive_float, default=1e-3)
    p.add_argument("--harmonic-directions", type=_positive_int, default=8)
    _add_tolerances(p, checks.DEFAULT_TOLERANCES)
    p.set_defaults(handler=cmd_verify)
    subs["verify"] = p

    p = sub.add_parser("table", parents=[_common(space=False)], help="dimensions of nonsymmetric S")
    p.add_argument("--n", type=_nonneg_int, default=3, help="largest n in the progressions")
    p.add_argument("--kmax", type=_positive_int, default=8, help="rows k = 1..kmax (beyond 8 is extrapolated)")
    p.set_defaults(handler=cmd_table)
    subs["table"] = p

    p = sub.add_parser("density", parents=[_common()], help="closed-form vs metric volume density")
    p.add_argument("--rho-max", type=_positive_float, default=3.0)
    p.add_argument("--samples", type=_positive_int, default=50)
    p.add_argument("--directions", type=_positive_int, default=4)
    _add_tolerances(p, ["density-forms", "density", "density-spread"])
    p.set_defaults(handler=cmd_density)
    subs["density"] = p

    p = sub.add_parser("geodesic", parents=[_common()], help="geodesics from the origin of the ball")
    p.add_argument("--directions", type=_positive_int, default=4)
    p.add_argument("--length", type=_positive_float, default=2.0)
    p.add_argument("--step", type=_positive_float, default=1e-3)
    p.add_argument("--every", type=_positive_int, default=100, help="emit every n-th path sample")
    _add_tolerances(p, ["geodesic", "distance"])
    p.set_defaults(handler=cmd_geodesic)
    subs["geodesic"] = p

    p = sub.add_parser("heat", parents=[_common()], help="radial heat flow")
    p.add_argument("--rho-max", type=_positive_float, default=12.0)
    p.add_argument("--n-grid", type=_positive_int, default=1201)
    p.add_argument("--t-end", type=_positive_float, default=1.0)
    p.add_argument("--n-steps", type=_positive_int, default=1000)
    p.add_argument("--width", type=_positive_float, default=None, help="initial bump width (default 3 cells)")
    p.add_argument("--boundary", choices=("zero-flux", "absorbing"), default="zero-flux")
    p.add_argument("--record", type=_positive_int, default=11, help="number of recorded time slices")
    _add_tolerances(p, ["heat-mass", "heat-positivity"])
    p.set_defaults(handler=cmd_heat)
    subs["heat"] = p

    p = sub.add_parser("curvature", parents=[_common()], help="curvature and symmetry verdict")
    p.add_argument("--rel-tol", type=_positive_float, default=geometry.SYMMETRIC_REL_TOL)
    p.add_argument("--samples", type=_nonneg_int, default=4, help="random sectional-curvature planes")
    p.add_argument("--subgroups", type=_positive_int, default=10, help="random 4-dim subgroups checked")
    _add_tolerances(p, ["connection", "curvature", "second-fundamental-form"])
    p.set_defaults(handler=cmd_curvature)
    subs["curvature"] = p
    return parser, subs


def parse_args(argv) -> argparse.Namespace:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        values = load_config(args.config)
        sub = subs[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(values) - known - {"command"}
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        # re-parse so that explicit flags override the file; values pass
        # through the same type converters as flags
        defaults = {}
        for action in sub._actions:
            if action.dest in values:
                raw = values[action.dest]
                if action.type is not None and not isinstance(raw, bool):
                    try:
                        raw = action.type(str(raw))
                    except (argparse.ArgumentTypeError, ValueError) as exc:
                        raise UsageError(f"config value {action.dest}={values[action.dest]!r}: {exc}") from None
                if action.choices is not None and raw not in action.choices:
                    raise UsageError(f"config value {action.dest}={raw!r} not in {list(action.choices)}")
                defaults[action.dest] = raw
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = parse_args(argv)
        start = time.perf_counter()
        report = args.handler(args)
        report.elapsed = time.perf_counter() - start
        text = render(report, args.format, args.timing, args.table)
    except UsageError as exc:
        print(f"htype: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ArithmeticError as exc:
        print(f"htype: numeric failure: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            sys.stderr.close()
    return EXIT_OK if report.ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
