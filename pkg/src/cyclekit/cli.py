"""Command-line interface: ``cyclekit {reduce,count,verify,table,zoo}``.

Exit codes: 0 ok, 1 input error, 2 reduction failure, 3 not oscillatory.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import serialize as ser
from .averaging import EPS_WARN, AveragedDynamics, RescaledOscillator, kb_average, rescale
from .cycles import CycleReport, classify_cycles, format_table_csv, format_table_text, render_table_ii
from .errors import CycleKitError, InputError, NoFixedPointFound, NotOscillatory, ReductionError
from .modelzoo import get_model, zoo
from .odeverify import (
    Comparison, DetectSettings, Direction, PlanarField, compare_with_kb, kinetic_field, run_seeds,
    summarize_runs,
)
from .polycore import as_coeff
from .reduction import (
    Classification, FixedPointInfo, KineticSystem, LLSSystem, ReductionMap, build_reduction_map,
    classify_lls, find_fixed_points, fixed_point_info, reduce_to_lls, select_fixed_point,
)

log = logging.getLogger("cyclekit")

EXIT_OK, EXIT_INPUT, EXIT_REDUCTION, EXIT_NOT_OSCILLATORY = 0, 1, 2, 3


class UsageError(InputError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class Pipeline:
    """Everything computed so far for one system."""

    source: dict
    lls: LLSSystem
    kinetic: KineticSystem | None = None
    fixed_point: FixedPointInfo | None = None
    candidates: list[FixedPointInfo] = field(default_factory=list)
    rmap: ReductionMap | None = None
    warnings: list[str] = field(default_factory=list)


# argument parsing helpers

def _params(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise InputError(f"--param expects key=value, got {item!r}")
        try:
            out[key.strip()] = as_coeff(value.strip())
        except ValueError as exc:
            raise InputError(f"--param {key}: {exc}") from None
    return out


def _pair(text: str, what: str):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise InputError(f"{what} expects 'x,y', got {text!r}")
    try:
        return tuple(as_coeff(p) for p in parts)
    except ValueError as exc:
        raise InputError(f"{what}: {exc}") from None


def _floats(text: str, what: str) -> list[float]:
    try:
        vals = [float(as_coeff(p.strip())) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise InputError(f"{what}: {exc}") from None
    if not vals:
        raise InputError(f"{what} is empty")
    return vals


def _search_box(text: str):
    v = _floats(text, "--search-box")
    if len(v) != 4 or not (v[1] > v[0] and v[3] > v[2]):
        raise InputError("--search-box expects 'xmin,xmax,ymin,ymax' with xmin < xmax, ymin < ymax")
    return (v[0], v[1]), (v[2], v[3])


# pipeline stages

def build_pipeline(args) -> Pipeline:
    if args.model:
        entry = get_model(args.model)
        params = _params(args.param)
        notes = entry.notes(**params)
        sys_, fp_closed = entry.kinetic(**params)
        full = entry.params(**params)
        source = {"model": entry.name, "params": {k: ser.num(v) for k, v in full.items()}}
        pipe = _reduce_kinetic(sys_, args, source, default_fp=fp_closed)
        pipe.warnings.extend(notes)
        return pipe
    if args.param:
        raise InputError("--param only applies together with --model")
    loaded = ser.load_system(args.input)
    source = {"input": Path(args.input).name}
    if loaded.lls is not None:
        if args.fixed_point:
            raise InputError("--fixed-point does not apply to an LLS input")
        return Pipeline(source, loaded.lls)
    return _reduce_kinetic(loaded.kinetic, args, source)


def _reduce_kinetic(sys_: KineticSystem, args, source: dict, default_fp=None) -> Pipeline:
    candidates: list[FixedPointInfo] = []
    if args.fixed_point:
        fp = fixed_point_info(sys_, *_pair(args.fixed_point, "--fixed-point"))
    elif default_fp is not None:
        fp = fixed_point_info(sys_, *default_fp)
    else:
        box = _search_box(args.search_box) if args.search_box else ((-2.0, 2.0), (-2.0, 2.0))
        candidates = find_fixed_points(sys_, box, seed=args.seed)
        if not candidates:
            raise NoFixedPointFound(f"no fixed point found in {box}; pass --fixed-point or --search-box")
        fp = select_fixed_point(candidates)
    rmap = build_reduction_map(sys_, fp)
    lls = reduce_to_lls(sys_, fp, rmap)
    pipe = Pipeline(source, lls, sys_, fp, candidates, rmap)
    if fp.determinant < 0:
        pipe.warnings.append(f"fixed point ({fp.xs}, {fp.ys}) is a saddle")
    return pipe


def _fixed_point_doc(fp: FixedPointInfo) -> dict:
    return {
        "x": ser.num(fp.xs),
        "y": ser.num(fp.ys),
        "type": fp.kind,
        "trace": ser.num(fp.trace),
        "determinant": ser.num(fp.determinant),
        "eigenvalues": [ser.cnum(complex(z)) for z in fp.eigenvalues],
    }


def reduction_section(pipe: Pipeline) -> dict:
    cls: Classification = classify_lls(pipe.lls)
    lls = pipe.lls
    out: dict = {}
    if pipe.fixed_point is not None:
        out["fixed_point"] = _fixed_point_doc(pipe.fixed_point)
        if pipe.candidates:
            out["fixed_points_found"] = [_fixed_point_doc(p) for p in pipe.candidates]
    if pipe.rmap is not None:
        m = pipe.rmap
        out["map"] = {k: ser.num(getattr(m, k)) for k in (
            "beta0", "beta1", "beta2", "alpha0", "alpha1", "alpha2",
            "c1", "c2", "c3", "c4", "cL", "cK", "det")}
    out.update({
        "class": cls.lls_class.value,
        "N": cls.N,
        "M": cls.M,
        "F": ser.bipoly_terms(lls.F),
        "G": ser.unipoly_coeffs(lls.G),
        "omega_sq": ser.num(-lls.a(1, 0)),
        "F00": ser.num(cls.F00),
        "F00_sign": cls.F00_sign,
        "eigenvalue_sum": ser.cnum(complex(cls.eigenvalue_sum)),
        "trace_check": ser.num(float(cls.trace_check)),
        "limit_cycle_precondition": cls.limit_cycle_precondition,
    })
    return out


def averaging_section(osc: RescaledOscillator, avg: AveragedDynamics, time: str) -> dict:
    # tau-time: dr/dtau = eps*omega*r*core(r^2); t-time multiplies both rates by omega
    radial_pref = osc.eps * osc.omega
    phase_pref = osc.eps
    if time == "t":
        radial_pref = osc.eps * osc.omega_sq
        phase_pref = osc.eps * osc.omega
    return {
        "sigma": ser.num(osc.sigma),
        "omega_sq": ser.num(osc.omega_sq),
        "omega": ser.num(osc.omega),
        "eps": ser.num(osc.eps),
        "B": [{"n": n, "m": m, "c": ser.num(c)["value"], "provenance": ser.provenance_of(c)}
              for (n, m), c in sorted(osc.B.items())],
        "time": time,
        "radial": {"prefactor": ser.num(radial_pref), "core": ser.unipoly_coeffs(avg.radial_core)},
        "phase": {"prefactor": ser.num(phase_pref), "poly": ser.unipoly_coeffs(avg.phase)},
    }


def cycles_section(rep: CycleReport) -> dict:
    return {
        "origin": rep.origin_nature.value,
        "count": len(rep.cycles),
        "cycles": [
            {
                "radius": ser.num(c.radius),
                "rho": ser.num(c.rho),
                "multiplicity": c.multiplicity,
                "stability": c.stability.value,
                "freq_correction": ser.num(c.freq_correction),
                "frequency": ser.num(float(c.frequency)),
            }
            for c in rep.cycles
        ],
        "bound": {
            "N": rep.bound.N,
            "M": rep.bound.M,
            "parity_class": rep.bound.parity_class.value,
            "max_real_roots": rep.bound.max_real_roots,
            "max_cycles": rep.bound.max_cycles,
        },
        "saturated": rep.saturated,
        "complex_pairs": rep.complex_pairs,
        "nonpositive_real": rep.nonpositive_real,
        "warnings": list(rep.warnings),
    }


def _average(pipe: Pipeline, policy: str):
    osc = rescale(pipe.lls)
    if osc.eps >= EPS_WARN and policy == "strict":
        raise NotOscillatory(
            f"eps = {float(osc.eps):.4g} >= {EPS_WARN}: refusing to average under --eps-policy strict"
        )
    pipe.warnings.extend(osc.warnings)
    avg = kb_average(osc)
    return osc, avg, classify_cycles(avg)


def _radial_csv(avg: AveragedDynamics, rep: CycleReport, time: str) -> str:
    top = 1.5 * max([float(c.radius) for c in rep.cycles] or [2.0])
    scale = float(avg.omega) if time == "t" else 1.0
    rows = []
    for k in range(401):
        r = top * k / 400
        rows.append((r, scale * float(avg.dr(r)), scale * float(avg.dphi(r))))
    name = "dt" if time == "t" else "dtau"
    return ser.csv_text(("r", f"dr_{name}", f"dphi_{name}"), rows)


def _report(command: str, pipe: Pipeline) -> dict:
    return {
        "kind": "report",
        "command": command,
        "source": pipe.source,
        "system": ser.lls_document(pipe.lls),
        "reduction": reduction_section(pipe),
    }


# subcommands

def cmd_reduce(args, out) -> int:
    pipe = build_pipeline(args)
    doc = _report("reduce", pipe)
    doc["warnings"] = pipe.warnings
    ser.write_text(ser.dumps(doc), args.output, out)
    return EXIT_OK


def cmd_count(args, out) -> int:
    pipe = build_pipeline(args)
    osc, avg, rep = _average(pipe, args.eps_policy)
    doc = _report("count", pipe)
    doc["averaging"] = averaging_section(osc, avg, args.time)
    doc["cycles"] = cycles_section(rep)
    doc["warnings"] = pipe.warnings
    if args.radial_csv:
        ser.write_text(_radial_csv(avg, rep, args.time), args.radial_csv, out)
    ser.write_text(ser.dumps(doc), args.output, out)
    return EXIT_OK


def _default_seeds(rep: CycleReport) -> list[float]:
    radii = sorted(float(c.radius) for c in rep.cycles)
    if not radii:
        return [0.5, 1.0, 2.0]
    seeds = [0.5 * radii[0]]
    seeds += [0.5 * (a + b) for a, b in zip(radii, radii[1:])]
    seeds.append(1.5 * radii[-1])
    return seeds


def _field(pipe: Pipeline) -> PlanarField:
    if pipe.kinetic is not None:
        return kinetic_field(pipe.kinetic, pipe.fixed_point)
    return PlanarField.from_lls(pipe.lls)


def _comparison_doc(cmp: Comparison, runs, unique) -> dict:
    sim = "simulated"
    return {
        "threshold": ser.num(cmp.threshold),
        "all_agree": cmp.all_agree,
        "matches": [
            {"predicted": ser.num(m.predicted), "detected": ser.num(m.detected, sim),
             "rel_error": ser.num(m.rel_error, sim), "agree": m.agree,
             "stability_agree": m.stability_agree}
            for m in cmp.matches
        ],
        "unmatched_predicted": [ser.num(p) for p in cmp.unmatched_predicted],
        "unmatched_detected": [ser.num(d, sim) for d in cmp.unmatched_detected],
        "detected": [
            {"amplitude": ser.num(d.amplitude, sim), "radius_proxy": ser.num(d.radius_proxy, sim),
             "period": ser.num(d.period, sim), "stability": d.stability.value,
             "seed": ser.num(d.seed), "direction": d.direction.value, "crossings": d.crossings}
            for d in unique if d.converged
        ],
        "runs": [
            {"seed": ser.num(r.seed), "direction": r.direction.value, "converged": r.converged,
             "crossings": r.crossings, "note": r.note}
            for r in runs
        ],
    }


def _emit_trajectories(runs, fld: PlanarField, kinetic: bool, directory: str) -> None:
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    for i, r in enumerate(runs):
        tag = "forward" if r.direction == Direction.FORWARD else "reversed"
        if kinetic:
            header = ("t", "x", "y", "xi", "xi_dot")
            rows = ((t, *y, *fld.to_section(*y)) for t, y in r.trace)
        else:
            header = ("t", "xi", "xi_dot")
            rows = ((t, *y) for t, y in r.trace)
        (path / f"seed{i // len(Direction)}_{tag}.csv").write_text(ser.csv_text(header, rows))


def cmd_verify(args, out) -> int:
    pipe = build_pipeline(args)
    osc, avg, rep = _average(pipe, "warn")
    seeds = _floats(args.seeds, "--seeds") if args.seeds else _default_seeds(rep)
    if any(not s > 0 for s in seeds):
        raise InputError("--seeds must be positive")
    if not args.tmax > 0:
        raise InputError("--tmax must be positive")
    settings = DetectSettings(t_max=args.tmax, rel_tol=args.rel_tol)
    fld = _field(pipe)
    runs = run_seeds(fld, seeds, settings, record=bool(args.emit_trajectories))
    unique = summarize_runs(runs, settings)
    cmp = compare_with_kb(rep, unique, osc.eps)
    for r in runs:
        if not r.converged:
            pipe.warnings.append(f"seed {r.seed:g} {r.direction.value}: {r.note}")
    doc = _report("verify", pipe)
    doc["averaging"] = averaging_section(osc, avg, "tau")
    doc["cycles"] = cycles_section(rep)
    doc["comparison"] = _comparison_doc(cmp, runs, unique)
    doc["warnings"] = pipe.warnings
    if args.emit_trajectories:
        _emit_trajectories(runs, fld, pipe.kinetic is not None, args.emit_trajectories)
    ser.write_text(ser.dumps(doc), args.output, out)
    return EXIT_OK


def cmd_table(args, out) -> int:
    if args.nmax < 1 or args.mmax < 1:
        raise UsageError("--nmax and --mmax must be at least 1")
    grid = render_table_ii(args.nmax, args.mmax)
    text = format_table_csv(grid) if args.format == "csv" else format_table_text(grid, args.header)
    ser.write_text(text, args.output, out)
    return EXIT_OK


def cmd_zoo(args, out) -> int:
    entries = zoo()
    if args.format == "json":
        doc = [
            {"name": e.name, "description": e.description, "form": e.native,
             "defaults": {k: ser.num(v) for k, v in e.defaults.items()}}
            for e in entries
        ]
        ser.write_text(ser.dumps({"models": doc}), args.output, out)
        return EXIT_OK
    width = max(len(e.name) for e in entries)
    lines = []
    for e in entries:
        defaults = " ".join(f"{k}={ser.num(v)['value']}" for k, v in e.defaults.items())
        lines.append(f"{e.name.ljust(width)}  {e.description}  [{defaults}]")
    ser.write_text("\n".join(lines) + "\n", args.output, out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cyclekit", description="Limit cycles of planar polynomial oscillators.")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def system_opts(sp):
        src = sp.add_mutually_exclusive_group(required=True)
        src.add_argument("--input", metavar="FILE", help="system JSON (kinetic, lls, or a report)")
        src.add_argument("--model", metavar="NAME", help="model from the zoo")
        sp.add_argument("--param", nargs="+", action="extend", metavar="K=V", help="model parameter")
        sp.add_argument("--fixed-point", metavar="X,Y", help="fixed point to reduce around")
        sp.add_argument("--search-box", metavar="X0,X1,Y0,Y1", help="fixed-point search region")
        sp.add_argument("--seed", type=int, default=0, help="seed for the fixed-point search")
        sp.add_argument("--output", "-o", metavar="FILE", help="report path (default stdout)")

    r = sub.add_parser("reduce", help="reduce to LLS form and classify")
    system_opts(r)
    r.set_defaults(func=cmd_reduce)

    c = sub.add_parser("count", help="averaged equations and limit-cycle count")
    system_opts(c)
    c.add_argument("--eps-policy", choices=("warn", "strict"), default="warn")
    c.add_argument("--time", choices=("tau", "t"), default="tau", help="time scale of the rates")
    c.add_argument("--radial-csv", metavar="FILE", help="write radial-flow plot data")
    c.set_defaults(func=cmd_count)

    v = sub.add_parser("verify", help="compare averaged cycles with direct integration")
    system_opts(v)
    v.add_argument("--seeds", metavar="R1,R2,...", help="initial amplitudes on the section")
    v.add_argument("--tmax", type=float, default=1e6, help="integration time cap per run")
    v.add_argument("--rel-tol", type=float, default=1e-6, help="section convergence tolerance")
    v.add_argument("--emit-trajectories", metavar="DIR", help="write one CSV per run")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("table", help="degree table for 1 <= N <= nmax, 1 <= M <= mmax")
    t.add_argument("--nmax", type=int, default=10)
    t.add_argument("--mmax", type=int, default=10)
    t.add_argument("--format", choices=("text", "csv"), default="text")
    t.add_argument("--header", action="store_true", help="label rows and columns (text only)")
    t.add_argument("--output", "-o", metavar="FILE")
    t.set_defaults(func=cmd_table)

    z = sub.add_parser("zoo", help="list models")
    z.add_argument("--format", choices=("text", "json"), default="text")
    z.add_argument("--output", "-o", metavar="FILE")
    z.set_defaults(func=cmd_zoo)
    return p


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    handler = logging.StreamHandler(stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    root = logging.getLogger("cyclekit")
    root.addHandler(handler)
    try:
        try:
            args = build_parser().parse_args(argv)
        except SystemExit as exc:  # --help
            return int(exc.code or 0)
        root.setLevel(logging.INFO if args.verbose else logging.WARNING)
        return args.func(args, stdout)
    except NotOscillatory as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_NOT_OSCILLATORY
    except (ReductionError, NoFixedPointFound) as exc:
        stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_REDUCTION
    except (InputError, ValueError) as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except CycleKitError as exc:
        stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_INPUT
    finally:
        root.removeHandler(handler)


if __name__ == "__main__":
    sys.exit(main())
