"""Command-line entry point ``lagbonnet``.

Exit codes: 0 when every verdict passes, 1 when some verdict fails, 2 on
input errors (unreadable or invalid files, bad arguments, "not a pair").
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .bonnet import (
    NotAPairError,
    NotBonnetError,
    NotHarmonicError,
    PeriodError,
    bonnet_admissibility,
    deform,
    equivalence_agrees,
    h_structure_checks,
    holomorphic_completion,
    integrate_pfaff,
    pair_decompose,
    umbilic_analysis,
)
from .catalog import CatalogError, make_constant_solution, perturb, solve_profile_ode
from .chart import ConformalChart, FieldNorms, field_norms
from .integrability import classify, integrability_residuals, tolerance
from .reconstruction import IntegrabilityError, ReconstructionError, monodromy_defect, reconstruct_grid


class InputError(ValueError):
    pass


def _tol(args, chart) -> float:
    return tolerance(chart, tol=args.tol, tol_class=args.tol_class)


def _base(args, chart) -> tuple[int, int]:
    if args.base is None:
        return (0, 0)
    try:
        a, b = args.base.split(",")
    except ValueError:
        raise InputError(f"--base expects 'x,y', got {args.base!r}") from None
    try:
        ix, iy = int(a), int(b)
    except ValueError:
        try:
            ix, iy = chart.index_of(float(a), float(b))
        except ValueError as exc:
            raise InputError(f"--base: {exc}") from None
    if not (0 <= ix < chart.nx and 0 <= iy < chart.ny):
        raise InputError(f"--base grid point ({ix}, {iy}) is outside the {chart.nx}x{chart.ny} chart")
    return ix, iy


def _emit(args, report: dict) -> int:
    text = io.emit_report(report)
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return report["exit"]


def _write_out(args, text: str) -> None:
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")


# -- subcommands ---------------------------------------------------------------


def cmd_check(args) -> int:
    data = io.parse_surface_file(args.input)
    tol = _tol(args, data.chart)
    res = integrability_residuals(data, tol=tol)
    cls = classify(data, tol=tol)
    norms = dict(res.norms)
    norms.update({f"classify.{k}": v for k, v in cls.norms.items()})
    details = {"classification": cls.verdicts}
    return _emit(args, io.make_report("check", args.input, tol, norms, res.verdicts, details=details))


def cmd_reconstruct(args) -> int:
    data = io.parse_surface_file(args.input)
    ch = data.chart
    tol = _tol(args, ch)
    base = _base(args, ch)
    res = integrability_residuals(data, tol=tol)
    try:
        imm = reconstruct_grid(data, base, check=not args.override_integrability, tol=tol,
                               tol_class=args.tol_class, project=args.project)
    except IntegrabilityError as exc:
        rep = io.make_report("reconstruct", args.input, tol, res.norms, res.verdicts, exit=1,
                             details={"error": str(exc)})
        return _emit(args, rep)
    except ReconstructionError as exc:
        rep = io.make_report("reconstruct", args.input, tol, res.norms, {"reconstruction": False},
                             details={"error": str(exc)})
        return _emit(args, rep)
    loop = (0, 0, ch.nx - 1, ch.ny - 1)
    mono = monodromy_defect(data, loop)
    norms = {
        "cross_defect": FieldNorms(imm.cross_defect, imm.cross_defect),
        "monodromy": FieldNorms(mono, mono),
    }
    for k, v in sorted(imm.drift.items()):
        norms[f"drift.{k}"] = FieldNorms(float(v), float(v))
    verdicts = {"cross_defect": imm.cross_defect <= tol, "monodromy": mono <= tol}
    if not args.override_integrability:
        verdicts.update({f"integrability.{k}": v for k, v in res.verdicts.items()})
    _write_out(args, io.emit_immersion_csv(imm))
    return _emit(args, io.make_report("reconstruct", args.input, tol, norms, verdicts))


def cmd_deform(args) -> int:
    data = io.parse_surface_file(args.input)
    tol = _tol(args, data.chart)
    base = _base(args, data.chart)
    try:
        state = integrate_pfaff(data, args.t0, base, check=not args.override_integrability,
                                tol_class=args.tol_class if args.tol_class != "exact" else "h2")
    except NotBonnetError as exc:
        rep = io.make_report("deform", args.input, tol, {}, {"bonnet": False}, details={"error": str(exc)})
        return _emit(args, rep)
    new = deform(data, state)
    res = integrability_residuals(new, tol=tol)
    norms = {"closure_defect": FieldNorms(state.closure_defect, state.closure_defect),
             "closure_density": FieldNorms(state.closure_density, state.closure_density)}
    norms.update({f"deformed.{k}": v for k, v in res.norms.items()})
    verdicts = {f"deformed.{k}": v for k, v in res.verdicts.items()}
    _write_out(args, io.emit_surface(new))
    return _emit(args, io.make_report("deform", args.input, tol, norms, verdicts))


def cmd_pair(args) -> int:
    a = io.parse_surface_file(args.first)
    b = io.parse_surface_file(args.second)
    if a.chart != b.chart:
        raise InputError("the two files live on different charts")
    if a.c != b.c:
        raise InputError("the two files live in different space forms")
    ch = a.chart
    tol = _tol(args, ch)
    dec = pair_decompose(ch, a.psi, b.psi)
    d = dec.diagnostics
    norms = {
        "du": field_norms(ch, a.u - b.u, margin=0),
        "dphi": field_norms(ch, a.phi - b.phi, margin=0),
        "cr_h": d["cr_h"],
        "modulus": d["modulus"],
        "im_alpha": d["im_alpha"],
    }
    verdicts = {k: n.linf <= tol for k, n in norms.items()}
    details = {"filled": [{k: v for k, v in e.items()} for e in d["filled"]]}
    return _emit(args, io.make_report("pair", [args.first, args.second], tol, norms, verdicts, details=details))


def cmd_umbilics(args) -> int:
    data = io.parse_surface_file(args.input)
    rep = umbilic_analysis(data.chart, data.psi, eps_rel=args.eps_rel)
    verdicts = {"isolated": not rep.boundary_clusters}
    if rep.genus1_consistent is not None:
        verdicts["genus1_consistent"] = rep.genus1_consistent
    details = {
        "degree": rep.degree,
        "threshold": rep.threshold,
        "umbilics": [{"cell": list(p.cell), "x": p.location.real, "y": p.location.imag, "index": p.index}
                     for p in rep.points],
        "boundary_clusters": [{"cell": list(b["cell"]), "reason": b["reason"]} for b in rep.boundary_clusters],
    }
    return _emit(args, io.make_report("umbilics", args.input, None, {}, verdicts, details=details))


def cmd_bonnet(args) -> int:
    data = io.parse_surface_file(args.input)
    ch = data.chart
    tol = _tol(args, ch)
    adm = bonnet_admissibility(data, tol=tol)
    norms = dict(adm.norms)
    verdicts = {"r17": adm.verdicts["r17"], "r18": adm.verdicts["r18"], "r17_r18_agree": equivalence_agrees(adm)}
    notes = {}
    inv = 1.0 / np.where(adm.mask, data.psi, 1.0)
    if adm.mask.all() and np.max(np.abs(inv.imag)) <= tol:
        try:
            h = holomorphic_completion(ch, inv.real, tol=tol)
            hs = h_structure_checks(data, h, tol=tol)
            norms.update({f"h.{k}": v for k, v in hs.norms.items()})
            notes.update(hs.notes)
        except (NotHarmonicError, PeriodError, ValueError) as exc:
            notes["h_structure"] = f"not applicable: {exc}"
    else:
        notes["h_structure"] = "not applicable: 1/psi is not a real field on the whole chart"
    return _emit(args, io.make_report("bonnet", args.input, tol, norms, verdicts, details={"notes": notes}))


def _chart_from_args(args) -> ConformalChart:
    return ConformalChart(args.nx, args.ny, args.x_min, args.x_max, args.y_min, args.y_max,
                          args.periodic_x, args.periodic_y)


def cmd_catalog(args) -> int:
    if args.kind == "perturb":
        if not args.input:
            raise InputError("catalog perturb needs --input")
        base = io.parse_surface_file(args.input)
        data = perturb(base, args.which, args.epsilon).data
    else:
        try:
            ch = _chart_from_args(args)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        if args.kind == "constant":
            data = make_constant_solution(ch, args.c, args.u0, complex(args.phi0), complex(args.psi0))
        else:
            data = solve_profile_ode(ch, args.c, complex(args.psi0), args.u_init, args.du_init)
    text = io.emit_surface(data)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.report:
        res = integrability_residuals(data, tol=_tol(args, data.chart))
        rep = io.make_report("catalog", args.kind, res.tol, res.norms, {}, exit=0)
        Path(args.report).write_text(io.emit_report(rep), encoding="utf-8")
    return 0


def cmd_report(args) -> int:
    reports = []
    for p in args.reports:
        try:
            reports.append(json.loads(Path(p).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read report {p}: {exc}") from None
    try:
        merged = io.merge_reports(reports, list(args.reports))
    except ValueError as exc:
        raise InputError(str(exc)) from None
    text = io.emit_report(merged)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return merged["exit"]


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-8, help="absolute tolerance for the exact class")
    common.add_argument("--tol-class", choices=("exact", "h2", "h4"), default="exact")
    common.add_argument("--report", help="write the JSON report here instead of stdout")
    common.add_argument("--out", help="output file (CSV, surface file or merged report)")
    common.add_argument("--base", help="base point as grid indices 'ix,iy' or coordinates 'x,y'")

    p = argparse.ArgumentParser(prog="lagbonnet", description="Checks and reconstruction for Lagrangian surface data.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("check", parents=[common], help="structure equations and classification")
    s.add_argument("input")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("reconstruct", parents=[common], help="integrate the frame and export the immersion")
    s.add_argument("input")
    s.add_argument("--project", action="store_true", help="renormalize onto the quadric after each step")
    s.add_argument("--override-integrability", action="store_true")
    s.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("deform", parents=[common], help="integrate the deformation and write the new data")
    s.add_argument("input")
    s.add_argument("--t0", type=float, default=1.0)
    s.add_argument("--override-integrability", action="store_true")
    s.set_defaults(func=cmd_deform)

    s = sub.add_parser("pair", parents=[common], help="decompose two data files as a pair")
    s.add_argument("first")
    s.add_argument("second")
    s.set_defaults(func=cmd_pair)

    s = sub.add_parser("umbilics", parents=[common], help="zeros of psi and their indices")
    s.add_argument("input")
    s.add_argument("--eps-rel", type=float, default=1e-3)
    s.set_defaults(func=cmd_umbilics)

    s = sub.add_parser("bonnet", parents=[common], help="Bonnet admissibility and h-structure residuals")
    s.add_argument("input")
    s.set_defaults(func=cmd_bonnet)

    s = sub.add_parser("catalog", parents=[common], help="emit generated surface data")
    s.add_argument("kind", choices=("constant", "profile", "perturb"))
    s.add_argument("--input", help="base data for 'perturb'")
    s.add_argument("--c", type=int, default=0, choices=(-1, 0, 1))
    s.add_argument("--nx", type=int, default=64)
    s.add_argument("--ny", type=int, default=64)
    s.add_argument("--x-min", type=float, default=0.0)
    s.add_argument("--x-max", type=float, default=1.0)
    s.add_argument("--y-min", type=float, default=0.0)
    s.add_argument("--y-max", type=float, default=1.0)
    s.add_argument("--periodic-x", action="store_true")
    s.add_argument("--periodic-y", action="store_true")
    s.add_argument("--u0", type=float, default=0.0)
    s.add_argument("--phi0", default="1")
    s.add_argument("--psi0", default="1")
    s.add_argument("--u-init", type=float, default=0.0)
    s.add_argument("--du-init", type=float, default=0.0)
    s.add_argument("--which", choices=("u", "phi", "psi"), default="u")
    s.add_argument("--epsilon", type=float, default=0.1)
    s.set_defaults(func=cmd_catalog)

    s = sub.add_parser("report", parents=[common], help="merge JSON reports")
    s.add_argument("reports", nargs="+")
    s.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (io.SurfaceFileError, InputError, CatalogError, NotAPairError) as exc:
        print(f"lagbonnet {args.command}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # remaining validation errors (chart construction, complex literals, ...)
        print(f"lagbonnet {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
