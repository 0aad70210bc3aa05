"""Command-line interface.

Exit codes: 0 ok, 2 bad flags, 3 model domain/convergence error,
4 fit did not converge (report still written), 5 I/O error,
6 malformed dataset.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import models as m
from .calibration import (
    FAMILY_NAMES,
    AbscissaKind,
    PiezoCalibration,
    SynthSpec,
    dumps_csv,
    dumps_report,
    fit_linear,
    fit_with_contact_voltage,
    format_report,
    generate_synthetic,
    make_family,
    read_csv,
)
from .constants import MM, NM, PF, PF_PER_UM, TWO_PI_EPS0, UM
from .errors import ConvergenceError, DatasetFormatError, DomainError, ObjectiveError, ValidityWarning
from .io import atomic_write_text
from .tables import CURVE_COLUMNS, TABLE_COLUMNS, TABLE_SEPARATIONS_UM, comparison_table, format_table_row, lens_curves

OUTPUT_DIR_ENV = "CAPCAL_OUTPUT_DIR"

EXIT_DOMAIN = 3
EXIT_NOT_CONVERGED = 4
EXIT_IO = 5
EXIT_FORMAT = 6


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# -- flag groups -------------------------------------------------------------


def _add_model_flags(p: argparse.ArgumentParser, default_model: str = "exact", parasitic_defaults=(None, 0.0)) -> None:
    g = p.add_argument_group("model")
    g.add_argument("--model", choices=m.model_kinds(), default=default_model)
    g.add_argument("--R-um", dest="R_um", type=float, default=151.3, help="sphere radius (um)")
    g.add_argument("--theta", type=float, default=m.DEFAULT_THETA)
    g.add_argument("--table-compat", action="store_true", help="sign-flipped expansion capacitance")
    _add_lens_flags(p)
    g.add_argument("--A1-pF", dest="A1_pF", type=float, help="power-law / ideal-log constant term")
    g.add_argument("--A3-pF", dest="A3_pF", type=float, help="power-law (pF m^-0.3) or ideal-log (pF) coefficient")
    g.add_argument("--a1-pF", dest="a1_pF", type=float, default=parasitic_defaults[0], help="parasitic constant")
    g.add_argument("--a2-pF-per-um", dest="a2_pF_per_um", type=float, default=parasitic_defaults[1], help="parasitic slope")
    g.add_argument("--no-parasitic", dest="no_parasitic", action="store_true", help="drop the parasitic term")


def _add_lens_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("lens geometry")
    g.add_argument("--lens-R-mm", dest="lens_R_mm", type=float, default=REFERENCE_LENS_MM[0])
    g.add_argument("--R1-mm", dest="R1_mm", type=float, default=REFERENCE_LENS_MM[1])
    g.add_argument("--R2-um", dest="R2_um", type=float, default=REFERENCE_LENS_MM[2])
    g.add_argument("--h-nm", dest="h_nm", type=float, default=REFERENCE_LENS_MM[3])
    g.add_argument("--H-nm", dest="H_nm", type=float, default=REFERENCE_LENS_MM[4])
    g.add_argument("--c-tilde-pF", dest="c_tilde_pF", type=float, default=0.0)


REFERENCE_LENS_MM = (30.9, 49.4, 30.0, 8.0, 250.0)


def _add_separation_flags(p: argparse.ArgumentParser, default_range=None) -> None:
    g = p.add_argument_group("separations")
    g.add_argument("--d-um", dest="d_um", type=float, nargs="+")
    g.add_argument("--d-nm", dest="d_nm", type=float, nargs="+")
    g.add_argument("--range-nm", dest="range_nm", type=float, nargs=2, metavar=("LO", "HI"), default=default_range)
    g.add_argument("--points", type=int, default=50, help="log-spaced points for --range-nm")


def _add_output_flags(p: argparse.ArgumentParser, default_format: str = "text") -> None:
    p.add_argument("--format", choices=("text", "csv", "json"), default=default_format)
    p.add_argument("--out", help=f"output path (relative paths resolve against ${OUTPUT_DIR_ENV} if set)")


def _lens(args) -> m.ModifiedLensGeometry:
    return m.ModifiedLensGeometry(
        r=args.lens_R_mm * MM, r1=args.R1_mm * MM, r2=args.R2_um * UM, h_small=args.h_nm * NM, h_large=args.H_nm * NM
    )


def _model(args) -> m.CapacitanceModel:
    sphere = m.SphereGeometry(args.R_um * UM)
    kind = args.model
    if kind == "exact":
        spec = m.ExactSphere(sphere)
    elif kind == "pfa":
        spec = m.PfaLeading(sphere)
    elif kind == "smallsep":
        spec = m.SmallSepLog(sphere, args.theta)
    elif kind == "expansion":
        spec = m.Expansion(sphere, args.theta, table_compat=args.table_compat)
    elif kind == "modified":
        spec = m.ModifiedLens(_lens(args), args.c_tilde_pF * PF)
    elif kind == "powerlaw":
        a1 = 222.96 if args.A1_pF is None else args.A1_pF
        a3 = -346.2 if args.A3_pF is None else args.A3_pF
        spec = m.PowerLaw(a1 * PF, a3 * PF)
    else:
        a1 = 0.0 if args.A1_pF is None else args.A1_pF * PF
        a3 = TWO_PI_EPS0 * sphere.radius if args.A3_pF is None else args.A3_pF * PF
        spec = m.IdealLog(a1, a3, sphere)
    if args.a1_pF is not None and not args.no_parasitic:
        spec = spec.with_parasitic(m.ParasiticParams(args.a1_pF * PF, args.a2_pF_per_um * PF_PER_UM))
    return spec


def _separations(args) -> np.ndarray:
    parts = []
    if args.d_um:
        parts.append(np.asarray(args.d_um) * UM)
    if args.d_nm:
        parts.append(np.asarray(args.d_nm) * NM)
    if args.range_nm is not None and not parts:
        lo, hi = args.range_nm
        if not 0 < lo < hi:
            raise CliError(f"--range-nm needs 0 < LO < HI, got {lo} {hi}", 2)
        parts.append(np.geomspace(lo, hi, args.points) * NM)
    if not parts:
        raise CliError("no separations given (use --d-um, --d-nm or --range-nm)", 2)
    return np.concatenate(parts)


# -- output ------------------------------------------------------------------


def _resolve_out(path: str) -> Path:
    p = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        atomic_write_text(_resolve_out(out), text)
    except OSError as exc:
        raise CliError(f"cannot write {out}: {exc}", EXIT_IO) from exc


def _render(columns, rows, fmt: str, text_rows=None) -> str:
    if fmt == "json":
        return json.dumps([dict(zip(columns, r)) for r in rows], indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        w.writerows(text_rows if text_rows is not None else [[repr(float(v)) for v in r] for r in rows])
        return buf.getvalue()
    shown = text_rows if text_rows is not None else [[f"{v:.7g}" for v in r] for r in rows]
    widths = [max(len(c), *(len(r[i]) for r in shown)) for i, c in enumerate(columns)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(columns, widths))]
    lines += ["  ".join(v.rjust(w) for v, w in zip(r, widths)) for r in shown]
    return "\n".join(lines) + "\n"


# -- subcommands ---------------------------------------------------------------


def _domain_context(spec, d: float, exc: Exception) -> CliError:
    return CliError(f"model {spec.kind!r} at separation d = {d / NM:g} nm: {exc}", EXIT_DOMAIN)


def cmd_eval(args) -> int:
    spec = _model(args)
    rows = []
    for d in _separations(args):
        try:
            c = m.evaluate_model(spec, float(d))
            f = spec.force_norm(float(d))
        except (DomainError, ConvergenceError) as exc:
            raise _domain_context(spec, d, exc) from exc
        rows.append((d / NM, c / PF, f / PF))
    _emit(_render(("d_nm", "C_pF", "F_norm_pF_per_m"), rows, args.format), args.out)
    return 0


def cmd_table(args) -> int:
    rows = comparison_table(args.R_um * UM, args.d_um or TABLE_SEPARATIONS_UM, args.theta, args.table_compat)
    text_rows = [format_table_row(r) for r in rows]
    _emit(_render(TABLE_COLUMNS, rows, args.format, None if args.format == "json" else text_rows), args.out)
    return 0


def cmd_curves(args) -> int:
    lo, hi = args.range_nm
    if not 0 < lo < hi:
        raise CliError(f"--range-nm needs 0 < LO < HI, got {lo} {hi}", 2)
    data = lens_curves(_lens(args), lo * NM, hi * NM, args.samples, args.c_tilde_pF * PF)
    _emit(_render(CURVE_COLUMNS, data.tolist(), args.format), args.out)
    return 0


def cmd_exponent(args) -> int:
    spec = _model(args)
    lo, hi = args.range_nm
    try:
        p, ds, grads = m.effective_exponent(spec.force_norm, lo * NM, hi * NM, args.points)
    except (DomainError, ConvergenceError) as exc:
        raise CliError(f"model {spec.kind!r} over [{lo}, {hi}] nm: {exc}", EXIT_DOMAIN) from exc
    rows = [(d / NM, g / PF) for d, g in zip(ds, grads)]
    if args.format == "json":
        text = json.dumps({"model": spec.kind, "exponent": p, "d_nm": [r[0] for r in rows], "gradient_pF_per_m2": [r[1] for r in rows]}, indent=2) + "\n"
    else:
        text = f"# effective exponent = {p:.6f}\n" + _render(("d_nm", "gradient_pF_per_m2"), rows, args.format)
    _emit(text, args.out)
    return 0


def cmd_fit(args) -> int:
    try:
        ds = read_csv(args.dataset)
    except DatasetFormatError as exc:
        raise CliError(f"{args.dataset}: {exc}", EXIT_FORMAT) from exc
    except OSError as exc:
        raise CliError(f"cannot read {args.dataset}: {exc}", EXIT_IO) from exc
    family = make_family(args.family, sphere=m.SphereGeometry(args.R_um * UM), lens=_lens(args))
    beta = args.beta_nm_per_V * NM
    try:
        if ds.kind is AbscissaKind.PIEZO_VOLTAGE and args.v0 is None:
            fit = fit_with_contact_voltage(ds, family, beta, args.v0_bounds, tol=args.tol)
        else:
            calib = PiezoCalibration(beta, args.v0) if ds.kind is AbscissaKind.PIEZO_VOLTAGE else None
            fit = fit_linear(ds, family, calib)
    except (DomainError, ConvergenceError, ObjectiveError, ArithmeticError) as exc:
        raise CliError(f"fit of family {args.family!r} failed: {exc}", EXIT_DOMAIN) from exc
    fit.inputs.setdefault("theta", args.theta)
    fit.inputs.setdefault("seed", args.seed)
    fit.inputs.setdefault("tolerances", {"v0": args.tol})
    fit.inputs["dataset"] = str(args.dataset)
    text = format_report(fit) if args.format == "text" else dumps_report(fit)
    _emit(text, args.out)
    return 0 if fit.converged else EXIT_NOT_CONVERGED


def cmd_synth(args) -> int:
    spec_model = _model(args)
    if args.kind == "piezo":
        kind = AbscissaKind.PIEZO_VOLTAGE
        x = np.linspace(args.v_min, args.v_max, args.n)
        calib = PiezoCalibration(args.beta_nm_per_V * NM, args.v0)
    else:
        kind = AbscissaKind.SEPARATION
        x = np.linspace(args.d_min_nm * NM, args.d_max_nm * NM, args.n)
        calib = None
    if args.sigma_pF < 0:
        raise CliError(f"--sigma-pF must be >= 0, got {args.sigma_pF}", 2)
    recorded = args.recorded_sigma_pF
    if recorded is None:
        recorded = args.sigma_pF if args.sigma_pF > 0 else 2e-4
    synth = SynthSpec(spec_model, x, recorded * PF, args.seed, kind, calib, noise_sigma=args.sigma_pF * PF)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ValidityWarning)
            ds = generate_synthetic(synth)
    except (DomainError, ConvergenceError) as exc:
        raise CliError(f"synthesis with model {spec_model.kind!r} failed: {exc}", EXIT_DOMAIN) from exc
    _emit(dumps_csv(ds), args.out)
    if args.out is not None:
        side = json.dumps({"synth_spec": synth.to_dict()}, indent=2) + "\n"
        _emit(side, args.out + ".synth.json")
    return 0


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="capcal", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="capacitance and normalized force at given separations")
    _add_model_flags(p)
    _add_separation_flags(p)
    _add_output_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("table", help="exact / PFA / expansion comparison table")
    p.add_argument("--R-um", dest="R_um", type=float, default=151.3)
    p.add_argument("--d-um", dest="d_um", type=float, nargs="+")
    p.add_argument("--theta", type=float, default=m.DEFAULT_THETA)
    p.add_argument("--table-compat", action="store_true")
    _add_output_flags(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("curves", help="modified-lens capacitance and its approximations (CSV)")
    _add_lens_flags(p)
    p.add_argument("--range-nm", dest="range_nm", type=float, nargs=2, default=(30.0, 10000.0))
    p.add_argument("--samples", type=int, default=400)
    _add_output_flags(p, default_format="csv")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("fit", help="chi-squared fit of a dataset CSV")
    p.add_argument("dataset")
    p.add_argument("--family", choices=FAMILY_NAMES, default="exact-parasitic")
    p.add_argument("--R-um", dest="R_um", type=float, default=151.3, help="sphere radius for exact/pfa/ideallog")
    _add_lens_flags(p)
    p.add_argument("--theta", type=float, default=m.DEFAULT_THETA)
    p.add_argument("--beta-nm-per-V", dest="beta_nm_per_V", type=float, default=87.0)
    p.add_argument("--v0", type=float, help="fixed piezo zero point V0 (V); profiled when omitted")
    p.add_argument("--v0-bounds", dest="v0_bounds", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--tol", type=float, default=1e-10, help="V0 tolerance (V)")
    p.add_argument("--seed", type=int, help="seed recorded in the report")
    _add_output_flags(p, default_format="json")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("synth", help="seeded synthetic dataset CSV")
    _add_model_flags(p, parasitic_defaults=(72.32971, 2.18e-4))
    p.add_argument("--kind", choices=("separation", "piezo"), default="separation")
    p.add_argument("--n", type=int, default=351)
    p.add_argument("--d-min-nm", dest="d_min_nm", type=float, default=500.5)
    p.add_argument("--d-max-nm", dest="d_max_nm", type=float, default=4000.2)
    p.add_argument("--v-min", dest="v_min", type=float, default=0.0)
    p.add_argument("--v-max", dest="v_max", type=float, default=68.76)
    p.add_argument("--beta-nm-per-V", dest="beta_nm_per_V", type=float, default=87.0)
    p.add_argument("--v0", type=float, default=69.93)
    p.add_argument("--sigma-pF", dest="sigma_pF", type=float, default=2e-4, help="noise width; 0 for a noiseless curve")
    p.add_argument("--recorded-sigma-pF", dest="recorded_sigma_pF", type=float, help="sigma column (default: --sigma-pF, or 2e-4 if that is 0)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("exponent", help="effective power of the force gradient")
    _add_model_flags(p)
    p.add_argument("--range-nm", dest="range_nm", type=float, nargs=2, default=(30.0, 100.0))
    p.add_argument("--points", type=int, default=50)
    _add_output_flags(p)
    p.set_defaults(func=cmd_exponent)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"capcal {args.command}: error: {exc}", file=sys.stderr)
        return exc.code
    except DomainError as exc:
        print(f"capcal {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
