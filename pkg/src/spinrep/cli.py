"""Command-line interface.

Exit codes: 0 — requested operation ran and every performed check passed;
1 — the operation ran but a check failed (or could not certify);
2 — usage, IO or format errors.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import __version__
from .check import check
from .decompose import PipelineError, construct_witness
from .fields import Grid3, integrate
from .generators import (
    GeneratorError,
    full_rank_mixture,
    gaussian_diagonal,
    gaussian_spinor,
    rank1_from_orbital,
)
from .io import (
    SpdfFormatError,
    WitnessFormatError,
    read_spdf,
    read_witness,
    write_spdf,
    write_witness,
)
from .sqrtm import NotPositiveSemidefiniteError, eigen_densities, sqrt_field
from .spin_density import SpinDensityField, trace_integral
from .fields import ComplexField, ScalarField
from .tolerances import DEFAULT
from .witness import verify


def _add_grid_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--grid", type=int, default=64, metavar="N",
                   help="nodes per axis (default 64)")
    p.add_argument("--box", type=float, nargs=2, default=(-8.0, 8.0),
                   metavar=("LO", "HI"), help="cubic box bounds (default -8 8)")


def _add_tol_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol-norm", type=float, default=None, metavar="T",
                   help="absolute normalization tolerance (default 1e-6 per electron)")
    p.add_argument("--tol-neg", type=float, default=None, metavar="T",
                   help="absolute negativity tolerance (default 1e-10 x max rho)")
    p.add_argument("--floor", type=float, default=None, metavar="F",
                   help="absolute density floor for /rho integrands (default 1e-12 x max rho)")


def _tolerances(args):
    return DEFAULT.with_overrides(
        neg_abs=getattr(args, "tol_neg", None),
        norm_abs=getattr(args, "tol_norm", None),
        floor_abs=getattr(args, "floor", None),
    )


def _cubic_grid(args) -> Grid3:
    lo, hi = args.box
    return Grid3((args.grid,) * 3, (lo, lo, lo, hi, hi, hi))


def _generate(args) -> SpinDensityField:
    grid = _cubic_grid(args)
    if args.family == "gaussian":
        return gaussian_diagonal(grid, args.n_electrons, width=args.width)
    if args.family == "rank1":
        psi_up, psi_dn = gaussian_spinor(
            grid,
            width_up=args.width,
            width_dn=args.width_dn,
            spin_fraction=args.spin_fraction,
            phase_gradient=args.phase_gradient,
        )
        return rank1_from_orbital(psi_up, psi_dn, args.n_electrons)
    if args.family == "mixture":
        return full_rank_mixture(
            grid,
            args.n_electrons,
            coupling=args.coupling,
            width_up=args.width,
            width_dn=args.width_dn,
            spin_fraction=args.spin_fraction,
            phase_gradient=args.phase_gradient,
        )
    raise GeneratorError(f"unknown family {args.family!r}")


def _emit(text: str, report_path: str | None) -> None:
    sys.stdout.write(text)
    if report_path:
        with open(report_path, "w", encoding="ascii") as fh:
            fh.write(text)


def _cmd_gen(args) -> int:
    field = _generate(args)
    write_spdf(args.out, field)
    print(f"wrote {args.out}: family={args.family} n_electrons={field.n_electrons} "
          f"grid={args.grid}^3 trace={trace_integral(field):.12g}")
    return 0


def _cmd_check(args) -> int:
    field = read_spdf(args.input)
    report = check(field, _tolerances(args))
    _emit(report.to_text(), args.report)
    return 0 if report.passed else 1


def _cmd_sqrt(args) -> int:
    field = read_spdf(args.input)
    sq = sqrt_field(field, _tolerances(args))
    # reuse the container: blocks are r_up, r_dn, Re s, Im s
    out = SpinDensityField(
        rho_up=sq.r_up,
        rho_dn=sq.r_dn,
        sigma=sq.s,
        n_electrons=field.n_electrons,
    )
    write_spdf(args.out, out)
    print(f"wrote {args.out}: matrix square root entries (r_up, r_dn, s)")
    return 0


def _cmd_eigs(args) -> int:
    field = read_spdf(args.input)
    eig = eigen_densities(field, _tolerances(args))
    lines = [
        "report: eigs",
        f"rho_plus_integral: {integrate(eig.rho_plus):.12g}",
        f"rho_minus_integral: {integrate(eig.rho_minus):.12g}",
        f"rho_plus_max: {float(np.max(eig.rho_plus.values)):.12g}",
        f"rho_minus_max: {float(np.max(eig.rho_minus.values)):.12g}",
    ]
    _emit("\n".join(lines) + "\n", args.report)
    if args.out:
        zero = ComplexField(field.grid, np.zeros(field.grid.dims, dtype=np.complex128))
        write_spdf(args.out, SpinDensityField(
            rho_up=eig.rho_plus, rho_dn=eig.rho_minus, sigma=zero,
            n_electrons=field.n_electrons,
        ))
    return 0


def _cmd_construct(args) -> int:
    field = read_spdf(args.input)
    witness = construct_witness(field, axis=args.axis, tol=_tolerances(args))
    write_witness(args.out, witness)
    weights = " ".join(f"{b.weight:.6g}" for b in witness.branches)
    print(f"wrote {args.out}: {len(witness.branches)} branches, weights [{weights}]")
    return 0


def _cmd_verify(args) -> int:
    witness = read_witness(args.witness)
    target = read_spdf(args.target)
    report = verify(witness, target, _tolerances(args))
    _emit(report.to_text(), args.report)
    return 0 if report.passed else 1


def _cmd_norms(args) -> int:
    field = _generate(args)
    refine = args.refine if args.refine else round(1.5 * args.grid)
    if refine <= args.grid:
        print(f"refined grid ({refine}) must exceed --grid ({args.grid})", file=sys.stderr)
        return 2
    fine_args = argparse.Namespace(**vars(args))
    fine_args.grid = refine
    refined = _generate(fine_args)
    tol = _tolerances(args)
    report = check(field, tol, refined=refined)
    lines = [f"refinement study: {args.grid}^3 vs {refine}^3"]
    for cond in report.conditions[3:]:
        lines.append("")
        lines.append(f"condition: {cond.name}")
        lines.append(f"verdict: {cond.verdict}")
        lines.append(f"value: {cond.value:.12g}")
        for key in sorted(cond.details):
            val = cond.details[key]
            lines.append(f"{key}: {val:.12g}" if isinstance(val, float) else f"{key}: {val}")
    _emit("\n".join(lines) + "\n", args.report)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinrep",
        description="check and explicitly represent 2x2 spin-density matrix fields",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate an analytic density file")
    p.add_argument("--family", choices=("gaussian", "rank1", "mixture"), default="gaussian")
    p.add_argument("--n-electrons", type=int, required=True)
    p.add_argument("--width", type=float, default=1.0)
    p.add_argument("--width-dn", type=float, default=None)
    p.add_argument("--spin-fraction", type=float, default=0.5)
    p.add_argument("--coupling", type=float, default=0.5)
    p.add_argument("--phase-gradient", type=float, default=0.0)
    p.add_argument("--out", required=True)
    _add_grid_args(p)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("check", help="run the admissibility check on a density file")
    p.add_argument("input")
    p.add_argument("--report", default=None)
    _add_tol_args(p)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("sqrt", help="pointwise matrix square root")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    _add_tol_args(p)
    p.set_defaults(func=_cmd_sqrt)

    p = sub.add_parser("eigs", help="pointwise eigen densities")
    p.add_argument("input")
    p.add_argument("--out", default=None)
    p.add_argument("--report", default=None)
    _add_tol_args(p)
    p.set_defaults(func=_cmd_eigs)

    p = sub.add_parser("construct", help="build an explicit representing mixed state")
    p.add_argument("input")
    p.add_argument("--out", required=True, help="output witness directory")
    p.add_argument("--axis", choices=("x", "y", "z", "auto"), default="auto")
    _add_tol_args(p)
    p.set_defaults(func=_cmd_construct)

    p = sub.add_parser("verify", help="verify a witness against a density file")
    p.add_argument("witness", help="witness directory")
    p.add_argument("target", help="target density file")
    p.add_argument("--report", default=None)
    _add_tol_args(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("norms", help="refinement study of the gradient norms")
    p.add_argument("--family", choices=("gaussian", "rank1", "mixture"), default="gaussian")
    p.add_argument("--n-electrons", type=int, required=True)
    p.add_argument("--width", type=float, default=1.0)
    p.add_argument("--width-dn", type=float, default=None)
    p.add_argument("--spin-fraction", type=float, default=0.5)
    p.add_argument("--coupling", type=float, default=0.5)
    p.add_argument("--phase-gradient", type=float, default=0.0)
    p.add_argument("--refine", type=int, default=0, metavar="K",
                   help="refined node count (default 1.5x --grid)")
    p.add_argument("--report", default=None)
    _add_grid_args(p)
    _add_tol_args(p)
    p.set_defaults(func=_cmd_norms)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpdfFormatError, WitnessFormatError, GeneratorError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NotPositiveSemidefiniteError, PipelineError, ValueError) as exc:
        # input was read but cannot be certified / processed
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
