"""Command line front end.

Every subcommand loads a JSON config, runs one library operation, and
writes CSV files into the output directory.  Exit codes: 0 success,
2 configuration or parse error, 3 numerical failure, 4 verification
failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import csvio, expr
from .calculus import (
    apply_quadrature,
    apply_spectral,
    functional_calculus,
    projector_apply,
    riemann_stieltjes_apply,
)
from .config import (
    decompose,
    load_config,
    partition_by_name,
    section_by_name,
    threshold_by_name,
)
from .errors import ConfigError, ExpressionSyntaxError, FiberspecError
from .grid import Section, l22_norm
from .kernel import fiber_kernel_matrix, mercer_reconstruct
from .spectrum import mix_field, spm_membership
from .verify import run_suite


def _out_path(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _parse_function(text):
    # CLI expression arguments count as configuration
    try:
        e = expr.parse(text)
    except ExpressionSyntaxError as exc:
        raise ConfigError(f"invalid function {text!r}: {exc}") from exc
    extra = expr.free_variables(e) - {"lambda"}
    if extra:
        raise ConfigError(
            f"function may only depend on lambda, got {sorted(extra)}"
        )
    return e


def cmd_decompose(cfg, args):
    d = decompose(cfg)
    csvio.write_eigencurves(_out_path(args, "eigencurves.csv"), d)
    csvio.write_eigenfunctions(_out_path(args, "eigenfunctions.csv"), d)
    csvio.write_bounds(_out_path(args, "bounds.csv"), d)
    print(f"decomposed {d.n_fibers} fibers, {d.num_curves} curves")
    return 0


def cmd_apply(cfg, args):
    f = section_by_name(cfg, args.section)
    if args.mode == "quadrature":
        out = apply_quadrature(cfg.kernel, f)
    else:
        out = apply_spectral(decompose(cfg), f)
    csvio.write_section(_out_path(args, "applied.csv"), out)
    print(f"applied kernel to {args.section!r} via {args.mode}")
    return 0


def cmd_project(cfg, args):
    lam = threshold_by_name(cfg, args.threshold)
    f = section_by_name(cfg, args.section)
    out = projector_apply(decompose(cfg), lam, f)
    csvio.write_section(_out_path(args, "projected.csv"), out)
    print(f"projected {args.section!r} at threshold {args.threshold!r}")
    return 0


def cmd_funcalc(cfg, args):
    g = _parse_function(args.function)
    f = section_by_name(cfg, args.section)
    out = functional_calculus(decompose(cfg), g, f, epsilon=cfg.epsilon)
    csvio.write_section(_out_path(args, "funcalc.csv"), out)
    print(f"applied g(T) with g = {args.function}")
    return 0


def cmd_rs(cfg, args):
    g = _parse_function(args.function)
    f = section_by_name(cfg, args.section)
    d = decompose(cfg)
    out = riemann_stieltjes_apply(d, g, f, mesh=args.mesh, epsilon=cfg.epsilon)
    csvio.write_section(_out_path(args, "rs.csv"), out)
    exact = functional_calculus(d, g, f, epsilon=cfg.epsilon)
    err = l22_norm(Section(f.ogrid, f.squad, out.values - exact.values))
    lo = float(np.min(d.m.values))
    hi = float(np.max(d.M.values)) + cfg.epsilon
    steps = max(1, math.ceil((hi - lo) / args.mesh))
    csvio.write_report(
        _out_path(args, "rs_report.csv"),
        [
            ("mesh", args.mesh),
            ("steps", float(steps)),
            ("error_vs_funcalc", err),
            ("section_norm", l22_norm(f)),
        ],
    )
    print(f"integrated g = {args.function} with mesh {args.mesh:g} ({steps} cells)")
    return 0


def cmd_spectrum(cfg, args):
    d = decompose(cfg)
    csvio.write_spectra(_out_path(args, "spectra.csv"), d)
    if args.partition is None:
        print(f"wrote fiber spectra for {d.n_fibers} fibers")
        return 0
    p = partition_by_name(cfg, args.partition)
    mixed = mix_field(d, p)
    csvio.write_field(_out_path(args, "mixed.csv"), mixed)
    csvio.write_membership(_out_path(args, "membership.csv"), d, mixed)
    member, violations = spm_membership(d, mixed, cfg.tolerances.member_tol)
    verdict = "member" if member else f"not a member ({len(violations)} violations)"
    print(f"mixed field from {args.partition!r}: {verdict}")
    return 0


def cmd_mix(cfg, args):
    d = decompose(cfg)
    p = partition_by_name(cfg, args.partition)
    mixed = mix_field(d, p)
    csvio.write_field(_out_path(args, "mixed.csv"), mixed)
    print(f"wrote mixed field for partition {args.partition!r}")
    return 0


def cmd_reconstruct(cfg, args):
    d = decompose(cfg)
    rebuilt = mercer_reconstruct(d, args.rank)
    csvio.write_kernel(_out_path(args, "kernel.csv"), rebuilt)
    sup_err = 0.0
    for i in range(d.n_fibers):
        original = fiber_kernel_matrix(cfg.kernel, cfg.ogrid, cfg.squad, i)
        sup_err = max(sup_err, float(np.max(np.abs(original - rebuilt.values[i]))))
    csvio.write_report(
        _out_path(args, "reconstruct_report.csv"),
        [("rank", float(args.rank)), ("sup_error", sup_err)],
    )
    print(f"reconstructed kernel at rank {args.rank}, sup error {sup_err:.6e}")
    return 0


def cmd_verify(cfg, args):
    results = run_suite(cfg)
    width = max(len(r.name) for r in results)
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        line = (
            f"[{status}] {r.name:<{width}}  "
            f"value={r.value:.6e} {r.relation} {r.bound:.6e}"
        )
        if r.note:
            line += f"  ({r.note})"
        print(line)
    n_pass = sum(1 for r in results if r.passed)
    print(f"{n_pass}/{len(results)} checks passed")
    return 0 if n_pass == len(results) else 4


def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON configuration file")
    common.add_argument("--out", default=".", help="output directory for CSV files")
    common.add_argument(
        "--threads",
        type=int,
        default=None,
        help="fiber decomposition threads (default: available execution units)",
    )
    common.add_argument("--rank-tol", type=float, default=None)
    common.add_argument("--tie-tol", type=float, default=None)
    common.add_argument("--member-tol", type=float, default=None)
    common.add_argument("--epsilon", type=float, default=None)
    common.add_argument("--quad-n", type=int, default=None)
    common.add_argument("--omega-n", type=int, default=None)

    parser = argparse.ArgumentParser(
        prog="fiberspec",
        description="Fiberwise spectral calculus for partially integral operators.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", parents=[common], help="eigencurves, eigenfunctions, bounds")
    p.set_defaults(handler=cmd_decompose)

    p = sub.add_parser("apply", parents=[common], help="apply the operator to a section")
    p.add_argument("--section", required=True)
    p.add_argument("--mode", choices=("quadrature", "spectral"), default="spectral")
    p.set_defaults(handler=cmd_apply)

    p = sub.add_parser("project", parents=[common], help="apply a threshold projector")
    p.add_argument("--threshold", required=True)
    p.add_argument("--section", required=True)
    p.set_defaults(handler=cmd_project)

    p = sub.add_parser("funcalc", parents=[common], help="apply g(T) to a section")
    p.add_argument("--function", required=True, help="expression in lambda")
    p.add_argument("--section", required=True)
    p.set_defaults(handler=cmd_funcalc)

    p = sub.add_parser("rs", parents=[common], help="Riemann-Stieltjes sum for g(T)")
    p.add_argument("--function", required=True, help="expression in lambda")
    p.add_argument("--mesh", type=float, required=True)
    p.add_argument("--section", required=True)
    p.set_defaults(handler=cmd_rs)

    p = sub.add_parser("spectrum", parents=[common], help="fiber spectra, optional mixing")
    p.add_argument("--partition", default=None)
    p.set_defaults(handler=cmd_spectrum)

    p = sub.add_parser("mix", parents=[common], help="mix eigencurves over a partition")
    p.add_argument("--partition", required=True)
    p.set_defaults(handler=cmd_mix)

    p = sub.add_parser("reconstruct", parents=[common], help="rebuild the kernel from eigenpairs")
    p.add_argument("--rank", type=int, required=True)
    p.set_defaults(handler=cmd_reconstruct)

    p = sub.add_parser("verify", parents=[common], help="run the invariant suite")
    p.set_defaults(handler=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = load_config(
            args.config,
            omega_n=args.omega_n,
            quad_n=args.quad_n,
            rank_tol=args.rank_tol,
            tie_tol=args.tie_tol,
            member_tol=args.member_tol,
            epsilon=args.epsilon,
            threads=args.threads if args.threads is not None else os.cpu_count(),
        )
        return args.handler(cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FiberspecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
