"""
Command-line interface
~~~~~~~~~~~~~~~~~~~~~~
``nclewis <command> [options]``. Exit status: 0 when the run converged and
every hard bound holds, 2 when the computation finished but a hard margin
is negative (or the Lewis iteration hit its cap), 1 on parse, input or
structural errors. Reports are canonical JSON; everything except the
``timing`` field is bit-reproducible for a given seed.
"""
import argparse
import sys
import time

import numpy as np

from . import __version__
from .algebra import schatten_norm
from .exceptions import BasisCollapseError, ConvergenceError, DomainError, ShapeError
from .factorization import (
    MeasureOptions,
    build_projection,
    factorize_quotient,
    factorize_subspace,
    rc_distance_certificate,
    sharpness_probe,
)
from .holder import holder_check
from .io import (
    ENSEMBLES,
    InstanceError,
    certificate_rows,
    encode_matrix,
    encode_op,
    gen_instance,
    load_instance,
    write_csv,
    write_json,
    dumps,
)
from .lewis import lewis_basis, verify_conditions
from .opspace import column_norm, intersection_norm, row_norm, sum_norm

EXIT_OK, EXIT_ERROR, EXIT_MARGIN = 0, 1, 2


class UsageError(Exception):
    def __init__(self, message, usage):
        super().__init__(message)
        self.usage = usage


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message, self.format_usage())


def _int_list(text):
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}") from exc
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from exc


def _p_value(text):
    if text.lower() in ("inf", "infinity"):
        return float("inf")
    return float(text)


def build_parser():
    parser = _Parser(prog="nclewis", description="Lewis bases and change-of-density certificates.")
    parser.add_argument("--version", action="version", version=f"nclewis {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    def common(p, instance=True, lewis=True, measure=False, need_p=True):
        if instance:
            p.add_argument("--in", dest="inp", required=True, help="instance JSON file")
        if need_p:
            p.add_argument("--p", type=_p_value, default=None, help="exponent (defaults to the instance's p)")
        if lewis:
            p.add_argument("--tol", type=float, default=1e-9)
            p.add_argument("--max-iter", type=int, default=2000)
            p.add_argument("--damping", type=float, default=None)
        if measure:
            p.add_argument("--amplify", type=int, default=4, help="highest amplification level k")
            p.add_argument("--trials", type=int, default=200)
            p.add_argument("--restarts", type=int, default=16)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None, help="report JSON (stdout if omitted)")
        p.add_argument("--csv", default=None, help="per-level certificate table")

    common(sub.add_parser("lewis", help="Lewis basis of a subspace"))
    for name in ("factorize", "project", "quotient", "distance"):
        common(sub.add_parser(name, help=f"{name} certificate"), measure=True)
    sp = sub.add_parser("sharpness", help="row-space sharpness probe")
    common(sp, instance=False, measure=True)
    sp.add_argument("--n-list", type=_int_list, default=[1, 2, 3, 4, 5])
    hp = sub.add_parser("holder", help="Hölder equality check for the first two basis elements")
    common(hp, lewis=False)
    hp.add_argument("--eq-tol", type=float, default=1e-9)
    npr = sub.add_parser("norms", help="Schatten and row/column/sum norms of the basis")
    common(npr, lewis=False)
    gp = sub.add_parser("gen", help="seeded random instance")
    gp.add_argument("--blocks", type=_int_list, required=True)
    gp.add_argument("--weights", type=_float_list, default=None)
    gp.add_argument("--n", type=int, required=True)
    gp.add_argument("--ensemble", choices=ENSEMBLES, default="gaussian-dense")
    gp.add_argument("--p", type=_p_value, default=None)
    gp.add_argument("--seed", type=int, default=0)
    gp.add_argument("--out", default=None)
    return parser


def _resolve_p(args, extras):
    p = args.p if args.p is not None else extras.get("p")
    if p is None:
        raise DomainError("no exponent given: pass --p or set 'p' in the instance")
    return float(p)


def _lewis_opts(args):
    return {"tol": args.tol, "max_iter": args.max_iter, "damping": args.damping}


def _measure(args):
    return MeasureOptions(k_max=args.amplify, trials=args.trials, restarts=args.restarts, seed=args.seed)


def _label(args, extras):
    labels = extras.get("labels")
    if isinstance(labels, str):
        return labels
    return args.inp


def _cmd_lewis(args):
    E, extras = load_instance(args.inp)
    p = _resolve_p(args, extras)
    res = lewis_basis(E, p, **_lewis_opts(args))
    cond = verify_conditions(res)
    ok = res.converged and res.gram_residual < args.tol
    report = {
        "results": {
            "converged": res.converged, "iterations": res.n_iter,
            "gram_residual": res.gram_residual, "normalization_residual": res.normalization_residual,
            "support_residual": cond.support_residual,
            "basis": [encode_op(x) for x in res.basis], "X": encode_op(res.X),
            "density": encode_op(res.density), "coef": encode_matrix(res.coef),
        },
        "inputs": {"p": p, "n": E.n, "block_dims": list(E.algebra.block_dims)},
    }
    return report, [], ok


def _cert_report(cert):
    return {"certificate": cert.to_dict()}


def _cmd_cert(args, fn):
    E, extras = load_instance(args.inp)
    p = _resolve_p(args, extras)
    out = fn(E, p, _lewis_opts(args), _measure(args))
    cert = out[-1] if isinstance(out, tuple) else out
    report = _cert_report(cert)
    report["inputs"] = {"p": p, "n": E.n, "block_dims": list(E.algebra.block_dims)}
    rows = certificate_rows(_label(args, extras), cert)
    return report, rows, cert.passed


def _cmd_sharpness(args):
    p = 4.0 if args.p is None else args.p
    table = sharpness_probe(args.n_list, p, _lewis_opts(args), _measure(args))
    uppers = [r["upper"] for r in table]
    monotone = all(b >= a * (1 - 1e-9) for a, b in zip(uppers, uppers[1:]))
    report = {"results": {"table": table, "upper_monotone": monotone}, "inputs": {"p": p, "n_list": args.n_list}}
    rows = []
    for r in table:
        for q in ("upper", "lower"):
            rows.append({"instance": f"R_p^{r['n']}", "kind": "sharpness", "quantity": q, "level": r["n"],
                         "measured": repr(float(r[q])), "bound": repr(float(r["rate"])),
                         "margin": "", "hard": 0})
    return report, rows, monotone


def _cmd_holder(args):
    E, extras = load_instance(args.inp)
    if E.n < 2:
        raise DomainError("holder needs an instance with at least two basis elements (a, b)")
    p = _resolve_p(args, extras)
    rep = holder_check(E.algebra, E.basis[0], E.basis[1], p, eq_tol=args.eq_tol)
    results = {k: getattr(rep, k) for k in ("p", "p_conj", "lhs", "rhs", "gap", "equality", "case",
                                             "constant", "residual", "trivial")}
    return {"results": results, "inputs": {"p": p}}, [], rep.gap >= -1e-10 * max(rep.rhs, 1.0)


def _cmd_norms(args):
    E, extras = load_instance(args.inp)
    p = _resolve_p(args, extras)
    alg = E.algebra
    results = {"schatten": [schatten_norm(alg, x, p) for x in E.basis]}
    if alg.n_blocks == 1:
        alpha = np.array([x.blocks[0] for x in E.basis])
        value, wit = sum_norm(alpha, p, seed=args.seed)
        results.update(column=column_norm(alpha, p), row=row_norm(alpha, p),
                       intersection=intersection_norm(alpha, p), sum=value, sum_lower_bound=wit.lower_bound)
    return {"results": results, "inputs": {"p": p, "n": E.n}}, [], True


def _cmd_gen(args):
    inst = gen_instance(args.blocks, args.n, args.seed, args.ensemble, args.weights)
    if args.p is not None:
        inst["p"] = args.p
    return inst


COMMANDS = {
    "lewis": _cmd_lewis,
    "factorize": lambda a: _cmd_cert(a, factorize_subspace),
    "project": lambda a: _cmd_cert(a, build_projection),
    "quotient": lambda a: _cmd_cert(a, factorize_quotient),
    "distance": lambda a: _cmd_cert(a, rc_distance_certificate),
    "sharpness": _cmd_sharpness,
    "holder": _cmd_holder,
    "norms": _cmd_norms,
}


def run(argv=None):
    """Execute one command; returns the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(exc.usage)
        sys.stderr.write(f"nclewis: error: {exc}\n")
        return EXIT_ERROR
    try:
        if args.command == "gen":
            inst = _cmd_gen(args)
            if args.out:
                write_json(args.out, inst)
            else:
                sys.stdout.write(dumps(inst))
            return EXIT_OK
        start = time.perf_counter()
        try:
            report, rows, ok = COMMANDS[args.command](args)
            status = EXIT_OK if ok else EXIT_MARGIN
        except ConvergenceError as exc:
            report, rows, status = {"error": str(exc)}, [], EXIT_MARGIN
        report["command"] = args.command
        report["exit_status"] = status
        report["seed"] = args.seed
        report["timing"] = {"wall_clock_s": time.perf_counter() - start}
        if args.out:
            write_json(args.out, report)
        else:
            sys.stdout.write(dumps(report))
        if args.csv:
            write_csv(args.csv, rows)
        return status
    except (InstanceError, DomainError, ShapeError, BasisCollapseError, OSError) as exc:
        sys.stderr.write(f"nclewis: error: {exc}\n")
        return EXIT_ERROR


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
