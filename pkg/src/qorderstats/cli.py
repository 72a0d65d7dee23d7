"""Command-line front end.

Exit status is 0 when every asserted check passes, 1 when one fails and 2
on usage or I/O errors.  Reports go to stdout or ``--output`` as UTF-8 with
LF line endings.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

from . import __version__
from . import heine as H
from . import orderstat as O
from .errors import InsufficientAcceptanceError, QDomainError, SizeError
from .qcore import DEFAULT_MAX_TERMS, QParam
from .qidentity import (
    Variant, check_multinomial_inversion_oracle, check_multinomial_partition_sum,
    check_qbinom_product, check_subset_weight_sum, check_vandermonde_identity, compositions,
)
from .report import IdentityCheck, VerificationReport, emit_report
from .suite import CRITERIA, run_all

MAX_SEED = 2**64 - 1


class UsageError(Exception):
    pass


def _seed(text: str) -> int:
    try:
        v = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed {text!r}")
    if not 0 <= v <= MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--q", type=float, default=0.5, help="deformation parameter in (0, 1)")
    common.add_argument("--tolerance", type=float, default=1e-8)
    common.add_argument("--seed", type=_seed, default=None)
    common.add_argument("--trials", type=int, default=10**6)
    common.add_argument("--format", choices=("csv", "json"), default=None,
                        help="default: csv for dist, json otherwise")
    common.add_argument("--output", default=None, help="write here instead of stdout")
    common.add_argument("--reproducible", action="store_true", help="omit wall-time metadata")
    common.add_argument("--workers", type=int, default=None, help="processes for Monte Carlo chunks")

    p = argparse.ArgumentParser(prog="qorderstats", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("identities", parents=[common], help="Gaussian-binomial identity suite")

    d = sub.add_parser("dist", parents=[common], help="tabulate a CDF and density on a grid")
    d.add_argument("--law", choices=("max", "min", "kth", "quniform"), required=True)
    d.add_argument("--nu", type=int, default=1)
    d.add_argument("--k", type=int, default=1)
    d.add_argument("--t", type=float, default=1.0)
    d.add_argument("--beta", type=float, default=1.0)
    d.add_argument("--grid", type=int, default=50)

    h = sub.add_parser("heine", parents=[common], help="Heine process checks")
    h.add_argument("--lam", type=float, default=1.0)
    h.add_argument("--t", type=float, default=1.0)
    h.add_argument("--depth", type=int, default=None, help="default: tail mass below 1e-12")
    h.add_argument("--nu-max", type=int, default=3)

    v = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    v.add_argument("--criteria", type=int, nargs="+", choices=sorted(CRITERIA), default=None)
    return p


def _qparam(args) -> QParam:
    env = os.environ.get("QSTAT_MAX_TERMS")
    max_terms = DEFAULT_MAX_TERMS
    if env:
        try:
            max_terms = int(env)
        except ValueError:
            raise UsageError(f"QSTAT_MAX_TERMS must be an integer, got {env!r}")
    try:
        return QParam(args.q, max_terms=max_terms)
    except QDomainError as e:
        raise UsageError(str(e))


def _validate(args):
    if not args.tolerance > 0:
        raise UsageError("--tolerance must be > 0")
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    if args.command in ("heine", "verify") and args.seed is None:
        raise UsageError(f"{args.command} is stochastic and needs --seed")


def cmd_identities(args, qp) -> VerificationReport:
    tol = args.tolerance
    rep = VerificationReport()
    for n in range(9):
        for k in range(n + 1):
            rep.checks.append(check_subset_weight_sum(n, k, qp, tol=tol))
        for y in range(1, 6):
            for variant in Variant:
                rep.checks.append(check_vandermonde_identity(n, y, qp, variant, tol=tol))
        for t in (-1.0, -0.3, 0.0, 0.7, 1.0):
            rep.checks.append(check_qbinom_product(n, t, qp, tol=tol))
    for n in range(8):
        for parts in compositions(n, 4):
            rep.checks.append(check_multinomial_partition_sum(n, parts, qp, tol=tol))
            rep.checks.append(check_multinomial_inversion_oracle(n, parts, qp, tol=tol))
    return rep


def dist_rows(args, qp) -> list[tuple[float, float, float]]:
    if args.grid < 2:
        raise UsageError("--grid must be >= 2")
    if args.law == "quniform":
        d = O.QUniform(args.beta, qp)
        ys = [args.beta * i / (args.grid - 1) for i in range(args.grid)]
        return [(y, O.quniform_cdf(y, d), O.quniform_pdf(y, d)) for y in ys]
    spec = O.OrderStatSpec(args.nu, args.k, None, args.t)
    which = O.Which(args.law)
    ys = [args.t * i / (args.grid - 1) for i in range(args.grid)]
    return [(y, O.unif_ord_cdf(spec, qp, which, y), O.unif_ord_pdf(spec, qp, which, y)) for y in ys]


def cmd_heine(args, qp) -> VerificationReport:
    lt = args.lam * args.t
    depth = args.depth or H.depth_for_tail(lt, qp.q, 1e-12)
    hp = H.HeineParams(args.lam, args.t, qp, depth)
    rep = VerificationReport()
    dp = H.pmf_oracle_dp(hp, 20)
    bound = H.arrival_tail_mass(hp)
    for k in range(21):
        pmf = H.heine_pmf(k, hp)
        rep.checks.append(IdentityCheck.absolute("heine_pmf_vs_dp", pmf.value, dp[k],
                                                 max(args.tolerance, bound + pmf.tail_bound),
                                                 {"k": k, "depth": depth}))
    nus = tuple(range(1, min(args.nu_max, depth - 1) + 1))
    stats = H.simulate_batch(hp, args.trials, args.seed, nus=nus, workers=args.workers)
    rep.extend(H.pmf_mc_check(hp, args.trials, args.seed, 6, stats=stats).checks)
    rep.extend(H.interval_mc_check(hp, args.trials, args.seed, min(8, depth), stats=stats).checks)
    for nu in nus:
        exact = H.conditional_config_probability(nu, hp)
        box = H.conditional_density_value(nu, hp) * H.config_box_measure(nu, hp)
        rep.checks.append(IdentityCheck.absolute("density_times_box", box, exact, 1e-10, {"nu": nu}))
        rep.extend(H.conditional_mc_check(nu, hp, args.trials, args.seed, stats=stats).checks)
    return rep


def _write(text: str, path: str | None) -> None:
    if path is None:
        out = sys.stdout
        if hasattr(out, "reconfigure"):
            out.reconfigure(encoding="utf-8", newline="\n")
        out.write(text)
        out.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _rows_text(rows, fmt: str) -> str:
    buf = io.StringIO()
    if fmt == "json":
        json.dump([{"y": y, "F": F, "f": f} for y, F, f in rows], buf, indent=2, allow_nan=False)
        buf.write("\n")
    else:
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("y", "F", "f"))
        for row in rows:
            w.writerow([format(v, ".17g") for v in row])
    return buf.getvalue()


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.format is None:
        args.format = "csv" if args.command == "dist" else "json"
    started = time.perf_counter()
    try:
        _validate(args)
        qp = _qparam(args)
        if args.command == "dist":
            _write(_rows_text(dist_rows(args, qp), args.format), args.output)
            return 0
        if args.command == "identities":
            report = cmd_identities(args, qp)
        elif args.command == "heine":
            report = cmd_heine(args, qp)
        else:
            report = run_all(qp.q, args.seed, args.trials, args.workers, args.criteria)
    except (UsageError, QDomainError, SizeError, InsufficientAcceptanceError) as e:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"{parser.prog}: error: {e}", file=sys.stderr)
        return 2

    params = {k: v for k, v in vars(args).items() if k not in ("output", "reproducible", "format", "workers")}
    report.meta.update(command=args.command, seed=args.seed, parameters=params, max_terms=qp.max_terms)
    if not args.reproducible:
        report.meta["wall_time"] = time.perf_counter() - started
    buf = io.StringIO()
    emit_report(report, args.format, buf)
    try:
        _write(buf.getvalue(), args.output)
    except OSError as e:
        print(f"{parser.prog}: error: cannot write report: {e}", file=sys.stderr)
        return 2
    return 0 if report.ok else 1


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
