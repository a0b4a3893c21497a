"""Command-line interface.

Exit codes: 0 success, 1 usage or I/O error, 2 infeasible conversion,
3 verification failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import io, synthesis
from .errors import InfeasibleTarget, LOCCError, NotAContraction, RankViolation
from .linalg import DEFAULT_TOL
from .verify import simulate, verify

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_VERIFY = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt_vec(v) -> str:
    return "(" + ", ".join(f"{x:.12g}" for x in v) + ")"


def _emit(args, human: str, structured: dict) -> None:
    if args.format == "structured":
        print(json.dumps(structured, sort_keys=True))
    else:
        print(human)


def cmd_check(args) -> int:
    a, b = io.load_state(args.state_a), io.load_state(args.state_b)
    feas = synthesis.feasibility(a, b, args.tol)
    ra = int(np.count_nonzero(feas.spectrum_a > 1e-12))
    rb = int(np.count_nonzero(feas.spectrum_b > 1e-12))
    lines = [
        f"spectrum(A): {_fmt_vec(feas.spectrum_a)}",
        f"spectrum(B): {_fmt_vec(feas.spectrum_b)}",
        f"rank(A) = {ra}, rank(B) = {rb}: "
        + ("ok" if feas.rank_ok else "rank(A) < rank(B)"),
        f"deterministic: {'yes' if feas.deterministic else 'no'}, pMax = {feas.p_max:.12g}",
    ]
    _emit(args, "\n".join(lines), {
        "spectrum_a": feas.spectrum_a.tolist(),
        "spectrum_b": feas.spectrum_b.tolist(),
        "rank_a": ra,
        "rank_b": rb,
        "rank_ok": feas.rank_ok,
        "deterministic": feas.deterministic,
        "p_max": feas.p_max,
    })
    return EXIT_OK if feas.p_max > 0 else EXIT_INFEASIBLE


def cmd_synth(args) -> int:
    a, b = io.load_state(args.state_a), io.load_state(args.state_b)
    feas = synthesis.feasibility(a, b, args.tol)
    if feas.p_max <= 0 or not feas.rank_ok:
        print("infeasible: rank(A) < rank(B)", file=sys.stderr)
        return EXIT_INFEASIBLE
    p = None if args.max or args.prob is None else args.prob
    if p is not None and p > feas.p_max + args.tol:
        print(f"infeasible: requested p = {p} exceeds pMax = {feas.p_max:.12g}", file=sys.stderr)
        return EXIT_INFEASIBLE
    try:
        protocol = synthesis.full_pipeline(a, b, p, args.tol)
    except (InfeasibleTarget, RankViolation) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    report = verify(protocol, a, b, args.tol)
    if not report.passed:
        print("synthesized protocol failed verification", file=sys.stderr)
        return EXIT_VERIFY
    io.save_protocol(args.out, protocol, a, b)
    bound = (a.dim_a - 1) ** 2 + 1
    _emit(args, "\n".join([
        f"wrote {args.out}",
        f"success probability: {protocol.probability:.12g}",
        f"stage1 branches: {protocol.branch_count} (Caratheodory bound {bound})",
        f"stage2: {'yes' if protocol.stage2 is not None else 'no'}",
    ]), {
        "out": str(args.out),
        "probability": protocol.probability,
        "branches": protocol.branch_count,
        "caratheodory_bound": bound,
        "stage2": protocol.stage2 is not None,
    })
    return EXIT_OK


def cmd_verify(args) -> int:
    protocol, raw = io.load_protocol(args.protocol)
    a, b = io.load_state(args.state_a), io.load_state(args.state_b)
    digests_ok = all(
        raw.get(key) in (None, io.state_digest(s))
        for key, s in (("source_digest", a), ("target_digest", b))
    )
    try:
        report = verify(protocol, a, b, args.tol)
    except LOCCError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    ok = report.passed and digests_ok
    worst_branch = max((br.proportionality_error for br in report.branch_errors), default=0.0)
    d = report.to_dict()
    d["digests_match"] = digests_ok
    d["pass"] = ok
    _emit(args, "\n".join([
        f"verification: {'pass' if ok else 'FAIL'}",
        f"completeness error: {report.completeness_error:.3e}",
        f"worst branch proportionality error: {worst_branch:.3e}",
        f"measured success probability: {report.measured_success_probability:.12g}"
        f" (declared {report.declared_probability:.12g})",
        f"state digests match: {'yes' if digests_ok else 'no'}",
    ]), d)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_simulate(args) -> int:
    if args.trials < 0:
        print("--trials must be nonnegative", file=sys.stderr)
        return EXIT_USAGE
    protocol, _ = io.load_protocol(args.protocol)
    a = io.load_state(args.state_a)
    res = simulate(protocol, a, args.trials, args.seed, workers=args.workers)
    lines = [f"trials: {res.trials}  seed: {res.seed}", "outcome    count  frequency"]
    for k, c in sorted(res.outcome_counts.items()):
        lines.append(f"{k:>7}  {c:>7}  {c / res.trials:.6f}")
    lines.append(f"success: {res.success_count}  empirical p = {res.empirical_p:.6f}")
    _emit(args, "\n".join(lines), res.to_dict())
    return EXIT_OK


def cmd_lopopescu(args) -> int:
    m = io.load_matrix(args.contraction)
    psi = io.load_state(args.state)
    try:
        n, u = synthesis.lo_popescu(m, psi, args.tol)
    except NotAContraction as exc:
        print(f"not a contraction: {exc}", file=sys.stderr)
        return EXIT_USAGE
    io.save_matrices(args.out, n=n, u=u)
    _emit(args, f"wrote {args.out} (N and U are {n.shape[0]}x{n.shape[1]})",
          {"out": str(args.out), "dim": n.shape[0]})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL,
                        help="tolerance for all numerical predicates (default %(default)g)")
    common.add_argument("--format", choices=("human", "structured"), default="human")

    parser = _Parser(prog="locc", description="LOCC conversion of bipartite pure states")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", parents=[common], help="feasibility and maximal probability")
    p.add_argument("state_a")
    p.add_argument("state_b")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("synth", parents=[common], help="synthesize a protocol")
    p.add_argument("state_a")
    p.add_argument("state_b")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--prob", type=float, help="target success probability")
    g.add_argument("--max", action="store_true", help="use the maximal probability (default)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("verify", parents=[common], help="verify a protocol file")
    p.add_argument("protocol")
    p.add_argument("state_a")
    p.add_argument("state_b")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", parents=[common], help="Monte-Carlo run of a protocol")
    p.add_argument("protocol")
    p.add_argument("state_a")
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("lopopescu", parents=[common],
                       help="move a Bob contraction to Alice plus a Bob unitary")
    p.add_argument("contraction")
    p.add_argument("state")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_lopopescu)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (OSError, LOCCError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
