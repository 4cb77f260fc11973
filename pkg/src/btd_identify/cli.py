"""Command-line surface: analyze / defect / decompose / probe / criterion /
suite, each emitting one JSON report document on stdout.

Exit codes: 0 success, 1 suite or verdict-check failure, 2 usage or input
error, 3 inconclusive numerical outcome.  All randomized commands take a
seed (default 0) which is echoed into the report.  BTD_IDENTIFY_THREADS
caps multistart parallelism.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from .btd_als import als_fit, canonicalize, solutions_equivalent, \
    uniqueness_probe
from .conditions import evaluate_theorem
from .criterion_probe import CriterionHypothesisError, delathauwer_check
from .join_analysis import terracini_join_dim
from .report import Report, load_tensor
from .suite import fixture_names, run_suite
from .tensor_core import BlockTermSpec, synth_block_term
from .variety import SubspaceVarietySpec

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_INCONCLUSIVE = 3


class UsageError(Exception):
    pass


def _int_list(text):
    try:
        return [int(x) for x in str(text).split(",") if x != ""]
    except ValueError:
        raise UsageError(f"expected a comma-separated integer list, got {text!r}")


def _parse_btd_spec(args_synth=None, I=None, J=None, K=None, L=None):
    if args_synth is not None:
        vals = _int_list(args_synth)
        if len(vals) < 4:
            raise UsageError("--synth needs I,J,K followed by at least one L")
        I, J, K, L = vals[0], vals[1], vals[2], vals[3:]
    try:
        return BlockTermSpec(I, J, K, tuple(L))
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc))


def thread_cap():
    raw = os.environ.get("BTD_IDENTIFY_THREADS", "")
    try:
        return max(1, int(raw)) if raw else 1
    except ValueError:
        return 1


def _verdict_payload(v):
    return {
        "verdict": v.verdict,
        "fired": sorted(v.fired),
        "hypothesis_ok": v.hypothesis_ok,
        "fill": {"total": v.fill.total, "ambient": v.fill.ambient,
                 "sign": v.fill.sign, "terms": list(v.fill.terms)},
        "notes": list(v.notes),
    }


def cmd_analyze(args):
    spec = _parse_btd_spec(I=args.I, J=args.J, K=args.K, L=_int_list(args.L))
    v = evaluate_theorem(spec)
    results = _verdict_payload(v)
    inputs = {"I": spec.I, "J": spec.J, "K": spec.K, "L": list(spec.L)}
    return Report("analyze", inputs, results), EXIT_OK


def cmd_defect(args):
    ambient = _int_list(args.ambient)
    subs = [_int_list(s) for s in args.sub]
    try:
        specs = [SubspaceVarietySpec(tuple(ambient), tuple(s)) for s in subs]
        rep = terracini_join_dim(specs, args.arith, args.trials, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc))
    results = {
        "expected_affine_dim": rep.expected_affine_dim,
        "computed_affine_dim": rep.computed_affine_dim,
        "defect": rep.defect,
        "certified": rep.certified,
        "certificate": rep.certificate,
        "trials": rep.trials,
        "arithmetic": rep.arithmetic_mode,
        "per_trial": list(rep.per_trial),
    }
    inputs = {"ambient": ambient, "subs": subs, "arith": args.arith,
              "trials": args.trials}
    return Report("defect", inputs, results, seed=args.seed), EXIT_OK


def cmd_decompose(args):
    starts = args.starts
    if args.synth:
        spec = _parse_btd_spec(args_synth=args.synth)
        Y, _ = synth_block_term(spec, args.seed,
                                "integer-uniform" if args.integer
                                else "complex-gaussian")
        source = {"synth": _int_list(args.synth)}
    elif args.input:
        try:
            Y = load_tensor(args.input)
        except (OSError, ValueError, KeyError) as exc:
            raise UsageError(f"cannot read tensor fixture: {exc}")
        if args.L is None:
            raise UsageError("decomposing a stored tensor needs -L ranks")
        dims = Y.data.shape
        spec = _parse_btd_spec(I=dims[0], J=dims[1], K=dims[2],
                               L=_int_list(args.L))
        source = {"file": os.path.basename(args.input)}
    else:
        raise UsageError("give a tensor fixture file or --synth I,J,K,L,...")
    Yf = Y.to_float()
    solutions = []
    for s in range(starts):
        sol = als_fit(Yf, spec, init="random", seed=args.seed * 100003 + s)
        solutions.append(sol)
    best = min(solutions, key=lambda s: s.residual)
    converged = [s for s in solutions if s.residual <= args.success]
    classes = []
    for s in sorted(converged, key=lambda s: s.residual):
        c = canonicalize(s)
        if not any(solutions_equivalent(rep, c) for rep in classes):
            classes.append(c)
    results = {
        "best_residual": best.residual,
        "sweeps": best.sweeps,
        "converged": len(converged),
        "classes": len(classes),
        "blocks": [
            {"a": list(a), "X": [list(row) for row in (B @ C.T)]}
            for a, B, C in best.blocks
        ],
        "notes": list(best.notes),
    }
    inputs = {"spec": [spec.I, spec.J, spec.K, *spec.L], "starts": starts,
              **source}
    code = EXIT_OK if converged else EXIT_INCONCLUSIVE
    return Report("decompose", inputs, results, seed=args.seed), code


def cmd_probe(args):
    spec = _parse_btd_spec(args_synth=args.spec)
    rep = uniqueness_probe(spec, trials=args.trials, seed=args.seed,
                           workers=thread_cap())
    results = {
        "verdict": rep.verdict,
        "trials": rep.trials,
        "converged": rep.converged_count,
        "classes": rep.distinct_classes,
        "class_sizes": list(rep.class_sizes),
        "continuum_evidence": rep.continuum_evidence,
        "excess_kernel": rep.excess_kernel,
        "matches_verdict": rep.matches_verdict,
        "inconclusive": rep.inconclusive,
    }
    inputs = {"spec": [spec.I, spec.J, spec.K, *spec.L], "trials": args.trials}
    if rep.inconclusive:
        code = EXIT_INCONCLUSIVE
    elif not rep.matches_verdict:
        code = EXIT_CHECK_FAILED
    else:
        code = EXIT_OK
    return Report("probe", inputs, results, seed=args.seed), code


def cmd_criterion(args):
    spec = _parse_btd_spec(args_synth=args.synth)
    _, gt = synth_block_term(spec, args.seed,
                             "integer-uniform" if args.integer
                             else "complex-gaussian")
    try:
        rep = delathauwer_check(gt, multistarts=args.multistarts, seed=args.seed)
    except CriterionHypothesisError as exc:
        raise UsageError(f"hypothesis violation: {exc}")
    results = {
        "holds": rep.holds,
        "definitive": rep.definitive,
        "violating_subset": list(rep.violating_subset) if rep.violating_subset
        else None,
        "violating_member": _member_payload(rep.violating_member),
        "subsets_checked": [
            {"subset": list(sub), "L": L, "method": method, "members": n}
            for sub, L, method, n in rep.subset_methods
        ],
    }
    inputs = {"spec": [spec.I, spec.J, spec.K, *spec.L],
              "multistarts": args.multistarts}
    return Report("criterion", inputs, results, seed=args.seed), EXIT_OK


def _member_payload(member):
    if member is None:
        return None
    coeffs, rank = member
    return {"coeffs": list(coeffs), "rank": rank}


def cmd_suite(args):
    if args.list:
        return Report("suite", {"list": True},
                      {"fixtures": fixture_names()}), EXIT_OK
    results = run_suite(args.arith, only=set(args.only) if args.only else None)
    payload = {
        "arith": args.arith,
        "passed": sum(r.passed for r in results),
        "failed": sum(not r.passed for r in results),
        "fixtures": [
            {"name": r.name, "passed": r.passed, "detail": r.detail}
            for r in results
        ],
    }
    code = EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED
    return Report("suite", {"arith": args.arith}, payload), code


def build_parser():
    p = argparse.ArgumentParser(
        prog="btd-identify",
        description="uniqueness analysis for rank-(1,L,L) block term "
                    "tensor decompositions")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="evaluate the arithmetic conditions")
    a.add_argument("-I", type=int, required=True)
    a.add_argument("-J", type=int, required=True)
    a.add_argument("-K", type=int, required=True)
    a.add_argument("-L", required=True, help="comma-separated block ranks")
    a.set_defaults(fn=cmd_analyze)

    d = sub.add_parser("defect", help="join dimension/defect via tangents")
    d.add_argument("--ambient", required=True)
    d.add_argument("--sub", action="append", required=True,
                   help="mode ranks of one factor; repeatable")
    d.add_argument("--arith", choices=("rational", "float"), default="rational")
    d.add_argument("--trials", type=int, default=None)
    d.add_argument("--seed", type=int, default=0)
    d.set_defaults(fn=cmd_defect)

    c = sub.add_parser("decompose", help="fit a block term decomposition")
    c.add_argument("input", nargs="?", help="tensor fixture file (JSON)")
    c.add_argument("--synth", help="I,J,K,L1[,L2...] to synthesize")
    c.add_argument("-L", help="block ranks when decomposing a stored tensor")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--starts", type=int, default=20)
    c.add_argument("--success", type=float, default=1e-6)
    c.add_argument("--integer", action="store_true",
                   help="synthesize with the integer sampler")
    c.set_defaults(fn=cmd_decompose)

    q = sub.add_parser("probe", help="multistart uniqueness probe")
    q.add_argument("--spec", required=True, help="I,J,K,L1[,L2...]")
    q.add_argument("--trials", type=int, default=20)
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(fn=cmd_probe)

    k = sub.add_parser("criterion", help="span-intersection uniqueness check")
    k.add_argument("--synth", required=True, help="I,J,K,L1[,L2...]")
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--multistarts", type=int, default=50)
    k.add_argument("--integer", action="store_true", default=True)
    k.set_defaults(fn=cmd_criterion)

    s = sub.add_parser("suite", help="deterministic regression fixtures")
    s.add_argument("--list", action="store_true")
    s.add_argument("--arith", choices=("rational", "float"), default="rational")
    s.add_argument("--only", action="append", help="run only named fixtures")
    s.set_defaults(fn=cmd_suite)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0,) else 0
    t0 = time.monotonic()
    try:
        report, code = args.fn(args)
    except UsageError as exc:
        err = Report(args.command, {}, {"error": str(exc)})
        sys.stdout.write(err.serialize())
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    wall = (time.monotonic() - t0) * 1000.0
    report = Report(report.command, report.inputs, report.results,
                    seed=report.seed, tool_version=report.tool_version,
                    wall_time_ms=round(wall, 3))
    sys.stdout.write(report.serialize())
    return code


if __name__ == "__main__":
    sys.exit(main())
