"""Command-line front end.

Exit codes: 0 success, 1 a check or packing failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import counterexample as cx
from .formats import (dump_digraph, dumps, embedding_to_dict, load_digraph, to_dot,
                      tribe_from_dict)
from .oracle import (AtLeast, SearchBudget, brute_max_disjoint_dipaths, max_disjoint_copies,
                     periodicity_probe)
from .packing import AssemblyReport, PackingError, assemble_positive, pack_out_rays
from .rays import AllOut, SpecSyntaxError, classify, format_spec, parse_spec, reverse
from .tribe import InsufficientThickness

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(args, human: str, machine: dict) -> None:
    if getattr(args, "format", "human") == "machine":
        sys.stdout.write(dumps(machine))
    else:
        sys.stdout.write(human.rstrip("\n") + "\n")


def _spec(text: str):
    try:
        return parse_spec(text)
    except SpecSyntaxError as exc:
        raise UsageError(f"--spec: {exc}") from exc


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc


def _digraph(path: str):
    try:
        return load_digraph(_read(path))
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"--digraph: {path} is not a digraph file ({exc})") from exc


# -- commands --------------------------------------------------------------


def cmd_classify(args) -> int:
    spec = _spec(args.spec)
    verdict = classify(spec)
    _emit(args, str(verdict), {"spec": format_spec(spec), "kind": verdict.kind, "c": verdict.c,
                               "ubiquitous": verdict.ubiquitous, "verdict": str(verdict)})
    return EXIT_OK


def cmd_build(args) -> int:
    spec = _spec(args.spec)
    kind = classify(spec).kind
    if kind != args.kind:
        raise UsageError(f"--kind {args.kind} does not match the spec ({classify(spec)})")
    for name in ("max_m", "len", "steps"):
        if getattr(args, name) < (1 if name != "steps" else 0):
            raise UsageError(f"--{name.replace('_', '-')} is out of range")
    builder = cx.build_bounded if kind == "bounded" else cx.build_unbounded
    try:
        D, plan = builder(spec, args.max_m, args.len, args.steps, strict=args.strict)
    except cx.DepthExhausted as exc:
        _emit(args, f"error: {exc}", {"error": str(exc)})
        return EXIT_VIOLATION
    base = Path(args.out)
    digraph_path = base.with_name(base.name + ".digraph.json")
    plan_path = base.with_name(base.name + ".plan.json")
    digraph_path.write_text(dump_digraph(D))
    plan_path.write_text(dumps(cx.plan_to_dict(plan)))
    human = (f"built {kind} construction: {len(D.vertices)} vertices, {len(D.arcs)} arcs, "
             f"{plan.completed}/{plan.requested} identifications\n"
             f"wrote {digraph_path.name} and {plan_path.name}")
    if plan.stop_reason:
        human += f"\nstopped early: {plan.stop_reason}"
    _emit(args, human, {"digraph": digraph_path.name, "plan": plan_path.name,
                        "vertices": len(D.vertices), "arcs": len(D.arcs),
                        "completed": plan.completed, "requested": plan.requested,
                        "stop_reason": plan.stop_reason})
    return EXIT_OK


def cmd_pack(args) -> int:
    D = _digraph(args.digraph)
    try:
        tribe = tribe_from_dict(json.loads(_read(args.tribe)), D)
    except (ValueError, KeyError) as exc:
        raise UsageError(f"--tribe: {exc}") from exc
    if args.n < 1 or args.min_len < 0:
        raise UsageError("--n must be >= 1 and --min-len >= 0")
    trace: list = []
    try:
        if tribe.pattern.prefix == () and isinstance(tribe.pattern.tail, AllOut):
            X = {m.first for layer in tribe.layers for m in layer}
            rays = pack_out_rays(D, tribe, X, args.n, args.min_len, trace)
        else:
            report = AssemblyReport()
            rays = assemble_positive(D, tribe, args.n, args.min_len, report)
            trace = report.levels
    except (PackingError, InsufficientThickness) as exc:
        _emit(args, f"packing failed: {exc}", {"error": str(exc)})
        return EXIT_VIOLATION
    lines = [f"{len(rays)} disjoint copies"]
    lines += [f"  {i}: {' '.join(map(str, r.vertices))}" for i, r in enumerate(rays)]
    lines += ["trace:"] + [
        f"  level {t.level}: layer {t.layer_size}, demand {t.demand}, "
        f"deleted {t.deleted_prefix}+{t.deleted_adopt}, adopted {t.adopted}, "
        f"rerouted {t.rerouted}, cut {t.cut_size}" for t in trace]
    _emit(args, "\n".join(lines), {"copies": [embedding_to_dict(r) for r in rays],
                                   "trace": [t.as_dict() for t in trace]})
    return EXIT_OK


def cmd_verify(args) -> int:
    D = _digraph(args.digraph)
    try:
        plan = cx.plan_from_dict(json.loads(_read(args.plan)))
    except (KeyError, ValueError, TypeError) as exc:
        raise UsageError(f"--plan: {exc}") from exc
    mode = plan.mode if args.mode == "auto" else args.mode
    report = cx.check_plan(D, plan, mode)
    budget = SearchBudget.from_env()
    suites: dict = {}
    target = plan.M + 1
    copies = max_disjoint_copies(D, plan.spec, args.prefix_len, target, budget)
    suites["disjoint_copies"] = {"target": target, "prefix_len": args.prefix_len,
                                 "result": type(copies).__name__,
                                 "value": getattr(copies, "k", getattr(copies, "best", None))}
    failed = not isinstance(copies, AtLeast)
    if mode == "bounded" and args.audit and plan.entries:
        audit = cx.audit_embeddings(D, plan, max_results=budget.max_results)
        suites["audit"] = {"embeddings": audit.embeddings, "confined": audit.confined,
                           "g_visits": audit.g_visits,
                           "cases": {str(k): v for k, v in sorted(audit.case_counts.items())},
                           "case_failures": len(audit.case_failures),
                           "direction_failures": len(audit.direction_failures)}
        failed |= not audit.ok
    if mode == "unbounded":
        probe = periodicity_probe(plan.spec, 30, 100)
        suites["periodicity"] = type(probe).__name__
        failed |= suites["periodicity"] != "Aperiodic"
    failed |= not report.ok
    lines = [f"check_plan ({mode}): {'ok' if report.ok else 'VIOLATIONS'}"]
    lines += [f"  {k}: {v}" for k, v in sorted(report.checked.items())]
    lines += [f"  violation: {v}" for v in report.violations]
    lines += [f"{k}: {v}" for k, v in suites.items()]
    _emit(args, "\n".join(lines), {"check_plan": report.as_dict(), "suites": suites,
                                   "ok": not failed})
    return EXIT_VIOLATION if failed else EXIT_OK


def cmd_export(args) -> int:
    D = _digraph(args.digraph)
    text = to_dot(D) if args.format == "dot" else dump_digraph(D)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_selftest(args) -> int:
    from .instances import random_digraph, spec_corpus
    from .packing import vertex_disjoint_dipaths

    results = {}
    ok = True
    agree = 0
    for seed in range(args.seeds):
        rng = random.Random(seed)
        n = rng.randint(4, 12)
        H = random_digraph(seed, n, rng.uniform(0.15, 0.4))
        U = rng.sample(range(n), rng.randint(1, 4))
        W = rng.sample(range(n), rng.randint(1, 4))
        res = vertex_disjoint_dipaths(H, U, W)
        agree += len(res.paths) == len(res.cut) == brute_max_disjoint_dipaths(H, U, W)
    results["menger"] = f"{agree}/{args.seeds}"
    ok &= agree == args.seeds
    dual = sum(classify(s).kind == classify(reverse(s)).kind for s in spec_corpus(0, 200))
    results["duality"] = f"{dual}/200"
    ok &= dual == 200
    for name, spec in (("bounded", "prefix=;tail=period:+-"), ("unbounded", "prefix=;tail=grow:1,1,+")):
        D, plan = cx.build(parse_spec(spec), 2, 150 if name == "bounded" else 400, 3)
        rep = cx.check_plan(D, plan)
        results[name] = "ok" if rep.ok else f"{len(rep.violations)} violations"
        ok &= rep.ok
    _emit(args, "\n".join(f"{k}: {v}" for k, v in results.items()) +
          f"\nselftest {'passed' if ok else 'FAILED'}", {"results": results, "ok": ok})
    return EXIT_OK if ok else EXIT_VIOLATION


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="raylab", description="Oriented-ray ubiquity laboratory.")
    sub = p.add_subparsers(dest="command", required=True)

    def out_format(q):
        q.add_argument("--format", choices=("human", "machine"), default="human")

    q = sub.add_parser("classify", help="classify a ray spec")
    q.add_argument("--spec", required=True)
    out_format(q)
    q.set_defaults(func=cmd_classify)

    q = sub.add_parser("build", help="build a counterexample truncation")
    q.add_argument("--kind", choices=("bounded", "unbounded"), required=True)
    q.add_argument("--spec", required=True)
    q.add_argument("--max-m", type=int, required=True)
    q.add_argument("--len", type=int, required=True)
    q.add_argument("--steps", type=int, required=True)
    q.add_argument("--out", required=True)
    q.add_argument("--strict", action="store_true", help="fail when fewer steps fit")
    out_format(q)
    q.set_defaults(func=cmd_build)

    q = sub.add_parser("pack", help="pack disjoint copies out of a tribe")
    q.add_argument("--digraph", required=True)
    q.add_argument("--tribe", required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--min-len", type=int, required=True)
    out_format(q)
    q.set_defaults(func=cmd_pack)

    q = sub.add_parser("verify", help="re-check a plan and run the oracle suites")
    q.add_argument("--digraph", required=True)
    q.add_argument("--plan", required=True)
    q.add_argument("--mode", choices=("auto", "bounded", "unbounded"), default="auto")
    q.add_argument("--prefix-len", type=int, default=10)
    q.add_argument("--audit", action="store_true", help="exhaustive embedding audit (bounded)")
    out_format(q)
    q.set_defaults(func=cmd_verify)

    q = sub.add_parser("export", help="export a digraph")
    q.add_argument("--digraph", required=True)
    q.add_argument("--format", choices=("dot", "native"), required=True)
    q.add_argument("--out")
    q.set_defaults(func=cmd_export)

    q = sub.add_parser("selftest", help="run the seeded oracle corpus")
    q.add_argument("--seeds", type=int, default=100)
    out_format(q)
    q.set_defaults(func=cmd_selftest)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"raylab {args.command}: error: {exc}\n")
        return EXIT_USAGE


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
