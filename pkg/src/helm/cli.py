"""Command-line entry points.

Subcommands: classify (interactive terminal session), compile (model to
network documents), eval (replay journal files to rankings), bench-sched
(scheduler benchmark CSV), compare (two-engine agreement report),
bench-backend (numba vs numpy kernel timings), serve (HTTP service).

Exit codes: 0 success, 1 usage error, 2 data or validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import bms, harness
from .compiler import load_model
from .errors import HelmError
from .networks import save_network, validate
from .session import Session, start

USAGE_EXIT = 1
DATA_EXIT = 2


class _ArgumentParser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the CLI contract wants 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="helm",
                             description="Belief-network ship classification toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    classify = sub.add_parser("classify", help="interactive classification session")
    classify.add_argument("--model", required=True, help="feature model JSON file")
    classify.add_argument("--engine", choices=["bms", "prospector"], default="bms")
    classify.add_argument("--threshold", type=float, default=0.95,
                          help="confidence needed to stop (default 0.95)")

    compile_cmd = sub.add_parser("compile", help="compile a model to network files")
    compile_cmd.add_argument("--model", required=True)
    compile_cmd.add_argument("--out-dir", default=".",
                             help="directory for the compiled networks")

    eval_cmd = sub.add_parser("eval", help="replay journal files to rankings")
    eval_cmd.add_argument("--model", required=True)
    eval_cmd.add_argument("--engine", choices=["bms", "prospector"], default="bms")
    eval_cmd.add_argument("journals", nargs="+", help="journal JSON files")

    bench = sub.add_parser("bench-sched", help="scheduler policy benchmark")
    bench.add_argument("--nodes", type=int, default=24)
    bench.add_argument("--evidence", type=int, default=8)
    bench.add_argument("--trials", type=int, default=100)
    bench.add_argument("--seed", type=int, default=7)
    bench.add_argument("--max-states", type=int, default=3)

    compare = sub.add_parser("compare", help="two-engine agreement report")
    compare.add_argument("--model", required=True)
    compare.add_argument("--cases", help="JSON file with evidence cases; defaults "
                                         "to all hard single-attribute cases")

    backend = sub.add_parser("bench-backend",
                             help="compare numba and numpy kernel backends")
    backend.add_argument("--seed", type=int, default=0)
    backend.add_argument("--nodes", type=int, default=12)
    backend.add_argument("--networks", type=int, default=20)
    backend.add_argument("--propagations", type=int, default=50)

    serve_cmd = sub.add_parser("serve", help="run the HTTP session service")
    serve_cmd.add_argument("--models-dir", default=None,
                           help="models directory (default $HELM_MODELS_DIR or ./models)")
    serve_cmd.add_argument("--port", type=int, default=8642)
    serve_cmd.add_argument("--host", default="127.0.0.1")
    serve_cmd.add_argument("--sessions-dir", default="sessions",
                           help="where journals are written on shutdown")
    return parser


def _load_model_file(path: str):
    return load_model(Path(path).read_text())


def _print_ranking(session: Session, out) -> None:
    print("rank  class                 probability", file=out)
    for i, (class_id, p) in enumerate(session.ranking(), start=1):
        print(f"{i:>4}  {class_id:<20}  {p:.6f}", file=out)


def run_classify(args, stdin=None, stdout=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    session = start(_load_model_file(args.model), args.engine)
    print(f"session {session.id} engine={args.engine}", file=stdout)
    _print_ranking(session, stdout)
    skipped: set[str] = set()
    while session.stop_check(args.threshold) == "active":
        question = session.ask(exclude=skipped)
        if question is None:
            break
        states = session.question_states(question)
        options = "/".join(states)
        print("\nmerit  deltaP  cost  question", file=stdout)
        for record in session.merits():
            print(f"{record.merit:.4f} {record.delta_p:.4f} {record.cost:5.2f}"
                  f"  {record.question}", file=stdout)
        print(f"question: {session.question_label(question)} [{options}] "
              f"(number 0-1 for a graded report, 'skip', 'quit')", file=stdout)
        line = stdin.readline()
        if not line:
            break
        reply = line.strip()
        if reply == "quit":
            session.stop("operator")
            break
        if reply == "skip" or not reply:
            skipped.add(question)
            continue
        try:
            if reply in states:
                session.answer(question, reply)
            else:
                session.answer(question, float(reply))
        except (ValueError, HelmError) as exc:
            print(f"not a valid answer: {exc}", file=stdout)
            continue
        _print_ranking(session, stdout)
    print(f"\nfinal status: {session.status}"
          + (f" ({session.stop_reason})" if session.stop_reason else ""), file=stdout)
    _print_ranking(session, stdout)
    return 0


def run_compile(args) -> int:
    from .compiler import compile_bms, compile_prospector

    model = _load_model_file(args.model)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.model).stem
    for suffix, network in (("bms", compile_bms(model)),
                            ("prospector", compile_prospector(model))):
        report = validate(network)
        for problem in report.warnings:
            print(f"warning: {suffix}: {problem.where}: {problem.message}",
                  file=sys.stderr)
        path = out_dir / f"{stem}-{suffix}.json"
        path.write_text(save_network(network))
        print(path)
    return 0


def run_eval(args) -> int:
    model = _load_model_file(args.model)
    results = []
    for journal_path in args.journals:
        entries = json.loads(Path(journal_path).read_text())
        session = Session.replay(model, args.engine, entries)
        results.append({
            "journal": journal_path,
            "status": session.status,
            "ranking": [{"class": c, "probability": p} for c, p in session.ranking()],
        })
    json.dump(results, sys.stdout, indent=2)
    print()
    return 0


def run_bench_sched(args) -> int:
    print(harness.BENCH_REFERENCE_NOTE, file=sys.stderr)
    records = harness.scheduler_sweep(
        nodes=args.nodes, max_states=args.max_states,
        evidence_count=args.evidence, trials=args.trials, seed=args.seed)
    sys.stdout.write(harness.benchmark_csv(records))
    medians = harness.median_activations(records)
    failed = sum(r.failed for r in records)
    print(f"median activations: {medians}; failed runs: {failed}", file=sys.stderr)
    return 0


def run_compare(args) -> int:
    model = _load_model_file(args.model)
    cases = None
    if args.cases:
        cases = json.loads(Path(args.cases).read_text())
    report = harness.compare_engines(model, cases)
    json.dump(report.as_dict(), sys.stdout, indent=2)
    print()
    return 0


def run_bench_backend(args) -> int:
    rows = harness.backend_benchmark(seed=args.seed, nodes=args.nodes,
                                     networks=args.networks,
                                     propagations=args.propagations)
    print("backend  oracle_runs  oracle_micros  propagation_runs  propagation_micros")
    for row in rows:
        print(f"{row['backend']:<7}  {row['oracle_runs']:>11}  "
              f"{row['oracle_micros']:>13}  {row['propagation_runs']:>16}  "
              f"{row['propagation_micros']:>18}")
    return 0


def run_serve(args) -> int:
    from .service import serve

    serve(models_dir=args.models_dir, port=args.port,
          sessions_dir=args.sessions_dir, host=args.host)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_EXIT
    handlers = {
        "classify": run_classify,
        "compile": run_compile,
        "eval": run_eval,
        "bench-sched": run_bench_sched,
        "compare": run_compare,
        "bench-backend": run_bench_backend,
        "serve": run_serve,
    }
    try:
        return handlers[args.command](args)
    except HelmError as exc:
        print(f"helm: error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except FileNotFoundError as exc:
        print(f"helm: error: {exc}", file=sys.stderr)
        return DATA_EXIT
    except json.JSONDecodeError as exc:
        print(f"helm: error: invalid JSON: {exc}", file=sys.stderr)
        return DATA_EXIT


if __name__ == "__main__":
    sys.exit(main())
