"""Command-line entry point.

    qsnet run <script> [--seed N] [--override k=v ...] [--out DIR]
    qsnet verify <events.jsonl> <assertions.json>
    qsnet report <events.jsonl> [--format csv|json]
    qsnet serve [--host H] [--port P] [--mode fast|scaled|step] [--scale X]

Exit codes: 0 ok, 2 assertion failure, 3 schema error.
"""

import argparse
import json
import sys
from pathlib import Path

from .errors import PlanInfeasibleError, QsnetError, SchemaError
from .kernel import read_jsonl
from .scenario import load_script, run, timing_rows, timing_summary_csv, write_artifacts
from .verify import verify

EXIT_OK = 0
EXIT_ASSERTION = 2
EXIT_SCHEMA = 3


def _parse_override(text: str):
    if "=" not in text:
        raise SchemaError(f"override must be key=value, got {text!r}")
    key, raw = text.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def cmd_run(args) -> int:
    script = load_script(args.script)
    overrides = dict(_parse_override(o) for o in args.override)
    result = run(script, seed=args.seed, overrides=overrides)
    if args.out:
        paths = write_artifacts(result, args.out)
        for name, path in paths.items():
            print(f"{name}: {path}")
    for index, error in result.step_errors:
        print(f"step {index} failed: {error}", file=sys.stderr)
    for check_result in result.checks:
        print(check_result.line())
    summary = result.summary()
    print(f"{summary['scenario']}: {summary['events']} events, "
          f"{len(summary['services'])} services, seed {summary['seed']}")
    if result.step_errors:
        return EXIT_ASSERTION
    return EXIT_OK if result.ok else EXIT_ASSERTION


def cmd_verify(args) -> int:
    events = read_jsonl(Path(args.log).read_text())
    assertions = json.loads(Path(args.assertions).read_text())
    if isinstance(assertions, dict):
        assertions = assertions.get("expected", assertions.get("assertions", []))
    results = verify(events, assertions)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.ok for r in results) else EXIT_ASSERTION


def cmd_report(args) -> int:
    events = read_jsonl(Path(args.log).read_text())
    if args.format == "json":
        print(json.dumps(timing_rows(events), indent=2))
    else:
        sys.stdout.write(timing_summary_csv(events))
    return EXIT_OK


def cmd_serve(args) -> int:
    from .gateway import serve

    serve(host=args.host, port=args.port, mode=args.mode, scale=args.scale,
          seed=args.seed, topology_path=args.topology)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qsnet", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario script")
    p_run.add_argument("script", help="path or shipped scenario name")
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--override", action="append", default=[],
                       metavar="K=V", help="e.g. latency.ofs_s=4")
    p_run.add_argument("--out", default=None, help="artifact directory")
    p_run.set_defaults(fn=cmd_run)

    p_verify = sub.add_parser("verify", help="check assertions against a log")
    p_verify.add_argument("log")
    p_verify.add_argument("assertions")
    p_verify.set_defaults(fn=cmd_verify)

    p_report = sub.add_parser("report", help="timing summary from a log")
    p_report.add_argument("log")
    p_report.add_argument("--format", choices=("csv", "json"), default="csv")
    p_report.set_defaults(fn=cmd_report)

    p_serve = sub.add_parser("serve", help="run the HTTP gateway")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8080)
    p_serve.add_argument("--mode", choices=("fast", "scaled", "step"), default="scaled")
    p_serve.add_argument("--scale", type=float, default=10.0)
    p_serve.add_argument("--seed", type=int, default=0)
    p_serve.add_argument("--topology", default=None)
    p_serve.set_defaults(fn=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except SchemaError as e:
        print(f"schema error: {e}", file=sys.stderr)
        return EXIT_SCHEMA
    except PlanInfeasibleError as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return EXIT_ASSERTION
    except QsnetError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
