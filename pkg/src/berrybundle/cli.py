"""Command-line front end.

``berrybundle run SCENARIO [--out FILE]`` executes a scenario file,
``berrybundle models [--json]`` lists the model zoo and
``berrybundle reproduce [--only NAME] [--steps N]`` runs the checks.

Exit codes: 0 success, 1 failed check, 2 invalid input, 3 domain error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import DomainError, InputError, NumericalError
from .models import ZOO, ZOO_DOCS, make_model

EXIT_CHECK_FAILED = 1
EXIT_INPUT = 2
EXIT_DOMAIN = 3
EXIT_NUMERICAL = 4


def _error(kind: str, exc: Exception, code: int) -> int:
    payload = {"error": type(exc).__name__, "kind": kind, "message": str(exc)}
    node = getattr(exc, "node", None)
    point = getattr(exc, "point", None)
    if node is not None:
        payload["node"] = int(node)
    if point is not None:
        payload["point"] = [float(x) for x in point]
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)
    return code


def cmd_run(args) -> int:
    from .scenario import dump_report, load_scenario, run_scenario

    try:
        scenario = load_scenario(args.scenario)
        report, csvs = run_scenario(scenario, Path(args.scenario).resolve().parent)
    except DomainError as exc:
        return _error("domain", exc, EXIT_DOMAIN)
    except NumericalError as exc:
        return _error("numerical", exc, EXIT_NUMERICAL)
    except InputError as exc:
        return _error("input", exc, EXIT_INPUT)

    stem = Path(args.out).with_suffix("") if args.out else Path(Path(args.scenario).stem)
    for kind, text in csvs.items():
        target = Path(f"{stem}.{kind.removesuffix('_csv')}.csv")
        target.write_text(text)
        report["results"][kind]["file"] = str(target)
    text = dump_report(report)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def model_listing() -> list[dict]:
    entries = []
    for name in sorted(ZOO):
        model = make_model(name)
        entries.append(
            {
                "name": name,
                "param_dim": model.param_dim,
                "hilbert_dim": model.hilbert_dim,
                "base_topology": model.base_topology,
                "params": ZOO_DOCS[name]["params"],
                "coords": ZOO_DOCS[name]["coords"],
                "branches": ZOO_DOCS[name]["branches"],
                "default_branches": [b.to_dict() for b in model.branches],
            }
        )
    return entries


def cmd_models(args) -> int:
    entries = model_listing()
    if args.json:
        print(json.dumps(entries, indent=2, sort_keys=True))
        return 0
    for e in entries:
        print(f"{e['name']}: {e['param_dim']} parameters, dimension {e['hilbert_dim']}, base {e['base_topology']}")
        print(f"  coordinates: {', '.join(e['coords'])}")
        for key, doc in e["params"].items():
            print(f"  param {key}: {doc}")
        print(f"  branches: {e['branches']}")
    return 0


def cmd_reproduce(args) -> int:
    from .reproduce import reproduce

    try:
        results = reproduce(args.only, args.steps)
    except ValueError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INPUT
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    if args.json:
        Path(args.json).write_text(json.dumps([r.to_dict() for r in results], indent=2, sort_keys=True) + "\n")
    return EXIT_CHECK_FAILED if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="berrybundle", description="Berry phases and Berry bundles.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario file")
    run.add_argument("scenario", help="scenario JSON file")
    run.add_argument("--out", help="write the report here instead of stdout")
    run.set_defaults(func=cmd_run)

    models = sub.add_parser("models", help="list the model zoo")
    models.add_argument("--json", action="store_true", help="emit a JSON array")
    models.set_defaults(func=cmd_models)

    rep = sub.add_parser("reproduce", help="run the quantitative checks")
    rep.add_argument("--only", help="group (spin, lambda, planar, flatness, convergence, properties) or criterion number")
    rep.add_argument("--steps", type=int, help="override the ODE step count")
    rep.add_argument("--json", metavar="FILE", help="also write the results as JSON")
    rep.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
