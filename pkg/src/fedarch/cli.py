"""Command-line front door.

Exit codes: 0 success, 1 validation or hypothesis failure, 2 usage error
(argparse default), 3 I/O or parse error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .catalog import default_catalog_path, load_catalog, validate_catalog
from .config import SimConfig
from .engine import (
    RequirementProfile,
    check_case_study,
    recommend,
    render_adr,
    what_if,
)
from .errors import FedArchError, ParseError, SchemaError
from .hypotheses import default_hypotheses_path, load_hypotheses
from .jsonutil import canonical_dumps, load_json_path
from .simulator import run_simulation
from .validator import validate_all

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_USAGE = 2
EXIT_IO = 3

CATALOG_ENV = "FEDARCH_CATALOG"


def _catalog_path(args) -> Path:
    if getattr(args, "catalog", None):
        return Path(args.catalog)
    env = os.environ.get(CATALOG_ENV)
    return Path(env) if env else default_catalog_path()


def _write(path: str | None, text: str) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        print(text)


def cmd_catalog_validate(args) -> int:
    catalog = load_catalog(args.file)
    violations = validate_catalog(catalog)
    if violations:
        for v in violations:
            print(v, file=sys.stderr)
        print(f"{len(violations)} violation(s)", file=sys.stderr)
        return EXIT_FAILED_CHECK
    print(f"catalog ok: {len(catalog.patterns)} patterns, "
          f"{sum(len(m.effects) for m in catalog.decision_models)} effect edges")
    return EXIT_OK


def cmd_decide(args) -> int:
    catalog = load_catalog(_catalog_path(args))
    profile = RequirementProfile.from_dict(load_json_path(args.profile))
    rec = recommend(catalog, profile)
    _write(args.out, canonical_dumps(rec.to_dict()))
    if args.adr:
        Path(args.adr).write_text(render_adr(catalog, rec), encoding="utf-8")
    return EXIT_OK


def _parse_weight(text: str) -> tuple[str, float]:
    if "=" not in text:
        raise SchemaError(f"--set-weight expects attr=value, got {text!r}")
    key, _, value = text.partition("=")
    return key, float(value)


def cmd_whatif(args) -> int:
    catalog = load_catalog(_catalog_path(args))
    profile = RequirementProfile.from_dict(load_json_path(args.profile))
    delta: dict = {}
    if args.force_in:
        delta["add_forced_in"] = list(args.force_in)
    if args.force_out:
        delta["add_forced_out"] = list(args.force_out)
    if args.set_weight:
        delta["set_weights"] = dict(_parse_weight(w) for w in args.set_weight)
    if args.scale_weights is not None:
        delta["scale_weights"] = args.scale_weights
    result = what_if(catalog, profile, delta)
    _write(args.out, canonical_dumps(result.to_dict()))
    return EXIT_OK


def cmd_simulate(args) -> int:
    doc = load_json_path(args.config)
    if args.seed is not None:
        doc["seed"] = args.seed  # CLI override wins over the config file
    cfg = SimConfig.from_dict(doc)
    metrics = run_simulation(cfg, event_log_path=args.event_log)
    _write(args.out, canonical_dumps(metrics.to_dict()))
    return EXIT_OK


def cmd_validate_all(args) -> int:
    catalog = load_catalog(_catalog_path(args))
    path = args.hypotheses or default_hypotheses_path()
    hypotheses = load_hypotheses(path)
    report = validate_all(catalog, hypotheses,
                          progress=(lambda s: print(s, file=sys.stderr))
                          if args.verbose else None)
    _write(args.report, canonical_dumps(report.to_dict()))
    if args.markdown:
        Path(args.markdown).write_text(report.render_markdown(), encoding="utf-8")
    summary = report.summary()
    print(f"hypotheses: {summary['hypotheses']}", file=sys.stderr)
    failed = summary["hypotheses"]["fail"] + summary["hypotheses"]["error"]
    return EXIT_FAILED_CHECK if failed else EXIT_OK


def cmd_case_study(args) -> int:
    catalog = load_catalog(_catalog_path(args))
    report = check_case_study(catalog, args.id)
    for pid in report.pattern_ids:
        print(pid)
    ok = report.closure_ok and report.matches_canonical
    return EXIT_OK if ok else EXIT_FAILED_CHECK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(catalog_path=str(_catalog_path(args)))
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fedarch",
        description="Pattern decision models and a deterministic federated "
                    "learning simulator for checking their tradeoffs.")
    parser.add_argument("--catalog", help="catalog file "
                        f"(default: ${CATALOG_ENV} or the packaged catalog)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="catalog operations")
    csub = p.add_subparsers(dest="catalog_command", required=True)
    v = csub.add_parser("validate", help="validate a catalog file")
    v.add_argument("file")
    v.set_defaults(func=cmd_catalog_validate)

    p = sub.add_parser("decide", help="rank pattern selections for a profile")
    p.add_argument("--profile", required=True)
    p.add_argument("--out", help="write the recommendation JSON here")
    p.add_argument("--adr", help="write a human-readable decision record here")
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("whatif", help="compare recommendations before/after a change")
    p.add_argument("--profile", required=True)
    p.add_argument("--force-in", action="append", metavar="PATTERN")
    p.add_argument("--force-out", action="append", metavar="PATTERN")
    p.add_argument("--set-weight", action="append", metavar="ATTR=VALUE")
    p.add_argument("--scale-weights", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_whatif)

    p = sub.add_parser("simulate", help="run one scenario")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="write metrics JSON here")
    p.add_argument("--seed", type=int, help="override the config file's seed")
    p.add_argument("--event-log", help="export line-delimited event records here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate-all", help="run the tradeoff experiment matrix")
    p.add_argument("--hypotheses", help="hypotheses file (default: packaged set)")
    p.add_argument("--report", help="write the report JSON here")
    p.add_argument("--markdown", help="write a markdown summary here")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_validate_all)

    p = sub.add_parser("case-study", help="print an architecture's pattern mapping")
    p.add_argument("id", choices=["meta", "intel_openfl", "siemens_ifl"])
    p.set_defaults(func=cmd_case_study)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--port", type=int, default=8414)
    p.add_argument("--host", default="127.0.0.1")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FedArchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED_CHECK


if __name__ == "__main__":
    sys.exit(main())
