"""``gdprscan`` command line: scan, diff, rules, validate.

Exit codes: 0 clean (or below the gate), 1 exposures at/above the gate
(or validation errors / new exposures), 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from gdprscan import __version__
from gdprscan.engine import ScanConfig, ScanRefused, scan
from gdprscan.ingest import (
    DEFAULT_SAMPLING_CAP,
    FixtureClient,
    InventoryError,
    Severity,
    SnapshotError,
    fetch_inventory,
    load_snapshot,
    parse_snapshot,
    validate_snapshot,
)
from gdprscan.model import DataPolicy, Database, Principle, RuleId, Table, parse_timestamp
from gdprscan.pii import load_policy
from gdprscan.report import ReportError, diff, parse_report, render_diff_text, render_text, serialize_diff, serialize_report
from gdprscan.rules import RuleCatalog

EXIT_OK = 0
EXIT_GATE = 1
EXIT_INPUT = 2

FAIL_ON = {"any": None, **{p.label: p for p in Principle}}


class UsageError(Exception):
    pass


def _rule_id(text: str) -> RuleId:
    try:
        return RuleId(text.upper())
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown rule id {text!r} (expected R1..R19)") from None


def _principle(text: str) -> Principle:
    for p in Principle:
        if text in (p.label, p.value):
            return p
    raise argparse.ArgumentTypeError(f"unknown principle {text!r}")


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return n


def _write(data: str | bytes, out: Optional[str]) -> None:
    if isinstance(data, str):
        data = data.encode("utf-8")
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _apply_config(args: argparse.Namespace) -> None:
    """Fill unset scan flags from ``--config``; explicit flags win."""
    if not getattr(args, "config", None):
        return
    try:
        conf = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from None
    if not isinstance(conf, dict):
        raise UsageError("config file must hold a JSON object")
    known = {"snapshot", "inventory", "policy", "fail_on", "format", "out", "disable_rule", "sampling_cap", "region"}
    unknown = set(conf) - known
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for key, value in conf.items():
        if getattr(args, key, None) in (None, []):
            setattr(args, key, value)
    if isinstance(args.fail_on, str) and args.fail_on not in FAIL_ON:
        raise UsageError(f"invalid fail_on {args.fail_on!r}")
    args.disable_rule = [_rule_id(r) if isinstance(r, str) else r for r in args.disable_rule or []]


def _truncate_samples(snapshot, cap: int):
    def trim(r):
        if isinstance(r, Database) and any(len(t.sampled_rows) > cap for t in r.tables):
            tables = tuple(
                Table(t.name, t.fields, t.ttl_enabled, t.ttl_attribute, t.sampled_rows[:cap]) for t in r.tables
            )
            return Database(r.ref, r.encrypted, tables)
        return r

    return type(snapshot)(
        snapshot.schema_version, snapshot.provider_id, snapshot.generated_at, tuple(trim(r) for r in snapshot.resources)
    )


def cmd_scan(args: argparse.Namespace) -> int:
    if bool(args.snapshot) == bool(args.inventory):
        raise UsageError("give exactly one of --snapshot or --inventory")
    scanned_at = parse_timestamp(args.scanned_at) if args.scanned_at else None
    cap = args.sampling_cap or DEFAULT_SAMPLING_CAP
    try:
        if args.snapshot:
            snapshot = load_snapshot(Path(args.snapshot).read_bytes(), now=scanned_at)
        else:
            client = FixtureClient.from_directory(args.inventory)
            snapshot = fetch_inventory(client, args.region or client.regions() or ["default"], cap, now=scanned_at)
        policy = load_policy(args.policy) if args.policy else DataPolicy()
    except SnapshotError as exc:
        for issue in exc.issues or []:
            print(issue, file=sys.stderr)
        if not exc.issues:
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError, InventoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    snapshot = _truncate_samples(snapshot, cap)
    config = ScanConfig(
        catalog=RuleCatalog.default().with_disabled(args.disable_rule or []),
        policy=policy,
        scan_id=args.scan_id,
    )
    try:
        report = scan(snapshot, config, scanned_at=scanned_at)
    except ScanRefused as exc:
        for issue in exc.issues:
            print(issue, file=sys.stderr)
        return EXIT_INPUT

    body = render_text(report) if args.format == "text" else serialize_report(report)
    _write(body, args.out)

    if args.fail_on is None:
        return EXIT_OK
    gate = FAIL_ON[args.fail_on]
    tripped = any(gate is None or e.principle is gate for e in report.exposures)
    return EXIT_GATE if tripped else EXIT_OK


def cmd_diff(args: argparse.Namespace) -> int:
    try:
        before = parse_report(Path(args.before).read_bytes())
        after = parse_report(Path(args.after).read_bytes())
        result = diff(before, after)
    except (OSError, ReportError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    body = render_diff_text(result) if args.format == "text" else serialize_diff(result)
    _write(body, args.out)
    return EXIT_GATE if result.new_exposures else EXIT_OK


def cmd_rules(args: argparse.Namespace) -> int:
    catalog = RuleCatalog.default().with_disabled(args.disable_rule or [])
    entries = [e for e in catalog if args.principle is None or e.principle is args.principle]
    if args.format == "json":
        listed = {e.rule_id for e in entries}
        _write(json.dumps([d for d in catalog.to_list() if RuleId(d["rule_id"]) in listed], indent=2) + "\n", None)
    else:
        for e in entries:
            flag = "" if e.enabled else "  (disabled)"
            print(f"{e.rule_id.value:<4} {e.principle.label:<25} {e.title}{flag}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        data = Path(args.snapshot).read_bytes()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        snapshot = parse_snapshot(data)
        issues = validate_snapshot(snapshot)
    except SnapshotError as exc:
        if exc.issues and exc.issues[0].path == "/":
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT
        issues = exc.issues
    for issue in issues:
        print(issue)
    errors = sum(i.severity is Severity.ERROR for i in issues)
    warnings = len(issues) - errors
    print(f"{errors} error(s), {warnings} warning(s)")
    return EXIT_GATE if errors else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gdprscan", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="scan a snapshot and write a report")
    p.add_argument("--snapshot", help="snapshot document to scan")
    p.add_argument("--inventory", help="fixture inventory directory to collect instead of a snapshot")
    p.add_argument("--region", action="append", help="region to collect from --inventory (repeatable)")
    p.add_argument("--policy", help="data policy document (permitted categories + allowlist)")
    p.add_argument("--fail-on", choices=sorted(FAIL_ON), help="exit 1 when exposures of this kind exist")
    p.add_argument("--format", choices=["json", "text"], default=None)
    p.add_argument("--out", help="write the report here instead of standard output")
    p.add_argument("--disable-rule", action="append", type=_rule_id, default=[], metavar="ID")
    p.add_argument("--sampling-cap", type=_positive, help=f"rows per table to inspect (default {DEFAULT_SAMPLING_CAP})")
    p.add_argument("--scan-id", help="pin the report's scan id")
    p.add_argument("--scanned-at", help="pin the scan timestamp (ISO-8601 UTC)")
    p.add_argument("--config", help="JSON file with defaults for the flags above")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("diff", help="compare two reports")
    p.add_argument("before")
    p.add_argument("after")
    p.add_argument("--format", choices=["json", "text"], default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("rules", help="list the rule catalog")
    p.add_argument("action", nargs="?", choices=["list"], default="list")
    p.add_argument("--format", choices=["json", "text"], default="text")
    p.add_argument("--principle", type=_principle)
    p.add_argument("--disable-rule", action="append", type=_rule_id, default=[], metavar="ID")
    p.set_defaults(func=cmd_rules)

    p = sub.add_parser("validate", help="check a snapshot for errors and warnings")
    p.add_argument("--snapshot", required=True)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        if args.command == "scan":
            _apply_config(args)
            args.format = args.format or "json"
        return args.func(args)
    except (UsageError, argparse.ArgumentTypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
