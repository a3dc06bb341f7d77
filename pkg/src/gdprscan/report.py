"""Canonical report serialization, text rendering and report diffing.

Report document key order (schema version "1")::

    schema_version, scan_id, scanned_at, snapshot_provider,
    summary {total_exposures, resources_scanned_by_kind, exposures_by_kind,
             exposures_by_principle, exposures_by_region},
    exposures [{fingerprint, rule_id, principle,
                resource {region, kind, id, name}, detail, discriminator}]

Map-valued summary fields are emitted with sorted keys. Output is UTF-8,
two-space indented, newline terminated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Iterable

from gdprscan.model import (
    KNOWN_SCHEMA_VERSIONS,
    SCHEMA_VERSION,
    Exposure,
    Principle,
    Report,
    ResourceKind,
    ResourceRef,
    RuleId,
    Summary,
    fingerprint,
    format_timestamp,
    parse_timestamp,
)
from gdprscan.rules import TITLES


class ReportError(ValueError):
    pass


def _dumps(doc: Any) -> bytes:
    return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def exposure_to_dict(e: Exposure) -> dict[str, Any]:
    ref = e.resource
    return {
        "fingerprint": e.fingerprint,
        "rule_id": e.rule_id.value,
        "principle": e.principle.value,
        "resource": {"region": ref.region, "kind": ref.kind.value, "id": ref.id, "name": ref.name},
        "detail": e.detail,
        "discriminator": e.discriminator,
    }


def _sorted_map(m: dict) -> dict[str, int]:
    items = [(k.value if hasattr(k, "value") else k, v) for k, v in m.items()]
    return dict(sorted(items))


def report_to_dict(report: Report) -> dict[str, Any]:
    s = report.summary
    return {
        "schema_version": report.schema_version,
        "scan_id": report.scan_id,
        "scanned_at": format_timestamp(report.scanned_at),
        "snapshot_provider": report.snapshot_provider,
        "summary": {
            "total_exposures": s.total_exposures,
            "resources_scanned_by_kind": _sorted_map(s.resources_scanned_by_kind),
            "exposures_by_kind": _sorted_map(s.exposures_by_kind),
            "exposures_by_principle": _sorted_map(s.exposures_by_principle),
            "exposures_by_region": _sorted_map(s.exposures_by_region),
        },
        "exposures": [exposure_to_dict(e) for e in report.exposures],
    }


def serialize_report(report: Report) -> bytes:
    return _dumps(report_to_dict(report))


def exposure_from_dict(doc: dict[str, Any]) -> Exposure:
    try:
        rd = doc["resource"]
        ref = ResourceRef(rd["region"], ResourceKind(rd["kind"]), rd["id"], rd.get("name"))
        rule_id = RuleId(doc["rule_id"])
        exposure = Exposure(
            rule_id=rule_id,
            principle=Principle(doc["principle"]),
            resource=ref,
            detail=doc["detail"],
            discriminator=doc.get("discriminator", ""),
            fingerprint=doc["fingerprint"],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ReportError(f"malformed exposure: {exc!r}") from None
    if exposure.principle is not rule_id.principle:
        raise ReportError(f"{rule_id.value} belongs to {rule_id.principle.value}, not {exposure.principle.value}")
    if exposure.fingerprint != fingerprint(rule_id, ref, exposure.discriminator):
        raise ReportError(f"fingerprint mismatch for {rule_id.value} on {ref.id}")
    return exposure


def parse_report(data: bytes | str) -> Report:
    try:
        doc = json.loads(data)
        version = doc["schema_version"]
        if version not in KNOWN_SCHEMA_VERSIONS:
            raise ReportError(f"unknown report schema_version {version!r}")
        s = doc["summary"]
        summary = Summary(
            resources_scanned_by_kind={ResourceKind(k): v for k, v in s["resources_scanned_by_kind"].items()},
            exposures_by_kind={ResourceKind(k): v for k, v in s["exposures_by_kind"].items()},
            exposures_by_principle={Principle(k): v for k, v in s["exposures_by_principle"].items()},
            exposures_by_region=dict(s["exposures_by_region"]),
            total_exposures=s["total_exposures"],
        )
        exposures = tuple(exposure_from_dict(e) for e in doc["exposures"])
        report = Report(
            scan_id=doc["scan_id"],
            scanned_at=parse_timestamp(doc["scanned_at"]),
            snapshot_provider=doc["snapshot_provider"],
            exposures=exposures,
            summary=summary,
            schema_version=version,
        )
    except ReportError:
        raise
    except (KeyError, TypeError, AttributeError, ValueError) as exc:
        raise ReportError(f"malformed report: {exc!r}") from None
    if not summary.is_consistent() or summary.total_exposures != len(exposures):
        raise ReportError("report summary does not match its exposures")
    return report


def _exposure_line(e: Exposure) -> str:
    ref = e.resource
    name = f" ({ref.name})" if ref.name else ""
    return f"  - [{ref.region}] {ref.kind.value} {ref.id}{name}: {e.detail}"


def render_text(report: Report) -> str:
    s = report.summary
    lines = [
        f"Scan {report.scan_id} at {format_timestamp(report.scanned_at)} (provider: {report.snapshot_provider})",
        "",
        "Resources scanned:",
    ]
    census = _sorted_map(s.resources_scanned_by_kind)
    width = max((len(k) for k in census), default=0)
    lines += [f"  {k.ljust(width)}  {v}" for k, v in census.items()] or ["  (none)"]
    lines += ["", "Exposures by principle:"]
    lines += [f"  {p.label.ljust(25)}  {s.exposures_by_principle.get(p, 0)}" for p in Principle]
    count = s.total_exposures
    lines += ["", f"{count} exposure found" if count == 1 else f"{count} exposures found"]
    current = None
    for e in report.exposures:
        if e.rule_id is not current:
            current = e.rule_id
            lines += ["", f"{e.rule_id.value} [{e.principle.label}] {TITLES[e.rule_id]}"]
        lines.append(_exposure_line(e))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ReportDiff:
    new_exposures: tuple[Exposure, ...]
    resolved_exposures: tuple[Exposure, ...]
    persisting_exposures: tuple[Exposure, ...]
    schema_version: str = SCHEMA_VERSION


def _sorted(exposures: Iterable[Exposure]) -> tuple[Exposure, ...]:
    return tuple(sorted(exposures, key=lambda e: e.sort_key))


def diff(before: Report, after: Report) -> ReportDiff:
    """Split exposures into new / resolved / persisting by fingerprint."""
    if before.schema_version != after.schema_version:
        raise ReportError(
            f"cannot diff schema_version {before.schema_version!r} against {after.schema_version!r}"
        )
    old = {e.fingerprint: e for e in before.exposures}
    cur = {e.fingerprint: e for e in after.exposures}
    return ReportDiff(
        new_exposures=_sorted(e for fp, e in cur.items() if fp not in old),
        resolved_exposures=_sorted(e for fp, e in old.items() if fp not in cur),
        persisting_exposures=_sorted(e for fp, e in cur.items() if fp in old),
        schema_version=after.schema_version,
    )


def diff_to_dict(d: ReportDiff) -> dict[str, Any]:
    return {
        "schema_version": d.schema_version,
        "summary": {
            "new": len(d.new_exposures),
            "resolved": len(d.resolved_exposures),
            "persisting": len(d.persisting_exposures),
        },
        "new_exposures": [exposure_to_dict(e) for e in d.new_exposures],
        "resolved_exposures": [exposure_to_dict(e) for e in d.resolved_exposures],
        "persisting_exposures": [exposure_to_dict(e) for e in d.persisting_exposures],
    }


def serialize_diff(d: ReportDiff) -> bytes:
    return _dumps(diff_to_dict(d))


def render_diff_text(d: ReportDiff) -> str:
    lines = [
        f"{len(d.new_exposures)} new, {len(d.resolved_exposures)} resolved, "
        f"{len(d.persisting_exposures)} persisting"
    ]
    for title, group in (("New", d.new_exposures), ("Resolved", d.resolved_exposures)):
        if group:
            lines += ["", f"{title}:"]
            lines += [f"  {e.rule_id.value}{_exposure_line(e)[1:]}" for e in group]
    return "\n".join(lines) + "\n"

