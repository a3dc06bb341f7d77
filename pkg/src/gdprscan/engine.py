"""Scan orchestration: run every enabled rule over a snapshot and build the report."""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Iterable, Optional, Sequence

from gdprscan import pii
from gdprscan.ingest import Severity, ValidationIssue, serialize_snapshot, validate_snapshot
from gdprscan.model import (
    AccessPolicy,
    CloudStorage,
    Database,
    DataPolicy,
    Exposure,
    Firewall,
    LoadBalancer,
    Report,
    Resource,
    Router,
    Server,
    ServerStorage,
    Snapshot,
    Summary,
    fingerprint as _fingerprint,
    format_timestamp,
)
from gdprscan.rules import (
    RuleCatalog,
    eval_access_policy,
    eval_cloud_storage,
    eval_database_ic,
    eval_firewall,
    eval_load_balancer,
    eval_router,
    eval_server,
    eval_server_storage,
    eval_storage_limitation,
)

__all__ = ["ScanConfig", "ScanRefused", "scan", "fingerprint", "summarize", "evaluate_resource"]


class ScanRefused(ValueError):
    def __init__(self, issues: Sequence[ValidationIssue]):
        super().__init__(f"snapshot has {len(issues)} validation error(s); first: {issues[0]}")
        self.issues = list(issues)


@dataclass(frozen=True)
class ScanConfig:
    catalog: RuleCatalog = field(default_factory=RuleCatalog.default)
    policy: DataPolicy = field(default_factory=DataPolicy)
    scan_id: Optional[str] = None
    classifier: Optional[pii.PiiClassifier] = None


def fingerprint(exposure: Exposure) -> str:
    """Recompute an exposure's fingerprint from its identifying fields."""
    return _fingerprint(exposure.rule_id, exposure.resource, exposure.discriminator)


def evaluate_resource(resource: Resource, config: ScanConfig, today=None) -> list[Exposure]:
    """All exposures for one resource, before rule filtering."""
    if isinstance(resource, Database):
        return (
            eval_database_ic(resource)
            + pii.eval_data_minimization(resource, config.policy, config.classifier, today)
            + eval_storage_limitation(resource)
        )
    evaluator: Callable[[Resource], list[Exposure]] = _EVALUATORS[type(resource)]
    return evaluator(resource)


_EVALUATORS: dict[type, Callable] = {
    Server: eval_server,
    ServerStorage: eval_server_storage,
    Firewall: eval_firewall,
    LoadBalancer: eval_load_balancer,
    CloudStorage: eval_cloud_storage,
    AccessPolicy: eval_access_policy,
    Router: eval_router,
}


def _tally(keys: Iterable) -> dict:
    out: dict = {}
    for k in keys:
        out[k] = out.get(k, 0) + 1
    return out


def summarize(exposures: Sequence[Exposure], snapshot: Snapshot) -> Summary:
    return Summary(
        resources_scanned_by_kind=snapshot.census(),
        exposures_by_kind=_tally(e.resource.kind for e in exposures),
        exposures_by_principle=_tally(e.principle for e in exposures),
        exposures_by_region=_tally(e.resource.region for e in exposures),
        total_exposures=len(exposures),
    )


def default_scan_id(snapshot: Snapshot, scanned_at: datetime) -> str:
    """Content-derived id so repeated scans of the same input agree."""
    h = hashlib.sha256(serialize_snapshot(snapshot.canonical()))
    h.update(format_timestamp(scanned_at).encode())
    return h.hexdigest()[:16]


def scan(
    snapshot: Snapshot,
    config: Optional[ScanConfig] = None,
    scanned_at: Optional[datetime] = None,
    workers: int = 1,
) -> Report:
    """Evaluate every enabled rule on every resource.

    Raises :class:`ScanRefused` when the snapshot has validation errors.
    ``workers > 1`` spreads resources over a thread pool; results are
    identical because the report is sorted before it is returned.
    """
    config = config or ScanConfig()
    scanned_at = (scanned_at or datetime.now(timezone.utc)).astimezone(timezone.utc)
    errors = [i for i in validate_snapshot(snapshot, now=scanned_at) if i.severity is Severity.ERROR]
    if errors:
        raise ScanRefused(errors)

    enabled = config.catalog.enabled_ids
    today = scanned_at.date()

    def run(chunk: Sequence[Resource]) -> list[Exposure]:
        return [
            e for r in chunk for e in evaluate_resource(r, config, today) if e.rule_id in enabled
        ]

    resources = snapshot.resources
    if workers > 1 and len(resources) > workers:
        size = -(-len(resources) // workers)
        chunks = [resources[i : i + size] for i in range(0, len(resources), size)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            exposures = [e for part in pool.map(run, chunks) for e in part]
    else:
        exposures = run(resources)

    return Report(
        scan_id=config.scan_id or default_scan_id(snapshot, scanned_at),
        scanned_at=scanned_at,
        snapshot_provider=snapshot.provider_id,
        exposures=tuple(exposures),
        summary=summarize(exposures, snapshot),
    )

