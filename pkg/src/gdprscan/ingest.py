"""Snapshot loading, validation and inventory assembly.

The snapshot file format (schema version "1") is documented in
``docs/snapshot-format.md``. Parsing is split in two steps:

* :func:`parse_snapshot` checks document *shape* (types, enum values,
  required keys) and raises :class:`SnapshotError` on the first problem.
* :func:`validate_snapshot` checks *consistency* and returns every issue.

:func:`load_snapshot` runs both and refuses documents with errors.
"""

from __future__ import annotations

import ipaddress
import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Optional, Protocol, Sequence

from gdprscan.model import (
    KNOWN_SCHEMA_VERSIONS,
    SCHEMA_VERSION,
    AccessGrant,
    AccessPolicy,
    CloudStorage,
    Database,
    Direction,
    Effect,
    FieldDescriptor,
    Firewall,
    FirewallRule,
    Grantee,
    Listener,
    ListenerProtocol,
    LoadBalancer,
    PolicyStatement,
    Protocol as NetProtocol,
    Resource,
    ResourceKind,
    ResourceRef,
    Route,
    Router,
    RouteTarget,
    Server,
    ServerState,
    ServerStorage,
    Snapshot,
    Table,
    format_timestamp,
    make_row,
    parse_timestamp,
    resource_sort_key,
)

log = logging.getLogger(__name__)

DEFAULT_SAMPLING_CAP = 100
CLOCK_SKEW = timedelta(hours=24)


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class ValidationIssue:
    severity: Severity
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity.value}: {self.path}: {self.message}"


class SnapshotError(ValueError):
    """A snapshot document could not be turned into a usable Snapshot."""

    def __init__(self, message: str, issues: Sequence[ValidationIssue] = ()):
        super().__init__(message)
        self.issues = list(issues)


class InventoryError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# parsing


class _Doc:
    """Typed accessors over a JSON object that report a JSON-pointer path on failure."""

    def __init__(self, data: Any, path: str):
        if not isinstance(data, dict):
            raise SnapshotError(f"{path or '/'}: expected an object", [_err(path or "/", "expected an object")])
        self.data = data
        self.path = path

    def _fail(self, key: str, message: str) -> SnapshotError:
        path = f"{self.path}/{key}"
        return SnapshotError(f"{path}: {message}", [_err(path, message)])

    def req(self, key: str, typ: type | tuple[type, ...]) -> Any:
        if key not in self.data:
            raise self._fail(key, "required field missing")
        return self.opt(key, typ)

    def opt(self, key: str, typ: type | tuple[type, ...], default: Any = None) -> Any:
        value = self.data.get(key, default)
        if value is None:
            return default
        # bool is an int subclass; keep them apart.
        if typ is int and isinstance(value, bool):
            raise self._fail(key, "expected an integer")
        if not isinstance(value, typ):
            names = typ.__name__ if isinstance(typ, type) else "/".join(t.__name__ for t in typ)
            raise self._fail(key, f"expected {names}, got {type(value).__name__}")
        return value

    def enum(self, key: str, enum_cls: type[Enum], required: bool = True) -> Any:
        raw = self.req(key, str) if required else self.opt(key, str)
        if raw is None:
            return None
        try:
            return enum_cls(raw)
        except ValueError:
            allowed = ", ".join(m.value for m in enum_cls)  # type: ignore[attr-defined]
            raise self._fail(key, f"unknown value {raw!r} (expected one of: {allowed})") from None

    def strings(self, key: str) -> tuple[str, ...]:
        items = self.opt(key, list, [])
        for i, item in enumerate(items):
            if not isinstance(item, str):
                raise self._fail(f"{key}/{i}", "expected a string")
        return tuple(items)

    def objects(self, key: str, required: bool = False) -> list["_Doc"]:
        items = self.req(key, list) if required else self.opt(key, list, [])
        return [_Doc(item, f"{self.path}/{key}/{i}") for i, item in enumerate(items)]


def _err(path: str, message: str) -> ValidationIssue:
    return ValidationIssue(Severity.ERROR, path, message)


def _warn(path: str, message: str) -> ValidationIssue:
    return ValidationIssue(Severity.WARNING, path, message)


def _port_range(doc: _Doc) -> Any:
    raw = doc.req("port_range", (str, list))
    if isinstance(raw, str):
        if raw != "all":
            raise doc._fail("port_range", "expected \"all\" or [low, high]")
        return "all"
    if len(raw) != 2 or not all(isinstance(p, int) and not isinstance(p, bool) for p in raw):
        raise doc._fail("port_range", "expected \"all\" or [low, high]")
    return (raw[0], raw[1])


def _firewall_rule(doc: _Doc, direction: Direction) -> FirewallRule:
    declared = doc.enum("direction", Direction, required=False)
    if declared is not None and declared is not direction:
        raise doc._fail("direction", f"rule listed under {direction.value}_rules declares {declared.value}")
    return FirewallRule(
        protocol=doc.enum("protocol", NetProtocol),
        port_range=_port_range(doc),
        cidr=doc.req("cidr", str),
        direction=direction,
    )


def _table(doc: _Doc) -> Table:
    rows = []
    for i, row in enumerate(doc.opt("sampled_rows", list, [])):
        if not isinstance(row, dict) or not all(isinstance(v, str) for v in row.values()):
            raise doc._fail(f"sampled_rows/{i}", "expected an object of string values")
        rows.append(make_row(row))
    return Table(
        name=doc.req("name", str),
        fields=tuple(
            FieldDescriptor(f.req("name", str), f.opt("declared_type", str, ""))
            for f in doc.objects("fields")
        ),
        ttl_enabled=doc.opt("ttl_enabled", bool, False),
        ttl_attribute=doc.opt("ttl_attribute", str),
        sampled_rows=tuple(rows),
    )


def _resource(doc: _Doc) -> Resource:
    kind = doc.enum("kind", ResourceKind)
    ref = ResourceRef(
        region=doc.req("region", str),
        kind=kind,
        id=doc.req("id", str),
        name=doc.opt("name", str),
    )
    if kind is ResourceKind.SERVER:
        return Server(
            ref,
            state=doc.enum("state", ServerState),
            purpose_tag=doc.opt("purpose_tag", str),
            attached_firewall_ids=doc.strings("attached_firewall_ids"),
            attached_storage_ids=doc.strings("attached_storage_ids"),
        )
    if kind is ResourceKind.SERVER_STORAGE:
        return ServerStorage(
            ref,
            encrypted=doc.req("encrypted", bool),
            attached_server_id=doc.opt("attached_server_id", str),
            purpose_tag=doc.opt("purpose_tag", str),
        )
    if kind is ResourceKind.DATABASE:
        return Database(
            ref,
            encrypted=doc.req("encrypted", bool),
            tables=tuple(_table(t) for t in doc.objects("tables")),
        )
    if kind is ResourceKind.FIREWALL:
        return Firewall(
            ref,
            inbound_rules=tuple(_firewall_rule(r, Direction.INBOUND) for r in doc.objects("inbound_rules")),
            outbound_rules=tuple(_firewall_rule(r, Direction.OUTBOUND) for r in doc.objects("outbound_rules")),
        )
    if kind is ResourceKind.LOAD_BALANCER:
        return LoadBalancer(
            ref,
            listeners=tuple(
                Listener(
                    frontend_protocol=l.enum("frontend_protocol", ListenerProtocol),
                    frontend_port=l.req("frontend_port", int),
                    backend_protocol=l.enum("backend_protocol", ListenerProtocol),
                    backend_port=l.req("backend_port", int),
                )
                for l in doc.objects("listeners", required=True)
            ),
        )
    if kind is ResourceKind.CLOUD_STORAGE:
        return CloudStorage(
            ref,
            encrypted=doc.req("encrypted", bool),
            read_grants=tuple(_grant(g) for g in doc.objects("read_grants")),
            write_grants=tuple(_grant(g) for g in doc.objects("write_grants")),
        )
    if kind is ResourceKind.ACCESS_POLICY:
        return AccessPolicy(
            ref,
            statements=tuple(
                PolicyStatement(
                    effect=s.enum("effect", Effect),
                    actions=s.strings("actions"),
                    resources=s.strings("resources"),
                )
                for s in doc.objects("statements", required=True)
            ),
        )
    return Router(
        ref,
        routes=tuple(
            Route(r.req("destination_cidr", str), r.enum("target", RouteTarget))
            for r in doc.objects("routes")
        ),
    )


def _grant(doc: _Doc) -> AccessGrant:
    return AccessGrant(doc.enum("grantee", Grantee), doc.opt("principal_id", str))


def parse_snapshot(data: bytes | str) -> Snapshot:
    """Decode a snapshot document without consistency checks."""
    try:
        raw = json.loads(data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SnapshotError(f"malformed snapshot document: {exc}", [_err("/", str(exc))]) from exc
    doc = _Doc(raw, "")
    version = doc.req("schema_version", str)
    if version not in KNOWN_SCHEMA_VERSIONS:
        raise doc._fail("schema_version", f"unknown schema_version {version!r}")
    try:
        generated_at = parse_timestamp(doc.req("generated_at", str))
    except ValueError as exc:
        raise doc._fail("generated_at", str(exc)) from None
    return Snapshot(
        schema_version=version,
        provider_id=doc.req("provider_id", str),
        generated_at=generated_at,
        resources=tuple(_resource(r) for r in doc.objects("resources", required=True)),
    )


def load_snapshot(data: bytes | str, now: Optional[datetime] = None) -> Snapshot:
    """Parse and validate; raise :class:`SnapshotError` naming the first error."""
    snapshot = parse_snapshot(data)
    errors = [i for i in validate_snapshot(snapshot, now=now) if i.severity is Severity.ERROR]
    if errors:
        first = errors[0]
        raise SnapshotError(f"{first.path}: {first.message}", errors)
    return snapshot


def load_snapshot_file(path: str | Path, now: Optional[datetime] = None) -> Snapshot:
    return load_snapshot(Path(path).read_bytes(), now=now)


# ---------------------------------------------------------------------------
# serialization


def _ref_fields(ref: ResourceRef) -> dict[str, Any]:
    out: dict[str, Any] = {"kind": ref.kind.value, "region": ref.region, "id": ref.id}
    if ref.name is not None:
        out["name"] = ref.name
    return out


def _rule_to_dict(rule: FirewallRule) -> dict[str, Any]:
    ports = rule.port_range if rule.port_range == "all" else list(rule.port_range)  # type: ignore[arg-type]
    return {
        "protocol": rule.protocol.value,
        "port_range": ports,
        "cidr": rule.cidr,
        "direction": rule.direction.value,
    }


def _grant_to_dict(grant: AccessGrant) -> dict[str, Any]:
    out: dict[str, Any] = {"grantee": grant.grantee.value}
    if grant.principal_id is not None:
        out["principal_id"] = grant.principal_id
    return out


def _optional(out: dict[str, Any], key: str, value: Any) -> None:
    if value is not None:
        out[key] = value


def resource_to_dict(resource: Resource) -> dict[str, Any]:
    out = _ref_fields(resource.ref)
    if isinstance(resource, Server):
        out["state"] = resource.state.value
        _optional(out, "purpose_tag", resource.purpose_tag)
        out["attached_firewall_ids"] = list(resource.attached_firewall_ids)
        out["attached_storage_ids"] = list(resource.attached_storage_ids)
    elif isinstance(resource, ServerStorage):
        out["encrypted"] = resource.encrypted
        _optional(out, "attached_server_id", resource.attached_server_id)
        _optional(out, "purpose_tag", resource.purpose_tag)
    elif isinstance(resource, Database):
        out["encrypted"] = resource.encrypted
        tables = []
        for t in resource.tables:
            td: dict[str, Any] = {
                "name": t.name,
                "fields": [{"name": f.name, "declared_type": f.declared_type} for f in t.fields],
                "ttl_enabled": t.ttl_enabled,
            }
            _optional(td, "ttl_attribute", t.ttl_attribute)
            td["sampled_rows"] = t.rows()
            tables.append(td)
        out["tables"] = tables
    elif isinstance(resource, Firewall):
        out["inbound_rules"] = [_rule_to_dict(r) for r in resource.inbound_rules]
        out["outbound_rules"] = [_rule_to_dict(r) for r in resource.outbound_rules]
    elif isinstance(resource, LoadBalancer):
        out["listeners"] = [
            {
                "frontend_protocol": l.frontend_protocol.value,
                "frontend_port": l.frontend_port,
                "backend_protocol": l.backend_protocol.value,
                "backend_port": l.backend_port,
            }
            for l in resource.listeners
        ]
    elif isinstance(resource, CloudStorage):
        out["encrypted"] = resource.encrypted
        out["read_grants"] = [_grant_to_dict(g) for g in resource.read_grants]
        out["write_grants"] = [_grant_to_dict(g) for g in resource.write_grants]
    elif isinstance(resource, AccessPolicy):
        out["statements"] = [
            {"effect": s.effect.value, "actions": list(s.actions), "resources": list(s.resources)}
            for s in resource.statements
        ]
    elif isinstance(resource, Router):
        out["routes"] = [
            {"destination_cidr": r.destination_cidr, "target": r.target.value} for r in resource.routes
        ]
    else:  # pragma: no cover
        raise TypeError(f"not a resource: {resource!r}")
    return out


def snapshot_to_dict(snapshot: Snapshot) -> dict[str, Any]:
    return {
        "schema_version": snapshot.schema_version,
        "provider_id": snapshot.provider_id,
        "generated_at": format_timestamp(snapshot.generated_at),
        "resources": [resource_to_dict(r) for r in snapshot.resources],
    }


def serialize_snapshot(snapshot: Snapshot) -> bytes:
    text = json.dumps(snapshot_to_dict(snapshot), indent=2, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


# ---------------------------------------------------------------------------
# validation


def _path_key(issue: ValidationIssue) -> tuple:
    parts = tuple((0, int(p), "") if p.isdigit() else (1, 0, p) for p in issue.path.split("/"))
    return (0 if issue.severity is Severity.ERROR else 1, parts, issue.message)


def _check_cidr(cidr: str, path: str, issues: list[ValidationIssue]) -> None:
    try:
        ipaddress.ip_network(cidr, strict=False)
    except ValueError:
        issues.append(_err(path, f"invalid CIDR {cidr!r}"))


def _check_resource(res: Resource, path: str, ids: dict, issues: list[ValidationIssue]) -> None:
    ref = res.ref
    if not ref.id:
        issues.append(_err(f"{path}/id", "resource id must be non-empty"))
    if not ref.region:
        issues.append(_err(f"{path}/region", "region must be non-empty"))

    def dangling(target_kind: ResourceKind, target_id: str, where: str) -> None:
        if target_id not in ids.get((ref.region, target_kind), ()):
            issues.append(
                _warn(where, f"references {target_kind.value} {target_id!r} absent from region {ref.region!r}")
            )

    if isinstance(res, Server):
        for i, fid in enumerate(res.attached_firewall_ids):
            dangling(ResourceKind.FIREWALL, fid, f"{path}/attached_firewall_ids/{i}")
        for i, sid in enumerate(res.attached_storage_ids):
            dangling(ResourceKind.SERVER_STORAGE, sid, f"{path}/attached_storage_ids/{i}")
    elif isinstance(res, ServerStorage):
        if res.attached_server_id is not None:
            dangling(ResourceKind.SERVER, res.attached_server_id, f"{path}/attached_server_id")
    elif isinstance(res, Database):
        seen_tables: set[str] = set()
        for ti, table in enumerate(res.tables):
            tpath = f"{path}/tables/{ti}"
            if table.name in seen_tables:
                issues.append(_err(f"{tpath}/name", f"duplicate table name {table.name!r}"))
            seen_tables.add(table.name)
            names = table.field_names
            if len(set(names)) != len(names):
                issues.append(_err(f"{tpath}/fields", "duplicate field names"))
            if table.ttl_enabled and table.ttl_attribute is None:
                issues.append(_err(f"{tpath}/ttl_attribute", "ttl_enabled requires ttl_attribute"))
            elif table.ttl_attribute is not None and table.ttl_attribute not in names:
                issues.append(
                    _err(f"{tpath}/ttl_attribute", f"ttl_attribute {table.ttl_attribute!r} is not a field")
                )
            known = set(names)
            for ri, row in enumerate(table.sampled_rows):
                extra = sorted(k for k, _ in row if k not in known)
                if extra:
                    issues.append(_err(f"{tpath}/sampled_rows/{ri}", f"unknown fields {extra}"))
    elif isinstance(res, Firewall):
        for attr in ("inbound_rules", "outbound_rules"):
            for i, rule in enumerate(getattr(res, attr)):
                rpath = f"{path}/{attr}/{i}"
                _check_cidr(rule.cidr, f"{rpath}/cidr", issues)
                if rule.port_range != "all":
                    low, high = rule.port_range  # type: ignore[misc]
                    if not (0 <= low <= high <= 65535):
                        issues.append(_err(f"{rpath}/port_range", f"invalid port range {low}-{high}"))
    elif isinstance(res, LoadBalancer):
        if not res.listeners:
            issues.append(_err(f"{path}/listeners", "load balancer needs at least one listener"))
        for i, listener in enumerate(res.listeners):
            for attr in ("frontend_port", "backend_port"):
                port = getattr(listener, attr)
                if not 1 <= port <= 65535:
                    issues.append(_err(f"{path}/listeners/{i}/{attr}", f"port {port} outside 1-65535"))
    elif isinstance(res, CloudStorage):
        for attr in ("read_grants", "write_grants"):
            for i, grant in enumerate(getattr(res, attr)):
                scoped = grant.grantee in (Grantee.ACCOUNT, Grantee.PRINCIPAL)
                if scoped and not grant.principal_id:
                    issues.append(_err(f"{path}/{attr}/{i}", f"{grant.grantee.value} grant needs principal_id"))
                elif not scoped and grant.principal_id is not None:
                    issues.append(
                        _err(f"{path}/{attr}/{i}", f"{grant.grantee.value} grant must not carry principal_id")
                    )
    elif isinstance(res, AccessPolicy):
        if not res.statements:
            issues.append(_err(f"{path}/statements", "policy needs at least one statement"))
        for i, st in enumerate(res.statements):
            if not st.actions:
                issues.append(_err(f"{path}/statements/{i}/actions", "actions must be non-empty"))
            if not st.resources:
                issues.append(_err(f"{path}/statements/{i}/resources", "resources must be non-empty"))
    elif isinstance(res, Router):
        for i, route in enumerate(res.routes):
            _check_cidr(route.destination_cidr, f"{path}/routes/{i}/destination_cidr", issues)


def validate_snapshot(snapshot: Snapshot, now: Optional[datetime] = None) -> list[ValidationIssue]:
    """All consistency issues, errors first, then by path."""
    issues: list[ValidationIssue] = []
    if snapshot.schema_version not in KNOWN_SCHEMA_VERSIONS:
        issues.append(_err("/schema_version", f"unknown schema_version {snapshot.schema_version!r}"))
    now = now or datetime.now(timezone.utc)
    if snapshot.generated_at - now > CLOCK_SKEW:
        issues.append(_err("/generated_at", "generated_at is more than 24h in the future"))

    ids: dict[tuple[str, ResourceKind], set[str]] = {}
    for i, res in enumerate(snapshot.resources):
        bucket = ids.setdefault((res.ref.region, res.ref.kind), set())
        if res.ref.id in bucket:
            issues.append(
                _err(f"/resources/{i}/id", f"duplicate id {res.ref.id!r} for {res.ref.kind.value} in {res.ref.region!r}")
            )
        bucket.add(res.ref.id)
    for i, res in enumerate(snapshot.resources):
        _check_resource(res, f"/resources/{i}", ids, issues)
    return sorted(issues, key=_path_key)


# ---------------------------------------------------------------------------
# inventory collection


class ProviderClient(Protocol):
    provider_id: str

    def list_resources(
        self, kind: ResourceKind, region: str, page_token: Optional[str]
    ) -> tuple[list[Resource], Optional[str]]: ...

    def sample_rows(self, database_id: str, table_name: str, limit: int) -> list[dict[str, str]]: ...


def _list_all(client: ProviderClient, kind: ResourceKind, region: str) -> list[Resource]:
    out: list[Resource] = []
    token: Optional[str] = None
    seen: set[str] = set()
    while True:
        try:
            page, token = client.list_resources(kind, region, token)
        except Exception as exc:
            raise InventoryError(f"listing {kind.value} in {region} failed: {exc}") from exc
        out.extend(page)
        if token is None:
            return out
        if token in seen:
            raise InventoryError(f"pagination loop listing {kind.value} in {region}: token {token!r} repeated")
        seen.add(token)


def _with_samples(client: ProviderClient, db: Database, cap: int) -> Database:
    tables = []
    for table in db.tables:
        try:
            rows = client.sample_rows(db.ref.id, table.name, cap)
        except Exception as exc:
            raise InventoryError(
                f"sampling {db.ref.id}/{table.name} in {db.ref.region} failed: {exc}"
            ) from exc
        sampled = tuple(make_row(r) for r in rows[:cap])
        tables.append(Table(table.name, table.fields, table.ttl_enabled, table.ttl_attribute, sampled))
    return Database(db.ref, db.encrypted, tuple(tables))


def fetch_inventory(
    client: ProviderClient,
    regions: Sequence[str],
    sampling_cap: int = DEFAULT_SAMPLING_CAP,
    max_workers: int = 4,
    now: Optional[datetime] = None,
) -> Snapshot:
    """Assemble a snapshot from every page of every (kind, region) listing."""
    if not regions:
        raise ValueError("at least one region is required")
    if sampling_cap < 1:
        raise ValueError("sampling_cap must be positive")
    jobs = [(kind, region) for region in regions for kind in ResourceKind]

    def run(job: tuple[ResourceKind, str]) -> list[Resource]:
        kind, region = job
        listed = _list_all(client, kind, region)
        if kind is ResourceKind.DATABASE:
            listed = [_with_samples(client, db, sampling_cap) for db in listed]  # type: ignore[arg-type]
        log.debug("listed %d %s in %s", len(listed), kind.value, region)
        return listed

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        batches = list(pool.map(run, jobs))
    resources = sorted((r for batch in batches for r in batch), key=resource_sort_key)
    return Snapshot(
        schema_version=SCHEMA_VERSION,
        provider_id=getattr(client, "provider_id", "unknown"),
        generated_at=now or datetime.now(timezone.utc),
        resources=tuple(resources),
    )


_KIND_FILE = re.compile(r"^([a-z_]+)\.json$")


class FixtureClient:
    """Serves resources from memory (or a fixture directory) in fixed-size pages.

    Directory layout: one ``<kind>.json`` file per resource kind holding an
    array of resource objects in snapshot format, plus an optional
    ``rows.json`` mapping ``database_id -> table_name -> [row, ...]``.
    """

    def __init__(
        self,
        resources: Iterable[Resource] = (),
        rows: Optional[dict[str, dict[str, list[dict[str, str]]]]] = None,
        page_size: int = 50,
        provider_id: str = "fixture",
    ):
        if page_size < 1:
            raise ValueError("page_size must be positive")
        self.provider_id = provider_id
        self.page_size = page_size
        self.rows = rows or {}
        self._by_key: dict[tuple[ResourceKind, str], list[Resource]] = {}
        for r in resources:
            self._by_key.setdefault((r.ref.kind, r.ref.region), []).append(r)

    @classmethod
    def from_directory(cls, path: str | Path, page_size: int = 50, provider_id: str = "fixture") -> "FixtureClient":
        root = Path(path)
        resources: list[Resource] = []
        for file in sorted(root.glob("*.json")):
            m = _KIND_FILE.match(file.name)
            if not m or m.group(1) == "rows":
                continue
            try:
                kind = ResourceKind(m.group(1))
            except ValueError:
                raise SnapshotError(f"{file.name}: not a resource kind") from None
            items = json.loads(file.read_bytes())
            if not isinstance(items, list):
                raise SnapshotError(f"{file.name}: expected an array of resources")
            for i, item in enumerate(items):
                if isinstance(item, dict):
                    item = {"kind": kind.value, **item}
                res = _resource(_Doc(item, f"{file.name}/{i}"))
                if res.ref.kind is not kind:
                    raise SnapshotError(f"{file.name}/{i}: kind {res.ref.kind.value} in {kind.value} file")
                resources.append(res)
        rows_file = root / "rows.json"
        rows = json.loads(rows_file.read_bytes()) if rows_file.exists() else {}
        return cls(resources, rows=rows, page_size=page_size, provider_id=provider_id)

    def regions(self) -> list[str]:
        return sorted({region for _, region in self._by_key})

    def list_resources(
        self, kind: ResourceKind, region: str, page_token: Optional[str]
    ) -> tuple[list[Resource], Optional[str]]:
        items = self._by_key.get((kind, region), [])
        start = int(page_token) if page_token else 0
        end = start + self.page_size
        return items[start:end], (str(end) if end < len(items) else None)

    def sample_rows(self, database_id: str, table_name: str, limit: int) -> list[dict[str, str]]:
        return list(self.rows.get(database_id, {}).get(table_name, []))[:limit]
