"""Domain types shared by ingest, rules, engine and report.

Everything here is immutable and I/O free. Cross-field consistency
(duplicate ids, dangling references, TTL attributes, CIDR syntax) is
checked by :func:`gdprscan.ingest.validate_snapshot`, not by the
constructors, so that a malformed snapshot can still be loaded and
reported on.
"""

from __future__ import annotations

import hashlib
import ipaddress
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Optional, Union

SCHEMA_VERSION = "1"
KNOWN_SCHEMA_VERSIONS = frozenset({"1"})


class ResourceKind(str, Enum):
    SERVER = "server"
    SERVER_STORAGE = "server_storage"
    DATABASE = "database"
    FIREWALL = "firewall"
    LOAD_BALANCER = "load_balancer"
    CLOUD_STORAGE = "cloud_storage"
    ACCESS_POLICY = "access_policy"
    ROUTER = "router"


class Principle(str, Enum):
    INTEGRITY_CONFIDENTIALITY = "integrity_confidentiality"
    DATA_MINIMIZATION = "data_minimization"
    STORAGE_LIMITATION = "storage_limitation"

    @property
    def label(self) -> str:
        return self.value.replace("_", "-")


class RuleId(str, Enum):
    R1 = "R1"
    R2 = "R2"
    R3 = "R3"
    R4 = "R4"
    R5 = "R5"
    R6 = "R6"
    R7 = "R7"
    R8 = "R8"
    R9 = "R9"
    R10 = "R10"
    R11 = "R11"
    R12 = "R12"
    R13 = "R13"
    R14 = "R14"
    R15 = "R15"
    R16 = "R16"
    R17 = "R17"
    R18 = "R18"
    R19 = "R19"

    @property
    def number(self) -> int:
        return int(self.value[1:])

    @property
    def principle(self) -> Principle:
        return RULE_PRINCIPLE[self]


RULE_PRINCIPLE: dict[RuleId, Principle] = {
    **{r: Principle.INTEGRITY_CONFIDENTIALITY for r in RuleId if r.number <= 17},
    RuleId.R18: Principle.DATA_MINIMIZATION,
    RuleId.R19: Principle.STORAGE_LIMITATION,
}


class PiiCategory(str, Enum):
    EMAIL = "email"
    PERSON_NAME = "person_name"
    PHONE = "phone"
    POSTAL_ADDRESS = "postal_address"
    GEOLOCATION = "geolocation"
    IP_ADDRESS = "ip_address"
    DEVICE_ID = "device_id"
    NATIONAL_ID = "national_id"
    BIRTH_DATE = "birth_date"


class ServerState(str, Enum):
    RUNNING = "running"
    STOPPED = "stopped"


class Protocol(str, Enum):
    TCP = "tcp"
    UDP = "udp"
    ICMP = "icmp"
    ALL = "all"


class Direction(str, Enum):
    INBOUND = "inbound"
    OUTBOUND = "outbound"


class ListenerProtocol(str, Enum):
    HTTP = "http"
    HTTPS = "https"
    TCP = "tcp"
    TLS = "tls"


class Effect(str, Enum):
    ALLOW = "allow"
    DENY = "deny"


class RouteTarget(str, Enum):
    INTERNET_GATEWAY = "internet_gateway"
    NAT = "nat"
    INTERNAL = "internal"
    PEERING = "peering"


class Grantee(str, Enum):
    PUBLIC = "public"
    ANY_AUTHENTICATED = "any_authenticated"
    ACCOUNT = "account"
    PRINCIPAL = "principal"


def utc(dt: datetime) -> datetime:
    if dt.tzinfo is None:
        raise ValueError("timestamp must be timezone-aware")
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    return utc(dt).isoformat().replace("+00:00", "Z")


def parse_timestamp(text: str) -> datetime:
    if not isinstance(text, str) or not text:
        raise ValueError(f"invalid timestamp: {text!r}")
    raw = text[:-1] + "+00:00" if text.endswith(("Z", "z")) else text
    dt = datetime.fromisoformat(raw)
    if dt.tzinfo is None:
        raise ValueError(f"timestamp lacks a UTC offset: {text!r}")
    return dt.astimezone(timezone.utc)


def is_catch_all(cidr: str) -> bool:
    """True for 0.0.0.0/0, ::/0 and spellings of them (e.g. ``0.0.0.0/0.0.0.0``)."""
    try:
        return ipaddress.ip_network(cidr, strict=False).prefixlen == 0
    except ValueError:
        return False


@dataclass(frozen=True, order=True)
class ResourceRef:
    region: str
    kind: ResourceKind
    id: str
    name: Optional[str] = None

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.region, self.kind.value, self.id)


# "all" or an inclusive (low, high) pair.
PortRange = Union[str, tuple[int, int]]


@dataclass(frozen=True)
class FirewallRule:
    protocol: Protocol
    port_range: PortRange
    cidr: str
    direction: Direction

    @property
    def ports(self) -> tuple[int, int]:
        if self.port_range == "all":
            return (0, 65535)
        return self.port_range  # type: ignore[return-value]

    def port_label(self) -> str:
        if self.port_range == "all":
            return "all"
        low, high = self.port_range  # type: ignore[misc]
        return str(low) if low == high else f"{low}-{high}"


@dataclass(frozen=True)
class Listener:
    frontend_protocol: ListenerProtocol
    frontend_port: int
    backend_protocol: ListenerProtocol
    backend_port: int


@dataclass(frozen=True)
class FieldDescriptor:
    name: str
    declared_type: str


@dataclass(frozen=True)
class Table:
    name: str
    fields: tuple[FieldDescriptor, ...] = ()
    ttl_enabled: bool = False
    ttl_attribute: Optional[str] = None
    # Each row is a sorted tuple of (field, value) pairs so the table stays hashable.
    sampled_rows: tuple[tuple[tuple[str, str], ...], ...] = ()

    @property
    def field_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.fields)

    def rows(self) -> list[dict[str, str]]:
        return [dict(r) for r in self.sampled_rows]

    def column(self, field_name: str) -> list[str]:
        return [v for row in self.sampled_rows for k, v in row if k == field_name]


def make_row(mapping: dict[str, str]) -> tuple[tuple[str, str], ...]:
    return tuple(sorted(mapping.items()))


@dataclass(frozen=True)
class PolicyStatement:
    effect: Effect
    actions: tuple[str, ...]
    resources: tuple[str, ...]


@dataclass(frozen=True)
class Route:
    destination_cidr: str
    target: RouteTarget


@dataclass(frozen=True)
class AccessGrant:
    grantee: Grantee
    principal_id: Optional[str] = None


@dataclass(frozen=True)
class Server:
    ref: ResourceRef
    state: ServerState
    purpose_tag: Optional[str] = None
    attached_firewall_ids: tuple[str, ...] = ()
    attached_storage_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class ServerStorage:
    ref: ResourceRef
    encrypted: bool
    attached_server_id: Optional[str] = None
    purpose_tag: Optional[str] = None


@dataclass(frozen=True)
class Database:
    ref: ResourceRef
    encrypted: bool
    tables: tuple[Table, ...] = ()


@dataclass(frozen=True)
class Firewall:
    ref: ResourceRef
    inbound_rules: tuple[FirewallRule, ...] = ()
    outbound_rules: tuple[FirewallRule, ...] = ()


@dataclass(frozen=True)
class LoadBalancer:
    ref: ResourceRef
    listeners: tuple[Listener, ...]


@dataclass(frozen=True)
class CloudStorage:
    ref: ResourceRef
    encrypted: bool
    read_grants: tuple[AccessGrant, ...] = ()
    write_grants: tuple[AccessGrant, ...] = ()


@dataclass(frozen=True)
class AccessPolicy:
    ref: ResourceRef
    statements: tuple[PolicyStatement, ...]


@dataclass(frozen=True)
class Router:
    ref: ResourceRef
    routes: tuple[Route, ...] = ()


Resource = Union[
    Server, ServerStorage, Database, Firewall, LoadBalancer, CloudStorage, AccessPolicy, Router
]

RESOURCE_CLASSES: dict[ResourceKind, type] = {
    ResourceKind.SERVER: Server,
    ResourceKind.SERVER_STORAGE: ServerStorage,
    ResourceKind.DATABASE: Database,
    ResourceKind.FIREWALL: Firewall,
    ResourceKind.LOAD_BALANCER: LoadBalancer,
    ResourceKind.CLOUD_STORAGE: CloudStorage,
    ResourceKind.ACCESS_POLICY: AccessPolicy,
    ResourceKind.ROUTER: Router,
}


def resource_sort_key(resource: Resource) -> tuple[str, str, str]:
    return resource.ref.key


@dataclass(frozen=True)
class Snapshot:
    schema_version: str
    provider_id: str
    generated_at: datetime
    resources: tuple[Resource, ...] = ()

    def census(self) -> dict[ResourceKind, int]:
        counts: dict[ResourceKind, int] = {}
        for r in self.resources:
            counts[r.ref.kind] = counts.get(r.ref.kind, 0) + 1
        return counts

    def of_kind(self, kind: ResourceKind) -> list[Resource]:
        return [r for r in self.resources if r.ref.kind is kind]

    def canonical(self) -> "Snapshot":
        """Same snapshot with resources in (region, kind, id) order."""
        return Snapshot(
            self.schema_version,
            self.provider_id,
            self.generated_at,
            tuple(sorted(self.resources, key=resource_sort_key)),
        )


def fingerprint(
    rule_id: RuleId, resource: ResourceRef, discriminator: str
) -> str:
    """SHA-256 over ``rule_id|region|kind|id|discriminator`` (UTF-8), hex encoded.

    Frozen for schema version 1; changing it invalidates stored reports.
    """
    payload = "|".join(
        [rule_id.value, resource.region, resource.kind.value, resource.id, discriminator]
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Exposure:
    rule_id: RuleId
    principle: Principle
    resource: ResourceRef
    detail: str
    discriminator: str
    fingerprint: str

    @classmethod
    def create(
        cls, rule_id: RuleId, resource: ResourceRef, detail: str, discriminator: str = ""
    ) -> "Exposure":
        return cls(
            rule_id=rule_id,
            principle=rule_id.principle,
            resource=resource,
            detail=detail,
            discriminator=discriminator,
            fingerprint=fingerprint(rule_id, resource, discriminator),
        )

    @property
    def sort_key(self) -> tuple:
        r = self.resource
        return (self.rule_id.number, r.region, r.kind.value, r.id, self.detail, self.discriminator)


@dataclass(frozen=True)
class Summary:
    resources_scanned_by_kind: dict[ResourceKind, int] = field(default_factory=dict)
    exposures_by_kind: dict[ResourceKind, int] = field(default_factory=dict)
    exposures_by_principle: dict[Principle, int] = field(default_factory=dict)
    exposures_by_region: dict[str, int] = field(default_factory=dict)
    total_exposures: int = 0

    def is_consistent(self) -> bool:
        total = self.total_exposures
        return (
            sum(self.exposures_by_kind.values()) == total
            and sum(self.exposures_by_principle.values()) == total
            and sum(self.exposures_by_region.values()) == total
        )


class DuplicateFingerprintError(ValueError):
    pass


@dataclass(frozen=True)
class Report:
    scan_id: str
    scanned_at: datetime
    snapshot_provider: str
    exposures: tuple[Exposure, ...]
    summary: Summary
    schema_version: str = SCHEMA_VERSION

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for e in self.exposures:
            if e.fingerprint in seen:
                raise DuplicateFingerprintError(
                    f"duplicate fingerprint {e.fingerprint} ({e.rule_id.value} on {e.resource.id})"
                )
            seen.add(e.fingerprint)
        ordered = tuple(sorted(self.exposures, key=lambda e: e.sort_key))
        object.__setattr__(self, "exposures", ordered)


@dataclass(frozen=True)
class AllowlistEntry:
    database_id: str
    table_name: str
    field_name: str


@dataclass(frozen=True)
class DataPolicy:
    permitted_categories: frozenset[PiiCategory] = frozenset()
    allowlist: frozenset[AllowlistEntry] = frozenset()

    def __post_init__(self) -> None:
        for entry in self.allowlist:
            for part in (entry.database_id, entry.table_name, entry.field_name):
                if not isinstance(part, str) or not part:
                    raise ValueError(f"allowlist entry has an empty component: {entry}")
                if "*" in part:
                    raise ValueError(f"wildcards are not permitted in allowlist entries: {entry}")

    def allows(self, database_id: str, table_name: str, field_name: str) -> bool:
        return AllowlistEntry(database_id, table_name, field_name) in self.allowlist
