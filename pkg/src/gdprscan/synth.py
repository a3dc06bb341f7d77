"""Seeded random snapshots for property tests and benchmarks.

Field names and cell values are drawn from small fixed vocabularies so
test oracles can label them by hand instead of re-running the classifier.
"""

from __future__ import annotations

import random
from datetime import datetime, timezone
from typing import Optional

from gdprscan.model import (
    SCHEMA_VERSION,
    AccessGrant,
    AccessPolicy,
    AllowlistEntry,
    CloudStorage,
    Database,
    DataPolicy,
    Direction,
    Effect,
    FieldDescriptor,
    Firewall,
    FirewallRule,
    Grantee,
    Listener,
    ListenerProtocol,
    LoadBalancer,
    PiiCategory,
    PolicyStatement,
    Protocol,
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
    make_row,
)

REGIONS = ("eu-1", "us-1", "ap-1")
FIXED_TIME = datetime(2024, 1, 15, 12, 0, tzinfo=timezone.utc)

FIELD_NAMES = (
    "email", "EmailAddress", "user_email", "phone_number", "mobile", "first_name",
    "lastName", "street_address", "zip_code", "lat", "longitude", "ip_address",
    "device_id", "imei", "ssn", "date_of_birth", "dob",
    "order_total", "created_at", "status", "sku", "record_count", "quantity",
    "notes", "contact", "ref_code",
)

CELL_VALUES = (
    "alice@example.com", "bob@x.org", "10.0.0.1", "192.168.1.10",
    "+1 555 123 4567", "(020) 7946-0958", "1985-03-14", "1990-12-01",
    "pending", "42", "hello world", "256.1.1.1", "ABC-123", "n/a",
)

PORT_CHOICES = ((22, 22), (80, 80), (443, 443), (0, 1024), (20, 25), "all", (8080, 8080), (23, 23))
CIDRS = ("0.0.0.0/0", "::/0", "10.0.0.0/8", "192.168.1.0/24", "2001:db8::/32")
ACTIONS = ("*", "storage:*", "storage:read", "compute:start", "db:query", "iam:*")
POLICY_RESOURCES = ("*", "bucket/a", "table/users", "vm/*")


def _maybe(rng: random.Random, p: float = 0.5) -> bool:
    return rng.random() < p


def random_table(rng: random.Random, name: str, max_rows: int = 4) -> Table:
    names = rng.sample(FIELD_NAMES, rng.randint(0, 4))
    ttl = _maybe(rng)
    if ttl:
        names.append("expires_at")
    fields = tuple(FieldDescriptor(n, "string") for n in names)
    rows = []
    for _ in range(rng.randint(0, max_rows) if names else 0):
        cols = rng.sample(names, rng.randint(1, len(names)))
        rows.append(make_row({c: rng.choice(CELL_VALUES) for c in cols}))
    return Table(name, fields, ttl, "expires_at" if ttl else None, tuple(rows))


def _firewall_rule(rng: random.Random, direction: Direction) -> FirewallRule:
    return FirewallRule(rng.choice(list(Protocol)), rng.choice(PORT_CHOICES), rng.choice(CIDRS), direction)


def _grant(rng: random.Random) -> AccessGrant:
    g = rng.choice(list(Grantee))
    return AccessGrant(g, f"acct-{rng.randint(1, 9)}" if g in (Grantee.ACCOUNT, Grantee.PRINCIPAL) else None)


def random_resource(rng: random.Random, ref: ResourceRef, ids: dict) -> object:
    """One resource of ``ref.kind``; ``ids`` maps (region, kind) to ids already issued."""

    def pick(kind: ResourceKind, k: int) -> tuple[str, ...]:
        pool = sorted(ids.get((ref.region, kind), ())) + ["missing-1"]
        return tuple(rng.sample(pool, min(k, len(pool))))

    kind = ref.kind
    if kind is ResourceKind.SERVER:
        return Server(
            ref,
            rng.choice(list(ServerState)),
            rng.choice([None, "", "  ", "ingest", "web"]),
            pick(ResourceKind.FIREWALL, rng.randint(0, 2)),
            pick(ResourceKind.SERVER_STORAGE, rng.randint(0, 1)),
        )
    if kind is ResourceKind.SERVER_STORAGE:
        attached = pick(ResourceKind.SERVER, 1) if _maybe(rng) else ()
        return ServerStorage(ref, _maybe(rng), attached[0] if attached else None, rng.choice([None, "", "backup"]))
    if kind is ResourceKind.DATABASE:
        tables = tuple(random_table(rng, f"t{i}") for i in range(rng.randint(0, 3)))
        return Database(ref, _maybe(rng), tables)
    if kind is ResourceKind.FIREWALL:
        return Firewall(
            ref,
            tuple(_firewall_rule(rng, Direction.INBOUND) for _ in range(rng.randint(0, 3))),
            tuple(_firewall_rule(rng, Direction.OUTBOUND) for _ in range(rng.randint(0, 2))),
        )
    if kind is ResourceKind.LOAD_BALANCER:
        return LoadBalancer(
            ref,
            tuple(
                Listener(rng.choice(list(ListenerProtocol)), rng.choice([80, 443, 8443]),
                         rng.choice(list(ListenerProtocol)), rng.choice([80, 8080, 443]))
                for _ in range(rng.randint(1, 3))
            ),
        )
    if kind is ResourceKind.CLOUD_STORAGE:
        return CloudStorage(
            ref,
            _maybe(rng),
            tuple(_grant(rng) for _ in range(rng.randint(0, 2))),
            tuple(_grant(rng) for _ in range(rng.randint(0, 2))),
        )
    if kind is ResourceKind.ACCESS_POLICY:
        return AccessPolicy(
            ref,
            tuple(
                PolicyStatement(
                    rng.choice(list(Effect)),
                    tuple(rng.sample(ACTIONS, rng.randint(1, 2))),
                    tuple(rng.sample(POLICY_RESOURCES, rng.randint(1, 2))),
                )
                for _ in range(rng.randint(1, 3))
            ),
        )
    return Router(
        ref,
        tuple(Route(rng.choice(CIDRS), rng.choice(list(RouteTarget))) for _ in range(rng.randint(0, 3))),
    )


def random_snapshot(
    rng: random.Random,
    n_resources: Optional[int] = None,
    max_resources: int = 20,
    generated_at: datetime = FIXED_TIME,
) -> Snapshot:
    n = rng.randint(0, max_resources) if n_resources is None else n_resources
    kinds = list(ResourceKind)
    ids: dict[tuple[str, ResourceKind], set[str]] = {}
    refs = []
    for i in range(n):
        region, kind = rng.choice(REGIONS), rng.choice(kinds)
        rid = f"{kind.value[:3]}-{i}"
        ids.setdefault((region, kind), set()).add(rid)
        refs.append(ResourceRef(region, kind, rid, rng.choice([None, f"name-{i}"])))
    resources = tuple(random_resource(rng, ref, ids) for ref in refs)
    return Snapshot(SCHEMA_VERSION, "synthetic", generated_at, resources)  # type: ignore[arg-type]


def random_policy(rng: random.Random, snapshot: Snapshot) -> DataPolicy:
    permitted = frozenset(c for c in PiiCategory if _maybe(rng, 0.2))
    candidates = [
        AllowlistEntry(r.ref.id, t.name, f.name)
        for r in snapshot.resources
        if isinstance(r, Database)
        for t in r.tables
        for f in t.fields
    ]
    allow = frozenset(c for c in candidates if _maybe(rng, 0.2))
    return DataPolicy(permitted, allow)
