"""Regenerate the JSON fixtures under tests/fixtures/.

    python scripts/build_fixtures.py

small.json     census fixture: 11 load balancers (3 http-only) among 8 kinds
planted.json   one known instance of each planted violation
clean.json     a snapshot with no exposures under the default catalog
inventory/     per-kind documents served by FixtureClient
"""

from __future__ import annotations

import json
from pathlib import Path

from gdprscan.ingest import resource_to_dict, serialize_snapshot
from gdprscan.model import (
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
    ListenerProtocol as LP,
    LoadBalancer,
    PolicyStatement,
    Protocol,
    ResourceKind as K,
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
from gdprscan.synth import FIXED_TIME

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def ref(kind, rid, region="eu-1", name=None):
    return ResourceRef(region, kind, rid, name)


def fields(*names):
    return tuple(FieldDescriptor(n, "string") for n in names)


def inbound(proto, ports, cidr):
    return FirewallRule(proto, ports, cidr, Direction.INBOUND)


def outbound(proto, ports, cidr):
    return FirewallRule(proto, ports, cidr, Direction.OUTBOUND)


def listener(front, back, fport=443, bport=443):
    return Listener(front, fport, back, bport)


def ttl_table(name, *names):
    return Table(name, fields(*names, "expires_at"), True, "expires_at")


def compliant_base(region="eu-1"):
    """Resources that satisfy every rule."""
    return [
        Server(ref(K.SERVER, "srv-ok", region), ServerState.RUNNING, "web", ("fw-ok",), ("vol-ok",)),
        ServerStorage(ref(K.SERVER_STORAGE, "vol-ok", region), True, "srv-ok"),
        Firewall(
            ref(K.FIREWALL, "fw-ok", region),
            (inbound(Protocol.TCP, (22, 22), "10.0.0.0/8"), inbound(Protocol.TCP, (443, 443), "192.168.0.0/16")),
            (outbound(Protocol.TCP, (443, 443), "10.0.0.0/8"),),
        ),
        Database(ref(K.DATABASE, "db-ok", region), True, (ttl_table("orders", "order_id", "total"),)),
        CloudStorage(ref(K.CLOUD_STORAGE, "cs-ok", region), True, (AccessGrant(Grantee.PRINCIPAL, "role/app"),), ()),
        AccessPolicy(
            ref(K.ACCESS_POLICY, "pol-ok", region),
            (PolicyStatement(Effect.ALLOW, ("storage:read",), ("bucket/a",)),),
        ),
        Router(ref(K.ROUTER, "rt-ok", region), (Route("10.0.0.0/16", RouteTarget.INTERNAL), Route("0.0.0.0/0", RouteTarget.NAT))),
        LoadBalancer(ref(K.LOAD_BALANCER, "lb-ok", region), (listener(LP.HTTPS, LP.HTTPS),)),
    ]


def small() -> Snapshot:
    res = [r for r in compliant_base() if r.ref.kind is not K.LOAD_BALANCER]
    res += compliant_base("us-1")[:3]
    lbs = []
    for i in range(11):
        region = "eu-1" if i % 2 else "us-1"
        if i < 3:
            ls = (listener(LP.HTTP, LP.HTTP, 80, 80),)
        elif i < 6:
            ls = (listener(LP.HTTP, LP.HTTP, 80, 80), listener(LP.HTTPS, LP.HTTP, 443, 80))
        else:
            ls = (listener(LP.HTTPS, LP.HTTPS), listener(LP.TLS, LP.TLS, 8443, 8443))
        lbs.append(LoadBalancer(ref(K.LOAD_BALANCER, f"lb-{i + 1:02d}", region, f"edge-{i + 1}"), ls))
    return Snapshot(SCHEMA_VERSION, "fixture-small", FIXED_TIME, tuple(res + lbs))


def planted() -> Snapshot:
    res = [
        Database(ref(K.DATABASE, "db-1"), False, (ttl_table("orders", "order_id", "total"),)),
        Database(
            ref(K.DATABASE, "db-2"),
            False,
            (Table("events", fields("event_type", "payload"), False, None, (make_row({"event_type": "click"}),)),),
        ),
        Database(ref(K.DATABASE, "db-3"), False, ()),
        Database(
            ref(K.DATABASE, "db-4", name="accounts"),
            True,
            (
                Table(
                    "users",
                    fields("user_id", "email", "expires_at"),
                    True,
                    "expires_at",
                    (make_row({"user_id": "u-1", "email": "carol@example.com", "expires_at": "never"}),),
                ),
                Table("audit", fields("action", "actor_ref"), False),
            ),
        ),
        Server(ref(K.SERVER, "srv-1"), ServerState.RUNNING, "web", ("fw-1",), ("vol-1",)),
        Server(ref(K.SERVER, "srv-2"), ServerState.STOPPED, None, ("fw-1",)),
        ServerStorage(ref(K.SERVER_STORAGE, "vol-1"), True, "srv-1"),
        Firewall(
            ref(K.FIREWALL, "fw-1"),
            (inbound(Protocol.TCP, (80, 80), "0.0.0.0/0"), inbound(Protocol.TCP, (22, 22), "10.0.0.0/8")),
            (outbound(Protocol.TCP, (443, 443), "10.0.0.0/8"),),
        ),
        Firewall(ref(K.FIREWALL, "fw-2", "us-1"), (inbound(Protocol.TCP, (80, 80), "::/0"),), ()),
        LoadBalancer(ref(K.LOAD_BALANCER, "lb-1"), (listener(LP.HTTPS, LP.HTTPS),)),
        LoadBalancer(ref(K.LOAD_BALANCER, "lb-2"), (listener(LP.HTTP, LP.HTTP, 80, 80),)),
        LoadBalancer(
            ref(K.LOAD_BALANCER, "lb-3", "us-1"),
            (listener(LP.HTTP, LP.HTTP, 80, 80), listener(LP.HTTPS, LP.HTTPS)),
        ),
        AccessPolicy(ref(K.ACCESS_POLICY, "pol-1"), (PolicyStatement(Effect.ALLOW, ("*",), ("*",)),)),
        AccessPolicy(ref(K.ACCESS_POLICY, "pol-2"), (PolicyStatement(Effect.ALLOW, ("storage:read",), ("bucket/a",)),)),
        CloudStorage(ref(K.CLOUD_STORAGE, "cs-1"), True, (AccessGrant(Grantee.PRINCIPAL, "role/app"),), ()),
        Router(ref(K.ROUTER, "rt-1"), (Route("0.0.0.0/0", RouteTarget.NAT), Route("10.0.0.0/16", RouteTarget.INTERNAL))),
    ]
    return Snapshot(SCHEMA_VERSION, "fixture-planted", FIXED_TIME, tuple(res))


def clean() -> Snapshot:
    return Snapshot(SCHEMA_VERSION, "fixture-clean", FIXED_TIME, tuple(compliant_base()))


def inventory(root: Path) -> None:
    root.mkdir(parents=True, exist_ok=True)
    by_kind: dict[str, list] = {}
    for r in compliant_base("eu-1") + compliant_base("us-1"):
        doc = resource_to_dict(r)
        by_kind.setdefault(doc.pop("kind"), []).append(doc)
    for kind, docs in by_kind.items():
        (root / f"{kind}.json").write_text(json.dumps(docs, indent=2) + "\n")
    rows = {
        "db-ok": {
            "orders": [{"order_id": f"o-{i}", "total": str(i * 3)} for i in range(250)],
        }
    }
    (root / "rows.json").write_text(json.dumps(rows, indent=2) + "\n")


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    for name, build in (("small", small), ("planted", planted), ("clean", clean)):
        (OUT / f"{name}.json").write_bytes(serialize_snapshot(build()))
    inventory(OUT / "inventory")
    print(f"fixtures written to {OUT}")


if __name__ == "__main__":
    main()
