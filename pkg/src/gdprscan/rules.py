"""Rule catalog and the integrity/confidentiality and storage-limitation evaluators.

Every evaluator is a pure function from one resource to a list of
exposures. Exposures are emitted per offending sub-element (firewall
rule, listener, grant, statement, route, table); a resource-level check
emits at most one exposure.

Classification tables
---------------------
Secure load-balancer protocols: ``https``, ``tls``. Everything else
(``http``, plain ``tcp``) is unencrypted.

Insecure firewall services (R7): tcp/21 (ftp), tcp/23 (telnet),
tcp/25 (smtp without TLS), tcp/80 (http), and any rule allowing all
protocols. A tcp rule is insecure when its port range covers one of
those ports. ssh (tcp/22) counts as secure transport.

Reliable source: any CIDR except a zero-length prefix (0.0.0.0/0, ::/0).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import Iterable, Mapping

from gdprscan.model import (
    AccessPolicy,
    CloudStorage,
    Database,
    Direction,
    Effect,
    Exposure,
    Firewall,
    FirewallRule,
    Grantee,
    ListenerProtocol,
    LoadBalancer,
    Principle,
    Protocol,
    Router,
    RouteTarget,
    RuleId,
    Server,
    ServerState,
    ServerStorage,
    is_catch_all,
)

TITLES: dict[RuleId, str] = {
    RuleId.R1: "A database must be encrypted",
    RuleId.R2: "Each server must exist with a purpose",
    RuleId.R3: "Each server without purpose must be removed",
    RuleId.R4: "Each server must have a corresponding cloud firewall",
    RuleId.R5: "Each server storage must be encrypted",
    RuleId.R6: "Each server storage must exist for a purpose",
    RuleId.R7: "Each cloud firewall must use secure protocols inbound and outbound",
    RuleId.R8: "Each cloud firewall must limit access to reliable sources",
    RuleId.R9: "Each cloud firewall must limit outbound communication to reliable sources",
    RuleId.R10: "Each load balancer must use end to end encryption",
    RuleId.R11: "Each load balancer must use secure protocols",
    RuleId.R12: "Each cloud storage resource must be encrypted",
    RuleId.R13: "Each cloud storage resource must limit access to reliable sources",
    RuleId.R14: "Each cloud storage resource must limit modification and deletion to reliable sources",
    RuleId.R15: "Each access management resource must not grant unconditional permissions",
    RuleId.R16: "Each access management resource must not grant permissions to unconditional resources",
    RuleId.R17: "Each router must limit outbound communication to reliable sources",
    RuleId.R18: (
        "Each database must not collect personal data types outside an "
        "organization's data collection purpose"
    ),
    RuleId.R19: "Each database tuple must not live indefinitely",
}

SECURE_LISTENER_PROTOCOLS = frozenset({ListenerProtocol.HTTPS, ListenerProtocol.TLS})

INSECURE_TCP_PORTS: dict[int, str] = {21: "ftp", 23: "telnet", 25: "smtp", 80: "http"}

OPEN_GRANTEES = frozenset({Grantee.PUBLIC, Grantee.ANY_AUTHENTICATED})


@dataclass(frozen=True)
class CatalogEntry:
    rule_id: RuleId
    principle: Principle
    title: str
    enabled: bool = True


class RuleCatalog:
    """The 19 rules with their principle, title and enabled flag."""

    def __init__(self, entries: Mapping[RuleId, CatalogEntry]):
        missing = set(RuleId) - set(entries)
        if missing:
            raise ValueError(f"catalog is missing {sorted(m.value for m in missing)}")
        for rid, entry in entries.items():
            if entry.rule_id is not rid or entry.principle is not rid.principle:
                raise ValueError(f"inconsistent catalog entry for {rid.value}")
        self.entries = {rid: entries[rid] for rid in sorted(entries, key=lambda r: r.number)}

    @classmethod
    def default(cls) -> "RuleCatalog":
        return cls({rid: CatalogEntry(rid, rid.principle, TITLES[rid]) for rid in RuleId})

    def __iter__(self):
        return iter(self.entries.values())

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, RuleCatalog) and self.entries == other.entries

    def is_enabled(self, rule_id: RuleId) -> bool:
        return self.entries[rule_id].enabled

    @property
    def enabled_ids(self) -> frozenset[RuleId]:
        return frozenset(rid for rid, e in self.entries.items() if e.enabled)

    def with_disabled(self, rule_ids: Iterable[RuleId | str]) -> "RuleCatalog":
        off = {RuleId(r) for r in rule_ids}
        return RuleCatalog(
            {rid: replace(e, enabled=e.enabled and rid not in off) for rid, e in self.entries.items()}
        )

    def to_list(self) -> list[dict]:
        return [
            {"rule_id": e.rule_id.value, "principle": e.principle.value, "title": e.title, "enabled": e.enabled}
            for e in self
        ]

    def to_json(self) -> str:
        return json.dumps(self.to_list(), indent=2) + "\n"

    @classmethod
    def from_list(cls, items: list[dict]) -> "RuleCatalog":
        entries = {}
        for item in items:
            rid = RuleId(item["rule_id"])
            if rid in entries:
                raise ValueError(f"duplicate catalog entry {rid.value}")
            entries[rid] = CatalogEntry(rid, Principle(item["principle"]), item["title"], bool(item["enabled"]))
        return cls(entries)

    @classmethod
    def from_json(cls, text: str | bytes) -> "RuleCatalog":
        return cls.from_list(json.loads(text))


def _unique(exposures: list[Exposure]) -> list[Exposure]:
    """Suffix repeated discriminators (``#2``, ``#3``...) so fingerprints stay distinct."""
    counts: dict[tuple[RuleId, str], int] = {}
    out = []
    for e in exposures:
        key = (e.rule_id, e.discriminator)
        n = counts.get(key, 0) + 1
        counts[key] = n
        if n > 1:
            e = Exposure.create(e.rule_id, e.resource, f"{e.detail} (occurrence {n})", f"{e.discriminator}#{n}")
        out.append(e)
    return out


def _label(ref) -> str:
    return f"{ref.id} ({ref.name})" if ref.name else ref.id


def _no_purpose(tag) -> bool:
    return tag is None or not tag.strip()


def eval_database_ic(db: Database) -> list[Exposure]:
    if db.encrypted:
        return []
    return [Exposure.create(RuleId.R1, db.ref, f"database {_label(db.ref)} is not encrypted")]


def eval_server(server: Server) -> list[Exposure]:
    ref, out = server.ref, []
    if _no_purpose(server.purpose_tag):
        out.append(Exposure.create(RuleId.R2, ref, f"server {_label(ref)} has no purpose tag"))
        if server.state is ServerState.STOPPED:
            out.append(
                Exposure.create(
                    RuleId.R3, ref, f"stopped server {_label(ref)} has no purpose; candidate for removal"
                )
            )
    if not server.attached_firewall_ids:
        out.append(Exposure.create(RuleId.R4, ref, f"server {_label(ref)} has no attached firewall"))
    return out


def eval_server_storage(vol: ServerStorage) -> list[Exposure]:
    ref, out = vol.ref, []
    if not vol.encrypted:
        out.append(Exposure.create(RuleId.R5, ref, f"server storage {_label(ref)} is not encrypted"))
    if _no_purpose(vol.purpose_tag) and vol.attached_server_id is None:
        out.append(
            Exposure.create(RuleId.R6, ref, f"server storage {_label(ref)} is unattached and has no purpose tag")
        )
    return out


def insecure_service(rule: FirewallRule) -> str | None:
    """Name of the insecure service a rule allows, or None."""
    if rule.protocol is Protocol.ALL:
        return "all protocols"
    if rule.protocol is Protocol.TCP:
        low, high = rule.ports
        for port, service in INSECURE_TCP_PORTS.items():
            if low <= port <= high:
                return f"{service} (tcp/{port})"
    return None


def _rule_tuple(rule: FirewallRule) -> str:
    return f"{rule.direction.value}:{rule.protocol.value}:{rule.port_label()}:{rule.cidr}"


def _rule_text(rule: FirewallRule) -> str:
    return f"{rule.direction.value} {rule.protocol.value}/{rule.port_label()} {rule.cidr}"


def eval_firewall(fw: Firewall) -> list[Exposure]:
    ref, out = fw.ref, []
    for rule in fw.inbound_rules + fw.outbound_rules:
        key, text = _rule_tuple(rule), _rule_text(rule)
        service = insecure_service(rule)
        if service is not None:
            out.append(Exposure.create(RuleId.R7, ref, f"rule {text} allows insecure {service}", key))
        if is_catch_all(rule.cidr):
            if rule.direction is Direction.INBOUND:
                out.append(Exposure.create(RuleId.R8, ref, f"rule {text} accepts traffic from any source", key))
            else:
                out.append(Exposure.create(RuleId.R9, ref, f"rule {text} allows egress to any destination", key))
    return _unique(out)


def eval_load_balancer(lb: LoadBalancer) -> list[Exposure]:
    ref, out = lb.ref, []
    for l in lb.listeners:
        if not (l.frontend_protocol in SECURE_LISTENER_PROTOCOLS and l.backend_protocol in SECURE_LISTENER_PROTOCOLS):
            key = f"{l.frontend_protocol.value}:{l.frontend_port}->{l.backend_protocol.value}:{l.backend_port}"
            out.append(
                Exposure.create(
                    RuleId.R10,
                    ref,
                    f"listener {l.frontend_protocol.value}:{l.frontend_port} -> "
                    f"{l.backend_protocol.value}:{l.backend_port} is not encrypted end to end",
                    key,
                )
            )
    # Mixed http+https balancers satisfy R11; only all-insecure frontends fail it.
    if lb.listeners and not any(l.frontend_protocol in SECURE_LISTENER_PROTOCOLS for l in lb.listeners):
        out.append(Exposure.create(RuleId.R11, ref, f"load balancer {_label(ref)} has no secure listener"))
    return _unique(out)


def eval_cloud_storage(cs: CloudStorage) -> list[Exposure]:
    ref, out = cs.ref, []
    if not cs.encrypted:
        out.append(Exposure.create(RuleId.R12, ref, f"cloud storage {_label(ref)} is not encrypted"))
    for rule_id, access, grants in (
        (RuleId.R13, "read", cs.read_grants),
        (RuleId.R14, "write", cs.write_grants),
    ):
        for g in grants:
            if g.grantee in OPEN_GRANTEES:
                out.append(
                    Exposure.create(rule_id, ref, f"{access} access granted to {g.grantee.value}", f"{access}:{g.grantee.value}")
                )
    return _unique(out)


def _is_unconditional_action(action: str) -> bool:
    return action == "*" or action.endswith(":*")


def eval_access_policy(ap: AccessPolicy) -> list[Exposure]:
    ref, out = ap.ref, []
    for i, st in enumerate(ap.statements):
        if st.effect is not Effect.ALLOW:
            continue
        wild_actions = sorted({a for a in st.actions if _is_unconditional_action(a)})
        if wild_actions:
            out.append(
                Exposure.create(
                    RuleId.R15, ref, f"statement {i} allows unconditional actions {', '.join(wild_actions)}", f"statement:{i}"
                )
            )
        if "*" in st.resources:
            out.append(Exposure.create(RuleId.R16, ref, f"statement {i} applies to all resources (*)", f"statement:{i}"))
    return out


def eval_router(rt: Router) -> list[Exposure]:
    ref, out = rt.ref, []
    for route in rt.routes:
        if route.target is RouteTarget.INTERNET_GATEWAY and is_catch_all(route.destination_cidr):
            out.append(
                Exposure.create(
                    RuleId.R17,
                    ref,
                    f"route {route.destination_cidr} sends traffic directly to an internet gateway",
                    f"{route.destination_cidr}->{route.target.value}",
                )
            )
    return _unique(out)


def eval_storage_limitation(db: Database) -> list[Exposure]:
    return [
        Exposure.create(RuleId.R19, db.ref, f"table {db.ref.id}/{t.name} has no TTL; rows live indefinitely", t.name)
        for t in db.tables
        if not t.ttl_enabled
    ]
