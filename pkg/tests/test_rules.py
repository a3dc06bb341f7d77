import random

import pytest
from hypothesis import given, strategies as st

from gdprscan.model import (
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
    RuleId,
    Server,
    ServerState,
    ServerStorage,
    Table,
)
from gdprscan.rules import (
    TITLES,
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
from gdprscan.synth import random_resource


def ref(kind, rid="x"):
    return ResourceRef("eu-1", kind, rid)


def ids(exposures):
    return [e.rule_id.value for e in exposures]


def rule(proto, ports, cidr, direction=Direction.INBOUND):
    return FirewallRule(proto, ports, cidr, direction)


def ls(front, back):
    return Listener(front, 443, back, 443)


# -- catalog ------------------------------------------------------------------


def test_catalog_is_total_and_grouped_17_1_1():
    cat = RuleCatalog.default()
    assert [e.rule_id.value for e in cat] == [f"R{i}" for i in range(1, 20)]
    groups = {}
    for e in cat:
        groups[e.principle.value] = groups.get(e.principle.value, 0) + 1
    assert groups == {"integrity_confidentiality": 17, "data_minimization": 1, "storage_limitation": 1}


def test_catalog_json_round_trip():
    cat = RuleCatalog.default().with_disabled(["R3", "R18"])
    back = RuleCatalog.from_json(cat.to_json())
    assert back == cat
    assert back.enabled_ids == frozenset(RuleId) - {RuleId.R3, RuleId.R18}


def test_catalog_rejects_partial():
    items = RuleCatalog.default().to_list()[:-1]
    with pytest.raises(ValueError, match="missing"):
        RuleCatalog.from_list(items)


def test_titles_are_unique_sentences():
    assert len(set(TITLES.values())) == 19
    assert all(t[0].isupper() and not t.endswith(".") for t in TITLES.values())


# -- databases -----------------------------------------------------------------


def test_r1():
    assert ids(eval_database_ic(Database(ref(K.DATABASE), False))) == ["R1"]
    assert eval_database_ic(Database(ref(K.DATABASE), True)) == []
    assert "x" in eval_database_ic(Database(ref(K.DATABASE), False))[0].detail


def test_r19():
    f = (FieldDescriptor("exp", "int"),)
    with_ttl = Database(ref(K.DATABASE), True, (Table("a", f, True, "exp"), Table("b", f, True, "exp")))
    assert eval_storage_limitation(with_ttl) == []
    assert eval_storage_limitation(Database(ref(K.DATABASE), True)) == []


def test_r19_forty_seven_tables():
    rng = random.Random(47)
    tables = tuple(Table(f"t{i}", ttl_enabled=False) for i in range(47))
    db = Database(ref(K.DATABASE), True, tables)
    # oracle: count tables lacking TTL
    assert len(eval_storage_limitation(db)) == sum(not t.ttl_enabled for t in tables) == 47
    mixed = tuple(Table(f"t{i}", (FieldDescriptor("e", "x"),), rng.random() < 0.5, "e") for i in range(47))
    assert len(eval_storage_limitation(Database(ref(K.DATABASE), True, mixed))) == sum(
        not t.ttl_enabled for t in mixed
    )


# -- servers -------------------------------------------------------------------


def test_compliant_server():
    s = Server(ref(K.SERVER), ServerState.RUNNING, "ingest", ("fw-1",))
    assert eval_server(s) == []


def test_stopped_server_without_purpose_or_firewall():
    s = Server(ref(K.SERVER), ServerState.STOPPED, None, ())
    got = eval_server(s)
    # oracle: the three predicates applied independently
    expected = [r for r, p in (("R2", True), ("R3", True), ("R4", True)) if p]
    assert ids(got) == expected
    assert "candidate for removal" in got[1].detail


def test_running_server_without_purpose_only_r2():
    s = Server(ref(K.SERVER), ServerState.RUNNING, None, ("fw",))
    assert ids(eval_server(s)) == ["R2"]


@pytest.mark.parametrize("tag", ["", "   "])
def test_blank_purpose_counts_as_missing(tag):
    assert ids(eval_server(Server(ref(K.SERVER), ServerState.STOPPED, tag, ("fw",)))) == ["R2", "R3"]


def test_server_storage():
    assert ids(eval_server_storage(ServerStorage(ref(K.SERVER_STORAGE), False))) == ["R5", "R6"]
    assert eval_server_storage(ServerStorage(ref(K.SERVER_STORAGE), True, "srv-1")) == []
    assert eval_server_storage(ServerStorage(ref(K.SERVER_STORAGE), True, None, "backup")) == []


# -- firewalls -----------------------------------------------------------------


def test_ssh_from_private_range_is_clean():
    fw = Firewall(ref(K.FIREWALL), (rule(Protocol.TCP, (22, 22), "10.0.0.0/8"),))
    assert eval_firewall(fw) == []


def test_http_from_anywhere_hits_r7_and_r8():
    r = rule(Protocol.TCP, (80, 80), "0.0.0.0/0")
    got = eval_firewall(Firewall(ref(K.FIREWALL), (r,)))
    assert sorted(ids(got)) == ["R7", "R8"]
    assert got[0].discriminator == got[1].discriminator == "inbound:tcp:80:0.0.0.0/0"
    for e in got:
        assert "inbound" in e.detail and "tcp/80" in e.detail and "0.0.0.0/0" in e.detail


def test_outbound_all_to_anywhere():
    r = rule(Protocol.ALL, "all", "0.0.0.0/0", Direction.OUTBOUND)
    got = eval_firewall(Firewall(ref(K.FIREWALL), (), (r,)))
    assert "R9" in ids(got)
    assert "R8" not in ids(got)


@pytest.mark.parametrize(
    "proto, ports, insecure",
    [
        (Protocol.TCP, (80, 80), True),
        (Protocol.TCP, (23, 23), True),
        (Protocol.TCP, (21, 21), True),
        (Protocol.TCP, (25, 25), True),
        (Protocol.TCP, (0, 1024), True),
        (Protocol.TCP, "all", True),
        (Protocol.TCP, (22, 22), False),
        (Protocol.TCP, (443, 443), False),
        (Protocol.UDP, (80, 80), False),
        (Protocol.ICMP, "all", False),
        (Protocol.ALL, "all", True),
    ],
)
def test_insecure_protocol_table(proto, ports, insecure):
    fw = Firewall(ref(K.FIREWALL), (rule(proto, ports, "10.0.0.0/8"),))
    assert ("R7" in ids(eval_firewall(fw))) is insecure


def test_duplicate_firewall_rules_get_distinct_fingerprints():
    r = rule(Protocol.TCP, (80, 80), "0.0.0.0/0")
    got = eval_firewall(Firewall(ref(K.FIREWALL), (r, r)))
    assert ids(got).count("R7") == 2
    assert len({e.fingerprint for e in got}) == 4


# -- load balancers ------------------------------------------------------------


def test_https_only_balancer_clean():
    assert eval_load_balancer(LoadBalancer(ref(K.LOAD_BALANCER), (ls(LP.HTTPS, LP.HTTPS),))) == []


def test_http_only_balancer():
    got = eval_load_balancer(LoadBalancer(ref(K.LOAD_BALANCER), (ls(LP.HTTP, LP.HTTP),)))
    assert ids(got) == ["R10", "R11"]


def test_mixed_balancer_exempt_from_r11():
    lb = LoadBalancer(ref(K.LOAD_BALANCER), (ls(LP.HTTP, LP.HTTP), ls(LP.HTTPS, LP.HTTPS)))
    got = eval_load_balancer(lb)
    assert ids(got) == ["R10"]
    assert got[0].detail.startswith("listener http")


def test_tls_offload_to_plain_backend_breaks_end_to_end():
    got = eval_load_balancer(LoadBalancer(ref(K.LOAD_BALANCER), (ls(LP.HTTPS, LP.HTTP),)))
    assert ids(got) == ["R10"]


# -- cloud storage -------------------------------------------------------------


def test_cloud_storage_cases():
    scoped = (AccessGrant(Grantee.PRINCIPAL, "role/a"), AccessGrant(Grantee.ACCOUNT, "123"))
    assert eval_cloud_storage(CloudStorage(ref(K.CLOUD_STORAGE), True, scoped, scoped)) == []
    public_read = CloudStorage(ref(K.CLOUD_STORAGE), True, (AccessGrant(Grantee.PUBLIC),))
    assert ids(eval_cloud_storage(public_read)) == ["R13"]
    open_write = CloudStorage(ref(K.CLOUD_STORAGE), False, (), (AccessGrant(Grantee.PUBLIC),))
    assert ids(eval_cloud_storage(open_write)) == ["R12", "R14"]
    authn = CloudStorage(ref(K.CLOUD_STORAGE), True, (AccessGrant(Grantee.ANY_AUTHENTICATED),))
    assert ids(eval_cloud_storage(authn)) == ["R13"]


# -- access policies -----------------------------------------------------------


@pytest.mark.parametrize(
    "effect, actions, resources, expected",
    [
        (Effect.ALLOW, ("storage:read",), ("bucket/a",), []),
        (Effect.ALLOW, ("*",), ("*",), ["R15", "R16"]),
        (Effect.DENY, ("*",), ("*",), []),
        (Effect.ALLOW, ("iam:*",), ("bucket/a",), ["R15"]),
        (Effect.ALLOW, ("storage:Get*",), ("vm/*",), []),
    ],
)
def test_access_policy(effect, actions, resources, expected):
    ap = AccessPolicy(ref(K.ACCESS_POLICY), (PolicyStatement(effect, actions, resources),))
    assert ids(eval_access_policy(ap)) == expected


# -- routers -------------------------------------------------------------------


@pytest.mark.parametrize(
    "cidr, target, expected",
    [
        ("10.0.0.0/16", RouteTarget.INTERNAL, []),
        ("0.0.0.0/0", RouteTarget.INTERNET_GATEWAY, ["R17"]),
        ("::/0", RouteTarget.INTERNET_GATEWAY, ["R17"]),
        ("0.0.0.0/0", RouteTarget.NAT, []),
        ("0.0.0.0/0", RouteTarget.PEERING, []),
    ],
)
def test_router(cidr, target, expected):
    assert ids(eval_router(Router(ref(K.ROUTER), (Route(cidr, target),)))) == expected


# -- properties ----------------------------------------------------------------

EVALUATORS = {
    K.SERVER: (eval_server, {"R2", "R3", "R4"}),
    K.SERVER_STORAGE: (eval_server_storage, {"R5", "R6"}),
    K.FIREWALL: (eval_firewall, {"R7", "R8", "R9"}),
    K.LOAD_BALANCER: (eval_load_balancer, {"R10", "R11"}),
    K.CLOUD_STORAGE: (eval_cloud_storage, {"R12", "R13", "R14"}),
    K.ACCESS_POLICY: (eval_access_policy, {"R15", "R16"}),
    K.ROUTER: (eval_router, {"R17"}),
}


@given(st.integers(0, 2**32 - 1), st.sampled_from(sorted(EVALUATORS, key=lambda k: k.value)))
def test_evaluators_pure_and_within_documented_rules(seed, kind):
    resource = random_resource(random.Random(seed), ResourceRef("eu-1", kind, "r"), {})
    fn, allowed = EVALUATORS[kind]
    first = fn(resource)
    assert fn(resource) == first
    assert set(ids(first)) <= allowed
    assert len({e.fingerprint for e in first}) == len(first)


@given(st.integers(0, 2**32 - 1))
def test_database_evaluators_within_documented_rules(seed):
    db = random_resource(random.Random(seed), ResourceRef("eu-1", K.DATABASE, "d"), {})
    assert set(ids(eval_database_ic(db))) <= {"R1"}
    assert set(ids(eval_storage_limitation(db))) <= {"R19"}


firewall_rules = st.builds(
    FirewallRule,
    st.sampled_from(list(Protocol)),
    st.one_of(st.just("all"), st.tuples(st.integers(0, 65535), st.integers(0, 65535)).map(lambda p: tuple(sorted(p)))),
    st.sampled_from(["0.0.0.0/0", "::/0", "10.0.0.0/8", "172.16.0.0/12"]),
    st.sampled_from(list(Direction)),
)


@given(st.lists(firewall_rules, max_size=6), firewall_rules)
def test_firewall_monotone_in_rules(existing, extra):
    inbound = tuple(r for r in existing if r.direction is Direction.INBOUND)
    outbound = tuple(r for r in existing if r.direction is Direction.OUTBOUND)
    before = {e.fingerprint for e in eval_firewall(Firewall(ref(K.FIREWALL), inbound, outbound))}
    if extra.direction is Direction.INBOUND:
        inbound += (extra,)
    else:
        outbound += (extra,)
    after = {e.fingerprint for e in eval_firewall(Firewall(ref(K.FIREWALL), inbound, outbound))}
    assert before <= after


listeners = st.builds(Listener, st.sampled_from(list(LP)), st.integers(1, 65535), st.sampled_from(list(LP)), st.integers(1, 65535))


@given(st.lists(listeners, min_size=1, max_size=4), st.builds(Listener, st.sampled_from([LP.HTTP, LP.TCP]), st.just(80), st.sampled_from(list(LP)), st.just(80)))
def test_load_balancer_r10_monotone(existing, insecure):
    before = eval_load_balancer(LoadBalancer(ref(K.LOAD_BALANCER), tuple(existing)))
    after = eval_load_balancer(LoadBalancer(ref(K.LOAD_BALANCER), tuple(existing) + (insecure,)))
    r10 = lambda xs: {e.fingerprint for e in xs if e.rule_id is RuleId.R10}
    assert r10(before) <= r10(after)
    assert len(r10(after)) == len(r10(before)) + 1
