from __future__ import annotations

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from instrseq.errors import RepliesExhausted, StateSpaceExceeded, UnboundVariable
from instrseq.services import Regs, Reply, RfdtConfig, ServiceDescription, rf_service, rfdt_service
from instrseq.threads import (
    INACTION,
    STOP,
    TAU,
    Action,
    Outcome,
    RecursiveSpec,
    Thread,
    abstract_tau,
    apply_use,
    bisim_equal,
    canonical_form,
    distinguishing_path,
    from_json,
    from_spec,
    minimize,
    parse_action,
    post,
    to_dot,
    to_json,
    to_spec,
    walk,
)
from strategies import rf_actions, threads

A = Action("a", "m")
B = Action("b", "m")


def loop(action=A):
    return from_spec(RecursiveSpec({"X": (action, "X", "X")}), "X")


# -- oracles -------------------------------------------------------------------------------

def moore_equal(t1: Thread, t2: Thread) -> bool:
    """Bisimilarity by comparing depth-bounded unfoldings, interned level by level."""
    table: dict = {}

    def level(t, prev):
        out = []
        for i, n in enumerate(t.nodes):
            key = (n.kind,) if n.kind != "A" else (n.action, prev[n.t], prev[n.f])
            out.append(table.setdefault(key, len(table)))
        return out

    a = [0] * len(t1.nodes)
    b = [0] * len(t2.nodes)
    for _ in range(len(t1.nodes) * len(t2.nodes) + 1):
        a, b = level(t1, a), level(t2, b)
    return a[t1.root] == b[t2.root]


def unfold(t: Thread, i: int, depth: int):
    if depth == 0:
        return "?"
    n = t.nodes[i]
    if n.kind != "A":
        return n.kind
    return (n.action, unfold(t, n.t, depth - 1), unfold(t, n.f, depth - 1))


def use_by_equations(t: Thread, i: int, focus: str, svc: ServiceDescription, s, depth: int):
    """Unfolding of the use operator written out case by case."""
    if depth == 0:
        return "?"
    n = t.nodes[i]
    if n.kind == "S":
        return "S"
    if n.kind == "D":
        return "D"
    a = n.action
    if a.is_tau:
        sub = use_by_equations(t, n.t, focus, svc, s, depth - 1)
        return (TAU, sub, sub)
    if a.focus != focus:
        return (a, use_by_equations(t, n.t, focus, svc, s, depth - 1),
                use_by_equations(t, n.f, focus, svc, s, depth - 1))
    reply, s2 = svc.yld(a.method, s), svc.eff(a.method, s)
    if reply is Reply.T:
        sub = use_by_equations(t, n.t, focus, svc, s2, depth - 1)
        return (TAU, sub, sub)
    if reply is Reply.F:
        sub = use_by_equations(t, n.f, focus, svc, s2, depth - 1)
        return (TAU, sub, sub)
    if reply is Reply.M:
        return (svc.act(a.method, s), use_by_equations(t, n.t, focus, svc, s2, depth - 1),
                use_by_equations(t, n.f, focus, svc, s2, depth - 1))
    return "D"


# -- construction ---------------------------------------------------------------------------

def test_from_spec_examples():
    t = loop()
    assert len(t) == 1 and t[0] == post(A, 0, 0)
    assert from_spec(RecursiveSpec({"X": "S"}), "X").nodes == (STOP,)
    t = from_spec(RecursiveSpec({"X": (A, "X", "Y"), "Y": "D"}), "X")
    assert t.nodes == (post(A, 0, 1), INACTION)


def test_from_spec_unbound():
    with pytest.raises(UnboundVariable):
        from_spec(RecursiveSpec({"X": (A, "X", "Z")}), "X")
    with pytest.raises(UnboundVariable):
        from_spec(RecursiveSpec({"X": "S"}), "Y")


def test_tau_identified_at_construction():
    t = Thread((post(TAU, 1, 2), STOP, INACTION))
    assert t[0].f == t[0].t == 1
    manual = Thread((type(t[0])("A", TAU, 1, 2), STOP, INACTION))
    assert manual[0].f == 1
    assert bisim_equal(manual, Thread((post(TAU, 1, 1), STOP, STOP)))


def test_thread_rejects_dangling():
    with pytest.raises(ValueError):
        Thread((post(A, 0, 3),))


def test_parse_action():
    assert parse_action("tau") is TAU
    assert parse_action("passw.chk:0:1") == Action("passw", "chk:0:1")
    with pytest.raises(ValueError):
        parse_action("nodot")


# -- bisimulation ---------------------------------------------------------------------------

def test_bisim_examples():
    unrolled = from_spec(RecursiveSpec({"X": (A, "Y", "Y"), "Y": (A, "X", "X")}), "X")
    assert bisim_equal(loop(), unrolled)
    assert bisim_equal(Thread((post(TAU, 1, 2), STOP, INACTION)), Thread((post(TAU, 1, 1), STOP)))
    assert not bisim_equal(Thread((post(A, 1, 2), STOP, INACTION)), Thread((post(A, 2, 1), STOP, INACTION)))


@given(threads(), threads())
def test_bisim_matches_oracle(t1, t2):
    expected = moore_equal(t1, t2)
    assert bisim_equal(t1, t2) == expected
    assert (canonical_form(t1) == canonical_form(t2)) == expected
    assert (distinguishing_path(t1, t2) is None) == expected


@given(threads(max_nodes=5), threads(max_nodes=5), threads(max_nodes=5))
def test_bisim_is_an_equivalence(t1, t2, t3):
    assert bisim_equal(t1, t1)
    assert bisim_equal(t1, t2) == bisim_equal(t2, t1)
    if bisim_equal(t1, t2) and bisim_equal(t2, t3):
        assert bisim_equal(t1, t3)


@given(threads())
def test_minimize_is_bisimilar_and_minimal(t):
    m = minimize(t)
    assert bisim_equal(t, m)
    assert len(m) <= len(t)
    assert len(minimize(m)) == len(m)


@given(threads(), threads())
def test_distinguishing_path_leads_to_difference(t1, t2):
    path = distinguishing_path(t1, t2)
    assume(path is not None)
    i, j = t1.root, t2.root
    for action, reply in path:
        assert t1[i].action == action == t2[j].action
        i = t1[i].t if reply else t1[i].f
        j = t2[j].t if reply else t2[j].f
    a, b = t1[i], t2[j]
    assert (a.kind, a.action) != (b.kind, b.action)


# -- abstraction ----------------------------------------------------------------------------

def test_abstract_examples():
    assert abstract_tau(loop(TAU)).nodes == (INACTION,)
    assert abstract_tau(Thread((post(TAU, 1, 2), STOP, INACTION))).nodes == (STOP,)
    t = Thread((post(A, 1, 2), post(TAU, 3, 3), INACTION, STOP))
    assert bisim_equal(abstract_tau(t), Thread((post(A, 1, 2), STOP, INACTION)))


@given(threads())
def test_abstract_tau_properties(t):
    once = abstract_tau(t)
    assert all(n.kind != "A" or not n.action.is_tau for n in once.nodes)
    assert bisim_equal(abstract_tau(once), once)


@given(threads(with_tau=False))
def test_abstract_tau_without_tau_is_identity(t):
    assert bisim_equal(abstract_tau(t), t)


# -- use ------------------------------------------------------------------------------------

def test_use_examples():
    rf = rf_service(1, 1)
    assert apply_use(Thread((STOP,)), "rf", rf).nodes == (STOP,)
    t = Thread((post(Action("rf", "eq:1:0"), 1, 2), STOP, INACTION))
    used = apply_use(t, "rf", rf)
    assert used[0].action is TAU and used[used[0].t] == STOP
    assert bisim_equal(used, Thread((post(TAU, 1, 1), STOP)))
    rfdt = rfdt_service(RfdtConfig(1, 1))
    t = Thread((post(Action("rfdt", "foo"), 1, 2), STOP, INACTION))
    assert apply_use(t, "rfdt", rfdt).nodes == (INACTION,)


def test_use_transforms_proto_methods():
    rfdt = rfdt_service(RfdtConfig(2, 1))
    t = Thread((post(Action("rfdt", "set:2:1"), 1, 1), post(Action("rfdt", "f.m:*1*2"), 2, 3), STOP, INACTION))
    got = abstract_tau(apply_use(t, "rfdt", rfdt))
    assert bisim_equal(got, Thread((post(Action("f", "m:01"), 1, 2), STOP, INACTION)))


def _blocker():
    return ServiceDescription(
        "block", ("s", "bot"), lambda m, s: "bot", lambda m, s: Reply.B, lambda m, s: TAU, "s"
    )


@given(threads(action_strategy=st.builds(Action, st.sampled_from(("a", "rf")), st.just("m"))))
def test_blocking_service_gives_inaction(t):
    used = apply_use(t, "rf", _blocker())
    for n in used.nodes:
        assert n.kind != "A" or n.action.focus != "rf"
    expected_actions = {n.action for n in used.nodes if n.kind == "A"}
    assert Action("rf", "m") not in expected_actions


@given(threads())
def test_use_on_absent_focus_is_identity(t):
    assert bisim_equal(apply_use(t, "zz", rf_service(1, 1)), t)


@given(threads(max_nodes=8, action_strategy=rf_actions()), st.integers(1, 2), st.integers(1, 2))
def test_use_agrees_with_equations(t, maxr, maxn):
    svc = rf_service(maxr, maxn)
    used = apply_use(t, "rf", svc)
    depth = 7
    assert unfold(used, used.root, depth) == use_by_equations(t, t.root, "rf", svc, svc.initial, depth)


@given(threads(max_nodes=6, action_strategy=st.builds(
    Action, st.just("rfdt"), st.sampled_from(["set:1:1", "set:2:0", "f.m:*1", "g.n*2", "junk"]))))
def test_use_agrees_with_equations_rfdt(t):
    svc = rfdt_service(RfdtConfig(2, 1))
    used = apply_use(t, "rfdt", svc)
    assert unfold(used, used.root, 7) == use_by_equations(t, t.root, "rfdt", svc, svc.initial, 7)


def test_use_limit():
    counter = ServiceDescription(
        "counter", (), lambda m, s: s + 1, lambda m, s: Reply.T, lambda m, s: TAU, 0
    )
    with pytest.raises(StateSpaceExceeded):
        apply_use(loop(Action("c", "inc")), "c", counter, limit=50)


def test_use_from_given_state():
    rf = rf_service(1, 1)
    t = Thread((post(Action("rf", "eq:1:0"), 1, 2), STOP, INACTION))
    assert abstract_tau(apply_use(t, "rf", rf, Regs((1,)))).nodes == (INACTION,)


# -- presentation ---------------------------------------------------------------------------

def test_to_spec_examples():
    assert str(to_spec(Thread((STOP,)))) == "X0 = S"
    assert str(to_spec(loop())) == "X0 = a.m o X0"
    assert str(to_spec(Thread((post(A, 1, 2), STOP, INACTION)))) == "X0 = X1 <| a.m |> X2\nX1 = S\nX2 = D"


@given(threads())
def test_spec_round_trip(t):
    assert bisim_equal(from_spec(to_spec(t), "X0"), t)


@given(threads())
def test_json_round_trip(t):
    text = to_json(t)
    assert bisim_equal(from_json(text), t)
    assert to_json(from_json(text)) == text


def test_dot_output():
    dot = to_dot(Thread((post(A, 1, 2), STOP, INACTION)))
    assert dot.splitlines()[0] == "digraph thread {"
    assert 'n0 -> n1 [label="+"];' in dot and 'n0 -> n2 [label="-"];' in dot
    assert 'n0 [label="a.m", shape=box];' in dot


# -- walking --------------------------------------------------------------------------------

def test_walk():
    t = Thread((post(A, 1, 2), STOP, post(B, 0, 0)))
    trace = walk(t, [False, True, True])
    assert trace.events == ((A, False), (B, True), (A, True))
    assert trace.outcome is Outcome.TERMINATION
    assert walk(loop(TAU), []).outcome is Outcome.INACTION
    with pytest.raises(RepliesExhausted) as info:
        walk(loop(), [True, True])
    assert len(info.value.trace.events) == 2
