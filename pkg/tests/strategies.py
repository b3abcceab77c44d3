"""Hypothesis strategies shared by the test modules."""

from __future__ import annotations

from hypothesis import strategies as st

from instrseq import syntax
from instrseq.pga import CanonicalProgram, Concat, Inst, Rep
from instrseq.syntax import HALT, FwdJump, NegTest, Plain, PosTest
from instrseq.threads import INACTION, STOP, Action, Thread, post

FOCI = ("a", "b")
METHODS = ("m", "n")


def basic(cls, focus, method):
    return cls(syntax.Basic(focus, syntax.PlainMethod(method)))


pga_basic = st.builds(
    basic,
    st.sampled_from((Plain, PosTest, NegTest)),
    st.sampled_from(FOCI),
    st.sampled_from(METHODS),
)
pga_instruction = st.one_of(
    pga_basic,
    st.builds(FwdJump, st.integers(0, 6)),
    st.just(HALT),
)


@st.composite
def canonical_programs(draw, max_len: int = 10):
    body = draw(st.lists(pga_instruction, min_size=1, max_size=max_len))
    cut = draw(st.integers(0, len(body)))
    if draw(st.booleans()):
        cut = len(body)  # finite program
    return CanonicalProgram(tuple(body[:cut]), tuple(body[cut:]))


def _term(children):
    return st.one_of(
        st.builds(Concat, children, children),
        st.builds(Rep, children),
    )


pga_terms = st.recursive(st.builds(Inst, pga_instruction), _term, max_leaves=8)

actions = st.builds(Action, st.sampled_from(("a", "b", "c")), st.sampled_from(METHODS))


@st.composite
def threads(draw, max_nodes: int = 8, action_strategy=None, with_tau: bool = True):
    acts = action_strategy if action_strategy is not None else actions
    if with_tau:
        acts = st.one_of(acts, st.just(Action("", "tau")))
    n = draw(st.integers(1, max_nodes))
    nodes = []
    for _ in range(n):
        kind = draw(st.sampled_from("SDAAA"))
        if kind == "S":
            nodes.append(STOP)
        elif kind == "D":
            nodes.append(INACTION)
        else:
            nodes.append(post(draw(acts), draw(st.integers(0, n - 1)), draw(st.integers(0, n - 1))))
    return Thread(tuple(nodes), draw(st.integers(0, n - 1)))


def rf_actions(maxr: int = 2, maxn: int = 2):
    methods = [f"{op}:{i}:{v}" for op in ("set", "eq") for i in range(1, maxr + 2) for v in range(maxn + 2)]
    return st.one_of(
        st.builds(Action, st.just("rf"), st.sampled_from(methods + ["junk"])),
        st.builds(Action, st.sampled_from(("a", "b")), st.just("m")),
    )


replies = st.lists(st.booleans(), max_size=50)
