"""Finite-state threads.

A thread is a rooted graph whose nodes are termination (``S``), inaction
(``D``) or a postconditional composition ``x <| a |> y``: perform action ``a``,
continue with ``x`` on a positive reply and with ``y`` on a negative one.
The internal action tau always replies positively, so a tau node is stored
with both successors equal.

Graphs are built by :func:`explore`, which numbers nodes in breadth-first order
from the root.  Every constructor in this module goes through it, which keeps
exported output deterministic.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Hashable, Iterable, Mapping, Sequence, Union

from .errors import RepliesExhausted, StateSpaceExceeded, UnboundVariable

DEFAULT_LIMIT = 10**6


@dataclass(frozen=True, order=True)
class Action:
    focus: str
    method: str

    @property
    def is_tau(self) -> bool:
        return self.focus == ""

    def __str__(self) -> str:
        return "tau" if self.is_tau else f"{self.focus}.{self.method}"


TAU = Action("", "tau")


def parse_action(text: str) -> Action:
    if text == "tau":
        return TAU
    focus, dot, method = text.partition(".")
    if not (dot and focus and method):
        raise ValueError(f"malformed action {text!r}")
    return Action(focus, method)


@dataclass(frozen=True)
class Node:
    kind: str  # "S", "D" or "A"
    action: Action | None = None
    t: int = -1
    f: int = -1


STOP = Node("S")
INACTION = Node("D")


def post(action: Action, t: int, f: int) -> Node:
    if action.is_tau:
        f = t
    return Node("A", action, t, f)


@dataclass(frozen=True)
class Thread:
    nodes: tuple[Node, ...]
    root: int = 0

    def __post_init__(self):
        n = len(self.nodes)
        if not 0 <= self.root < n:
            raise ValueError(f"root {self.root} outside 0..{n - 1}")
        for i, node in enumerate(self.nodes):
            if node.kind == "A":
                if not (0 <= node.t < n and 0 <= node.f < n):
                    raise ValueError(f"node {i} has a dangling successor")
            elif node.kind not in ("S", "D"):
                raise ValueError(f"node {i} has unknown kind {node.kind!r}")
        if any(nd.kind == "A" and nd.action.is_tau and nd.t != nd.f for nd in self.nodes):
            object.__setattr__(self, "nodes", _t1(self.nodes))

    def __len__(self) -> int:
        return len(self.nodes)

    def __getitem__(self, i: int) -> Node:
        return self.nodes[i]

    def successors(self, i: int) -> tuple[int, ...]:
        node = self.nodes[i]
        if node.kind != "A":
            return ()
        return (node.t,) if node.t == node.f else (node.t, node.f)

    def actions(self) -> set[Action]:
        return {n.action for n in self.nodes if n.kind == "A"}

    def __str__(self) -> str:
        return str(to_spec(self))


def _t1(nodes: Sequence[Node]) -> tuple[Node, ...]:
    return tuple(post(n.action, n.t, n.f) if n.kind == "A" else n for n in nodes)


Expansion = Union[Node, tuple]


def explore(
    root: Hashable,
    expand: Callable[[Hashable], Expansion],
    limit: int = DEFAULT_LIMIT,
) -> Thread:
    """Build a thread by breadth-first exploration of hashable keys.

    ``expand(key)`` returns ``STOP``, ``INACTION`` or a triple
    ``(action, t_key, f_key)``.
    """
    ids: dict[Hashable, int] = {root: 0}
    queue = [root]
    nodes: list[Node] = []
    for key in queue:
        spec = expand(key)
        if isinstance(spec, Node):
            nodes.append(spec)
            continue
        action, tk, fk = spec
        if action.is_tau:
            fk = tk
        succ = []
        for k in (tk, fk):
            if k not in ids:
                if len(ids) >= limit:
                    raise StateSpaceExceeded(limit)
                ids[k] = len(ids)
                queue.append(k)
            succ.append(ids[k])
        nodes.append(post(action, succ[0], succ[1]))
    return Thread(tuple(nodes), 0)


def renumber(t: Thread) -> Thread:
    """Reachable part of ``t`` in breadth-first order from the root."""
    return explore(t.root, lambda i: _expand_node(t, i))


def _expand_node(t: Thread, i: int) -> Expansion:
    node = t.nodes[i]
    return node if node.kind != "A" else (node.action, node.t, node.f)


# -- recursive specifications -------------------------------------------------

Rhs = Union[str, tuple]  # "S", "D" or (action, var, var)


@dataclass(frozen=True)
class RecursiveSpec:
    equations: Mapping[str, Rhs] = field(default_factory=dict)

    def __str__(self) -> str:
        lines = []
        for var, rhs in self.equations.items():
            if isinstance(rhs, str):
                lines.append(f"{var} = {rhs}")
            else:
                a, x, y = rhs
                body = f"{a} o {x}" if x == y else f"{x} <| {a} |> {y}"
                lines.append(f"{var} = {body}")
        return "\n".join(lines)


def from_spec(spec: RecursiveSpec, root: str) -> Thread:
    eqs = spec.equations

    def expand(var):
        if var not in eqs:
            raise UnboundVariable(var)
        rhs = eqs[var]
        if rhs == "S":
            return STOP
        if rhs == "D":
            return INACTION
        a, x, y = rhs
        for v in (x, y):
            if v not in eqs:
                raise UnboundVariable(v)
        return (a, x, y)

    return explore(root, expand)


def to_spec(t: Thread) -> RecursiveSpec:
    t = renumber(t)
    eqs: dict[str, Rhs] = {}
    for i, node in enumerate(t.nodes):
        if node.kind == "A":
            eqs[f"X{i}"] = (node.action, f"X{node.t}", f"X{node.f}")
        else:
            eqs[f"X{i}"] = node.kind
    return RecursiveSpec(eqs)


# -- equivalence ---------------------------------------------------------------

def _label(node: Node):
    return node.kind if node.kind != "A" else node.action


def bisim_equal(t1: Thread, t2: Thread) -> bool:
    """Bisimilarity of two threads by union-find coinduction.

    Threads are deterministic, so it suffices to merge the two roots and keep
    merging successor pairs; a label clash in any merged pair refutes.
    """
    offset = len(t1.nodes)
    nodes = t1.nodes + t2.nodes
    parent = list(range(len(nodes)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    todo = [(t1.root, offset + t2.root)]
    while todo:
        a, b = todo.pop()
        ra, rb = find(a), find(b)
        if ra == rb:
            continue
        na, nb = nodes[a], nodes[b]
        if _label(na) != _label(nb):
            return False
        parent[ra] = rb
        if na.kind == "A":
            sa, sb = _global_succ(a, na, offset), _global_succ(b, nb, offset)
            todo.append((sa[0], sb[0]))
            todo.append((sa[1], sb[1]))
    return True


def _global_succ(g: int, n: Node, offset: int) -> tuple[int, int]:
    d = 0 if g < offset else offset
    return n.t + d, n.f + d


def distinguishing_path(t1: Thread, t2: Thread) -> list[tuple[Action, bool]] | None:
    """Shortest reply path on which the threads differ, or None if bisimilar.

    The returned steps lead from the roots to a pair of nodes with different
    labels; the labels themselves are available by walking either thread.
    """
    start = (t1.root, t2.root)
    back: dict[tuple[int, int], tuple | None] = {start: None}
    queue = deque([start])
    while queue:
        a, b = pair = queue.popleft()
        na, nb = t1.nodes[a], t2.nodes[b]
        if _label(na) != _label(nb):
            path = []
            while back[pair] is not None:
                prev, step = back[pair]
                path.append(step)
                pair = prev
            return path[::-1]
        if na.kind != "A":
            continue
        branches = [(True, na.t, nb.t)]
        if not na.action.is_tau:
            branches.append((False, na.f, nb.f))
        for reply, x, y in branches:
            nxt = (x, y)
            if nxt not in back:
                back[nxt] = (pair, (na.action, reply))
                queue.append(nxt)
    return None


def minimize(t: Thread) -> Thread:
    """Bisimulation quotient by partition refinement, renumbered from the root."""
    t = renumber(t)
    ids: dict = {}
    block = [ids.setdefault(_label(n), len(ids)) for n in t.nodes]
    count = len(ids)
    while True:
        sigs: dict = {}
        new = []
        for i, n in enumerate(t.nodes):
            sig = (block[i], block[n.t], block[n.f]) if n.kind == "A" else (block[i],)
            new.append(sigs.setdefault(sig, len(sigs)))
        block = new
        if len(sigs) == count:
            break
        count = len(sigs)
    rep: dict[int, int] = {}
    for i in range(len(t.nodes)):
        rep.setdefault(block[i], i)
    return explore(block[t.root], lambda b: _expand_block(t, rep[b], block))


def _expand_block(t: Thread, i: int, block: list[int]) -> Expansion:
    node = t.nodes[i]
    return node if node.kind != "A" else (node.action, block[node.t], block[node.f])


def canonical_form(t: Thread) -> tuple[Node, ...]:
    """Node tuple of the minimal quotient; equal exactly for bisimilar threads."""
    return minimize(t).nodes


# -- use and abstraction -----------------------------------------------------------

def apply_use(t: Thread, focus: str, service, state=None, limit: int = DEFAULT_LIMIT) -> Thread:
    """Compose ``t`` with a para-target service listening on ``focus``.

    ``service`` is a services.ServiceDescription; ``state`` defaults to its
    initial state.  The product of thread nodes and service states is explored
    from the root and must stay below ``limit`` nodes.
    """
    from .services import Reply

    if state is None:
        state = service.initial

    def expand(key):
        i, s = key
        node = t.nodes[i]
        if node.kind != "A":
            return node
        a = node.action
        if a.is_tau:
            return (a, (node.t, s), (node.t, s))
        if a.focus != focus:
            return (a, (node.t, s), (node.f, s))
        reply, act, s2 = service.process(s, a.method)
        if reply is Reply.T:
            return (TAU, (node.t, s2), (node.t, s2))
        if reply is Reply.F:
            return (TAU, (node.f, s2), (node.f, s2))
        if reply is Reply.M:
            return (act, (node.t, s2), (node.f, s2))
        return INACTION

    return explore((t.root, state), expand, limit)


def abstract_tau(t: Thread) -> Thread:
    """Remove tau steps; a cycle of tau steps becomes inaction."""

    def settle(i):
        seen = set()
        while t.nodes[i].kind == "A" and t.nodes[i].action.is_tau:
            if i in seen:
                return None
            seen.add(i)
            i = t.nodes[i].t
        return i

    def expand(i):
        if i is None:
            return INACTION
        node = t.nodes[i]
        if node.kind != "A":
            return node
        return (node.action, settle(node.t), settle(node.f))

    return explore(settle(t.root), expand)


# -- execution traces ----------------------------------------------------------------

class Outcome(Enum):
    TERMINATION = "termination"
    INACTION = "inaction"
    EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class Trace:
    events: tuple[tuple[Action, bool], ...]
    outcome: Outcome

    def __str__(self) -> str:
        steps = " ".join(f"{a}{'+' if r else '-'}" for a, r in self.events)
        return f"{steps} [{self.outcome.value}]".strip()


def walk(t: Thread, replies: Iterable[bool]) -> Trace:
    """Follow ``t`` from the root, taking one reply per non-tau action."""
    bits = iter(replies)
    events: list[tuple[Action, bool]] = []
    i = t.root
    silent: set[int] = set()
    while True:
        node = t.nodes[i]
        if node.kind == "S":
            return Trace(tuple(events), Outcome.TERMINATION)
        if node.kind == "D":
            return Trace(tuple(events), Outcome.INACTION)
        if node.action.is_tau:
            if i in silent:
                return Trace(tuple(events), Outcome.INACTION)
            silent.add(i)
            i = node.t
            continue
        try:
            bit = next(bits)
        except StopIteration:
            raise RepliesExhausted(Trace(tuple(events), Outcome.EXHAUSTED)) from None
        events.append((node.action, bit))
        silent.clear()
        i = node.t if bit else node.f


# -- export ----------------------------------------------------------------------------

def to_json(t: Thread) -> str:
    t = renumber(t)
    nodes = []
    for i, n in enumerate(t.nodes):
        if n.kind == "A":
            nodes.append({"id": i, "kind": "A", "action": str(n.action), "t": n.t, "f": n.f})
        else:
            nodes.append({"id": i, "kind": n.kind})
    return json.dumps({"root": t.root, "nodes": nodes}, indent=2)


def from_json(text: str) -> Thread:
    data = json.loads(text)
    index = {entry["id"]: k for k, entry in enumerate(data["nodes"])}
    nodes = []
    for entry in data["nodes"]:
        if entry["kind"] == "A":
            nodes.append(post(parse_action(entry["action"]), index[entry["t"]], index[entry["f"]]))
        else:
            nodes.append(STOP if entry["kind"] == "S" else INACTION)
    return Thread(tuple(nodes), index[data["root"]])


def _dot_quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(t: Thread, name: str = "thread") -> str:
    t = renumber(t)
    lines = [f"digraph {name} {{", "  node [shape=circle];"]
    for i, n in enumerate(t.nodes):
        if n.kind == "A":
            lines.append(f"  n{i} [label={_dot_quote(str(n.action))}, shape=box];")
        else:
            lines.append(f"  n{i} [label={_dot_quote(n.kind)}];")
    for i, n in enumerate(t.nodes):
        if n.kind == "A":
            lines.append(f'  n{i} -> n{n.t} [label="+"];')
            lines.append(f'  n{i} -> n{n.f} [label="-"];')
    lines.append("}")
    return "\n".join(lines)
