"""Program algebra terms, canonical forms and thread extraction.

A PGA term is built from primitive instructions with concatenation and
repetition.  Every term denotes an instruction sequence of the shape
``P`` or ``P ; Q^w`` which :class:`CanonicalProgram` stores directly as a
prefix and a (possibly empty) repeating part.  Positions are 1-based and
positions beyond the end of a repeating program wrap into the repeat part.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Mapping, Union

from . import syntax
from .errors import EmptyProgram, ParseError, RepliesExhausted
from .syntax import (
    AbsJump,
    Dialect,
    FwdJump,
    Halt,
    Plain,
    PosTest,
    PrimitiveInstruction,
)
from .threads import INACTION, STOP, Action, Outcome, Thread, Trace, explore

DEFAULT_FUEL = 10**6


# -- terms ------------------------------------------------------------------------------

@dataclass(frozen=True)
class Inst:
    u: PrimitiveInstruction


@dataclass(frozen=True)
class Concat:
    left: PgaTerm
    right: PgaTerm


@dataclass(frozen=True)
class Rep:
    body: PgaTerm


PgaTerm = Union[Inst, Concat, Rep]


def seq(*instrs: PrimitiveInstruction) -> PgaTerm:
    """Right-associated concatenation of one or more instructions."""
    if not instrs:
        raise ValueError("a term needs at least one instruction")
    term: PgaTerm = Inst(instrs[-1])
    for u in reversed(instrs[:-1]):
        term = Concat(Inst(u), term)
    return term


def render_term(t: PgaTerm) -> str:
    if isinstance(t, Inst):
        return syntax.render_instruction(t.u)
    if isinstance(t, Concat):
        return " ; ".join(render_term(x) for x in _spine(t))
    return f"({render_term(t.body)})^w"


_TERM_TOKEN = re.compile(r"\s*(\(|\)|\^w|\^ω|;|\n|[^;()\n^]+)")


def parse_term(text: str) -> PgaTerm:
    """Parse PGA term notation: instructions, ``;``, parentheses and ``^w``."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TERM_TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r} in term")
        tok = m.group(1).strip()
        if tok == "\n":
            tok = ";"
        if tok:
            tokens.append(tok)
        pos = m.end()
    index = 0

    def peek():
        return tokens[index] if index < len(tokens) else None

    def term() -> PgaTerm:
        nonlocal index
        parts = [factor()]
        while peek() == ";":
            index += 1
            if peek() in (None, ")"):
                break
            parts.append(factor())
        out = parts[-1]
        for p in reversed(parts[:-1]):
            out = Concat(p, out)
        return out

    def factor() -> PgaTerm:
        nonlocal index
        tok = peek()
        if tok is None:
            raise ParseError("unexpected end of term")
        if tok == "(":
            index += 1
            inner = term()
            if peek() != ")":
                raise ParseError("missing ')'")
            index += 1
            out: PgaTerm = inner
        elif tok in (")", ";", "^w", "^ω"):
            raise ParseError(f"unexpected {tok!r}")
        else:
            index += 1
            out = Inst(syntax.parse_instruction(tok, Dialect.PGA))
        while peek() in ("^w", "^ω"):
            index += 1
            out = Rep(out)
        return out

    if not tokens:
        raise EmptyProgram()
    result = term()
    if index != len(tokens):
        raise ParseError(f"unexpected {tokens[index]!r}")
    return result


# -- canonical programs ------------------------------------------------------------------

@dataclass(frozen=True)
class CanonicalProgram:
    prefix: tuple[PrimitiveInstruction, ...] = ()
    repeat: tuple[PrimitiveInstruction, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "prefix", tuple(self.prefix))
        object.__setattr__(self, "repeat", tuple(self.repeat))
        if not self.prefix and not self.repeat:
            raise ValueError("a canonical program is non-empty")

    @property
    def finite(self) -> bool:
        return not self.repeat

    def __len__(self) -> int:
        return len(self.prefix) + len(self.repeat)

    def wrap(self, q: int) -> int:
        """Fold a position past the end back into the repeat part."""
        n = len(self)
        if q <= n or self.finite:
            return q
        base = len(self.prefix)
        return base + (q - base - 1) % len(self.repeat) + 1

    def at(self, q: int) -> PrimitiveInstruction | None:
        """Instruction at position ``q``, or None past the end of a finite program."""
        q = self.wrap(q)
        if q > len(self):
            return None
        if q <= len(self.prefix):
            return self.prefix[q - 1]
        return self.repeat[q - len(self.prefix) - 1]

    def to_term(self) -> PgaTerm:
        if self.finite:
            return seq(*self.prefix)
        rep = Rep(seq(*self.repeat))
        return Concat(seq(*self.prefix), rep) if self.prefix else rep

    def __str__(self) -> str:
        parts = [syntax.render_instruction(u) for u in self.prefix]
        if self.repeat:
            parts.append("(" + " ; ".join(syntax.render_instruction(u) for u in self.repeat) + ")^w")
        return " ; ".join(parts)


def _spine(t: PgaTerm) -> list[PgaTerm]:
    """Operands of a concatenation, left to right, whatever its bracketing."""
    out, stack = [], [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Concat):
            stack += [x.right, x.left]
        else:
            out.append(x)
    return out


def canonicalize(t: PgaTerm) -> CanonicalProgram:
    prefix: list = []
    for part in _spine(t):
        if isinstance(part, Inst):
            prefix.append(part.u)
            continue
        if not isinstance(part, Rep):
            raise TypeError(f"not a PGA term: {part!r}")
        body = canonicalize(part.body)
        if body.finite:
            return CanonicalProgram(tuple(prefix), body.prefix)
        # (P ; Q^w)^w = P ; Q^w, and x^w ; y = x^w
        return CanonicalProgram(tuple(prefix) + body.prefix, body.repeat)
    return CanonicalProgram(tuple(prefix), ())


# -- jump resolution ---------------------------------------------------------------------

class Escape(Enum):
    OFF_END = "off-end"
    DIVERGENT = "divergent"


@dataclass(frozen=True)
class AtPosition:
    p: int


Landing = Union[AtPosition, Escape]


def _follow(prog: CanonicalProgram, p: int) -> tuple[Landing, int]:
    """Landing of position ``p`` plus the last raw position reached."""
    seen = set()
    while True:
        q = prog.wrap(p)
        u = prog.at(q)
        if u is None:
            return Escape.OFF_END, p
        if not isinstance(u, FwdJump):
            return AtPosition(q), q
        if u.l == 0 or q in seen:
            return Escape.DIVERGENT, q
        seen.add(q)
        p = q + u.l


def resolve_jump(prog: CanonicalProgram, p: int) -> Landing:
    if p < 1:
        raise ValueError("positions start at 1")
    return _follow(prog, p)[0]


def core_action(core: syntax.Basic) -> Action:
    return Action(core.focus, core.method.text)


def extract_thread(prog: CanonicalProgram) -> Thread:
    def key(p: int):
        landing = resolve_jump(prog, p)
        if isinstance(landing, Escape):
            return "D"
        return "S" if isinstance(prog.at(landing.p), Halt) else landing.p

    def expand(k):
        if k == "S":
            return STOP
        if k == "D":
            return INACTION
        u = prog.at(k)
        a = core_action(u.core)
        if isinstance(u, Plain):
            return (a, key(k + 1), key(k + 1))
        if isinstance(u, PosTest):
            return (a, key(k + 1), key(k + 2))
        return (a, key(k + 2), key(k + 1))

    return explore(key(1), expand)


def struct_normalize(prog: CanonicalProgram) -> CanonicalProgram:
    """Replace every jump by a single jump to the end of its chain.

    Chains that never reach a non-jump become ``#0``; chains leaving a finite
    program keep their total distance; targets inside the repeat part use the
    smallest forward distance.
    """
    def rewrite(p: int, u: PrimitiveInstruction) -> PrimitiveInstruction:
        if not isinstance(u, FwdJump) or u.l == 0:
            return u
        landing, q = _follow(prog, p)
        if landing is Escape.DIVERGENT:
            return FwdJump(0)
        if landing is Escape.OFF_END:
            return FwdJump(q - p)
        q = landing.p
        return FwdJump(q - p if q > p else q - p + len(prog.repeat))

    n = len(prog.prefix)
    prefix = tuple(rewrite(i, u) for i, u in enumerate(prog.prefix, 1))
    repeat = tuple(rewrite(n + i, u) for i, u in enumerate(prog.repeat, 1))
    return CanonicalProgram(prefix, repeat)


# -- positional execution ----------------------------------------------------------------

def _sessions(env: Mapping) -> dict:
    out = {}
    for focus, svc in (env or {}).items():
        out[focus] = svc.clone() if hasattr(svc, "clone") else svc.session()
    return out


def execute(
    fetch: Callable[[int], PrimitiveInstruction | None],
    jump: Callable[[int, PrimitiveInstruction], "int | Outcome"],
    off_end: Outcome,
    env: Mapping | None,
    replies,
    fuel: int = DEFAULT_FUEL,
    normalize: Callable[[int], int] = lambda p: p,
) -> Trace:
    """Step a program from position 1.

    ``fetch`` returns the instruction at a position (None past the end) and
    ``jump`` gives the next position or an outcome for a jump instruction.
    ``env`` maps foci to service descriptions or sessions; their replies are
    consumed silently.  Other foci take one boolean from ``replies`` each.
    ``fuel`` bounds the number of basic instructions executed.  A silent loop,
    detected by revisiting a position with identical service states, is
    inaction.  ``normalize`` maps equivalent positions to one representative.
    """
    from .services import Reply

    sessions = _sessions(env)
    bits = iter(replies)
    events: list = []
    seen: set = set()
    used = 0
    pos = 1

    def done(outcome):
        return Trace(tuple(events), outcome)

    while True:
        pos = normalize(pos)
        marker = (pos, tuple(s.state for s in sessions.values()))
        if marker in seen:
            return done(Outcome.INACTION)
        seen.add(marker)
        u = fetch(pos)
        if u is None:
            return done(off_end)
        if isinstance(u, Halt):
            return done(Outcome.TERMINATION)
        if isinstance(u, (FwdJump, AbsJump)):
            nxt = jump(pos, u)
            if isinstance(nxt, Outcome):
                return done(nxt)
            pos = nxt
            continue
        if used >= fuel:
            return done(Outcome.EXHAUSTED)
        used += 1
        focus, method = u.core.focus, u.core.method.text
        if focus in sessions:
            reply, action = sessions[focus].process(method)
            if reply is Reply.B:
                return done(Outcome.INACTION)
            if reply is not Reply.M:
                ok = reply is Reply.T
                pos = _advance(u, pos, ok)
                continue
        else:
            action = Action(focus, method)
        try:
            ok = next(bits)
        except StopIteration:
            raise RepliesExhausted(done(Outcome.EXHAUSTED)) from None
        events.append((action, ok))
        seen.clear()
        pos = _advance(u, pos, ok)


def _advance(u, pos: int, ok: bool) -> int:
    if isinstance(u, Plain):
        return pos + 1
    if isinstance(u, PosTest):
        return pos + 1 if ok else pos + 2
    return pos + 2 if ok else pos + 1


def interpret_trace(
    prog: CanonicalProgram,
    env: Mapping | None = None,
    replies=(),
    fuel: int = DEFAULT_FUEL,
) -> Trace:
    if fuel < 0:
        raise ValueError("fuel must be non-negative")

    def jump(pos, u):
        return Outcome.INACTION if u.l == 0 else pos + u.l

    return execute(prog.at, jump, Outcome.INACTION, env, replies, fuel, prog.wrap)

