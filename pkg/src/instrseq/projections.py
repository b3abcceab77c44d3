"""Projections between the program notations and the behaviours built on them.

* ``pgld_to_pga``: absolute jumps become relative jumps inside a repeated
  program padded with two termination instructions.
* ``pglddii_to_pgld``: every proto-instruction is handed to the ``rfdt``
  translator service, which instantiates it from its registers at run time.
* ``pglddii_to_pgld_alt``: every proto-instruction is expanded in place into a
  decision tree over the register contents, read through the ``rf`` register
  file, with one leaf per register assignment.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Callable

from . import syntax
from .errors import ConfigError, DialectError, RegisterOutOfRange
from .pga import PgaTerm, Rep, canonicalize, execute, extract_thread, seq
from .services import RfdtConfig, rf_service, rfdt_service
from .syntax import (
    HALT,
    AbsJump,
    Basic,
    Dialect,
    FwdJump,
    NegTest,
    Plain,
    PlainMethod,
    PosTest,
    ProtoMethod,
    SourceProgram,
    is_proto_instruction,
    with_core,
)
from .threads import DEFAULT_LIMIT, Outcome, Thread, Trace, abstract_tau, apply_use

RFDT_FOCUS = "rfdt"
RF_FOCUS = "rf"


@dataclass(frozen=True)
class ProjectionConfig:
    maxr: int
    maxn: int
    encode: Callable[[int], str] = syntax.decimal
    limit: int = DEFAULT_LIMIT

    def __post_init__(self):
        if self.maxr < 1 or self.maxn < 1:
            raise ConfigError(f"maxr and maxn must be at least 1 (got {self.maxr}, {self.maxn})")

    @property
    def rfdt(self) -> RfdtConfig:
        return RfdtConfig(self.maxr, self.maxn, self.encode)


def _require(p: SourceProgram, dialect: Dialect) -> None:
    if p.dialect is not dialect:
        raise DialectError(f"expected a {dialect.value} program, got {p.dialect.value}")


# -- PGLD to PGA ---------------------------------------------------------------------------

def _phi(j: int, k: int, u):
    if not isinstance(u, AbsJump):
        return u
    l = u.l
    if l == 0 or l > k:
        return HALT
    if l >= j:
        return FwdJump(l - j)
    return FwdJump(k + 2 - (j - l))


def pgld_to_pga(p: SourceProgram) -> PgaTerm:
    _require(p, Dialect.PGLD)
    k = len(p)
    body = [_phi(j, k, u) for j, u in enumerate(p.instructions, 1)]
    return Rep(seq(*body, HALT, HALT))


def pgld_behaviour(p: SourceProgram) -> Thread:
    return extract_thread(canonicalize(pgld_to_pga(p)))


def run_pgld(p: SourceProgram, env=None, replies=(), fuel: int = 10**6) -> Trace:
    """Direct positional execution of a PGLD program."""
    _require(p, Dialect.PGLD)
    k = len(p)

    def fetch(pos):
        return p.instructions[pos - 1] if 1 <= pos <= k else None

    def jump(pos, u):
        return Outcome.TERMINATION if u.l == 0 or u.l > k else u.l

    return execute(fetch, jump, Outcome.TERMINATION, env, replies, fuel)


# -- PGLDdii to PGLD through the translator service ------------------------------------------

def pglddii_to_pgld(p: SourceProgram) -> SourceProgram:
    _require(p, Dialect.PGLDDII)
    out = []
    for u in p.instructions:
        if is_proto_instruction(u):
            u = with_core(u, Basic(RFDT_FOCUS, ProtoMethod(u.core.text)))
        out.append(u)
    return SourceProgram(Dialect.PGLD, tuple(out))


def pglddii_behaviour(p: SourceProgram, cfg: ProjectionConfig) -> Thread:
    thread = pgld_behaviour(pglddii_to_pgld(p))
    composed = apply_use(thread, RFDT_FOCUS, rfdt_service(cfg.rfdt), limit=cfg.limit)
    return abstract_tau(composed)


def run_pglddii(p: SourceProgram, cfg: ProjectionConfig, replies=(), fuel: int = 10**6) -> Trace:
    return run_pgld(pglddii_to_pgld(p), {RFDT_FOCUS: rfdt_service(cfg.rfdt)}, replies, fuel)


# -- PGLDdii to PGLD by in-place expansion -------------------------------------------------

def expansion_size(maxr: int, maxn: int) -> int:
    """Length of the block that replaces one proto-instruction."""
    if maxr < 1 or maxn < 1:
        raise ConfigError(f"maxr and maxn must be at least 1 (got {maxr}, {maxn})")
    internal = sum((maxn + 1) ** (i - 1) for i in range(1, maxr + 1))
    leaves = (maxn + 1) ** maxr
    size = (2 * maxn + 1) * internal + 3 * (leaves - 1) + 1
    closed, rem = divmod((5 * maxn + 1) * (leaves - 1), maxn)
    assert rem == 0 and size == closed + 1, (maxr, maxn)
    return size


def _internal_count(cfg: ProjectionConfig) -> int:
    return sum((cfg.maxn + 1) ** i for i in range(cfg.maxr))


@dataclass(frozen=True)
class OffsetTable:
    """Where each source position lands in the expanded program.

    ``protos_before[j]`` counts proto-instructions strictly before ``j``;
    ``start[j]`` is the translated position of ``j`` for ``j`` in ``1..k+2``;
    ``guarded`` lists positions that receive a two-jump trailer because a
    skip from them would otherwise land inside the following block.
    Index 0 of each tuple is unused.
    """

    k: int
    length: int
    protos_before: tuple[int, ...]
    start: tuple[int, ...]
    guarded: frozenset[int]

    def target(self, l: int) -> int:
        if l == 0:
            return 0
        if l <= self.k + 2:
            return self.start[l]
        return l + (self.length - self.k)


def _skips(u) -> bool:
    return isinstance(u, (PosTest, NegTest))


def offset_table(p: SourceProgram, cfg: ProjectionConfig, literal: bool = False) -> OffsetTable:
    k = len(p)
    block = expansion_size(cfg.maxr, cfg.maxn)
    guarded = set()
    if not literal:
        for j in range(1, k):
            if _skips(p[j]) and is_proto_instruction(p[j + 1]):
                guarded.add(j)
    counts = [0, 0]
    start = [0, 1]
    for j in range(1, k + 1):
        proto = is_proto_instruction(p[j])
        size = (block if proto else 1) + (2 if j in guarded else 0)
        counts.append(counts[-1] + int(proto))
        start.append(start[-1] + size)
    length = start[k + 1] - 1
    start.append(k + 2 + length - k)
    return OffsetTable(k, length, tuple(counts), tuple(start), frozenset(guarded))


def _check_reserved(j: int, u) -> None:
    if not isinstance(u, syntax.BASIC_KINDS):
        return
    core = u.core
    if core.focus == RF_FOCUS:
        raise DialectError(f"instruction {j}: focus {RF_FOCUS!r} is reserved for the register file")
    if core.focus == RFDT_FOCUS and isinstance(core.method, ProtoMethod):
        raise DialectError(f"instruction {j}: {core.text!r} has no register-file counterpart")


def _proto_block(u, j: int, start: int, after: tuple[int, int], trail_last: bool,
                 cfg: ProjectionConfig) -> list:
    base = cfg.maxn + 1
    internal = _internal_count(cfg)
    node_width = 2 * cfg.maxn + 1

    def pos(b: int) -> int:
        if b < internal:
            return start + node_width * b
        return start + node_width * internal + 3 * (b - internal)

    out: list = []
    level_end, register = 1, 1
    for b in range(internal):
        if b == level_end:
            register += 1
            level_end = level_end * base + 1
        children = [base * b + 1 + h for h in range(base)]
        for h in range(cfg.maxn):
            out.append(PosTest(Basic(RF_FOCUS, PlainMethod(f"eq:{register}:{h}"))))
            out.append(AbsJump(pos(children[h])))
        out.append(AbsJump(pos(children[-1])))

    leaves = base ** cfg.maxr
    for c, values in enumerate(itertools.product(range(base), repeat=cfg.maxr)):
        regs = dict(enumerate(values, 1))
        try:
            core = syntax.instantiate_proto(u.core.text, regs, cfg.encode)
        except RegisterOutOfRange as exc:
            raise ConfigError(f"instruction {j}: register {exc.register} exceeds maxr={cfg.maxr}") from None
        out.append(with_core(u, core))
        if c < leaves - 1 or trail_last:
            out.extend((AbsJump(after[0]), AbsJump(after[1])))
    return out


def pglddii_to_pgld_alt(p: SourceProgram, cfg: ProjectionConfig, literal: bool = False) -> SourceProgram:
    """Expand proto-instructions into register-file decision trees.

    With ``literal=True`` no trailers are added after tests that precede a
    proto-instruction; a negative reply of such a test then skips into the
    middle of the following block.
    """
    _require(p, Dialect.PGLDDII)
    table = offset_table(p, cfg, literal)
    out: list = []
    for j, u in enumerate(p.instructions, 1):
        _check_reserved(j, u)
        after = (table.target(j + 1), table.target(j + 2))
        if is_proto_instruction(u):
            out.extend(_proto_block(u, j, table.start[j], after, j in table.guarded, cfg))
            continue
        if isinstance(u, AbsJump):
            out.append(AbsJump(table.target(u.l)))
        elif isinstance(u, syntax.BASIC_KINDS) and u.core.focus == RFDT_FOCUS:
            out.append(with_core(u, Basic(RF_FOCUS, u.core.method)))
        else:
            out.append(u)
        if j in table.guarded:
            out.extend((AbsJump(after[0]), AbsJump(after[1])))
    assert len(out) == table.length
    return SourceProgram(Dialect.PGLD, tuple(out))


def pglddii_behaviour_alt(p: SourceProgram, cfg: ProjectionConfig, literal: bool = False) -> Thread:
    thread = pgld_behaviour(pglddii_to_pgld_alt(p, cfg, literal))
    composed = apply_use(thread, RF_FOCUS, rf_service(cfg.maxr, cfg.maxn), limit=cfg.limit)
    return abstract_tau(composed)


# -- fixtures --------------------------------------------------------------------------------

def _basic(text: str, cls=Plain):
    return cls(syntax.parse_core(text))


def password_examples(n: int) -> tuple[SourceProgram, SourceProgram]:
    """Password programs reading ``n`` bits: with one check proto-instruction,
    and hand-expanded into a binary dispatch tree over ``2**n`` checks.

    After the check, a positive reply leads to ``out.grant`` and termination,
    a negative one restarts the program.
    """
    if n < 1:
        raise ConfigError("password length must be at least 1")
    dii: list = []
    for i in range(1, n + 1):
        dii += [
            _basic("stdin.getb", PosTest),
            AbsJump(5 * i),
            _basic(f"rfdt.set:{i}:0"),
            AbsJump(5 * i + 1),
            _basic(f"rfdt.set:{i}:1"),
        ]
    check = ":".join(f"*{i}" for i in range(1, n + 1))
    dii.append(_basic(f"passw.chk:{check}", PosTest))
    dii += _password_tail(len(dii))

    internal = 2**n - 1
    expanded: list = []
    for b in range(internal):
        expanded += [
            _basic("stdin.getb", PosTest),
            AbsJump(3 * (2 * b + 2) + 1),
            AbsJump(3 * (2 * b + 1) + 1),
        ]
    last = 6 * internal + 1
    for c, bits in enumerate(itertools.product((0, 1), repeat=n)):
        expanded.append(_basic("passw.chk:" + ":".join(map(str, bits)), PosTest))
        if c < 2**n - 1:
            expanded += [AbsJump(last + 1), AbsJump(last + 2)]
    expanded += _password_tail(len(expanded))
    return (
        SourceProgram(Dialect.PGLDDII, tuple(dii)),
        SourceProgram(Dialect.PGLD, tuple(expanded)),
    )


def _password_tail(check_pos: int) -> list:
    return [AbsJump(check_pos + 3), AbsJump(1), _basic("out.grant"), AbsJump(0)]


def password_prefix_length(p: SourceProgram) -> int:
    """Position of the last password-check instruction."""
    return max(j for j, u in enumerate(p.instructions, 1)
               if isinstance(u, syntax.BASIC_KINDS) and u.core.text.startswith("passw.chk:"))


# -- random programs -------------------------------------------------------------------------

def _proto_templates(cfg: ProjectionConfig) -> list[str]:
    r = cfg.maxr
    return ["a.m:*{0}", "b.p*{0}q*{1}", "c.k:*1:*" + str(r)]


def random_pglddii_program(rng: random.Random, cfg: ProjectionConfig, max_len: int = 12) -> SourceProgram:
    """Seeded random PGLDdii program over foci a, b, c, passw and rfdt.

    Protos only mention registers 1..maxr.  Jump targets range over 0..k+2.
    ``rfdt`` is only used with ``set`` methods and one unknown method.
    """
    k = rng.randint(1, max_len)
    out = []
    for _ in range(k):
        kind = rng.choice(("jump", "basic", "basic", "set", "proto", "proto"))
        if kind == "jump":
            out.append(AbsJump(rng.randint(0, k + 2)))
            continue
        if kind == "basic":
            text = rng.choice(("a.m", "b.n", "c.k"))
        elif kind == "set":
            if rng.random() < 0.1:
                text = "rfdt.junk"
            else:
                text = f"rfdt.set:{rng.randint(1, cfg.maxr)}:{rng.randint(0, cfg.maxn)}"
        else:
            template = rng.choice(_proto_templates(cfg))
            text = template.format(rng.randint(1, cfg.maxr), rng.randint(1, cfg.maxr))
        cls = rng.choice((Plain, PosTest, NegTest))
        out.append(cls(syntax.parse_core(text)))
    return SourceProgram(Dialect.PGLDDII, tuple(out))


def random_pgld_program(rng: random.Random, maxr: int = 2, maxn: int = 2, max_len: int = 10) -> SourceProgram:
    """Seeded random PGLD program over foci a, b and a register file ``rf``."""
    k = rng.randint(1, max_len)
    out = []
    for _ in range(k):
        kind = rng.choice(("jump", "ext", "set", "eq", "eq"))
        if kind == "jump":
            out.append(AbsJump(rng.randint(0, k + 2)))
            continue
        if kind == "ext":
            text = rng.choice(("a.m", "b.n"))
        elif rng.random() < 0.08:
            text = "rf.junk"
        else:
            text = f"rf.{kind}:{rng.randint(1, maxr)}:{rng.randint(0, maxn)}"
        cls = rng.choice((Plain, PosTest, NegTest))
        out.append(cls(syntax.parse_core(text)))
    return SourceProgram(Dialect.PGLD, tuple(out))


def behaviours_coincide(p: SourceProgram, cfg: ProjectionConfig, literal: bool = False) -> bool:
    from .threads import bisim_equal

    return bisim_equal(pglddii_behaviour(p, cfg), pglddii_behaviour_alt(p, cfg, literal))

