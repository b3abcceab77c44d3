"""Concrete instruction notation: lexing, parsing and rendering.

Concrete syntax, one token per primitive instruction::

    f.m        plain basic instruction
    +f.m       positive test instruction
    -f.m       negative test instruction
    #l         forward jump (PGA)
    ##l        absolute jump (PGLD, PGLDdii)
    !          termination (PGA)

Tokens are separated by ``;`` or newlines.  A method may carry active strings
(``*1``, ``*23``) that are replaced by register contents at run time; a basic
instruction whose method has active strings and no dot of its own, such as
``passw.chk:*1:*2``, is a proto-instruction.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Mapping, Union

from .errors import DialectError, EmptyProgram, MalformedResult, ParseError, RegisterOutOfRange


class Dialect(Enum):
    PGA = "pga"
    PGLD = "pgld"
    PGLDDII = "pglddii"


class SegmentKind(Enum):
    NEUTRAL = "neutral"
    ACTIVE = "active"
    INVALID = "invalid"


_NEUTRAL_RE = re.compile(r"(?:[A-Za-z:][A-Za-z0-9:]*)?")
_ACTIVE_RE = re.compile(r"\*[0-9]+")
_NAME_RE = re.compile(r"[A-Za-z][A-Za-z0-9:]*")
# neutral and active strings alternating, starting with a letter
_ALT = r"[A-Za-z][A-Za-z0-9:]*(?:\*[0-9]+(?:[A-Za-z:][A-Za-z0-9:]*)?)*"
_ALT_RE = re.compile(_ALT)
_PROTO_INSTR_RE = re.compile(_ALT + r"\." + _ALT)
_JUMP_RE = re.compile(r"(##?)([0-9]+)")


def classify_segment(s: str) -> SegmentKind:
    if _NEUTRAL_RE.fullmatch(s):
        return SegmentKind.NEUTRAL
    if _ACTIVE_RE.fullmatch(s):
        return SegmentKind.ACTIVE
    return SegmentKind.INVALID


@dataclass(frozen=True)
class Segment:
    text: str
    kind: SegmentKind


@dataclass(frozen=True)
class PlainMethod:
    name: str

    @property
    def text(self) -> str:
        return self.name


@dataclass(frozen=True)
class ProtoMethod:
    """Method text containing at least one active string.

    Either the method half of a proto-instruction (``chk:*1:*2``) or a whole
    concrete proto-instruction used as a method (``passw.chk:*1:*2``, as in
    ``rfdt.passw.chk:*1:*2``).  Neutral segments of the latter include the
    separating dot.
    """

    text: str

    @property
    def segments(self) -> tuple[Segment, ...]:
        out: list[Segment] = []
        pos = 0
        for m in _ACTIVE_RE.finditer(self.text):
            out.append(Segment(self.text[pos:m.start()], SegmentKind.NEUTRAL))
            out.append(Segment(m.group(), SegmentKind.ACTIVE))
            pos = m.end()
        if pos < len(self.text):
            out.append(Segment(self.text[pos:], SegmentKind.NEUTRAL))
        return tuple(out)

    @property
    def registers(self) -> frozenset[int]:
        return frozenset(int(m.group()[1:]) for m in _ACTIVE_RE.finditer(self.text))

    @property
    def is_instruction(self) -> bool:
        """True when the text is a complete concrete proto-instruction ``f'.m'``."""
        return "." in self.text


MethodExpr = Union[PlainMethod, ProtoMethod]


def is_proto_text(text: str) -> bool:
    """Whether ``text`` is a concrete proto-instruction ``f'.m'``."""
    return bool(_PROTO_INSTR_RE.fullmatch(text)) and "*" in text


def parse_method(text: str) -> MethodExpr:
    if _NAME_RE.fullmatch(text):
        return PlainMethod(text)
    if "*" in text and (_ALT_RE.fullmatch(text) or _PROTO_INSTR_RE.fullmatch(text)):
        return ProtoMethod(text)
    raise ParseError(f"malformed method {text!r}")


@dataclass(frozen=True)
class Basic:
    focus: str
    method: MethodExpr

    @property
    def text(self) -> str:
        return f"{self.focus}.{self.method.text}"

    @property
    def is_proto(self) -> bool:
        return isinstance(self.method, ProtoMethod) and not self.method.is_instruction

    def __str__(self) -> str:
        return self.text


def parse_core(text: str) -> Basic:
    """Split at the first dot into focus and method."""
    focus, dot, method = text.partition(".")
    if not dot:
        raise ParseError(f"missing '.' in {text!r}")
    if not _NAME_RE.fullmatch(focus):
        raise ParseError(f"malformed focus {focus!r}")
    return Basic(focus, parse_method(method))


@dataclass(frozen=True)
class Plain:
    core: Basic


@dataclass(frozen=True)
class PosTest:
    core: Basic


@dataclass(frozen=True)
class NegTest:
    core: Basic


@dataclass(frozen=True)
class FwdJump:
    l: int


@dataclass(frozen=True)
class AbsJump:
    l: int


@dataclass(frozen=True)
class Halt:
    pass


HALT = Halt()

BasicInstruction = Union[Plain, PosTest, NegTest]
PrimitiveInstruction = Union[Plain, PosTest, NegTest, FwdJump, AbsJump, Halt]
BASIC_KINDS = (Plain, PosTest, NegTest)


def is_proto_instruction(u: PrimitiveInstruction) -> bool:
    return isinstance(u, BASIC_KINDS) and u.core.is_proto


def with_core(u: BasicInstruction, core: Basic) -> BasicInstruction:
    """Same polarity, different basic instruction."""
    return replace(u, core=core)


def admits(dialect: Dialect, u: PrimitiveInstruction) -> bool:
    if isinstance(u, BASIC_KINDS):
        return dialect is Dialect.PGLDDII or not u.core.is_proto
    if isinstance(u, (FwdJump, Halt)):
        return dialect is Dialect.PGA
    if isinstance(u, AbsJump):
        return dialect is not Dialect.PGA
    return False


def parse_instruction(text: str, dialect: Dialect) -> PrimitiveInstruction:
    token = text.strip()
    if not token:
        raise ParseError("empty instruction")
    u: PrimitiveInstruction
    if token == "!":
        u = HALT
    elif token.startswith("#"):
        m = _JUMP_RE.fullmatch(token)
        if not m:
            raise ParseError(f"malformed jump {token!r}")
        u = AbsJump(int(m.group(2))) if m.group(1) == "##" else FwdJump(int(m.group(2)))
    elif token[0] == "+":
        u = PosTest(parse_core(token[1:]))
    elif token[0] == "-":
        u = NegTest(parse_core(token[1:]))
    else:
        u = Plain(parse_core(token))
    if not admits(dialect, u):
        raise DialectError(f"{token!r} is not a {dialect.value} instruction")
    return u


def render_instruction(u: PrimitiveInstruction) -> str:
    if isinstance(u, Plain):
        return u.core.text
    if isinstance(u, PosTest):
        return "+" + u.core.text
    if isinstance(u, NegTest):
        return "-" + u.core.text
    if isinstance(u, FwdJump):
        return f"#{u.l}"
    if isinstance(u, AbsJump):
        return f"##{u.l}"
    if isinstance(u, Halt):
        return "!"
    raise TypeError(f"not an instruction: {u!r}")


@dataclass(frozen=True)
class SourceProgram:
    dialect: Dialect
    instructions: tuple[PrimitiveInstruction, ...]

    def __post_init__(self):
        if not self.instructions:
            raise EmptyProgram()
        for i, u in enumerate(self.instructions, 1):
            if not admits(self.dialect, u):
                raise DialectError(
                    f"instruction {i}: {render_instruction(u)!r} is not a {self.dialect.value} instruction"
                )

    def __len__(self) -> int:
        return len(self.instructions)

    def __getitem__(self, j: int) -> PrimitiveInstruction:
        """1-based access, as positions are counted in programs."""
        if not 1 <= j <= len(self.instructions):
            raise IndexError(j)
        return self.instructions[j - 1]

    def __str__(self) -> str:
        return render_program(self)


def _tokens(text: str) -> list[str]:
    return [tok.strip() for line in text.splitlines() for tok in line.split(";") if tok.strip()]


def parse_program(text: str, dialect: Dialect) -> SourceProgram:
    tokens = _tokens(text)
    if not tokens:
        raise EmptyProgram()
    instructions = []
    for i, tok in enumerate(tokens, 1):
        try:
            instructions.append(parse_instruction(tok, dialect))
        except ParseError as exc:
            raise ParseError(str(exc), i) from None
        except DialectError as exc:
            raise DialectError(f"instruction {i}: {exc}") from None
    return SourceProgram(dialect, tuple(instructions))


def render_program(p: SourceProgram, sep: str = "\n") -> str:
    return sep.join(render_instruction(u) for u in p.instructions)


def decimal(value: int) -> str:
    return str(value)


def instantiate_proto(
    m: ProtoMethod | str,
    regs: Mapping[int, int],
    enc: Callable[[int], str] = decimal,
) -> Basic:
    """Replace every active string ``*i`` by ``enc(regs[i])`` and re-split the result.

    ``m`` must be a whole proto-instruction (``f'.m'``).
    """
    text = m.text if isinstance(m, ProtoMethod) else m

    def substitute(match: re.Match) -> str:
        i = int(match.group()[1:])
        if i not in regs:
            raise RegisterOutOfRange(i)
        return enc(regs[i])

    result = _ACTIVE_RE.sub(substitute, text)
    focus, dot, method = result.partition(".")
    if not (dot and _NAME_RE.fullmatch(focus) and _NAME_RE.fullmatch(method)):
        raise MalformedResult(f"instantiating {text!r} gave {result!r}, not a concrete instruction")
    return Basic(focus, PlainMethod(method))
