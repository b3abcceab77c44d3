from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from instrseq.errors import DialectError, EmptyProgram, MalformedResult, ParseError, RegisterOutOfRange
from instrseq.syntax import (
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
    SegmentKind,
    SourceProgram,
    admits,
    classify_segment,
    instantiate_proto,
    is_proto_instruction,
    is_proto_text,
    parse_instruction,
    parse_program,
    render_instruction,
    render_program,
)


@pytest.mark.parametrize(
    "text, kind",
    [
        ("chk:011", SegmentKind.NEUTRAL),
        ("", SegmentKind.NEUTRAL),
        (":a1", SegmentKind.NEUTRAL),
        ("*12", SegmentKind.ACTIVE),
        ("*a", SegmentKind.INVALID),
        ("*", SegmentKind.INVALID),
        ("1abc", SegmentKind.INVALID),
    ],
)
def test_classify_segment(text, kind):
    assert classify_segment(text) is kind


@given(st.text(alphabet="ab:1*9.", max_size=6))
def test_classification_is_a_partition(s):
    neutral = s == "" or (s[0].isalpha() or s[0] == ":") and all(c.isalnum() or c == ":" for c in s)
    active = len(s) >= 2 and s[0] == "*" and s[1:].isdigit()
    assert not (neutral and active)
    expected = SegmentKind.NEUTRAL if neutral else SegmentKind.ACTIVE if active else SegmentKind.INVALID
    assert classify_segment(s) is expected


def test_parse_rfdt_wrapped_proto():
    u = parse_instruction("+rfdt.passw.chk:*1:*2:*3", Dialect.PGLDDII)
    assert isinstance(u, PosTest)
    assert u.core.focus == "rfdt"
    assert isinstance(u.core.method, ProtoMethod)
    segs = u.core.method.segments
    assert [s.text for s in segs if s.kind is SegmentKind.NEUTRAL] == ["passw.chk:", ":", ":"]
    assert [s.text for s in segs if s.kind is SegmentKind.ACTIVE] == ["*1", "*2", "*3"]
    assert u.core.method.registers == {1, 2, 3}


def test_parse_proto_instruction():
    u = parse_instruction("-passw.chk:*1:*2", Dialect.PGLDDII)
    assert isinstance(u, NegTest) and is_proto_instruction(u)
    assert u.core.focus == "passw" and u.core.method.text == "chk:*1:*2"


@pytest.mark.parametrize(
    "text, dialect, expected",
    [
        ("##0", Dialect.PGLD, AbsJump(0)),
        ("#3", Dialect.PGA, FwdJump(3)),
        ("!", Dialect.PGA, HALT),
        ("a.m", Dialect.PGA, Plain(Basic("a", PlainMethod("m")))),
    ],
)
def test_parse_instruction(text, dialect, expected):
    assert parse_instruction(text, dialect) == expected


@pytest.mark.parametrize(
    "text, dialect",
    [("!", Dialect.PGLD), ("#2", Dialect.PGLD), ("##2", Dialect.PGA), ("f.m:*1", Dialect.PGLD), ("!", Dialect.PGLDDII)],
)
def test_dialect_rejections(text, dialect):
    with pytest.raises(DialectError):
        parse_instruction(text, dialect)


@pytest.mark.parametrize("text", ["a", "+", "a.", ".m", "1a.m", "a.m*", "a.*1", "#x", "##", "a.m b"])
def test_malformed_tokens(text):
    with pytest.raises(ParseError):
        parse_instruction(text, Dialect.PGLDDII)


def test_parse_program_examples():
    p = parse_program("+stdin.getb; ##5; rfdt.set:1:0", Dialect.PGLDDII)
    assert len(p) == 3 and p[2] == AbsJump(5)
    with pytest.raises(EmptyProgram):
        parse_program("", Dialect.PGLD)
    with pytest.raises(EmptyProgram):
        parse_program(" ;\n ; ", Dialect.PGLD)
    with pytest.raises(ParseError) as info:
        parse_program("a.m; ??", Dialect.PGLD)
    assert info.value.index == 2


def test_source_program_validates():
    with pytest.raises(EmptyProgram):
        SourceProgram(Dialect.PGA, ())
    with pytest.raises(DialectError):
        SourceProgram(Dialect.PGLD, (HALT,))


def test_render_examples():
    assert render_instruction(Plain(Basic("a", PlainMethod("m")))) == "a.m"
    assert render_instruction(parse_instruction("+passw.chk:*1:*2:*3", Dialect.PGLDDII)) == "+passw.chk:*1:*2:*3"
    assert render_instruction(AbsJump(16)) == "##16"


names = st.sampled_from(["a", "rfdt", "x1", "f:g"])
methods = st.sampled_from(["m", "set:1:0", "chk:*1:*2", "p*1q", "passw.chk:*3", "m*2"])


@st.composite
def pglddii_instructions(draw):
    kind = draw(st.sampled_from(["basic", "jump"]))
    if kind == "jump":
        return AbsJump(draw(st.integers(0, 99)))
    focus, method = draw(names), draw(methods)
    if "." in method and focus != "rfdt":
        focus = "rfdt"
    text = f"{focus}.{method}"
    prefix = draw(st.sampled_from(["", "+", "-"]))
    return parse_instruction(prefix + text, Dialect.PGLDDII)


@given(st.lists(pglddii_instructions(), min_size=1, max_size=12), st.sampled_from(["\n", " ; ", ";"]))
def test_round_trip(instrs, sep):
    p = SourceProgram(Dialect.PGLDDII, tuple(instrs))
    assert parse_program(render_program(p, sep), Dialect.PGLDDII) == p


def test_instantiate_examples():
    core = instantiate_proto("passw.chk:*1:*2:*3", {1: 0, 2: 1, 3: 1})
    assert (core.focus, core.method.text) == ("passw", "chk:0:1:1")
    assert instantiate_proto(ProtoMethod("f.m:*1"), {1: 0}).text == "f.m:0"
    with pytest.raises(RegisterOutOfRange) as info:
        instantiate_proto("f.m:*9", {1: 0})
    assert info.value.register == 9


def test_instantiate_is_simultaneous():
    # a substituted value must not be re-read as an active string
    core = instantiate_proto("f.m*1*2", {1: 2, 2: 5}, enc=lambda v: f"x{v}")
    assert core.method.text == "mx2x5"


def test_instantiate_malformed():
    with pytest.raises(MalformedResult):
        instantiate_proto("f.m:*1", {1: 0}, enc=lambda v: ".")


@given(st.lists(st.integers(0, 3), min_size=3, max_size=3), st.integers(0, 3))
def test_instantiate_ignores_unmentioned_registers(values, other):
    regs = dict(enumerate(values, 1))
    changed = {**regs, 3: other}
    a = instantiate_proto("p.q*1:*2", regs)
    b = instantiate_proto("p.q*1:*2", changed)
    assert a == b
    assert a.method.text == f"q{values[0]}:{values[1]}"
    assert admits(Dialect.PGLD, Plain(a))
    assert "*" not in a.text


def test_is_proto_text():
    assert is_proto_text("passw.chk:*1")
    assert not is_proto_text("passw.chk:1")
    assert not is_proto_text("chk:*1")
