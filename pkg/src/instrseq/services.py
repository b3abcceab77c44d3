"""State-based para-target services.

A service description is a finite state set with three functions of a method
and a state: ``eff`` (next state), ``yld`` (reply) and ``act`` (the action the
method is turned into).  Two families are provided:

* ``rf``: a register file with ``set:i:n`` and ``eq:i:n``;
* ``rfdt``: a register-file-dependent method-to-action translator that turns
  proto-instructions into basic actions using the current register contents.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Callable, Hashable, Iterable, Sequence

from . import syntax
from .errors import ConfigError
from .threads import TAU, Action


class Reply(Enum):
    T = "T"
    F = "F"
    M = "M"  # meaningless: no reply, the method is turned into an action
    B = "B"  # blocked: the request is rejected


@dataclass(frozen=True, order=True)
class Regs:
    """Register contents; ``values[i - 1]`` is the content of register ``i``."""

    values: tuple[int, ...]

    @classmethod
    def zeros(cls, maxr: int) -> Regs:
        return cls((0,) * maxr)

    def __getitem__(self, i: int) -> int:
        if not 1 <= i <= len(self.values):
            raise KeyError(i)
        return self.values[i - 1]

    def __contains__(self, i: object) -> bool:
        return isinstance(i, int) and 1 <= i <= len(self.values)

    def __len__(self) -> int:
        return len(self.values)

    def set(self, i: int, n: int) -> Regs:
        vals = list(self.values)
        vals[i - 1] = n
        return Regs(tuple(vals))

    def as_dict(self) -> dict[int, int]:
        return {i: v for i, v in enumerate(self.values, 1)}

    def __str__(self) -> str:
        return ",".join(f"{i}:{v}" for i, v in enumerate(self.values, 1))


class _Undef:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNDEF"

    __str__ = __repr__

    def __reduce__(self):
        return (_Undef, ())


UNDEF = _Undef()


def parse_regs(text: str, maxr: int | None = None) -> Regs:
    """Parse a register literal such as ``1:0,2:1,3:1``."""
    pairs = {}
    for item in text.split(","):
        i, _, v = item.strip().partition(":")
        pairs[int(i)] = int(v)
    size = maxr if maxr is not None else max(pairs)
    if set(pairs) - set(range(1, size + 1)):
        raise ConfigError(f"register literal {text!r} names registers outside 1..{size}")
    return Regs(tuple(pairs.get(i, 0) for i in range(1, size + 1)))


def all_regs(maxr: int, maxn: int) -> list[Regs]:
    return [Regs(vals) for vals in itertools.product(range(maxn + 1), repeat=maxr)]


@dataclass(frozen=True)
class ServiceDescription:
    name: str
    states: tuple[Hashable, ...]
    eff: Callable[[str, Hashable], Hashable]
    yld: Callable[[str, Hashable], Reply]
    act: Callable[[str, Hashable], Action]
    initial: Hashable

    def process(self, state, method: str) -> tuple[Reply, Action, Hashable]:
        return self.yld(method, state), self.act(method, state), self.eff(method, state)

    def session(self, state=None) -> Session:
        return Session(self, self.initial if state is None else state)


def process(svc: ServiceDescription, s, m: str) -> tuple[Reply, Action, Hashable]:
    return svc.process(s, m)


@dataclass
class Session:
    """A service description together with a mutable current state."""

    service: ServiceDescription
    state: Hashable

    def process(self, method: str) -> tuple[Reply, Action]:
        reply, action, self.state = self.service.process(self.state, method)
        return reply, action

    def clone(self) -> Session:
        return Session(self.service, self.state)


def replay(svc: ServiceDescription, s, methods: Iterable[str]):
    """Cumulative effect of processing ``methods`` from state ``s``."""
    for m in methods:
        s = svc.eff(m, s)
    return s


# -- validation ----------------------------------------------------------------------

@dataclass
class ValidationReport:
    violations: list[tuple[str, str, Hashable]] = field(default_factory=list)
    sink: Hashable | None = None

    @property
    def ok(self) -> bool:
        return not self.violations

    def failed(self, condition: str) -> bool:
        return any(v[0] == condition for v in self.violations)

    def __str__(self) -> str:
        if self.ok:
            return f"ok (sink {self.sink})"
        return "\n".join(f"{c} violated at method {m!r}, state {s}" for c, m, s in self.violations)


def validate_service(svc: ServiceDescription, methods: Sequence[str]) -> ValidationReport:
    """Check the three service conditions by enumeration over states x methods.

    C1: a method that can yield M never yields T or F.
    C2: some sink state blocks everything and every blocked request moves to it.
    C3: the reply is not M exactly when the action is tau.
    """
    if not methods:
        raise ConfigError("validate_service needs at least one method")
    report = ValidationReport()
    table = {(m, s): svc.process(s, m) for m in methods for s in svc.states}

    for m in methods:
        meaningless = [s for s in svc.states if table[m, s][0] is Reply.M]
        if meaningless:
            for s in svc.states:
                if table[m, s][0] in (Reply.T, Reply.F):
                    report.violations.append(("C1", m, s))

    def is_sink(z):
        return all(
            table[m, z][0] is Reply.B
            and all(table[m, s][2] == z for s in svc.states if table[m, s][0] is Reply.B)
            for m in methods
        )

    sinks = [z for z in svc.states if is_sink(z)]
    if sinks:
        report.sink = sinks[0]
    else:
        witness = next(
            ((m, s) for m in methods for s in svc.states if table[m, s][0] is not Reply.B),
            (methods[0], svc.states[0]),
        )
        report.violations.append(("C2", *witness))

    for m in methods:
        for s in svc.states:
            reply, action, _ = table[m, s]
            if (reply is not Reply.M) != action.is_tau:
                report.violations.append(("C3", m, s))
    return report


# -- register file and method-to-action translator -------------------------------------

_RF_METHOD = re.compile(r"(set|eq):(0|[1-9][0-9]*):(0|[1-9][0-9]*)")


@lru_cache(maxsize=4096)
def _register_method(m: str):
    match = _RF_METHOD.fullmatch(m)
    if not match:
        return None
    return match.group(1), int(match.group(2)), int(match.group(3))


def _check_bounds(maxr: int, maxn: int) -> None:
    if maxr < 1 or maxn < 1:
        raise ConfigError(f"maxr and maxn must be at least 1 (got {maxr}, {maxn})")


def set_methods(maxr: int, maxn: int) -> list[str]:
    return [f"set:{i}:{n}" for i in range(1, maxr + 1) for n in range(maxn + 1)]


def eq_methods(maxr: int, maxn: int) -> list[str]:
    return [f"eq:{i}:{n}" for i in range(1, maxr + 1) for n in range(maxn + 1)]


@dataclass(frozen=True)
class RfdtConfig:
    maxr: int
    maxn: int
    encode: Callable[[int], str] = syntax.decimal

    def __post_init__(self):
        _check_bounds(self.maxr, self.maxn)

    def is_proto(self, method: str) -> bool:
        """Membership of the proto-action set: a proto-instruction over registers 1..maxr."""
        return _proto_registers_ok(method, self.maxr)

    def theta(self, method: str, regs: Regs) -> Action:
        core = syntax.instantiate_proto(method, regs, self.encode)
        return Action(core.focus, core.method.text)


@lru_cache(maxsize=4096)
def _proto_registers_ok(method: str, maxr: int) -> bool:
    if not syntax.is_proto_text(method):
        return False
    return all(1 <= i <= maxr for i in syntax.ProtoMethod(method).registers)


def _valid(maxr: int, maxn: int, i: int, n: int) -> bool:
    return 1 <= i <= maxr and 0 <= n <= maxn


def rfdt_service(cfg: RfdtConfig) -> ServiceDescription:
    maxr, maxn = cfg.maxr, cfg.maxn

    def classify(m: str):
        parsed = _register_method(m)
        if parsed and parsed[0] == "set" and _valid(maxr, maxn, parsed[1], parsed[2]):
            return "set", parsed[1], parsed[2]
        if cfg.is_proto(m):
            return ("proto",)
        return ("other",)

    def eff(m, s):
        if s is UNDEF:
            return UNDEF
        kind = classify(m)
        if kind[0] == "set":
            return s.set(kind[1], kind[2])
        return s if kind[0] == "proto" else UNDEF

    def yld(m, s):
        if s is UNDEF:
            return Reply.B
        kind = classify(m)[0]
        return Reply.T if kind == "set" else Reply.M if kind == "proto" else Reply.B

    def act(m, s):
        if s is not UNDEF and classify(m)[0] == "proto":
            return cfg.theta(m, s)
        return TAU

    states = tuple(all_regs(maxr, maxn)) + (UNDEF,)
    return ServiceDescription("rfdt", states, eff, yld, act, Regs.zeros(maxr))


def rf_service(maxr: int, maxn: int) -> ServiceDescription:
    _check_bounds(maxr, maxn)

    def classify(m: str):
        parsed = _register_method(m)
        if parsed and _valid(maxr, maxn, parsed[1], parsed[2]):
            return parsed
        return None

    def eff(m, s):
        if s is UNDEF:
            return UNDEF
        kind = classify(m)
        if kind is None:
            return UNDEF
        return s.set(kind[1], kind[2]) if kind[0] == "set" else s

    def yld(m, s):
        if s is UNDEF:
            return Reply.B
        kind = classify(m)
        if kind is None:
            return Reply.B
        if kind[0] == "set":
            return Reply.T
        return Reply.T if s[kind[1]] == kind[2] else Reply.F

    def act(m, s):
        return TAU

    states = tuple(all_regs(maxr, maxn)) + (UNDEF,)
    return ServiceDescription("rf", states, eff, yld, act, Regs.zeros(maxr))


def proto_action_set(svc: ServiceDescription, methods: Iterable[str], probe_states: Iterable) -> set[str]:
    """Methods turned into a non-tau action in at least one probe state."""
    probes = list(probe_states)
    return {m for m in methods if any(not svc.act(m, s).is_tau for s in probes)}
