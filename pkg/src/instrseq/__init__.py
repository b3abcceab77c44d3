"""Instruction sequences with dynamically instantiated instructions.

Parsing of the PGA, PGLD and PGLDdii notations, projections between them,
thread extraction, composition with register-based services and
bisimulation checking.
"""

from .errors import (
    ConfigError,
    DialectError,
    EmptyProgram,
    InstrSeqError,
    MalformedResult,
    ParseError,
    RegisterOutOfRange,
    RepliesExhausted,
    StateSpaceExceeded,
    UnboundVariable,
)
from .pga import CanonicalProgram, canonicalize, extract_thread, interpret_trace, parse_term
from .projections import (
    ProjectionConfig,
    expansion_size,
    password_examples,
    pgld_behaviour,
    pgld_to_pga,
    pglddii_behaviour,
    pglddii_behaviour_alt,
    pglddii_to_pgld,
    pglddii_to_pgld_alt,
)
from .services import Reply, RfdtConfig, rf_service, rfdt_service, validate_service
from .syntax import Dialect, SourceProgram, parse_program, render_program
from .threads import Action, Thread, abstract_tau, apply_use, bisim_equal, walk

__version__ = "0.1.0"

__all__ = [
    "Action",
    "CanonicalProgram",
    "ConfigError",
    "Dialect",
    "DialectError",
    "EmptyProgram",
    "InstrSeqError",
    "MalformedResult",
    "ParseError",
    "ProjectionConfig",
    "RegisterOutOfRange",
    "RepliesExhausted",
    "Reply",
    "RfdtConfig",
    "SourceProgram",
    "StateSpaceExceeded",
    "Thread",
    "UnboundVariable",
    "abstract_tau",
    "apply_use",
    "bisim_equal",
    "canonicalize",
    "expansion_size",
    "extract_thread",
    "interpret_trace",
    "parse_program",
    "parse_term",
    "password_examples",
    "pgld_behaviour",
    "pgld_to_pga",
    "pglddii_behaviour",
    "pglddii_behaviour_alt",
    "pglddii_to_pgld",
    "pglddii_to_pgld_alt",
    "render_program",
    "rf_service",
    "rfdt_service",
    "validate_service",
    "walk",
]
