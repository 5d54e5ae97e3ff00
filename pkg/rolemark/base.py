from __future__ import annotations

from collections import OrderedDict
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Dict, List, NamedTuple, Optional, Protocol, Tuple

if TYPE_CHECKING:
    from .binding import SymbolTable
    from .syntax import SyntaxTree

TOOL_VERSION = "1.0.0"

# Role prefixes injected by augmentation.
STEPPER_PREFIX = "stepper_"
WALKER_PREFIX = "walker_"

# Stepper typing: numeric primitives and their boxed simple names. `char` is
# deliberately absent.
NUMERIC_TYPE_NAMES = frozenset(
    {
        "byte",
        "short",
        "int",
        "long",
        "float",
        "double",
        "Byte",
        "Short",
        "Integer",
        "Long",
        "Float",
        "Double",
    }
)
STEPPER_UNARY_OPS = frozenset({"++", "--"})
STEPPER_COMPOUND_OPS = frozenset({"+=", "-=", "*=", "/=", "%=", "<<=", ">>="})
ARITHMETIC_BINARY_OPS = frozenset({"+", "-", "*", "/", "%", "<<", ">>", ">>>"})

# Walker typing: iterator-style APIs matched by simple name only.
ITERATOR_TYPE_NAMES = frozenset({"Iterator", "ListIterator", "Enumeration"})
WALKER_CONDITION_METHODS = frozenset({"hasNext", "hasMoreElements"})
WALKER_ADVANCE_METHODS = frozenset({"next", "nextElement"})

# Noise renaming.
GENERIC_VAR_PREFIX = "var"
MASK64 = (1 << 64) - 1
SPLITMIX_GAMMA = 0x9E3779B97F4A7C15
SPLITMIX_MUL1 = 0xBF58476D1CE4E5B9
SPLITMIX_MUL2 = 0x94D049BB133111EB
INDEPENDENT_SEED_SALT = "#roles"

# Corpus layout.
SPLITS: Tuple[str, ...] = ("train", "val", "test")
DEFAULT_SPLIT = "test"
FORMATS: Tuple[str, ...] = ("dir-tree", "jsonl")
JAVA_SUFFIX = ".java"
MANIFEST_FILENAME = "manifest.json"
STATS_FILENAME = "stats.json"
SUITE_NAMES: Tuple[str, ...] = (
    "jl",
    "jlr",
    "jl_f",
    "jlr_f",
    "jlt",
    "jltr",
    "jlt_f",
    "jltr_f",
)
STEPPER_SHARE_TOP_N = 5

# CLI defaults.
DEFAULT_SEED = 0
DEFAULT_WORKERS = 1
DEFAULT_FORMAT = "dir-tree"
ENV_WORKERS = "ROLEMARK_WORKERS"
UNK_SUBTOKEN = "<unk>"


class Span(NamedTuple):
    """Half-open offset range ``[start, end)`` into a method's source text."""

    start: int
    end: int

    def slice(self, text: str) -> str:
        return text[self.start : self.end]

    def encloses(self, other: "Span") -> bool:
        return self.start <= other.start and other.end <= self.end

    def overlaps(self, other: "Span") -> bool:
        return self.start < other.end and other.start < self.end

    @property
    def width(self) -> int:
        return self.end - self.start


class RolemarkError(Exception):
    """Base class for errors raised by rolemark."""


class ParseFailure(RolemarkError, ValueError):
    """A method could not be parsed; carries the first error position."""

    def __init__(self, reason: str, position: int) -> None:
        super().__init__(f"{reason} at offset {position}")
        self.reason = reason
        self.position = position


class UnknownBindingError(RolemarkError, KeyError):
    """A binding id does not belong to the symbol table it was looked up in."""


class PatchOverlapError(RolemarkError, ValueError):
    """Two patches in one patch set cover overlapping spans."""


class CorpusError(RolemarkError, ValueError):
    """Malformed corpus input: bad jsonl, duplicate ids, mismatched id sets."""


class Role(str, Enum):
    """Variable roles recognised by the detectors, in precedence order."""

    STEPPER = "Stepper"
    WALKER = "Walker"

    @property
    def prefix(self) -> str:
        return STEPPER_PREFIX if self is Role.STEPPER else WALKER_PREFIX

    @property
    def precedence(self) -> int:
        return list(Role).index(self)


class RuleId(str, Enum):
    STEP_FOR_UPDATE = "STEP_FOR_UPDATE"
    WALK_ITER_API = "WALK_ITER_API"
    WALK_ENHANCED_FOR = "WALK_ENHANCED_FOR"


class DeclKind(str, Enum):
    PARAMETER = "parameter"
    LOCAL = "local"
    FOR_INIT = "for-init"
    ENHANCED_FOR_VAR = "enhanced-for-var"
    CAUGHT_EXCEPTION = "caught-exception"
    UNRESOLVED_EXTERNAL = "unresolved-external"


class RecordStatus(str, Enum):
    PROCESSED = "processed"
    PARSE_FAILED = "parse-failed"
    CARRIED_OVER = "carried-over"


@dataclass(frozen=True)
class RenamedBinding:
    """One binding renamed by a rewrite, keyed by its positional id.

    ``name_based_extra`` marks a binding that carries no role itself and was
    prefixed only because it shares a name with a role binding.
    """

    binding_id: int
    old_name: str
    new_name: str
    name_based_extra: bool = False

    def as_dict(self) -> Dict[str, object]:
        payload: Dict[str, object] = {
            "binding": self.binding_id,
            "old": self.old_name,
            "new": self.new_name,
        }
        if self.name_based_extra:
            payload["nameBasedExtra"] = True
        return payload

    @classmethod
    def from_dict(cls, payload: Dict[str, object]) -> "RenamedBinding":
        return cls(
            binding_id=int(payload["binding"]),  # type: ignore[arg-type]
            old_name=str(payload["old"]),
            new_name=str(payload["new"]),
            name_based_extra=bool(payload.get("nameBasedExtra", False)),
        )


@dataclass(frozen=True)
class RoleAssignment:
    """A detected role on one binding, with the loop that triggered it."""

    binding_id: int
    role: Role
    evidence_span: Span
    rule_id: RuleId


class RoleDetector(Protocol):
    """Protocol every role detector plugged into ``detect_roles`` exposes."""

    key: str
    role: Role
    description: str

    def detect(self, tree: "SyntaxTree", table: "SymbolTable") -> List[RoleAssignment]:
        ...


_ROLE_DETECTOR_REGISTRY: "OrderedDict[str, RoleDetector]" = OrderedDict()


def register_role_detector(detector: RoleDetector) -> None:
    """Register a detector so ``detect_roles`` runs it for every method."""
    _ROLE_DETECTOR_REGISTRY[detector.key] = detector


def get_role_detector(key: str) -> RoleDetector:
    if key not in _ROLE_DETECTOR_REGISTRY:
        raise KeyError(f"No role detector registered under {key!r}.")
    return _ROLE_DETECTOR_REGISTRY[key]


def list_role_detectors(role: Optional[Role] = None) -> List[RoleDetector]:
    detectors = list(_ROLE_DETECTOR_REGISTRY.values())
    if role is None:
        return detectors
    return [detector for detector in detectors if detector.role is role]


__all__ = [
    "TOOL_VERSION",
    "STEPPER_PREFIX",
    "WALKER_PREFIX",
    "NUMERIC_TYPE_NAMES",
    "STEPPER_UNARY_OPS",
    "STEPPER_COMPOUND_OPS",
    "ARITHMETIC_BINARY_OPS",
    "ITERATOR_TYPE_NAMES",
    "WALKER_CONDITION_METHODS",
    "WALKER_ADVANCE_METHODS",
    "GENERIC_VAR_PREFIX",
    "MASK64",
    "SPLITMIX_GAMMA",
    "SPLITMIX_MUL1",
    "SPLITMIX_MUL2",
    "INDEPENDENT_SEED_SALT",
    "SPLITS",
    "DEFAULT_SPLIT",
    "FORMATS",
    "JAVA_SUFFIX",
    "MANIFEST_FILENAME",
    "STATS_FILENAME",
    "SUITE_NAMES",
    "STEPPER_SHARE_TOP_N",
    "DEFAULT_SEED",
    "DEFAULT_WORKERS",
    "DEFAULT_FORMAT",
    "ENV_WORKERS",
    "UNK_SUBTOKEN",
    "Span",
    "RolemarkError",
    "ParseFailure",
    "UnknownBindingError",
    "PatchOverlapError",
    "CorpusError",
    "Role",
    "RuleId",
    "DeclKind",
    "RecordStatus",
    "RenamedBinding",
    "RoleAssignment",
    "RoleDetector",
    "register_role_detector",
    "get_role_detector",
    "list_role_detectors",
]
