from .base import (
    TOOL_VERSION,
    STEPPER_PREFIX,
    WALKER_PREFIX,
    SPLITS,
    FORMATS,
    SUITE_NAMES,
    DEFAULT_SEED,
    Span,
    RolemarkError,
    ParseFailure,
    UnknownBindingError,
    PatchOverlapError,
    CorpusError,
    Role,
    RuleId,
    DeclKind,
    RecordStatus,
    RenamedBinding,
    RoleAssignment,
    RoleDetector,
    register_role_detector,
    get_role_detector,
    list_role_detectors,
)
from .lexer import Token, TokenKind, tokenize, join_tokens, decode_source, encode_source
from .syntax import (
    ParseOutcome,
    SyntaxTree,
    parse_method,
    shape_fingerprint,
    iter_nodes,
    method_name,
)
from .binding import Binding, SymbolTable, resolve, occurrences
from .roles import RoleConflict, RoleReport, detect_steppers, detect_walkers, detect_roles
from .rewrite import (
    Patch,
    apply_patches,
    AugmentResult,
    TransformResult,
    augment,
    strip_roles,
    splitmix64,
    transform_rename,
)
from .corpus import (
    MethodRecord,
    CorpusManifest,
    EvalSuite,
    StatsReport,
    ingest,
    emit,
    run_detect,
    run_augment,
    run_transform,
    filter_pair,
    build_eval_suite,
    method_targets,
    stats,
)
from .evalmetrics import NamePair, EvalReport, subtokenize, score_example, evaluate, compare_reports
from .config import CommandConfig, ConfigError, resolve_config

__all__ = [
    "TOOL_VERSION",
    "STEPPER_PREFIX",
    "WALKER_PREFIX",
    "SPLITS",
    "FORMATS",
    "SUITE_NAMES",
    "DEFAULT_SEED",
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
    "Token",
    "TokenKind",
    "tokenize",
    "join_tokens",
    "decode_source",
    "encode_source",
    "ParseOutcome",
    "SyntaxTree",
    "parse_method",
    "shape_fingerprint",
    "iter_nodes",
    "method_name",
    "Binding",
    "SymbolTable",
    "resolve",
    "occurrences",
    "RoleConflict",
    "RoleReport",
    "detect_steppers",
    "detect_walkers",
    "detect_roles",
    "Patch",
    "apply_patches",
    "AugmentResult",
    "TransformResult",
    "augment",
    "strip_roles",
    "splitmix64",
    "transform_rename",
    "MethodRecord",
    "CorpusManifest",
    "EvalSuite",
    "StatsReport",
    "ingest",
    "emit",
    "run_detect",
    "run_augment",
    "run_transform",
    "filter_pair",
    "build_eval_suite",
    "method_targets",
    "stats",
    "NamePair",
    "EvalReport",
    "subtokenize",
    "score_example",
    "evaluate",
    "compare_reports",
    "CommandConfig",
    "ConfigError",
    "resolve_config",
]
