"""Stepper and walker detection over resolved method trees.

Detectors are small objects registered in :mod:`rolemark.base`; ``detect_roles``
runs every registered detector and settles conflicts so each binding keeps at
most one role. New roles plug in through ``register_role_detector`` without
touching this module.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .base import (
    ARITHMETIC_BINARY_OPS,
    ITERATOR_TYPE_NAMES,
    NUMERIC_TYPE_NAMES,
    STEPPER_COMPOUND_OPS,
    STEPPER_UNARY_OPS,
    WALKER_ADVANCE_METHODS,
    WALKER_CONDITION_METHODS,
    Role,
    RoleAssignment,
    RoleDetector,
    RuleId,
    list_role_detectors,
    register_role_detector,
)
from .binding import Binding, SymbolTable
from .lexer import byte_span
from .syntax import (
    LOOP_NODES,
    Assignment,
    BasicFor,
    Binary,
    DoWhile,
    EnhancedFor,
    Identifier,
    LocalVarDecl,
    MethodCall,
    Node,
    SyntaxTree,
    Unary,
    While,
    find_nodes,
    iter_nodes,
    strip_parens,
)

logger = logging.getLogger(__name__)

_RULE_ORDER = {rule: index for index, rule in enumerate(RuleId)}


@dataclass(frozen=True)
class RoleConflict:
    """A binding that more than one detector claimed before resolution."""

    binding_id: int
    roles: Tuple[Role, ...]

    def as_dict(self, table: Optional[SymbolTable] = None) -> Dict[str, object]:
        payload: Dict[str, object] = {
            "binding": self.binding_id,
            "roles": [role.value for role in self.roles],
        }
        if table is not None:
            payload["name"] = table.binding(self.binding_id).name
        return payload


@dataclass(frozen=True)
class RoleReport:
    assignments: Tuple[RoleAssignment, ...]
    conflicts: Tuple[RoleConflict, ...]

    @property
    def steppers(self) -> int:
        return sum(1 for item in self.assignments if item.role is Role.STEPPER)

    @property
    def walkers(self) -> int:
        return sum(1 for item in self.assignments if item.role is Role.WALKER)

    @property
    def counts(self) -> Dict[str, int]:
        return {"steppers": self.steppers, "walkers": self.walkers}

    def role_of(self, binding_id: int) -> Optional[Role]:
        for item in self.assignments:
            if item.binding_id == binding_id:
                return item.role
        return None

    def as_dict(self, method_id: str, table: SymbolTable, source: str) -> Dict[str, object]:
        """JSON document emitted by the ``detect`` command for one method.

        Evidence spans are byte ranges into the UTF-8 encoded ``source``.
        """
        return {
            "methodId": method_id,
            "assignments": [
                {
                    "name": table.binding(item.binding_id).name,
                    "binding": item.binding_id,
                    "role": item.role.value,
                    "rule": item.rule_id.value,
                    "span": list(byte_span(source, item.evidence_span)),
                }
                for item in self.assignments
            ],
            "conflicts": [conflict.as_dict(table) for conflict in self.conflicts],
            "counts": self.counts,
        }


EMPTY_REPORT = RoleReport(assignments=(), conflicts=())


def _bound(table: SymbolTable, node: Optional[Node]) -> Optional[Binding]:
    if node is None:
        return None
    node = strip_parens(node)
    if not isinstance(node, Identifier):
        return None
    return table.binding_at(node.span)


def _mentions(table: SymbolTable, node: Node, binding: Binding) -> bool:
    return any(
        isinstance(item, Identifier) and table.binding_at(item.span) == binding
        for item in iter_nodes(node)
    )


def _is_numeric(binding: Binding) -> bool:
    return binding.type_simple_name in NUMERIC_TYPE_NAMES


def _steps(table: SymbolTable, update: Node, binding: Binding) -> bool:
    update = strip_parens(update)
    if isinstance(update, Unary) and update.op in STEPPER_UNARY_OPS:
        return _bound(table, update.operand) == binding
    if isinstance(update, Assignment) and _bound(table, update.lhs) == binding:
        if update.op in STEPPER_COMPOUND_OPS:
            return True
        if update.op == "=":
            rhs = strip_parens(update.rhs)
            return (
                isinstance(rhs, Binary)
                and rhs.op in ARITHMETIC_BINARY_OPS
                and _mentions(table, rhs, binding)
            )
    return False


def _init_bindings(table: SymbolTable, loop: BasicFor) -> List[Binding]:
    found: List[Binding] = []
    for item in loop.init:
        if isinstance(item, LocalVarDecl):
            candidates = [table.binding_at(decl.name.span) for decl in item.declarators]
        else:
            item = strip_parens(item)
            lhs = item.lhs if isinstance(item, Assignment) else None
            candidates = [_bound(table, lhs)]
        for binding in candidates:
            if binding is not None and binding not in found:
                found.append(binding)
    return found


def detect_steppers(tree: SyntaxTree, table: SymbolTable) -> List[RoleAssignment]:
    """Numeric variables set up in a for-init clause and stepped in its update.

    Declared and merely assigned init variables both qualify; an update clause
    with several updates may yield several steppers.
    """
    assignments: List[RoleAssignment] = []
    for loop in find_nodes(tree, BasicFor):
        assert isinstance(loop, BasicFor)
        for binding in _init_bindings(table, loop):
            if not _is_numeric(binding):
                continue
            if any(_steps(table, update, binding) for update in loop.update):
                assignments.append(
                    RoleAssignment(binding.id, Role.STEPPER, loop.span, RuleId.STEP_FOR_UPDATE)
                )
    return _dedupe(assignments)


def _loop_condition(loop: Node) -> Optional[Node]:
    if isinstance(loop, (While, DoWhile, BasicFor)):
        return loop.cond
    return None


def _api_calls(
    table: SymbolTable, root: Optional[Node], methods: frozenset
) -> Iterable[Tuple[MethodCall, Binding]]:
    if root is None:
        return
    for call in find_nodes(root, MethodCall):
        assert isinstance(call, MethodCall)
        if call.name.name not in methods or call.args:
            continue
        binding = _bound(table, call.receiver)
        if binding is not None:
            yield call, binding


def detect_walkers(tree: SyntaxTree, table: SymbolTable) -> List[RoleAssignment]:
    """Iterator-driven variables and enhanced-for loop variables."""
    assignments: List[RoleAssignment] = []
    for loop in find_nodes(tree, *LOOP_NODES):
        for _call, binding in _api_calls(table, _loop_condition(loop), WALKER_CONDITION_METHODS):
            assignments.append(RoleAssignment(binding.id, Role.WALKER, loop.span, RuleId.WALK_ITER_API))
        body = getattr(loop, "body", None)
        for _call, binding in _api_calls(table, body, WALKER_ADVANCE_METHODS):
            if binding.type_simple_name in ITERATOR_TYPE_NAMES:
                assignments.append(
                    RoleAssignment(binding.id, Role.WALKER, loop.span, RuleId.WALK_ITER_API)
                )
        if isinstance(loop, EnhancedFor):
            binding = table.binding_at(loop.typed_var.span)
            if binding is not None:
                assignments.append(
                    RoleAssignment(binding.id, Role.WALKER, loop.span, RuleId.WALK_ENHANCED_FOR)
                )
    return _dedupe(assignments)


def _sort_key(item: RoleAssignment) -> Tuple[int, int, int, int]:
    return (item.binding_id, item.role.precedence, item.evidence_span.start, _RULE_ORDER[item.rule_id])


def _dedupe(assignments: Iterable[RoleAssignment]) -> List[RoleAssignment]:
    """Keep the earliest evidence per (binding, role)."""
    kept: Dict[Tuple[int, Role], RoleAssignment] = {}
    for item in sorted(assignments, key=_sort_key):
        kept.setdefault((item.binding_id, item.role), item)
    return sorted(kept.values(), key=_sort_key)


class StepperDetector:
    key = "stepper-for-update"
    role = Role.STEPPER
    description = "numeric for-loop variable advanced by an arithmetic update"

    def detect(self, tree: SyntaxTree, table: SymbolTable) -> List[RoleAssignment]:
        return detect_steppers(tree, table)


class WalkerDetector:
    key = "walker-iteration"
    role = Role.WALKER
    description = "iterator driven by hasNext/next style calls, or an enhanced-for variable"

    def detect(self, tree: SyntaxTree, table: SymbolTable) -> List[RoleAssignment]:
        return detect_walkers(tree, table)


register_role_detector(StepperDetector())
register_role_detector(WalkerDetector())


def detect_roles(
    tree: SyntaxTree,
    table: SymbolTable,
    detectors: Optional[Sequence[RoleDetector]] = None,
) -> RoleReport:
    """Run all detectors and keep one role per binding.

    The role with the highest precedence wins (Stepper before Walker); every
    binding that collected more than one role is listed in ``conflicts``.
    """
    active = list(detectors) if detectors is not None else list_role_detectors()
    observed: Dict[int, List[RoleAssignment]] = {}
    for detector in active:
        for item in detector.detect(tree, table):
            observed.setdefault(item.binding_id, []).append(item)

    assignments: List[RoleAssignment] = []
    conflicts: List[RoleConflict] = []
    for binding_id in sorted(observed):
        candidates = sorted(observed[binding_id], key=_sort_key)
        roles = tuple(sorted({item.role for item in candidates}, key=lambda role: role.precedence))
        if len(roles) > 1:
            logger.debug(
                "binding %r matched roles %s; keeping %s",
                table.binding(binding_id).name,
                [role.value for role in roles],
                roles[0].value,
            )
            conflicts.append(RoleConflict(binding_id=binding_id, roles=roles))
        assignments.append(candidates[0])
    return RoleReport(assignments=tuple(assignments), conflicts=tuple(conflicts))


__all__ = [
    "RoleConflict",
    "RoleReport",
    "EMPTY_REPORT",
    "StepperDetector",
    "WalkerDetector",
    "detect_steppers",
    "detect_walkers",
    "detect_roles",
]
