"""Lexical-scope resolution of variable identifiers within one method.

Bindings get dense positional ids in declaration order, so the same method
before and after a consistent rename yields bindings with the same ids.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from functools import cached_property
from types import MappingProxyType
from typing import Callable, Dict, FrozenSet, List, Mapping, Optional, Tuple, Union

from .base import DeclKind, Span, UnknownBindingError
from .lexer import TokenKind
from .syntax import (
    Assert,
    BasicFor,
    Block,
    Break,
    CatchClause,
    Continue,
    DoWhile,
    Empty,
    EnhancedFor,
    ExprStmt,
    FieldAccess,
    Identifier,
    IdentContext,
    If,
    Labeled,
    Lambda,
    LocalVarDecl,
    MethodDecl,
    Node,
    Other,
    Return,
    Synchronized,
    SyntaxTree,
    This,
    Throw,
    Try,
    TypeRef,
    While,
    child_nodes,
)

logger = logging.getLogger(__name__)

# Opaque regions whose identifiers are never variable references.
NON_VARIABLE_REGIONS = frozenset({"modifiers", "type-parameters", "throws", "type-arguments"})


@dataclass(frozen=True)
class Binding:
    """A declaration and the scope in which its name refers to it.

    ``type_simple_name`` is the unqualified type name without type arguments,
    or ``None`` for array types and bindings without a declared type.
    """

    id: int
    name: str
    decl_kind: DeclKind
    declared_type: Optional[str]
    type_simple_name: Optional[str]
    decl_span: Span
    scope_span: Span
    renameable: bool = True


@dataclass(frozen=True, eq=False)
class SymbolTable:
    bindings: Tuple[Binding, ...]
    occurrences: Mapping[int, Tuple[Span, ...]]
    free_names: FrozenSet[str]
    free_occurrences: Tuple[Span, ...]
    identifier_names: FrozenSet[str]
    # Identifier tokens inside lambdas and other opaque regions that name an
    # in-scope binding. They are not occurrences: rewrites never touch them.
    opaque_references: Mapping[Span, int] = MappingProxyType({})

    def binding(self, binding_id: int) -> Binding:
        if not 0 <= binding_id < len(self.bindings):
            raise UnknownBindingError(f"No binding with id {binding_id} in this method.")
        return self.bindings[binding_id]

    @cached_property
    def _by_span(self) -> Dict[Span, int]:
        return {
            span: binding_id
            for binding_id, spans in self.occurrences.items()
            for span in spans
        }

    def binding_at(self, span: Span) -> Optional[Binding]:
        """The binding owning the occurrence at ``span``, if any."""
        binding_id = self._by_span.get(span)
        return None if binding_id is None else self.bindings[binding_id]

    def bindings_named(self, name: str) -> List[Binding]:
        return [binding for binding in self.bindings if binding.name == name]

    def renameable_bindings(self) -> List[Binding]:
        return [binding for binding in self.bindings if binding.renameable]


class _Resolver:
    def __init__(self, tree: SyntaxTree) -> None:
        self.tree = tree
        self.bindings: List[Binding] = []
        self.occurrences: Dict[int, List[Span]] = {}
        self.free_names: set = set()
        self.free_occurrences: List[Span] = []
        self.frozen_ids: set = set()
        self.opaque_references: Dict[Span, int] = {}
        # Each scope maps names to binding ids and remembers where it ends.
        self.scopes: List[Tuple[Dict[str, int], int]] = []

    # -- scopes ---------------------------------------------------------------

    def _push(self, end: int) -> None:
        self.scopes.append(({}, end))

    def _pop(self) -> None:
        self.scopes.pop()

    def _scope_end(self) -> int:
        return self.scopes[-1][1] if self.scopes else len(self.tree.source)

    def _lookup(self, name: str) -> Optional[int]:
        for names, _end in reversed(self.scopes):
            if name in names:
                return names[name]
        return None

    def _declare(
        self,
        name: Identifier,
        kind: DeclKind,
        type_ref: Optional[TypeRef],
        extra_dims: int,
        scope: Span,
        declared_type: Optional[str] = None,
    ) -> None:
        if type_ref is not None and declared_type is None:
            declared_type = type_ref.text + "[]" * extra_dims
        simple = None
        if type_ref is not None and type_ref.dims == 0 and extra_dims == 0:
            simple = type_ref.simple_name
        binding = Binding(
            id=len(self.bindings),
            name=name.name,
            decl_kind=kind,
            declared_type=declared_type,
            type_simple_name=simple,
            decl_span=name.span,
            scope_span=scope,
        )
        self.bindings.append(binding)
        self.occurrences[binding.id] = [name.span]
        self.scopes[-1][0][name.name] = binding.id

    # -- traversal ------------------------------------------------------------

    def run(self) -> SymbolTable:
        self._visit(self.tree.root)
        bindings = tuple(
            replace(binding, renameable=False) if binding.id in self.frozen_ids else binding
            for binding in self.bindings
        )
        occurrences = MappingProxyType(
            {binding_id: tuple(sorted(spans)) for binding_id, spans in self.occurrences.items()}
        )
        identifier_names = frozenset(
            token.text for token in self.tree.tokens if token.kind is TokenKind.IDENTIFIER
        )
        return SymbolTable(
            bindings=bindings,
            occurrences=occurrences,
            free_names=frozenset(self.free_names),
            free_occurrences=tuple(sorted(self.free_occurrences)),
            identifier_names=identifier_names,
            opaque_references=MappingProxyType(dict(self.opaque_references)),
        )

    def _visit(self, node: Node) -> None:
        handler = self._HANDLERS.get(type(node))
        if handler is not None:
            handler(self, node)
        elif isinstance(node, _STATEMENT_TYPES):
            for child in child_nodes(node):
                self._visit(child)
        else:
            self._visit_expression(node)

    def _visit_method(self, node: MethodDecl) -> None:
        self._push(node.span.end)
        for param in node.params:
            self._declare(
                param.name,
                DeclKind.PARAMETER,
                param.type,
                param.dims + (1 if param.varargs else 0),
                Span(param.span.start, node.span.end),
                declared_type=param.type.text + ("..." if param.varargs else "") + "[]" * param.dims,
            )
        if node.body is not None:
            self._visit(node.body)
        self._pop()

    def _visit_block(self, node: Block) -> None:
        self._push(node.span.end)
        for statement in node.statements:
            self._visit(statement)
        self._pop()

    def _declare_locals(self, node: LocalVarDecl, kind: DeclKind, scope_end: int) -> None:
        for declarator in node.declarators:
            self._declare(
                declarator.name,
                kind,
                node.type,
                declarator.dims,
                Span(declarator.span.start, scope_end),
            )
            if declarator.init is not None:
                self._visit_expression(declarator.init)

    def _visit_local(self, node: LocalVarDecl) -> None:
        self._declare_locals(node, DeclKind.LOCAL, self._scope_end())

    def _visit_basic_for(self, node: BasicFor) -> None:
        self._push(node.span.end)
        for item in node.init:
            if isinstance(item, LocalVarDecl):
                self._declare_locals(item, DeclKind.FOR_INIT, node.span.end)
            else:
                self._visit_expression(item)
        if node.cond is not None:
            self._visit_expression(node.cond)
        for item in node.update:
            self._visit_expression(item)
        self._visit(node.body)
        self._pop()

    def _visit_enhanced_for(self, node: EnhancedFor) -> None:
        self._visit_expression(node.iterable)
        self._push(node.span.end)
        self._declare(
            node.typed_var,
            DeclKind.ENHANCED_FOR_VAR,
            node.var_type,
            0,
            Span(node.typed_var.span.start, node.span.end),
        )
        self._visit(node.body)
        self._pop()

    def _visit_try(self, node: Try) -> None:
        self._push(node.body.span.end)
        for resource in node.resources:
            if isinstance(resource, LocalVarDecl):
                self._declare_locals(resource, DeclKind.LOCAL, node.body.span.end)
            else:
                self._visit_expression(resource)
        self._visit(node.body)
        self._pop()
        for clause in node.catches:
            self._visit_catch(clause)
        if node.finally_block is not None:
            self._visit(node.finally_block)

    def _visit_catch(self, node: CatchClause) -> None:
        self._push(node.span.end)
        first, last = node.types[0], node.types[-1]
        type_text = Span(first.span.start, last.span.end).slice(self.tree.source)
        self._declare(
            node.param,
            DeclKind.CAUGHT_EXCEPTION,
            first if len(node.types) == 1 else None,
            0,
            node.span,
            declared_type=type_text,
        )
        self._visit(node.body)
        self._pop()

    def _visit_jump(self, node: Node) -> None:
        """Labels on break and continue are not variables."""

    def _visit_expression(self, node: Node) -> None:
        stack: List[Node] = [node]
        while stack:
            current = stack.pop()
            if isinstance(current, Identifier):
                self._resolve_identifier(current)
                continue
            if isinstance(current, (Other, Lambda)):
                self._visit_opaque(current)
                continue
            if isinstance(current, FieldAccess):
                if isinstance(current.target, This):
                    self.free_names.add(current.name.name)
                stack.append(current.target)
                continue
            if isinstance(current, TypeRef):
                continue
            stack.extend(reversed(list(child_nodes(current))))

    def _resolve_identifier(self, node: Identifier) -> None:
        if node.context is not IdentContext.EXPRESSION:
            return
        binding_id = self._lookup(node.name)
        if binding_id is None:
            self.free_names.add(node.name)
            self.free_occurrences.append(node.span)
            return
        self.occurrences[binding_id].append(node.span)

    def _visit_opaque(self, node: Node) -> None:
        if isinstance(node, Other) and node.label in NON_VARIABLE_REGIONS:
            return
        for token in self.tree.tokens_in(node.span):
            if token.kind is not TokenKind.IDENTIFIER:
                continue
            self.free_names.add(token.text)
            binding_id = self._lookup(token.text)
            if binding_id is None:
                continue
            self.opaque_references[token.span] = binding_id
            if binding_id not in self.frozen_ids:
                logger.debug(
                    "binding %r is used inside an opaque %s region; not renameable",
                    token.text,
                    getattr(node, "label", "lambda"),
                )
                self.frozen_ids.add(binding_id)

    _HANDLERS: Dict[type, Callable[["_Resolver", Node], None]] = {
        MethodDecl: _visit_method,
        Block: _visit_block,
        LocalVarDecl: _visit_local,
        BasicFor: _visit_basic_for,
        EnhancedFor: _visit_enhanced_for,
        Try: _visit_try,
        Break: _visit_jump,
        Continue: _visit_jump,
    }


_STATEMENT_TYPES: Tuple[type, ...] = (
    While,
    DoWhile,
    If,
    ExprStmt,
    Return,
    Throw,
    Labeled,
    Synchronized,
    Assert,
    Empty,
)


def resolve(tree: SyntaxTree) -> SymbolTable:
    """Attribute every variable-position identifier to its innermost binding.

    Names that are never declared in the method (fields, statics, outer
    variables) land in ``free_names``. Method names, type names, labels and
    selectors after ``.`` are never occurrences. A binding whose name shows up
    inside an opaque region within its scope is marked non-renameable.
    """
    return _Resolver(tree).run()


def occurrences(table: SymbolTable, binding: Union[Binding, int]) -> List[Span]:
    """Occurrence spans of ``binding`` in ascending order, declaration included."""
    binding_id = binding.id if isinstance(binding, Binding) else binding
    known = table.binding(binding_id)
    if isinstance(binding, Binding) and binding != known:
        raise UnknownBindingError(f"Binding {binding.name!r} does not belong to this table.")
    return list(table.occurrences[binding_id])


__all__ = [
    "NON_VARIABLE_REGIONS",
    "Binding",
    "SymbolTable",
    "resolve",
    "occurrences",
]
