"""Span-preserving syntax trees for single Java methods.

The parser covers what role analysis needs: declarations, loops, assignments,
unary updates, calls, field access, casts, generics in types and array types.
Lambdas, switch blocks, anonymous and local class bodies, method references and
``instanceof`` patterns are kept as opaque regions found by balanced-delimiter
scanning. Every node records the offsets of the source text it came from.
"""

from __future__ import annotations

import bisect
import hashlib
import logging
from dataclasses import dataclass, fields
from enum import Enum
from functools import cached_property, lru_cache
from typing import (
    Callable,
    Dict,
    Iterator,
    List,
    Mapping,
    NewType,
    Optional,
    Tuple,
    TypeVar,
    Union,
)

from .base import ParseFailure, Span
from .lexer import (
    PRIMITIVE_TYPES,
    Token,
    TokenKind,
    byte_offset,
    decode_source,
    significant,
    tokenize,
)

logger = logging.getLogger(__name__)

Fingerprint = NewType("Fingerprint", str)

T = TypeVar("T")


class IdentContext(str, Enum):
    EXPRESSION = "expression"
    DECLARATION = "declaration"
    METHOD_NAME = "method-name"
    FIELD = "field"
    LABEL = "label"


VARIABLE_CONTEXTS = frozenset({IdentContext.EXPRESSION, IdentContext.DECLARATION})


@dataclass(frozen=True)
class Node:
    span: Span


@dataclass(frozen=True)
class Identifier(Node):
    name: str
    context: IdentContext


@dataclass(frozen=True)
class TypeRef(Node):
    text: str
    simple_name: str
    dims: int


@dataclass(frozen=True)
class Literal(Node):
    text: str
    kind: str


@dataclass(frozen=True)
class Other(Node):
    """Opaque region; role detection and binding never look inside."""

    text: str
    label: str


@dataclass(frozen=True)
class Lambda(Node):
    text: str


@dataclass(frozen=True)
class Parameter(Node):
    modifiers: Optional[Other]
    type: TypeRef
    name: Identifier
    varargs: bool
    dims: int


@dataclass(frozen=True)
class Block(Node):
    statements: Tuple[Node, ...]


@dataclass(frozen=True)
class MethodDecl(Node):
    modifiers: Optional[Other]
    type_params: Optional[Other]
    return_type: Optional[TypeRef]
    name: Identifier
    params: Tuple[Parameter, ...]
    throws: Optional[Other]
    body: Optional[Block]


@dataclass(frozen=True)
class VarDeclarator(Node):
    name: Identifier
    dims: int
    init: Optional[Node]


@dataclass(frozen=True)
class LocalVarDecl(Node):
    modifiers: Optional[Other]
    type: TypeRef
    declarators: Tuple[VarDeclarator, ...]


@dataclass(frozen=True)
class BasicFor(Node):
    init: Tuple[Node, ...]
    cond: Optional[Node]
    update: Tuple[Node, ...]
    body: Node


@dataclass(frozen=True)
class EnhancedFor(Node):
    modifiers: Optional[Other]
    var_type: TypeRef
    typed_var: Identifier
    iterable: Node
    body: Node


@dataclass(frozen=True)
class While(Node):
    cond: Node
    body: Node


@dataclass(frozen=True)
class DoWhile(Node):
    body: Node
    cond: Node


@dataclass(frozen=True)
class If(Node):
    cond: Node
    then: Node
    otherwise: Optional[Node]


@dataclass(frozen=True)
class ExprStmt(Node):
    expr: Node


@dataclass(frozen=True)
class Return(Node):
    value: Optional[Node]


@dataclass(frozen=True)
class Throw(Node):
    value: Node


@dataclass(frozen=True)
class Break(Node):
    label: Optional[Identifier]


@dataclass(frozen=True)
class Continue(Node):
    label: Optional[Identifier]


@dataclass(frozen=True)
class Labeled(Node):
    label: Identifier
    body: Node


@dataclass(frozen=True)
class CatchClause(Node):
    modifiers: Optional[Other]
    types: Tuple[TypeRef, ...]
    param: Identifier
    body: Block


@dataclass(frozen=True)
class Try(Node):
    resources: Tuple[Node, ...]
    body: Block
    catches: Tuple[CatchClause, ...]
    finally_block: Optional[Block]


@dataclass(frozen=True)
class Synchronized(Node):
    lock: Node
    body: Block


@dataclass(frozen=True)
class Assert(Node):
    cond: Node
    message: Optional[Node]


@dataclass(frozen=True)
class Empty(Node):
    pass


@dataclass(frozen=True)
class Assignment(Node):
    op: str
    lhs: Node
    rhs: Node


@dataclass(frozen=True)
class Unary(Node):
    op: str
    operand: Node
    prefix: bool


@dataclass(frozen=True)
class Binary(Node):
    op: str
    left: Node
    right: Node


@dataclass(frozen=True)
class Conditional(Node):
    cond: Node
    then: Node
    otherwise: Node


@dataclass(frozen=True)
class Cast(Node):
    type: TypeRef
    operand: Node


@dataclass(frozen=True)
class InstanceOf(Node):
    operand: Node
    type: TypeRef


@dataclass(frozen=True)
class MethodCall(Node):
    receiver: Optional[Node]
    name: Identifier
    type_args: Optional[Other]
    args: Tuple[Node, ...]


@dataclass(frozen=True)
class CtorCall(Node):
    keyword: str
    args: Tuple[Node, ...]


@dataclass(frozen=True)
class FieldAccess(Node):
    target: Node
    name: Identifier


@dataclass(frozen=True)
class ArrayAccess(Node):
    array: Node
    index: Node


@dataclass(frozen=True)
class ArrayInit(Node):
    elements: Tuple[Node, ...]


@dataclass(frozen=True)
class NewObject(Node):
    type: TypeRef
    args: Tuple[Node, ...]
    body: Optional[Other]


@dataclass(frozen=True)
class NewArray(Node):
    type: TypeRef
    dims: Tuple[Node, ...]
    init: Optional[ArrayInit]


@dataclass(frozen=True)
class Paren(Node):
    expr: Node


@dataclass(frozen=True)
class This(Node):
    pass


@dataclass(frozen=True)
class Super(Node):
    pass


@dataclass(frozen=True)
class ClassLiteral(Node):
    type: TypeRef


OPAQUE_NODES = (Other, Lambda)
LOOP_NODES = (BasicFor, EnhancedFor, While, DoWhile)


@dataclass(frozen=True)
class SyntaxTree:
    """A parsed method together with the text and tokens it was parsed from."""

    root: MethodDecl
    source: str
    tokens: Tuple[Token, ...]

    def text_of(self, node: Node) -> str:
        return node.span.slice(self.source)

    @cached_property
    def significant_tokens(self) -> Tuple[Token, ...]:
        return tuple(significant(self.tokens))

    @cached_property
    def _significant_starts(self) -> List[int]:
        return [token.start for token in self.significant_tokens]

    def tokens_in(self, span: Span) -> List[Token]:
        """Significant tokens lying inside ``span``."""
        lo = bisect.bisect_left(self._significant_starts, span.start)
        result: List[Token] = []
        for token in self.significant_tokens[lo:]:
            if token.end > span.end:
                break
            result.append(token)
        return result


@dataclass(frozen=True)
class FailureInfo:
    """Why parsing stopped; ``position`` is a byte offset into the encoded source."""

    reason: str
    position: int


@dataclass(frozen=True)
class ParseOutcome:
    """Either a tree or a failure, never both."""

    tree: Optional[SyntaxTree] = None
    failure: Optional[FailureInfo] = None

    def __post_init__(self) -> None:
        if (self.tree is None) == (self.failure is None):
            raise ValueError("ParseOutcome needs exactly one of tree or failure.")

    @property
    def ok(self) -> bool:
        return self.tree is not None

    def unwrap(self) -> SyntaxTree:
        if self.tree is None:
            assert self.failure is not None
            raise ParseFailure(self.failure.reason, self.failure.position)
        return self.tree


@lru_cache(maxsize=None)
def _node_field_names(node_type: type) -> Tuple[str, ...]:
    return tuple(item.name for item in fields(node_type) if item.name != "span")


def child_nodes(node: Node) -> Iterator[Node]:
    """Direct children of ``node`` in field order."""
    for name in _node_field_names(type(node)):
        value = getattr(node, name)
        if isinstance(value, Node):
            yield value
        elif isinstance(value, tuple):
            for item in value:
                if isinstance(item, Node):
                    yield item


def iter_nodes(node: Union[Node, SyntaxTree]) -> Iterator[Node]:
    """Pre-order traversal without recursion (expression chains can be deep)."""
    start = node.root if isinstance(node, SyntaxTree) else node
    stack: List[Node] = [start]
    while stack:
        current = stack.pop()
        yield current
        stack.extend(reversed(list(child_nodes(current))))


def find_nodes(node: Union[Node, SyntaxTree], *node_types: type) -> List[Node]:
    return [item for item in iter_nodes(node) if isinstance(item, node_types)]


def method_name(tree: SyntaxTree) -> str:
    return tree.root.name.name


def strip_parens(node: Node) -> Node:
    while isinstance(node, Paren):
        node = node.expr
    return node


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_SYMBOLIC_KINDS = frozenset({TokenKind.OPERATOR, TokenKind.PUNCTUATION, TokenKind.KEYWORD})
_LITERAL_KINDS = {
    TokenKind.NUMERIC_LITERAL: "number",
    TokenKind.STRING_LITERAL: "string",
    TokenKind.CHAR_LITERAL: "char",
}
_KEYWORD_LITERALS = {"true": "boolean", "false": "boolean", "null": "null"}
_CLOSERS = {"(": ")", "[": "]", "{": "}"}

METHOD_MODIFIERS = frozenset(
    {
        "public",
        "protected",
        "private",
        "static",
        "abstract",
        "final",
        "native",
        "synchronized",
        "transient",
        "volatile",
        "strictfp",
        "default",
    }
)
LOCAL_MODIFIERS = frozenset({"final", "abstract", "static", "strictfp"})
LOCAL_TYPE_KEYWORDS = frozenset({"class", "interface", "enum"})

ASSIGNMENT_OPS = frozenset(
    {"=", "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=", "<<=", ">>=", ">>>="}
)
BINARY_PRECEDENCE: Dict[str, int] = {
    "||": 1,
    "&&": 2,
    "|": 3,
    "^": 4,
    "&": 5,
    "==": 6,
    "!=": 6,
    "<": 7,
    ">": 7,
    "<=": 7,
    ">=": 7,
    "instanceof": 7,
    "<<": 8,
    ">>": 8,
    ">>>": 8,
    "+": 9,
    "-": 9,
    "*": 10,
    "/": 10,
    "%": 10,
}
PREFIX_OPS = frozenset({"++", "--", "+", "-", "!", "~"})


class _MethodParser:
    def __init__(self, source: str, tokens: List[Token]) -> None:
        self.source = source
        self.sig = significant(tokens)
        self.pos = 0
        self.eof = Token(TokenKind.PUNCTUATION, "", Span(len(source), len(source)))

    # -- token plumbing -----------------------------------------------------

    def _peek(self, offset: int = 0) -> Token:
        index = self.pos + offset
        if index < len(self.sig):
            return self.sig[index]
        return self.eof

    def _at(self, *texts: str, offset: int = 0) -> bool:
        token = self._peek(offset)
        return token.kind in _SYMBOLIC_KINDS and token.text in texts

    def _at_ident(self, offset: int = 0) -> bool:
        return self._peek(offset).kind is TokenKind.IDENTIFIER

    def _at_eof(self) -> bool:
        return self.pos >= len(self.sig)

    def _advance(self) -> Token:
        if self._at_eof():
            raise self._fail("unexpected end of input")
        token = self.sig[self.pos]
        self.pos += 1
        return token

    def _expect(self, text: str) -> Token:
        if not self._at(text):
            raise self._fail(f"expected {text!r}")
        return self._advance()

    def _expect_ident(self) -> Token:
        if not self._at_ident():
            raise self._fail("expected an identifier")
        return self._advance()

    def _fail(self, reason: str) -> ParseFailure:
        token = self._peek()
        found = token.text or "end of input"
        return ParseFailure(f"{reason}, found {found!r}", token.start)

    def _start(self) -> int:
        return self._peek().start

    def _end(self) -> int:
        return self.sig[self.pos - 1].end if self.pos else 0

    def _span_from(self, start: int) -> Span:
        return Span(start, self._end())

    def _speculate(self, parse: Callable[[], T]) -> Optional[T]:
        saved = self.pos
        try:
            return parse()
        except ParseFailure:
            self.pos = saved
            return None

    def _matching_index(self, index: int) -> Optional[int]:
        stack: List[str] = []
        for cursor in range(index, len(self.sig)):
            token = self.sig[cursor]
            if token.kind is not TokenKind.PUNCTUATION:
                continue
            if token.text in _CLOSERS:
                stack.append(_CLOSERS[token.text])
            elif token.text in (")", "]", "}"):
                if not stack or stack.pop() != token.text:
                    return None
                if not stack:
                    return cursor
        return None

    def _skip_balanced(self) -> None:
        close = self._matching_index(self.pos)
        if close is None:
            raise self._fail("unbalanced delimiters")
        self.pos = close + 1

    def _other(self, start: int, label: str) -> Other:
        span = self._span_from(start)
        return Other(span=span, text=span.slice(self.source), label=label)

    def _identifier(self, token: Token, context: IdentContext) -> Identifier:
        return Identifier(span=token.span, name=token.text, context=context)

    # -- declarations ---------------------------------------------------------

    def parse_method(self) -> MethodDecl:
        start = self._start()
        modifiers = self._parse_modifiers(METHOD_MODIFIERS)
        type_params = None
        if self._at("<"):
            tp_start = self._start()
            self._skip_type_arguments()
            type_params = self._other(tp_start, "type-parameters")
        return_type: Optional[TypeRef] = None
        if not (self._at_ident() and self._at("(", offset=1)):
            if self._at("void"):
                token = self._advance()
                return_type = TypeRef(
                    span=token.span, text=token.text, simple_name="void", dims=0
                )
            else:
                return_type = self._parse_type()
        name = self._identifier(self._expect_ident(), IdentContext.METHOD_NAME)
        params = self._parse_parameters()
        self._parse_dims()
        throws = None
        if self._at("throws"):
            throws_start = self._start()
            self._advance()
            self._parse_type()
            while self._at(","):
                self._advance()
                self._parse_type()
            throws = self._other(throws_start, "throws")
        body: Optional[Block] = None
        if self._at(";"):
            self._advance()
        elif self._at("default"):
            raise self._fail("annotation member defaults are not methods")
        else:
            body = self._parse_block()
        if not self._at_eof():
            raise self._fail("unexpected tokens after method body")
        return MethodDecl(
            span=self._span_from(start),
            modifiers=modifiers,
            type_params=type_params,
            return_type=return_type,
            name=name,
            params=params,
            throws=throws,
            body=body,
        )

    def _parse_parameters(self) -> Tuple[Parameter, ...]:
        self._expect("(")
        params: List[Parameter] = []
        if self._at(")"):
            self._advance()
            return ()
        while True:
            start = self._start()
            modifiers = self._parse_modifiers(LOCAL_MODIFIERS)
            param_type = self._parse_type()
            varargs = False
            if self._at("..."):
                self._advance()
                varargs = True
            if self._at("this"):
                raise self._fail("receiver parameters are not supported")
            name = self._identifier(self._expect_ident(), IdentContext.DECLARATION)
            dims = self._parse_dims()
            params.append(
                Parameter(
                    span=self._span_from(start),
                    modifiers=modifiers,
                    type=param_type,
                    name=name,
                    varargs=varargs,
                    dims=dims,
                )
            )
            if self._at(","):
                self._advance()
                continue
            self._expect(")")
            return tuple(params)

    def _parse_modifiers(self, keywords: frozenset) -> Optional[Other]:
        start = self._start()
        consumed = False
        while True:
            token = self._peek()
            if (
                token.kind is TokenKind.KEYWORD
                and token.text in keywords
                and not (token.text == "synchronized" and self._at("(", offset=1))
            ):
                self._advance()
                consumed = True
                continue
            if token.is_op("@") and not self._peek(1).is_keyword("interface"):
                self._skip_annotation()
                consumed = True
                continue
            break
        if not consumed:
            return None
        return self._other(start, "modifiers")

    def _skip_annotation(self) -> None:
        self._expect("@")
        self._expect_ident()
        while self._at(".") and self._at_ident(offset=1):
            self._advance()
            self._advance()
        if self._at("("):
            self._skip_balanced()

    def _skip_type_arguments(self) -> None:
        self._expect("<")
        depth = 1
        while depth:
            token = self._peek()
            if token.is_op("<"):
                depth += 1
            elif token.is_op(">"):
                depth -= 1
            elif token.is_op("@"):
                self._skip_annotation()
                continue
            elif not (
                token.kind is TokenKind.IDENTIFIER
                or token.is_op(",", ".", "?", "&", "[", "]")
                or token.is_keyword("extends", "super", *PRIMITIVE_TYPES)
            ):
                raise self._fail("malformed type arguments")
            self._advance()

    def _parse_dims(self) -> int:
        dims = 0
        while self._at("[") and self._at("]", offset=1):
            self._advance()
            self._advance()
            dims += 1
        return dims

    def _parse_type(self) -> TypeRef:
        start = self._start()
        while self._at("@"):
            self._skip_annotation()
        token = self._peek()
        if token.kind is TokenKind.KEYWORD and token.text in PRIMITIVE_TYPES:
            simple = self._advance().text
        elif token.kind is TokenKind.IDENTIFIER:
            simple = self._advance().text
            if self._at("<"):
                self._skip_type_arguments()
            while self._at(".") and (self._at_ident(offset=1) or self._at("@", offset=1)):
                self._advance()
                while self._at("@"):
                    self._skip_annotation()
                simple = self._expect_ident().text
                if self._at("<"):
                    self._skip_type_arguments()
        else:
            raise self._fail("expected a type")
        dims = self._parse_dims()
        span = self._span_from(start)
        return TypeRef(span=span, text=span.slice(self.source), simple_name=simple, dims=dims)

    def _local_decl_ahead(self, followers: Tuple[str, ...]) -> bool:
        saved = self.pos
        try:
            self._parse_modifiers(LOCAL_MODIFIERS)
            self._parse_type()
            return self._at_ident() and self._at(*followers, offset=1)
        except ParseFailure:
            return False
        finally:
            self.pos = saved

    def _parse_local_var_decl(self) -> LocalVarDecl:
        start = self._start()
        modifiers = self._parse_modifiers(LOCAL_MODIFIERS)
        var_type = self._parse_type()
        declarators: List[VarDeclarator] = []
        while True:
            decl_start = self._start()
            name = self._identifier(self._expect_ident(), IdentContext.DECLARATION)
            dims = self._parse_dims()
            init: Optional[Node] = None
            if self._at("="):
                self._advance()
                init = self._parse_array_init() if self._at("{") else self.parse_expression()
            declarators.append(
                VarDeclarator(span=self._span_from(decl_start), name=name, dims=dims, init=init)
            )
            if not self._at(","):
                break
            self._advance()
        return LocalVarDecl(
            span=self._span_from(start),
            modifiers=modifiers,
            type=var_type,
            declarators=tuple(declarators),
        )

    def _local_type_ahead(self) -> bool:
        offset = 0
        while self._at(*LOCAL_MODIFIERS, offset=offset):
            offset += 1
        if self._at(*LOCAL_TYPE_KEYWORDS, offset=offset):
            return True
        token = self._peek(offset)
        return (
            token.kind is TokenKind.IDENTIFIER
            and token.text == "record"
            and self._at_ident(offset=offset + 1)
            and self._at("(", "<", offset=offset + 2)
        )

    def _parse_local_type(self) -> Other:
        start = self._start()
        self._parse_modifiers(LOCAL_MODIFIERS)
        while not self._at("{"):
            if self._at_eof() or self._at(";"):
                raise self._fail("malformed local type declaration")
            self._advance()
        self._skip_balanced()
        return self._other(start, "local-class")

    # -- statements -------------------------------------------------------------

    def _parse_block(self) -> Block:
        start = self._start()
        self._expect("{")
        statements: List[Node] = []
        while not self._at("}"):
            if self._at_eof():
                raise self._fail("unterminated block")
            statements.append(self.parse_statement())
        self._advance()
        return Block(span=self._span_from(start), statements=tuple(statements))

    def parse_statement(self) -> Node:
        start = self._start()
        token = self._peek()
        if token.is_op("{"):
            return self._parse_block()
        if token.is_op(";"):
            self._advance()
            return Empty(span=self._span_from(start))
        if token.kind is TokenKind.KEYWORD:
            handler = self._STATEMENT_KEYWORDS.get(token.text)
            if handler is not None:
                return handler(self)
        if token.kind is TokenKind.IDENTIFIER and self._at(":", offset=1):
            label = self._identifier(self._advance(), IdentContext.LABEL)
            self._advance()
            body = self.parse_statement()
            return Labeled(span=self._span_from(start), label=label, body=body)
        if self._at("@") and self._peek(1).is_keyword("interface"):
            raise self._fail("annotation type declarations are not statements")
        if self._local_type_ahead():
            return self._parse_local_type()
        if self._local_decl_ahead(("=", ";", ",", "[")):
            decl = self._parse_local_var_decl()
            self._expect(";")
            return LocalVarDecl(
                span=self._span_from(start),
                modifiers=decl.modifiers,
                type=decl.type,
                declarators=decl.declarators,
            )
        expr = self.parse_expression()
        self._expect(";")
        return ExprStmt(span=self._span_from(start), expr=expr)

    def _parse_paren_expression(self) -> Node:
        self._expect("(")
        expr = self.parse_expression()
        self._expect(")")
        return expr

    def _parse_if(self) -> If:
        start = self._start()
        self._expect("if")
        cond = self._parse_paren_expression()
        then = self.parse_statement()
        otherwise = None
        if self._at("else"):
            self._advance()
            otherwise = self.parse_statement()
        return If(span=self._span_from(start), cond=cond, then=then, otherwise=otherwise)

    def _parse_while(self) -> While:
        start = self._start()
        self._expect("while")
        cond = self._parse_paren_expression()
        body = self.parse_statement()
        return While(span=self._span_from(start), cond=cond, body=body)

    def _parse_do(self) -> DoWhile:
        start = self._start()
        self._expect("do")
        body = self.parse_statement()
        self._expect("while")
        cond = self._parse_paren_expression()
        self._expect(";")
        return DoWhile(span=self._span_from(start), body=body, cond=cond)

    def _parse_for(self) -> Node:
        start = self._start()
        self._expect("for")
        self._expect("(")
        if self._local_decl_ahead((":",)):
            modifiers = self._parse_modifiers(LOCAL_MODIFIERS)
            var_type = self._parse_type()
            typed_var = self._identifier(self._expect_ident(), IdentContext.DECLARATION)
            self._expect(":")
            iterable = self.parse_expression()
            self._expect(")")
            body = self.parse_statement()
            return EnhancedFor(
                span=self._span_from(start),
                modifiers=modifiers,
                var_type=var_type,
                typed_var=typed_var,
                iterable=iterable,
                body=body,
            )
        init: List[Node] = []
        if not self._at(";"):
            if self._local_decl_ahead(("=", ";", ",", "[")):
                init.append(self._parse_local_var_decl())
            else:
                init.extend(self._parse_expression_list())
        self._expect(";")
        cond = None if self._at(";") else self.parse_expression()
        self._expect(";")
        update: List[Node] = []
        if not self._at(")"):
            update.extend(self._parse_expression_list())
        self._expect(")")
        body = self.parse_statement()
        return BasicFor(
            span=self._span_from(start),
            init=tuple(init),
            cond=cond,
            update=tuple(update),
            body=body,
        )

    def _parse_expression_list(self) -> List[Node]:
        items = [self.parse_expression()]
        while self._at(","):
            self._advance()
            items.append(self.parse_expression())
        return items

    def _parse_return(self) -> Return:
        start = self._start()
        self._expect("return")
        value = None if self._at(";") else self.parse_expression()
        self._expect(";")
        return Return(span=self._span_from(start), value=value)

    def _parse_throw(self) -> Throw:
        start = self._start()
        self._expect("throw")
        value = self.parse_expression()
        self._expect(";")
        return Throw(span=self._span_from(start), value=value)

    def _parse_jump(self) -> Node:
        start = self._start()
        keyword = self._advance().text
        label = None
        if self._at_ident():
            label = self._identifier(self._advance(), IdentContext.LABEL)
        self._expect(";")
        node_type = Break if keyword == "break" else Continue
        return node_type(span=self._span_from(start), label=label)

    def _parse_try(self) -> Try:
        start = self._start()
        self._expect("try")
        resources: List[Node] = []
        if self._at("("):
            self._advance()
            while not self._at(")"):
                if self._local_decl_ahead(("=",)):
                    resources.append(self._parse_local_var_decl())
                else:
                    resources.append(self.parse_expression())
                if self._at(";"):
                    self._advance()
                elif not self._at(")"):
                    raise self._fail("expected ';' or ')' in try resources")
            self._advance()
        body = self._parse_block()
        catches: List[CatchClause] = []
        while self._at("catch"):
            catch_start = self._start()
            self._advance()
            self._expect("(")
            modifiers = self._parse_modifiers(LOCAL_MODIFIERS)
            types = [self._parse_type()]
            while self._at("|"):
                self._advance()
                types.append(self._parse_type())
            param = self._identifier(self._expect_ident(), IdentContext.DECLARATION)
            self._expect(")")
            catch_body = self._parse_block()
            catches.append(
                CatchClause(
                    span=self._span_from(catch_start),
                    modifiers=modifiers,
                    types=tuple(types),
                    param=param,
                    body=catch_body,
                )
            )
        finally_block = None
        if self._at("finally"):
            self._advance()
            finally_block = self._parse_block()
        if not catches and finally_block is None and not resources:
            raise self._fail("try without catch or finally")
        return Try(
            span=self._span_from(start),
            resources=tuple(resources),
            body=body,
            catches=tuple(catches),
            finally_block=finally_block,
        )

    def _parse_synchronized(self) -> Node:
        if not self._at("(", offset=1):
            return self._parse_declaration_statement()
        start = self._start()
        self._advance()
        lock = self._parse_paren_expression()
        body = self._parse_block()
        return Synchronized(span=self._span_from(start), lock=lock, body=body)

    def _parse_assert(self) -> Assert:
        start = self._start()
        self._expect("assert")
        cond = self.parse_expression()
        message = None
        if self._at(":"):
            self._advance()
            message = self.parse_expression()
        self._expect(";")
        return Assert(span=self._span_from(start), cond=cond, message=message)

    def _parse_switch(self) -> Other:
        start = self._start()
        self._expect("switch")
        if not self._at("("):
            raise self._fail("expected '(' after switch")
        self._skip_balanced()
        if not self._at("{"):
            raise self._fail("expected '{' after switch selector")
        self._skip_balanced()
        return self._other(start, "switch")

    def _parse_switch_statement(self) -> Node:
        region = self._parse_switch()
        if self._at(";"):
            self._advance()
            return self._other(region.span.start, "switch")
        return region

    def _parse_declaration_statement(self) -> Node:
        start = self._start()
        if self._local_type_ahead():
            return self._parse_local_type()
        if not self._local_decl_ahead(("=", ";", ",", "[")):
            raise self._fail("expected a declaration")
        decl = self._parse_local_var_decl()
        self._expect(";")
        return LocalVarDecl(
            span=self._span_from(start),
            modifiers=decl.modifiers,
            type=decl.type,
            declarators=decl.declarators,
        )

    def _parse_keyword_expression_statement(self) -> Node:
        start = self._start()
        if self._local_decl_ahead(("=", ";", ",", "[")):
            return self._parse_declaration_statement()
        expr = self.parse_expression()
        self._expect(";")
        return ExprStmt(span=self._span_from(start), expr=expr)

    _STATEMENT_KEYWORDS: Dict[str, Callable[["_MethodParser"], Node]] = {
        "if": _parse_if,
        "while": _parse_while,
        "do": _parse_do,
        "for": _parse_for,
        "return": _parse_return,
        "throw": _parse_throw,
        "break": _parse_jump,
        "continue": _parse_jump,
        "try": _parse_try,
        "synchronized": _parse_synchronized,
        "assert": _parse_assert,
        "switch": _parse_switch_statement,
        "final": _parse_declaration_statement,
        "abstract": _parse_declaration_statement,
        "static": _parse_declaration_statement,
        "strictfp": _parse_declaration_statement,
        "class": _parse_declaration_statement,
        "interface": _parse_declaration_statement,
        "enum": _parse_declaration_statement,
        "boolean": _parse_keyword_expression_statement,
        "byte": _parse_keyword_expression_statement,
        "char": _parse_keyword_expression_statement,
        "short": _parse_keyword_expression_statement,
        "int": _parse_keyword_expression_statement,
        "long": _parse_keyword_expression_statement,
        "float": _parse_keyword_expression_statement,
        "double": _parse_keyword_expression_statement,
    }

    # -- expressions ------------------------------------------------------------

    def parse_expression(self) -> Node:
        if self._lambda_ahead():
            return self._parse_lambda()
        start = self._start()
        left = self._parse_conditional()
        if self._peek().kind is TokenKind.OPERATOR and self._peek().text in ASSIGNMENT_OPS:
            op = self._advance().text
            rhs = self._parse_array_init() if self._at("{") else self.parse_expression()
            return Assignment(span=self._span_from(start), op=op, lhs=left, rhs=rhs)
        return left

    def _parse_conditional(self) -> Node:
        start = self._start()
        cond = self._parse_binary(1)
        if not self._at("?"):
            return cond
        self._advance()
        then = self.parse_expression()
        self._expect(":")
        otherwise = self._parse_lambda() if self._lambda_ahead() else self._parse_conditional()
        return Conditional(span=self._span_from(start), cond=cond, then=then, otherwise=otherwise)

    def _binary_operator(self) -> Tuple[Optional[str], int]:
        token = self._peek()
        if token.is_keyword("instanceof"):
            return "instanceof", 1
        if token.kind is not TokenKind.OPERATOR:
            return None, 0
        if token.text == ">":
            second = self._peek(1)
            if second.is_op(">") and second.start == token.end:
                third = self._peek(2)
                if third.is_op(">") and third.start == second.end:
                    return ">>>", 3
                return ">>", 2
            return ">", 1
        if token.text in BINARY_PRECEDENCE:
            return token.text, 1
        return None, 0

    def _parse_binary(self, min_precedence: int) -> Node:
        start = self._start()
        left = self._parse_unary()
        while True:
            op, width = self._binary_operator()
            if op is None:
                return left
            precedence = BINARY_PRECEDENCE[op]
            if precedence < min_precedence:
                return left
            for _ in range(width):
                self._advance()
            if op == "instanceof":
                left = self._parse_instanceof_rest(start, left)
                continue
            right = self._parse_binary(precedence + 1)
            left = Binary(span=self._span_from(start), op=op, left=left, right=right)

    def _parse_instanceof_rest(self, start: int, operand: Node) -> Node:
        if self._at("final"):
            self._advance()
            self._parse_type()
            self._expect_ident()
            return self._other(start, "instanceof-pattern")
        target = self._parse_type()
        if self._at_ident() or self._at("("):
            if self._at("("):
                self._skip_balanced()
            if self._at_ident():
                self._advance()
            return self._other(start, "instanceof-pattern")
        return InstanceOf(span=self._span_from(start), operand=operand, type=target)

    def _parse_unary(self) -> Node:
        start = self._start()
        token = self._peek()
        if token.kind is TokenKind.OPERATOR and token.text in PREFIX_OPS:
            op = self._advance().text
            operand = self._parse_unary()
            return Unary(span=self._span_from(start), op=op, operand=operand, prefix=True)
        if token.is_op("("):
            cast = self._speculate(self._parse_cast)
            if cast is not None:
                return cast
        return self._parse_postfix(self._parse_primary())

    def _parse_cast(self) -> Cast:
        start = self._start()
        self._expect("(")
        primitive = self._peek().kind is TokenKind.KEYWORD and self._peek().text in PRIMITIVE_TYPES
        cast_type = self._parse_type()
        while self._at("&"):
            self._advance()
            self._parse_type()
        self._expect(")")
        if not primitive or cast_type.dims:
            follower = self._peek()
            starts_operand = (
                follower.kind in (TokenKind.IDENTIFIER, *_LITERAL_KINDS)
                or follower.is_op("(", "!", "~")
                or follower.is_keyword("this", "super", "new", "true", "false", "null", "switch", *PRIMITIVE_TYPES)
            )
            if not starts_operand:
                raise self._fail("not a cast")
        operand = self._parse_lambda() if self._lambda_ahead() else self._parse_unary()
        return Cast(span=self._span_from(start), type=cast_type, operand=operand)

    def _lambda_ahead(self) -> bool:
        token = self._peek()
        if token.kind is TokenKind.IDENTIFIER:
            return self._at("->", offset=1)
        if token.is_op("("):
            close = self._matching_index(self.pos)
            if close is None or close + 1 >= len(self.sig):
                return False
            return self.sig[close + 1].is_op("->")
        return False

    def _parse_lambda(self) -> Lambda:
        start = self._start()
        if self._at_ident():
            self._advance()
        else:
            self._skip_balanced()
        self._expect("->")
        if self._at("{"):
            self._skip_balanced()
        else:
            self._scan_lambda_expression_body()
        span = self._span_from(start)
        return Lambda(span=span, text=span.slice(self.source))

    def _scan_lambda_expression_body(self) -> None:
        pending_ternaries = 0
        consumed = 0
        while not self._at_eof():
            token = self._peek()
            if token.is_op("(", "[", "{"):
                self._skip_balanced()
                consumed += 1
                continue
            if token.is_op(")", "]", "}", ",", ";"):
                break
            if token.is_op("?"):
                pending_ternaries += 1
            elif token.is_op(":"):
                if not pending_ternaries:
                    break
                pending_ternaries -= 1
            self._advance()
            consumed += 1
        if not consumed:
            raise self._fail("empty lambda body")

    def _parse_arguments(self) -> Tuple[Node, ...]:
        self._expect("(")
        if self._at(")"):
            self._advance()
            return ()
        args = self._parse_expression_list()
        self._expect(")")
        return tuple(args)

    def _parse_array_init(self) -> ArrayInit:
        start = self._start()
        self._expect("{")
        elements: List[Node] = []
        while not self._at("}"):
            elements.append(self._parse_array_init() if self._at("{") else self.parse_expression())
            if self._at(","):
                self._advance()
            elif not self._at("}"):
                raise self._fail("expected ',' or '}' in array initializer")
        self._advance()
        return ArrayInit(span=self._span_from(start), elements=tuple(elements))

    def _parse_primary(self) -> Node:
        start = self._start()
        token = self._peek()
        if token.kind in _LITERAL_KINDS:
            self._advance()
            return Literal(span=token.span, text=token.text, kind=_LITERAL_KINDS[token.kind])
        if token.kind is TokenKind.IDENTIFIER:
            self._advance()
            if self._at("("):
                name = self._identifier(token, IdentContext.METHOD_NAME)
                args = self._parse_arguments()
                return MethodCall(
                    span=self._span_from(start), receiver=None, name=name, type_args=None, args=args
                )
            return self._identifier(token, IdentContext.EXPRESSION)
        if token.kind is TokenKind.KEYWORD:
            if token.text in _KEYWORD_LITERALS:
                self._advance()
                return Literal(span=token.span, text=token.text, kind=_KEYWORD_LITERALS[token.text])
            if token.text in ("this", "super"):
                self._advance()
                if self._at("("):
                    args = self._parse_arguments()
                    return CtorCall(span=self._span_from(start), keyword=token.text, args=args)
                return This(span=token.span) if token.text == "this" else Super(span=token.span)
            if token.text == "new":
                return self._parse_new()
            if token.text == "switch":
                return self._parse_switch()
            if token.text in PRIMITIVE_TYPES or token.text == "void":
                self._advance()
                self._parse_dims()
                self._expect(".")
                self._expect("class")
                return self._class_literal(start)
        if token.is_op("("):
            self._advance()
            expr = self.parse_expression()
            self._expect(")")
            return Paren(span=self._span_from(start), expr=expr)
        raise self._fail("expected an expression")

    def _class_literal(self, start: int) -> ClassLiteral:
        span = self._span_from(start)
        type_end = span.end - len("class")
        type_span = Span(start, type_end)
        text = type_span.slice(self.source).rstrip(". \t\r\n")
        simple = text.replace("[]", "").split(".")[-1].strip() or text
        type_ref = TypeRef(
            span=Span(start, start + len(text)), text=text, simple_name=simple, dims=text.count("[]")
        )
        return ClassLiteral(span=span, type=type_ref)

    def _parse_new(self) -> Node:
        start = self._start()
        self._expect("new")
        if self._at("<"):
            self._skip_type_arguments()
        created = self._parse_type()
        if self._at("["):
            dims: List[Node] = []
            while self._at("[") and not self._at("]", offset=1):
                self._advance()
                dims.append(self.parse_expression())
                self._expect("]")
            self._parse_dims()
            return NewArray(span=self._span_from(start), type=created, dims=tuple(dims), init=None)
        if self._at("{"):
            if not created.dims:
                raise self._fail("array initializer needs an array type")
            init = self._parse_array_init()
            return NewArray(span=self._span_from(start), type=created, dims=(), init=init)
        args = self._parse_arguments()
        body = None
        if self._at("{"):
            body_start = self._start()
            self._skip_balanced()
            body = self._other(body_start, "anonymous-class")
        return NewObject(span=self._span_from(start), type=created, args=args, body=body)

    def _parse_postfix(self, node: Node) -> Node:
        start = node.span.start
        while True:
            if self._at("."):
                node = self._parse_selector(start, node)
                continue
            if self._at("["):
                if self._at("]", offset=1):
                    self._parse_dims()
                    self._expect(".")
                    self._expect("class")
                    node = self._class_literal(start)
                    continue
                self._advance()
                index = self.parse_expression()
                self._expect("]")
                node = ArrayAccess(span=self._span_from(start), array=node, index=index)
                continue
            if self._at("++", "--"):
                op = self._advance().text
                node = Unary(span=self._span_from(start), op=op, operand=node, prefix=False)
                continue
            if self._at("::"):
                self._advance()
                if self._at("<"):
                    self._skip_type_arguments()
                if self._at("new"):
                    self._advance()
                else:
                    self._expect_ident()
                node = self._other(start, "method-reference")
                continue
            return node

    def _parse_selector(self, start: int, target: Node) -> Node:
        self._expect(".")
        type_args: Optional[Other] = None
        if self._at("<"):
            args_start = self._start()
            self._skip_type_arguments()
            type_args = self._other(args_start, "type-arguments")
        token = self._peek()
        if token.kind is TokenKind.IDENTIFIER:
            self._advance()
            if self._at("("):
                name = self._identifier(token, IdentContext.METHOD_NAME)
                args = self._parse_arguments()
                return MethodCall(
                    span=self._span_from(start), receiver=target, name=name, type_args=type_args, args=args
                )
            if type_args is not None:
                raise self._fail("type arguments need a method call")
            return FieldAccess(
                span=self._span_from(start), target=target, name=self._identifier(token, IdentContext.FIELD)
            )
        if token.is_keyword("class"):
            self._advance()
            return self._class_literal(start)
        if token.is_keyword("this", "super"):
            self._advance()
            return self._other(start, f"qualified-{token.text}")
        if token.is_keyword("new"):
            self._parse_new()
            return self._other(start, "qualified-new")
        raise self._fail("expected a member name after '.'")


def parse_method(source: Union[bytes, str]) -> ParseOutcome:
    """Parse one method declaration; never raises.

    Modifiers, annotations, type parameters and ``throws`` clauses are kept as
    opaque regions. On failure the outcome carries the first error position and
    callers pass the source through untouched.
    """
    text = decode_source(source)
    tokens = tokenize(text)
    parser = _MethodParser(text, tokens)

    def failed(reason: str, position: int) -> ParseOutcome:
        return ParseOutcome(
            failure=FailureInfo(reason=reason, position=byte_offset(text, position))
        )

    try:
        if not parser.sig:
            raise ParseFailure("empty input", 0)
        root = parser.parse_method()
    except ParseFailure as exc:
        return failed(exc.reason, exc.position)
    except RecursionError:
        return failed("nesting too deep", parser._start())
    except Exception as exc:  # the pipeline must keep flowing on any input
        logger.debug("parser crashed on input: %s", exc, exc_info=True)
        return failed(f"internal parser error: {exc}", parser._start())
    return ParseOutcome(tree=SyntaxTree(root=root, source=text, tokens=tuple(tokens)))


# ---------------------------------------------------------------------------
# Shape fingerprint
# ---------------------------------------------------------------------------

_SCALAR_FIELDS: Dict[type, Tuple[str, ...]] = {
    Assignment: ("op",),
    Unary: ("op", "prefix"),
    Binary: ("op",),
    Literal: ("text",),
    CtorCall: ("keyword",),
    Parameter: ("varargs", "dims"),
    VarDeclarator: ("dims",),
}


def _normalized_text(
    tree: SyntaxTree, span: Span, references: Mapping[Span, int]
) -> str:
    """Token text of ``span`` with bound names replaced by their binding ids."""
    return " ".join(
        f"#{references[token.span]}" if token.span in references else token.text
        for token in tree.tokens_in(span)
    )


def shape_fingerprint(tree: SyntaxTree) -> Fingerprint:
    """Digest of the tree modulo variable names and layout.

    Identifiers bound to a declaration are replaced by the binding's positional
    index; free names keep their text. Spans, whitespace and comments play no
    part, so consistent renaming of any single binding leaves the digest
    unchanged while any structural edit changes it.
    """
    from .binding import resolve

    table = resolve(tree)
    parts: List[str] = []
    stack: List[Union[Node, str]] = [tree.root]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            parts.append(item)
            continue
        parts.append("(" + type(item).__name__)
        if isinstance(item, Identifier):
            binding = table.binding_at(item.span) if item.context in VARIABLE_CONTEXTS else None
            parts.append(f"#{binding.id}" if binding is not None else f"'{item.name}'")
            parts.append(item.context.value)
        elif isinstance(item, (TypeRef, Other, Lambda)):
            parts.append(repr(_normalized_text(tree, item.span, table.opaque_references)))
        for name in _SCALAR_FIELDS.get(type(item), ()):
            parts.append(f"{name}={getattr(item, name)!r}")
        stack.append(")")
        children = list(child_nodes(item))
        for child in reversed(children):
            stack.append(child)
    payload = " ".join(parts).encode("utf-8", errors="surrogateescape")
    return Fingerprint(hashlib.blake2b(payload, digest_size=16).hexdigest())


__all__ = [
    "Fingerprint",
    "IdentContext",
    "VARIABLE_CONTEXTS",
    "Node",
    "Identifier",
    "TypeRef",
    "Literal",
    "Other",
    "Lambda",
    "Parameter",
    "Block",
    "MethodDecl",
    "VarDeclarator",
    "LocalVarDecl",
    "BasicFor",
    "EnhancedFor",
    "While",
    "DoWhile",
    "If",
    "ExprStmt",
    "Return",
    "Throw",
    "Break",
    "Continue",
    "Labeled",
    "CatchClause",
    "Try",
    "Synchronized",
    "Assert",
    "Empty",
    "Assignment",
    "Unary",
    "Binary",
    "Conditional",
    "Cast",
    "InstanceOf",
    "MethodCall",
    "CtorCall",
    "FieldAccess",
    "ArrayAccess",
    "ArrayInit",
    "NewObject",
    "NewArray",
    "Paren",
    "This",
    "Super",
    "ClassLiteral",
    "OPAQUE_NODES",
    "LOOP_NODES",
    "SyntaxTree",
    "FailureInfo",
    "ParseOutcome",
    "child_nodes",
    "iter_nodes",
    "find_nodes",
    "method_name",
    "strip_parens",
    "parse_method",
    "shape_fingerprint",
]
