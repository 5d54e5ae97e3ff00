"""Lossless lexer for Java method text.

Every byte of the input ends up in exactly one token, comments and whitespace
included, so joining the token texts gives the input back. Malformed input
never stops the scanner: unterminated literals and comments swallow the rest
of the text and are flagged, unknown characters become flagged one-character
punctuation tokens.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Tuple, Union

from .base import Span


class TokenKind(str, Enum):
    IDENTIFIER = "identifier"
    KEYWORD = "keyword"
    NUMERIC_LITERAL = "numeric-literal"
    STRING_LITERAL = "string-literal"
    CHAR_LITERAL = "char-literal"
    OPERATOR = "operator"
    PUNCTUATION = "punctuation"
    COMMENT = "comment"
    WHITESPACE = "whitespace"


TRIVIA_KINDS = frozenset({TokenKind.COMMENT, TokenKind.WHITESPACE})

JAVA_KEYWORDS = frozenset(
    """
    abstract assert boolean break byte case catch char class const continue
    default do double else enum extends final finally float for goto if
    implements import instanceof int interface long native new package private
    protected public return short static strictfp super switch synchronized
    this throw throws transient try void volatile while true false null
    """.split()
)

PRIMITIVE_TYPES = frozenset(
    {"boolean", "byte", "char", "short", "int", "long", "float", "double"}
)

# Longest first. `>>` and `>>>` are never produced: the parser joins adjacent
# `>` tokens so nested generics such as `List<List<T>>` close cleanly.
OPERATORS: Tuple[str, ...] = (
    ">>>=",
    "<<=",
    ">>=",
    "->",
    "++",
    "--",
    "&&",
    "||",
    "==",
    "!=",
    "<=",
    ">=",
    "+=",
    "-=",
    "*=",
    "/=",
    "%=",
    "&=",
    "|=",
    "^=",
    "<<",
    "=",
    "<",
    ">",
    "!",
    "~",
    "?",
    ":",
    "+",
    "-",
    "*",
    "/",
    "&",
    "|",
    "^",
    "%",
)
PUNCTUATION: Tuple[str, ...] = ("...", "::", "(", ")", "{", "}", "[", "]", ";", ",", ".", "@")

_WHITESPACE_RE = re.compile(r"[ \t\f\r\n\x0b]+")
_LINE_COMMENT_RE = re.compile(r"//[^\r\n]*")
_IDENTIFIER_RE = re.compile(r"(?:[^\W\d]|\$)(?:\w|\$)*")
_NUMBER_RE = re.compile(
    r"""
    0[xX][0-9a-fA-F_]*(?:\.[0-9a-fA-F_]*)?(?:[pP][+-]?[0-9_]+)?[lLfFdD]?
    | 0[bB][01_]+[lL]?
    | (?:\d[\d_]*(?:\.(?!\.)[\d_]*)?|\.\d[\d_]*)(?:[eE][+-]?\d[\d_]*)?[lLfFdD]?
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    """One lexical token with its exact source text and span."""

    kind: TokenKind
    text: str
    span: Span
    flagged: bool = False

    @property
    def start(self) -> int:
        return self.span.start

    @property
    def end(self) -> int:
        return self.span.end

    @property
    def is_trivia(self) -> bool:
        return self.kind in TRIVIA_KINDS

    def is_op(self, *texts: str) -> bool:
        return (
            self.kind in (TokenKind.OPERATOR, TokenKind.PUNCTUATION)
            and self.text in texts
        )

    def is_keyword(self, *texts: str) -> bool:
        return self.kind is TokenKind.KEYWORD and self.text in texts


def decode_source(data: Union[bytes, str]) -> str:
    """Decode raw method bytes so that re-encoding restores them exactly."""
    if isinstance(data, str):
        return data
    return data.decode("utf-8", errors="surrogateescape")


def encode_source(text: str) -> bytes:
    return text.encode("utf-8", errors="surrogateescape")


def byte_offset(text: str, offset: int) -> int:
    """Offset into ``encode_source(text)`` of the character at ``offset``."""
    return len(encode_source(text[:offset]))


def byte_span(text: str, span: Span) -> Span:
    """``span`` measured in bytes of the encoded source instead of characters."""
    start = byte_offset(text, span.start)
    return Span(start, start + len(encode_source(span.slice(text))))


def _scan_delimited(source: str, pos: int, opener_len: int, closer: str) -> Tuple[int, bool]:
    """Scan a quoted literal honouring backslash escapes.

    Returns the end offset and whether the literal ran off the end of input.
    """
    index = pos + opener_len
    length = len(source)
    while index < length:
        char = source[index]
        if char == "\\":
            index += 2
            continue
        if source.startswith(closer, index):
            return index + len(closer), False
        index += 1
    return length, True


def _scan(source: str, pos: int) -> Tuple[TokenKind, int, bool]:
    char = source[pos]

    match = _WHITESPACE_RE.match(source, pos)
    if match:
        return TokenKind.WHITESPACE, match.end(), False

    if source.startswith("//", pos):
        match = _LINE_COMMENT_RE.match(source, pos)
        assert match is not None
        return TokenKind.COMMENT, match.end(), False

    if source.startswith("/*", pos):
        close = source.find("*/", pos + 2)
        if close < 0:
            return TokenKind.COMMENT, len(source), True
        return TokenKind.COMMENT, close + 2, False

    if source.startswith('"""', pos):
        end, unterminated = _scan_delimited(source, pos, 3, '"""')
        return TokenKind.STRING_LITERAL, end, unterminated

    if char == '"':
        end, unterminated = _scan_delimited(source, pos, 1, '"')
        return TokenKind.STRING_LITERAL, end, unterminated

    if char == "'":
        end, unterminated = _scan_delimited(source, pos, 1, "'")
        return TokenKind.CHAR_LITERAL, end, unterminated

    if char.isdigit() or (char == "." and source[pos + 1 : pos + 2].isdigit()):
        match = _NUMBER_RE.match(source, pos)
        if match and match.end() > pos:
            return TokenKind.NUMERIC_LITERAL, match.end(), False

    match = _IDENTIFIER_RE.match(source, pos)
    if match:
        word = match.group(0)
        kind = TokenKind.KEYWORD if word in JAVA_KEYWORDS else TokenKind.IDENTIFIER
        return kind, match.end(), False

    for punct in PUNCTUATION:
        if source.startswith(punct, pos):
            return TokenKind.PUNCTUATION, pos + len(punct), False

    for operator in OPERATORS:
        if source.startswith(operator, pos):
            return TokenKind.OPERATOR, pos + len(operator), False

    return TokenKind.PUNCTUATION, pos + 1, True


def tokenize(source: Union[bytes, str]) -> List[Token]:
    """Split method text into a lossless token list.

    Joining ``token.text`` over the result reproduces the (decoded) input, spans
    are contiguous and strictly increasing. Identifiers inside comments and
    literals are never identifier tokens.
    """
    text = decode_source(source)
    tokens: List[Token] = []
    pos = 0
    length = len(text)
    while pos < length:
        kind, end, flagged = _scan(text, pos)
        tokens.append(Token(kind=kind, text=text[pos:end], span=Span(pos, end), flagged=flagged))
        pos = end
    return tokens


def significant(tokens: Iterable[Token]) -> List[Token]:
    """Drop comments and whitespace."""
    return [token for token in tokens if not token.is_trivia]


def join_tokens(tokens: Iterable[Token]) -> str:
    return "".join(token.text for token in tokens)


__all__ = [
    "TokenKind",
    "TRIVIA_KINDS",
    "JAVA_KEYWORDS",
    "PRIMITIVE_TYPES",
    "OPERATORS",
    "PUNCTUATION",
    "Token",
    "decode_source",
    "encode_source",
    "byte_offset",
    "byte_span",
    "tokenize",
    "significant",
    "join_tokens",
]
