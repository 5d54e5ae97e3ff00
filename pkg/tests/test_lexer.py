"""Regression coverage for the lossless Java lexer."""

from __future__ import annotations

import random

import pytest

from java_samples import BROKEN_METHODS, PARSEABLE_METHODS
from rolemark.base import Span
from rolemark.lexer import (
    TokenKind,
    byte_span,
    decode_source,
    encode_source,
    join_tokens,
    significant,
    tokenize,
)

MUTATION_ALPHABET = list("abcXYZ_$019 \t\n{}()[];,.=<>!+-*/%&|^~?:@\"'\\#`") + [
    "é",
    " ",
    "中",
    "\udcff",
]


def _identifiers(tokens):
    return [token for token in tokens if token.kind is TokenKind.IDENTIFIER]


def test_stepper_loop_has_three_identifier_occurrences():
    source = "for (int i=0; i<5; i++){}"
    tokens = tokenize(source)

    occurrences = [token for token in _identifiers(tokens) if token.text == "i"]
    assert len(occurrences) == 3
    assert all(token.span.slice(source) == "i" for token in occurrences)
    keywords = {token.text for token in tokens if token.kind is TokenKind.KEYWORD}
    assert {"for", "int"} <= keywords


def test_empty_input_gives_no_tokens():
    assert tokenize("") == []


def test_comments_and_strings_hide_identifiers():
    source = '/* i */ "i" + i'
    tokens = tokenize(source)

    identifiers = _identifiers(tokens)
    assert [token.text for token in identifiers] == ["i"]
    assert identifiers[0].start == len(source) - 1
    assert tokens[0].kind is TokenKind.COMMENT
    assert tokens[0].text == "/* i */"
    assert any(token.kind is TokenKind.STRING_LITERAL and token.text == '"i"' for token in tokens)


def test_significant_drops_trivia():
    tokens = significant(tokenize("int  x; // note\n"))
    assert [token.text for token in tokens] == ["int", "x", ";"]


@pytest.mark.parametrize(
    "source, kind",
    [
        ('void f(){ String s = "abc', TokenKind.STRING_LITERAL),
        ("void f(){ char c = 'x", TokenKind.CHAR_LITERAL),
        ("void f(){ /* never closed", TokenKind.COMMENT),
        ('String t = """\nopen text block', TokenKind.STRING_LITERAL),
    ],
)
def test_unterminated_tokens_swallow_rest_and_are_flagged(source, kind):
    tokens = tokenize(source)
    assert tokens[-1].kind is kind
    assert tokens[-1].flagged
    assert tokens[-1].end == len(source)
    assert join_tokens(tokens) == source


def test_unknown_character_is_flagged_punctuation():
    tokens = tokenize("int #x;")
    hash_token = next(token for token in tokens if token.text == "#")
    assert hash_token.kind is TokenKind.PUNCTUATION
    assert hash_token.flagged


def test_shift_right_is_left_to_the_parser():
    tokens = significant(tokenize("a >> b >>> c"))
    assert [token.text for token in tokens] == ["a", ">", ">", "b", ">", ">", ">", "c"]
    assert "<<" in [token.text for token in tokenize("a << b")]
    assert ">>=" in [token.text for token in tokenize("x >>= 1")]
    assert ">>>=" in [token.text for token in tokenize("x >>>= 1")]


@pytest.mark.parametrize(
    "literal",
    ["0", "42L", "3.14", "1.5e3f", "0x1F", "0b1010", "1_000_000", ".5", "6.02E23d"],
)
def test_numeric_literals_are_single_tokens(literal):
    tokens = significant(tokenize(f"x = {literal};"))
    assert tokens[2].kind is TokenKind.NUMERIC_LITERAL
    assert tokens[2].text == literal


def test_keywords_and_contextual_words():
    tokens = significant(tokenize("final var record = this;"))
    kinds = {token.text: token.kind for token in tokens}
    assert kinds["final"] is TokenKind.KEYWORD
    assert kinds["this"] is TokenKind.KEYWORD
    assert kinds["var"] is TokenKind.IDENTIFIER
    assert kinds["record"] is TokenKind.IDENTIFIER


@pytest.mark.parametrize("source", PARSEABLE_METHODS + BROKEN_METHODS)
def test_spans_are_contiguous_and_lossless(source):
    tokens = tokenize(source)
    assert join_tokens(tokens) == source
    cursor = 0
    for token in tokens:
        assert token.span == Span(cursor, cursor + len(token.text))
        assert token.end > token.start
        cursor = token.end
    assert cursor == len(source)


def test_invalid_utf8_bytes_round_trip():
    data = b'void f(){ String s = "\xff\xfe"; int caf\xc3\xa9 = 1; }'
    text = decode_source(data)
    assert encode_source(join_tokens(tokenize(data))) == data
    assert "café" in [token.text for token in _identifiers(tokenize(text))]


def test_byte_spans_match_encoded_token_text():
    data = b'void f(){ String s = "\xff\xfe"; int caf\xc3\xa9 = 1; }'
    text = decode_source(data)
    for token in tokenize(text):
        start, end = byte_span(text, token.span)
        assert data[start:end] == encode_source(token.text)


def test_join_tokenize_is_identity_under_random_mutations():
    """Property check: lossless tokenization on 10,000 mutated fixtures.

    Purpose:
    - Exercise the lexer on arbitrary, mostly invalid Java text.
    Why:
    - Rewriting is span based, so any dropped or duplicated character would
      corrupt corpus output.
    Inputs:
    - Seeded random insertions, deletions and replacements over fixtures.
    Outputs:
    - None; asserts the round-trip law for every mutation.
    """

    rng = random.Random(20240531)
    fixtures = list(PARSEABLE_METHODS + BROKEN_METHODS)
    for _ in range(10_000):
        text = list(rng.choice(fixtures))
        for _edit in range(rng.randint(1, 4)):
            action = rng.random()
            position = rng.randint(0, len(text))
            if action < 0.4 or not text:
                text.insert(position, rng.choice(MUTATION_ALPHABET))
            elif action < 0.7:
                del text[min(position, len(text) - 1)]
            else:
                text[min(position, len(text) - 1)] = rng.choice(MUTATION_ALPHABET)
        mutated = "".join(text)
        assert join_tokens(tokenize(mutated)) == mutated
