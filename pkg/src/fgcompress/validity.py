"""Filter deciding which substrings may enter the codebook."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

from .lexer import Token, TokenKind

if TYPE_CHECKING:
    from .codebook import Codebook

__all__ = ["Rule", "ValidityVerdict", "is_valid_substring", "expand_tokens"]


class Rule(enum.Enum):
    UNMATCHED_PAREN = "UnmatchedParen"
    UNMATCHED_BRACKET = "UnmatchedBracket"
    DANGLING_BOND = "DanglingBond"
    UNPAIRED_RING_DIGIT = "UnpairedRingDigit"
    CONTAINS_DOT = "ContainsDot"


@dataclass(frozen=True)
class ValidityVerdict:
    valid: bool
    violated_rule: Rule | None = None

    def __bool__(self) -> bool:
        return self.valid


VALID = ValidityVerdict(True)


def expand_tokens(tokens: Sequence[Token], codebook: Codebook | None = None) -> list[Token]:
    out: list[Token] = []
    for tok in tokens:
        if tok.kind is TokenKind.META:
            if codebook is None:
                raise ValueError("meta-symbol in substring but no codebook given")
            out.extend(codebook.expansion(tok.meta_id))
        else:
            out.append(tok)
    return out


def _brackets_balanced(tokens: Sequence[Token]) -> bool:
    # Bracket atoms are single tokens after lexing, so this only trips on
    # hand-built tokens; it is checked on characters to stay independent.
    depth = 0
    for tok in tokens:
        for ch in tok.text:
            if ch == "[":
                if depth:
                    return False
                depth = 1
            elif ch == "]":
                if not depth:
                    return False
                depth = 0
    return depth == 0


def _parens_balanced(tokens: Sequence[Token]) -> bool:
    depth = 0
    for tok in tokens:
        if tok.kind is TokenKind.OPEN_PAREN:
            depth += 1
        elif tok.kind is TokenKind.CLOSE_PAREN:
            depth -= 1
            if depth < 0:
                return False
    return depth == 0


def is_valid_substring(tokens: Sequence[Token], codebook: Codebook | None = None) -> ValidityVerdict:
    """Check a candidate substring against the filter rules.

    Rules are evaluated on the fully expanded primitive sequence, in order:
    matched brackets and parentheses, every bond next to an atom, every
    ring-closure label used an even number of times, and no dot.
    """
    toks = expand_tokens(tokens, codebook)
    if not toks:
        raise ValueError("empty substring")

    if not _brackets_balanced(toks):
        return ValidityVerdict(False, Rule.UNMATCHED_BRACKET)
    if not _parens_balanced(toks):
        return ValidityVerdict(False, Rule.UNMATCHED_PAREN)

    last = len(toks) - 1
    for i, tok in enumerate(toks):
        if tok.kind is TokenKind.BOND:
            if not ((i > 0 and toks[i - 1].is_atom) or (i < last and toks[i + 1].is_atom)):
                return ValidityVerdict(False, Rule.DANGLING_BOND)

    labels = Counter(t.text for t in toks if t.kind is TokenKind.RING_CLOSURE)
    if any(c % 2 for c in labels.values()):
        return ValidityVerdict(False, Rule.UNPAIRED_RING_DIGIT)

    if any(t.kind is TokenKind.DOT for t in toks):
        return ValidityVerdict(False, Rule.CONTAINS_DOT)
    return VALID
