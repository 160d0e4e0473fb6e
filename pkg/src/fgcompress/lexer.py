"""SMILES lexing and rendering.

A SMILES string is split into symbols: organic-subset atoms (with maximal
munch for ``Cl`` and ``Br``), aromatic atoms, whole bracket atoms, bond
characters, ring-closure labels (a digit or ``%nn``), parentheses and the
dot.  Anything else is a :class:`LexError`.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

if TYPE_CHECKING:
    from .codebook import Codebook

__all__ = [
    "TokenKind",
    "Token",
    "TokenStream",
    "LexError",
    "UnknownMetaSymbol",
    "tokenize",
    "render",
    "render_tokens",
    "meta_token",
]


class TokenKind(enum.Enum):
    ATOM = "atom"
    BRACKET_ATOM = "bracket_atom"
    BOND = "bond"
    RING_CLOSURE = "ring_closure"
    OPEN_PAREN = "open_paren"
    CLOSE_PAREN = "close_paren"
    DOT = "dot"
    META = "meta"


ATOM_KINDS = frozenset({TokenKind.ATOM, TokenKind.BRACKET_ATOM})


@dataclass(frozen=True, slots=True)
class Token:
    kind: TokenKind
    text: str
    meta_id: int | None = None

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("token text must be non-empty")
        if (self.kind is TokenKind.META) != (self.meta_id is not None):
            raise ValueError("meta_id is required for, and only for, META tokens")

    @property
    def is_atom(self) -> bool:
        return self.kind in ATOM_KINDS

    def __str__(self) -> str:
        return self.text


def meta_token(meta_id: int) -> Token:
    """Placeholder token standing for codebook entry ``meta_id``."""
    return Token(TokenKind.META, "{%d}" % meta_id, meta_id)


@dataclass(frozen=True)
class TokenStream:
    tokens: tuple[Token, ...]
    source: str

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)

    def __getitem__(self, i):
        return self.tokens[i]

    @property
    def texts(self) -> tuple[str, ...]:
        return tuple(t.text for t in self.tokens)


class LexError(ValueError):
    """Raised for input outside the SMILES symbol grammar."""

    def __init__(self, message: str, offset: int, source: str = ""):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset
        self.source = source


class UnknownMetaSymbol(KeyError):
    pass


# Order matters: two-letter atoms before their one-letter prefixes.
_TOKEN_RE = re.compile(
    r"""
    (?P<atom>Cl|Br|[BCNOPSFI])
  | (?P<aromatic>[bcnops])
  | (?P<bracket>\[[^\[\]]+\])
  | (?P<bond>[-=\#/\\:])
  | (?P<ring>%[0-9]{2}|[0-9])
  | (?P<open>\()
  | (?P<close>\))
  | (?P<dot>\.)
    """,
    re.VERBOSE,
)

_GROUP_KIND = {
    "atom": TokenKind.ATOM,
    "aromatic": TokenKind.ATOM,
    "bracket": TokenKind.BRACKET_ATOM,
    "bond": TokenKind.BOND,
    "ring": TokenKind.RING_CLOSURE,
    "open": TokenKind.OPEN_PAREN,
    "close": TokenKind.CLOSE_PAREN,
    "dot": TokenKind.DOT,
}


def tokenize(smiles: str) -> TokenStream:
    """Split ``smiles`` into SMILES symbols.

    >>> [t.text for t in tokenize("Clc1ccccc1")]
    ['Cl', 'c', '1', 'c', 'c', 'c', 'c', 'c', '1']
    """
    tokens = []
    pos = 0
    n = len(smiles)
    while pos < n:
        m = _TOKEN_RE.match(smiles, pos)
        if m is None:
            ch = smiles[pos]
            if ch == "[":
                raise LexError("unterminated or empty bracket atom", pos, smiles)
            raise LexError(f"unexpected character {ch!r}", pos, smiles)
        tokens.append(Token(_GROUP_KIND[m.lastgroup], m.group()))
        pos = m.end()
    return TokenStream(tuple(tokens), smiles)


def render_tokens(tokens: Iterable[Token], codebook: Codebook | None = None) -> str:
    """Concatenate token texts, expanding meta-symbols through ``codebook``."""
    parts = []
    for tok in tokens:
        if tok.kind is TokenKind.META:
            if codebook is None:
                raise UnknownMetaSymbol(tok.meta_id)
            parts.append(render_tokens(codebook.expansion(tok.meta_id)))
        else:
            parts.append(tok.text)
    return "".join(parts)


def render(stream: TokenStream | Sequence[Token], codebook: Codebook | None = None) -> str:
    """Inverse of :func:`tokenize`; meta-symbols are expanded recursively."""
    tokens = stream.tokens if isinstance(stream, TokenStream) else stream
    return render_tokens(tokens, codebook)
