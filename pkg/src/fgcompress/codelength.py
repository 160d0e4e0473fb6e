"""Three-part MML message length of a (codebook, corpus) state.

All lengths are in bits.  ``P1`` transmits the codebook substrings, ``P2``
is the MML87 multinomial length for the vocabulary counts and ``P3`` picks
one sequence out of all orderings consistent with those counts.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Iterable, Literal, Mapping, Sequence

from .lexer import Token

__all__ = [
    "LogStarMode",
    "RISSANEN_C0",
    "DomainError",
    "UnknownSymbol",
    "SymbolTable",
    "VocabularyCounts",
    "MessageLength",
    "log_star",
    "substring_cost",
    "part1",
    "part2",
    "part3",
    "total_length",
]

LogStarMode = Literal["rissanen", "simple"]
RISSANEN_C0 = 2.865064
_LOG2_C0 = math.log2(RISSANEN_C0)
_LN2 = math.log(2.0)
MML87_CONSTANT = 0.4


class DomainError(ValueError):
    pass


class UnknownSymbol(KeyError):
    pass


def log_star(n: int, mode: LogStarMode = "rissanen") -> float:
    """Length in bits of the universal code for the positive integer ``n``.

    ``rissanen`` is ``log2(c0) + log2 n + log2 log2 n + ...`` summing the
    positive terms only.  ``simple`` is plain ``log2 n``.
    """
    if n < 1:
        raise DomainError(f"log_star is defined for n >= 1, got {n}")
    if mode == "simple":
        return math.log2(n)
    if mode != "rissanen":
        raise ValueError(f"unknown log_star mode {mode!r}")
    total = _LOG2_C0
    x = math.log2(n)
    while x > 0:
        total += x
        x = math.log2(x)
    return total


@dataclass(frozen=True)
class SymbolTable:
    """Relative frequencies of the primitive symbols in the input corpus."""

    probs: Mapping[str, float]

    def __post_init__(self) -> None:
        if not self.probs:
            raise ValueError("empty symbol table")
        if any(not 0.0 < p <= 1.0 for p in self.probs.values()):
            raise ValueError("symbol probabilities must lie in (0, 1]")
        if abs(math.fsum(self.probs.values()) - 1.0) > 1e-12:
            raise ValueError("symbol probabilities must sum to 1")

    @classmethod
    def from_counts(cls, counts: Mapping[str, int]) -> SymbolTable:
        n = sum(counts.values())
        return cls({s: c / n for s, c in counts.items() if c > 0})

    @classmethod
    def from_streams(cls, streams: Iterable[Iterable[Token]]) -> SymbolTable:
        counts: Counter[str] = Counter()
        for stream in streams:
            counts.update(t.text for t in stream)
        return cls.from_counts(counts)

    def cost(self, symbol: str) -> float:
        """``-log2 P(symbol)``."""
        try:
            return -math.log2(self.probs[symbol])
        except KeyError:
            raise UnknownSymbol(symbol) from None

    def __contains__(self, symbol: object) -> bool:
        return symbol in self.probs

    def __len__(self) -> int:
        return len(self.probs)


@dataclass(frozen=True)
class VocabularyCounts:
    """Occurrence counts of the items making up the (compressed) corpus."""

    counts: Mapping[Hashable, int]

    def __post_init__(self) -> None:
        if any(c < 1 for c in self.counts.values()):
            raise ValueError("vocabulary counts must be >= 1; drop zero-count items")

    @classmethod
    def from_items(cls, items: Iterable[Hashable]) -> VocabularyCounts:
        return cls(dict(Counter(items)))

    @classmethod
    def from_counter(cls, counts: Mapping[Hashable, int]) -> VocabularyCounts:
        return cls({k: v for k, v in counts.items() if v > 0})

    @property
    def N(self) -> int:
        return sum(self.counts.values())

    @property
    def M(self) -> int:
        return len(self.counts)


@dataclass(frozen=True)
class MessageLength:
    p1: float
    p2: float
    p3: float

    @property
    def total(self) -> float:
        return self.p1 + self.p2 + self.p3

    def __str__(self) -> str:
        return f"{self.total:.3f} bits (P1={self.p1:.3f}, P2={self.p2:.3f}, P3={self.p3:.3f})"


def _text(tok: Token | str) -> str:
    return tok if isinstance(tok, str) else tok.text


def substring_cost(
    entry_tokens: Sequence[Token | str], table: SymbolTable, mode: LogStarMode = "rissanen"
) -> float:
    """Bits to send one substring: its length, then each symbol by its probability."""
    if not entry_tokens:
        raise DomainError("substrings are non-empty")
    return log_star(len(entry_tokens), mode) + math.fsum(table.cost(_text(t)) for t in entry_tokens)


def _expanded(entry) -> Sequence[Token | str]:
    return getattr(entry, "expanded", entry)


def part1(codebook: Iterable, table: SymbolTable, mode: LogStarMode = "rissanen") -> float:
    """Codebook size followed by every substring.

    ``codebook`` may be a :class:`~fgcompress.codebook.Codebook` or any
    iterable of primitive token sequences.  The size of an empty codebook is
    sent like a size of one.
    """
    costs = [substring_cost(_expanded(e), table, mode) for e in codebook]
    return log_star(max(len(costs), 1), mode) + math.fsum(costs)


def _log2_factorial(n: int) -> float:
    return math.lgamma(n + 1) / _LN2


def part2(vc: VocabularyCounts) -> float:
    """MML87 length of the multinomial probabilities and counts.

    A one-item vocabulary has no free parameters and costs nothing.
    """
    M, N = vc.M, vc.N
    if M < 1:
        raise DomainError("empty vocabulary")
    if M == 1:
        return 0.0
    return (
        (math.lgamma(N + M) - math.lgamma(M)) / _LN2
        - math.fsum(_log2_factorial(s) for s in vc.counts.values())
        + 0.5 * math.log2((M - 1) * math.pi)
        - MML87_CONSTANT
    )


def part3(vc: VocabularyCounts) -> float:
    """log2 of the multinomial coefficient ``N! / prod(s_m!)``."""
    return max(_log2_factorial(vc.N) - math.fsum(_log2_factorial(s) for s in vc.counts.values()), 0.0)


def total_length(
    codebook: Iterable,
    corpus_counts: VocabularyCounts,
    table: SymbolTable,
    mode: LogStarMode = "rissanen",
) -> MessageLength:
    return MessageLength(part1(codebook, table, mode), part2(corpus_counts), part3(corpus_counts))
