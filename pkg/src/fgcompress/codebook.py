"""Codebook of discovered substrings."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Iterator

from .lexer import Token, TokenKind, UnknownMetaSymbol, render_tokens, tokenize

__all__ = ["CodebookEntry", "Codebook", "DuplicateEntry"]


class DuplicateEntry(ValueError):
    pass


@dataclass(frozen=True)
class CodebookEntry:
    """One substring.

    ``expanded`` holds primitive SMILES symbols only; ``surface`` is the
    window as it looked in the compressed corpus when adopted and may
    reference other entries.
    """

    id: int
    expanded: tuple[Token, ...]
    surface: tuple[Token, ...]
    iteration: int
    count: int
    delta_bits: float = 0.0

    @property
    def smiles(self) -> str:
        return render_tokens(self.expanded)

    def __len__(self) -> int:
        return len(self.expanded)


class Codebook:
    """Live entries in adoption order, plus retired entries kept for expansion."""

    def __init__(self, entries: Iterable[CodebookEntry] = (), retired: dict[int, CodebookEntry] | None = None, next_id: int | None = None):
        self._live: dict[int, CodebookEntry] = {e.id: e for e in entries}
        self.retired: dict[int, CodebookEntry] = dict(retired or {})
        if next_id is None:
            next_id = max([*self._live, *self.retired], default=-1) + 1
        self.next_id = next_id

    @classmethod
    def from_smiles(cls, smiles: Iterable[str]) -> Codebook:
        """Build a codebook from literal substrings (count 1, iteration order)."""
        cb = cls()
        for i, s in enumerate(smiles):
            toks = tokenize(s).tokens
            cb.add(toks, toks, iteration=i, count=1)
        return cb

    @property
    def entries(self) -> list[CodebookEntry]:
        return list(self._live.values())

    def __iter__(self) -> Iterator[CodebookEntry]:
        return iter(list(self._live.values()))

    def __len__(self) -> int:
        return len(self._live)

    def __contains__(self, entry_id: object) -> bool:
        return entry_id in self._live

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Codebook):
            return NotImplemented
        return (
            self.entries == other.entries
            and self.retired == other.retired
            and self.next_id == other.next_id
        )

    def __repr__(self) -> str:
        return f"Codebook({self.smiles!r})"

    @property
    def smiles(self) -> list[str]:
        return [e.smiles for e in self._live.values()]

    def get(self, entry_id: int) -> CodebookEntry:
        try:
            return self._live[entry_id]
        except KeyError:
            raise UnknownMetaSymbol(entry_id) from None

    def expansion(self, entry_id: int) -> tuple[Token, ...]:
        """Primitive expansion of a live or retired entry."""
        entry = self._live.get(entry_id) or self.retired.get(entry_id)
        if entry is None:
            raise UnknownMetaSymbol(entry_id)
        return entry.expanded

    def add(
        self,
        expanded: tuple[Token, ...],
        surface: tuple[Token, ...],
        iteration: int,
        count: int,
        delta_bits: float = 0.0,
    ) -> CodebookEntry:
        if any(t.kind is TokenKind.META for t in expanded):
            raise ValueError("expanded form must contain primitive symbols only")
        if count < 1:
            raise ValueError("a live entry needs count >= 1")
        key = tuple(t.text for t in expanded)
        if any(tuple(t.text for t in e.expanded) == key for e in self._live.values()):
            raise DuplicateEntry(render_tokens(expanded))
        entry = CodebookEntry(self.next_id, tuple(expanded), tuple(surface), iteration, count, delta_bits)
        self._live[entry.id] = entry
        self.next_id += 1
        return entry

    def set_count(self, entry_id: int, count: int) -> None:
        """Update an entry count; an entry whose count reaches zero is retired."""
        entry = self.get(entry_id)
        if count <= 0:
            del self._live[entry_id]
            self.retired[entry_id] = replace(entry, count=0)
        else:
            self._live[entry_id] = replace(entry, count=count)

    def copy(self) -> Codebook:
        return Codebook(self._live.values(), self.retired, self.next_id)
