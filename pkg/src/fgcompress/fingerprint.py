"""Count fingerprints over a codebook.

Column ``i`` of a fingerprint counts occurrences of the ``i``-th live
codebook entry (adoption order) in a molecule's primitive symbol sequence.
Matching is on symbols, so ``C`` never matches inside ``Cl``.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .codebook import Codebook
from .lexer import LexError, tokenize

__all__ = ["Fingerprinter", "FingerprintBatch", "fingerprint", "fingerprint_corpus", "write_fingerprint_csv"]


def _count_overlapping(symbols: Sequence[str], patterns: dict[tuple[str, ...], list[int]], lengths: list[int], out: np.ndarray) -> None:
    n = len(symbols)
    for L in lengths:
        for i in range(n - L + 1):
            hit = patterns.get(tuple(symbols[i : i + L]))
            if hit is not None:
                for col in hit:
                    out[col] += 1


def _count_nonoverlapping(symbols: Sequence[str], entries: list[tuple[str, ...]], out: np.ndarray) -> None:
    n = len(symbols)
    for col, pat in enumerate(entries):
        L = len(pat)
        i = 0
        while i <= n - L:
            if tuple(symbols[i : i + L]) == pat:
                out[col] += 1
                i += L
            else:
                i += 1


class Fingerprinter:
    """Precomputed matcher for one codebook."""

    def __init__(self, codebook: Codebook, overlap: bool = True):
        self.entries = [tuple(t.text for t in e.expanded) for e in codebook]
        self.smiles = codebook.smiles
        self.overlap = overlap
        self._patterns: dict[tuple[str, ...], list[int]] = {}
        for col, pat in enumerate(self.entries):
            self._patterns.setdefault(pat, []).append(col)
        self._lengths = sorted({len(p) for p in self.entries})

    def __len__(self) -> int:
        return len(self.entries)

    def __call__(self, molecule: str) -> np.ndarray:
        symbols = tokenize(molecule).texts
        out = np.zeros(len(self.entries), dtype=np.int64)
        if self.overlap:
            _count_overlapping(symbols, self._patterns, self._lengths, out)
        else:
            _count_nonoverlapping(symbols, self.entries, out)
        return out


def fingerprint(molecule: str, codebook: Codebook, overlap: bool = True) -> np.ndarray:
    """Integer count vector of ``molecule`` over ``codebook``.

    >>> fingerprint("CC(=O)NC(=O)C", Codebook.from_smiles(["C(=O)"])).tolist()
    [2]
    """
    return Fingerprinter(codebook, overlap)(molecule)


@dataclass
class FingerprintBatch:
    """Rows for the molecules that lexed; ``errors`` holds (line number, message)."""

    matrix: np.ndarray
    molecules: list[str]
    rows: list[int]
    errors: list[tuple[int, str]] = field(default_factory=list)


def fingerprint_corpus(
    molecules: Sequence[str], codebook: Codebook, overlap: bool = True, threads: int = 1
) -> FingerprintBatch:
    """Fingerprint every molecule, preserving input order.

    A molecule that fails to lex is reported in ``errors`` (1-based line
    numbers) and left out of the matrix.
    """
    fp = Fingerprinter(codebook, overlap)

    def one(smiles: str):
        try:
            return fp(smiles)
        except LexError as exc:
            return exc

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(one, molecules))
    else:
        results = [one(m) for m in molecules]

    rows, kept, good, errors = [], [], [], []
    for i, (smiles, res) in enumerate(zip(molecules, results)):
        if isinstance(res, LexError):
            errors.append((i + 1, str(res)))
        else:
            rows.append(i)
            kept.append(smiles)
            good.append(res)
    matrix = np.vstack(good) if good else np.zeros((0, len(fp)), dtype=np.int64)
    return FingerprintBatch(matrix, kept, rows, errors)


def write_fingerprint_csv(path: str | Path, batch: FingerprintBatch, codebook: Codebook) -> None:
    """CSV with a ``smiles`` column then one integer column per entry.

    Entry columns are headed ``"<index>:<expanded smiles>"``.
    """
    header = ["smiles"] + [f"{i}:{s}" for i, s in enumerate(codebook.smiles)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n", quoting=csv.QUOTE_NONNUMERIC)
        writer.writerow(header)
        for smiles, row in zip(batch.molecules, batch.matrix):
            writer.writerow([smiles, *(int(x) for x in row)])
