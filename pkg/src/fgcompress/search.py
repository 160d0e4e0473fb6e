"""Greedy substring search minimising the total message length.

Each iteration enumerates the contiguous windows of the compressed corpus,
keeps the valid ones that occur often enough, projects the message length
obtained by replacing every (leftmost, non-overlapping) occurrence with a
fresh meta-symbol, and adopts the best window if it shortens the message.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .codebook import Codebook, CodebookEntry
from .codelength import (
    MML87_CONSTANT,
    LogStarMode,
    MessageLength,
    SymbolTable,
    VocabularyCounts,
    log_star,
    substring_cost,
    total_length,
)
from .config import SearchConfig
from .lexer import Token, TokenStream, meta_token, render_tokens, tokenize
from .validity import is_valid_substring

__all__ = [
    "EmptyCorpus",
    "StateMismatch",
    "TokenCorpus",
    "Candidate",
    "IterationRecord",
    "Compressor",
    "enumerate_candidates",
    "score_candidate",
    "apply_candidate",
    "fgcompress",
]

log = logging.getLogger(__name__)

_LN2 = math.log(2.0)
_lgamma = math.lgamma


class EmptyCorpus(ValueError):
    pass


class StateMismatch(RuntimeError):
    pass


class TokenCorpus:
    """The dataset as per-molecule item streams.

    Items are ints: primitive symbols take ``0 .. n_symbols - 1`` and the
    meta-symbol of codebook entry ``k`` is ``n_symbols + k``.  The symbol
    table is fixed by the input and never changes afterwards.
    """

    def __init__(self, smiles: Iterable[str]):
        self.sources = list(smiles)
        if not self.sources:
            raise EmptyCorpus("corpus has no molecules")
        streams = [tokenize(s) for s in self.sources]
        if any(len(s) == 0 for s in streams):
            raise ValueError("corpus contains an empty molecule")
        self.symbols: list[Token] = []
        self._ids: dict[str, int] = {}
        self.molecules: list[list[int]] = []
        for stream in streams:
            mol = []
            for tok in stream.tokens:
                i = self._ids.get(tok.text)
                if i is None:
                    i = self._ids[tok.text] = len(self.symbols)
                    self.symbols.append(tok)
                mol.append(i)
            self.molecules.append(mol)
        self.table = SymbolTable.from_streams(streams)
        self.sym_cost = [self.table.cost(t.text) for t in self.symbols]

    def __len__(self) -> int:
        return len(self.molecules)

    @property
    def n_symbols(self) -> int:
        return len(self.symbols)

    def meta_item(self, entry_id: int) -> int:
        return self.n_symbols + entry_id

    def entry_id(self, item: int) -> int | None:
        return item - self.n_symbols if item >= self.n_symbols else None

    def token(self, item: int) -> Token:
        if item < self.n_symbols:
            return self.symbols[item]
        return meta_token(item - self.n_symbols)

    def tokens(self, items: Iterable[int]) -> tuple[Token, ...]:
        return tuple(self.token(i) for i in items)

    def symbol_id(self, text: str) -> int:
        return self._ids[text]

    def stream(self, index: int) -> TokenStream:
        return TokenStream(self.tokens(self.molecules[index]), self.sources[index])

    def streams(self) -> list[TokenStream]:
        return [self.stream(i) for i in range(len(self.molecules))]

    def counts(self) -> Counter:
        c: Counter = Counter()
        for mol in self.molecules:
            c.update(mol)
        return c

    def vocabulary(self) -> VocabularyCounts:
        return VocabularyCounts.from_counter(self.counts())

    def n_tokens(self) -> int:
        return sum(len(m) for m in self.molecules)

    def render(self, index: int, codebook: Codebook | None = None) -> str:
        return render_tokens(self.stream(index).tokens, codebook)

    def copy(self) -> TokenCorpus:
        other = object.__new__(TokenCorpus)
        other.__dict__.update(self.__dict__)
        other.molecules = [list(m) for m in self.molecules]
        return other


@dataclass
class Candidate:
    """A window over the current corpus alphabet.

    ``items`` is the window as corpus items, ``expanded`` its primitive
    symbol ids and ``count`` its leftmost non-overlapping occurrence count.
    """

    items: tuple[int, ...]
    count: int
    expanded: tuple[int, ...]
    projected: MessageLength | None = None


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    smiles: str
    count: int
    total_before: float
    total_after: float

    @property
    def delta_bits(self) -> float:
        return self.total_before - self.total_after


def molecule_windows(mol: Sequence[int], max_len: int) -> dict[tuple[int, ...], int]:
    """Leftmost non-overlapping counts of every window of length 2..max_len."""
    counts: dict[tuple[int, ...], int] = {}
    n = len(mol)
    for L in range(2, min(max_len, n) + 1):
        ends: dict[tuple[int, ...], int] = {}
        for i, w in enumerate(zip(*[mol[k:] for k in range(L)])):
            end = ends.get(w)
            if end is None:
                ends[w] = i + L
                counts[w] = 1
            elif end <= i:
                ends[w] = i + L
                counts[w] += 1
    return counts


def replace_occurrences(mol: Sequence[int], pattern: tuple[int, ...], item: int) -> tuple[list[int], int]:
    """Replace leftmost non-overlapping occurrences of ``pattern`` with ``item``."""
    out: list[int] = []
    first = pattern[0]
    L = len(pattern)
    n = len(mol)
    i = hits = 0
    while i < n:
        if mol[i] == first and tuple(mol[i : i + L]) == pattern:
            out.append(item)
            i += L
            hits += 1
        else:
            out.append(mol[i])
            i += 1
    return out, hits


@dataclass
class _Snapshot:
    counts: dict[int, int]
    n_tokens: int
    n_items: int
    log_fact_sum: float
    entry_costs: dict[int, float]
    entry_cost_sum: float


def _lf(n: int) -> float:
    return _lgamma(n + 1)


@dataclass
class Compressor:
    """Mutable search state: a corpus, its codebook and cached window counts."""

    corpus: TokenCorpus
    codebook: Codebook = field(default_factory=Codebook)
    config: SearchConfig = field(default_factory=SearchConfig)

    def __post_init__(self) -> None:
        self.mode: LogStarMode = self.config.logstar_mode
        self._counts: Counter = self.corpus.counts()
        self._expansions: dict[int, tuple[int, ...]] = {}
        self._entry_costs: dict[int, float] = {
            self.corpus.meta_item(e.id): substring_cost(e.expanded, self.corpus.table, self.mode)
            for e in self.codebook
        }
        self._valid: dict[tuple[int, ...], bool] = {}
        self._windows: dict[tuple[int, ...], int] | None = None
        self._holders: dict[int, set[int]] | None = None
        self.iteration = max((e.iteration for e in self._all_entries()), default=0)
        self.trace: list[IterationRecord] = []

    def _all_entries(self) -> list[CodebookEntry]:
        return [*self.codebook, *self.codebook.retired.values()]

    # -- indexes ---------------------------------------------------------

    def _build_index(self) -> None:
        windows: dict[tuple[int, ...], int] = {}
        holders: dict[int, set[int]] = {}
        max_len = self.config.max_len
        for mi, mol in enumerate(self.corpus.molecules):
            for w, c in molecule_windows(mol, max_len).items():
                windows[w] = windows.get(w, 0) + c
            for item in set(mol):
                holders.setdefault(item, set()).add(mi)
        self._windows, self._holders = windows, holders

    def expand(self, item: int) -> tuple[int, ...]:
        """Primitive symbol ids of one corpus item."""
        if item < self.corpus.n_symbols:
            return (item,)
        exp = self._expansions.get(item)
        if exp is None:
            toks = self.codebook.expansion(item - self.corpus.n_symbols)
            exp = self._expansions[item] = tuple(self.corpus.symbol_id(t.text) for t in toks)
        return exp

    def expand_window(self, items: Iterable[int]) -> tuple[int, ...]:
        out: list[int] = []
        for item in items:
            out.extend(self.expand(item))
        return tuple(out)

    def _is_valid(self, expanded: tuple[int, ...]) -> bool:
        v = self._valid.get(expanded)
        if v is None:
            v = self._valid[expanded] = is_valid_substring([self.corpus.symbols[i] for i in expanded]).valid
        return v

    def smiles(self, cand: Candidate) -> str:
        return "".join(self.corpus.symbols[i].text for i in cand.expanded)

    # -- lengths ---------------------------------------------------------

    def length(self) -> MessageLength:
        """Message length of the current state."""
        return total_length(self.codebook, VocabularyCounts.from_counter(self._counts), self.corpus.table, self.mode)

    def recompute_length(self) -> MessageLength:
        """Message length from a full rescan of the corpus."""
        return total_length(self.codebook, self.corpus.vocabulary(), self.corpus.table, self.mode)

    def snapshot(self) -> _Snapshot:
        counts = {k: v for k, v in self._counts.items() if v > 0}
        costs = dict(self._entry_costs)
        return _Snapshot(
            counts=counts,
            n_tokens=sum(counts.values()),
            n_items=len(counts),
            log_fact_sum=math.fsum(_lf(s) for s in counts.values()),
            entry_costs=costs,
            entry_cost_sum=math.fsum(costs.values()),
        )

    def project(self, cand: Candidate, snap: _Snapshot | None = None) -> MessageLength:
        """Message length if ``cand`` were adopted; the state is untouched."""
        if snap is None:
            snap = self.snapshot()
        k = cand.count
        items = cand.items
        counts = snap.counts
        n_sym = self.corpus.n_symbols
        n_tokens = snap.n_tokens - k * (len(items) - 1)
        n_items = snap.n_items + 1
        lf = snap.log_fact_sum + _lf(k)
        n_entries = len(snap.entry_costs) + 1
        entry_cost_sum = snap.entry_cost_sum
        mult: dict[int, int] = {}
        for v in items:
            mult[v] = mult.get(v, 0) + 1
        for v, m in mult.items():
            s = counts[v]
            s2 = s - k * m
            if s2 < 0:
                raise StateMismatch(f"candidate count {k} inconsistent with item counts")
            lf += _lf(s2) - _lf(s)
            if s2 == 0:
                n_items -= 1
                if v >= n_sym:
                    n_entries -= 1
                    entry_cost_sum -= snap.entry_costs[v]
        new_cost = log_star(len(cand.expanded), self.mode) + math.fsum(self.corpus.sym_cost[i] for i in cand.expanded)
        p1 = log_star(max(n_entries, 1), self.mode) + entry_cost_sum + new_cost
        if n_items < 2:
            p2 = 0.0
        else:
            p2 = (
                (_lgamma(n_tokens + n_items) - _lgamma(n_items) - lf) / _LN2
                + 0.5 * math.log2((n_items - 1) * math.pi)
                - MML87_CONSTANT
            )
        p3 = max((_lf(n_tokens) - lf) / _LN2, 0.0)
        return MessageLength(p1, p2, p3)

    # -- candidates --------------------------------------------------------

    def candidates(self, min_count: int | None = None) -> list[Candidate]:
        """Valid windows occurring at least ``min_count`` times, not already entries."""
        if self._windows is None:
            self._build_index()
        if min_count is None:
            min_count = self.config.min_count
        existing = {self.expand(self.corpus.meta_item(e.id)) for e in self.codebook}
        out = []
        for w, c in self._windows.items():
            if c < min_count:
                continue
            exp = self.expand_window(w)
            if exp in existing or not self._is_valid(exp):
                continue
            out.append(Candidate(w, c, exp))
        return out

    def _tie_key(self, cand: Candidate) -> tuple:
        return (round(cand.projected.total, 9), len(cand.expanded), self.smiles(cand), cand.items)

    def _best_of(self, cands: Sequence[Candidate], snap: _Snapshot) -> list[Candidate]:
        best_total = math.inf
        best: list[Candidate] = []
        for cand in cands:
            cand.projected = self.project(cand, snap)
            t = round(cand.projected.total, 9)
            if t < best_total:
                best_total, best = t, [cand]
            elif t == best_total:
                best.append(cand)
        return best

    def best(self, executor: ThreadPoolExecutor | None = None) -> Candidate | None:
        """Candidate with the smallest projected length.

        Ties go to the shorter expansion, then the lexicographically smaller
        SMILES text, so the winner does not depend on how scoring is split.
        """
        cands = self.candidates()
        if not cands:
            return None
        snap = self.snapshot()
        if executor is None:
            pool = self._best_of(cands, snap)
        else:
            n_chunks = 4 * self.config.thread_count
            size = -(-len(cands) // n_chunks)
            chunks = [cands[i : i + size] for i in range(0, len(cands), size)]
            pool = [c for part in executor.map(lambda ch: self._best_of(ch, snap), chunks) for c in part]
        return min(pool, key=self._tie_key)

    # -- mutation ----------------------------------------------------------

    def apply(self, cand: Candidate, delta_bits: float = 0.0) -> CodebookEntry:
        """Replace every occurrence of ``cand`` and add it to the codebook."""
        pattern = tuple(cand.items)
        corpus, codebook = self.corpus, self.codebook
        new_id = codebook.next_id
        new_item = corpus.meta_item(new_id)

        if self._holders is not None:
            holders = set.intersection(*(self._holders.get(v, set()) for v in set(pattern)))
        else:
            holders = range(len(corpus.molecules))
        replaced: dict[int, list[int]] = {}
        hits = 0
        for mi in sorted(holders):
            new, n = replace_occurrences(corpus.molecules[mi], pattern, new_item)
            if n:
                replaced[mi] = new
                hits += n
        if hits != cand.count:
            raise StateMismatch(f"candidate scored with count {cand.count} but {hits} occurrences found")

        max_len = self.config.max_len
        for mi, new in replaced.items():
            old = corpus.molecules[mi]
            if self._windows is not None:
                windows = self._windows
                for w, c in molecule_windows(old, max_len).items():
                    left = windows[w] - c
                    if left:
                        windows[w] = left
                    else:
                        del windows[w]
                for w, c in molecule_windows(new, max_len).items():
                    windows[w] = windows.get(w, 0) + c
                for item in set(old) - set(new):
                    self._holders[item].discard(mi)
                self._holders.setdefault(new_item, set()).add(mi)
            corpus.molecules[mi] = new

        expanded = tuple(corpus.symbols[i] for i in cand.expanded)
        self.iteration += 1
        entry = codebook.add(expanded, corpus.tokens(pattern), self.iteration, hits, delta_bits)
        self._entry_costs[new_item] = substring_cost(expanded, corpus.table, self.mode)
        self._expansions[new_item] = cand.expanded

        mult = Counter(pattern)
        for v, m in mult.items():
            self._counts[v] -= hits * m
            if self._counts[v] == 0:
                del self._counts[v]
            if v >= corpus.n_symbols:
                codebook.set_count(v - corpus.n_symbols, self._counts.get(v, 0))
                if v not in self._counts:
                    del self._entry_costs[v]
        self._counts[new_item] = hits
        return entry

    # -- driver --------------------------------------------------------------

    def step(self, executor: ThreadPoolExecutor | None = None) -> IterationRecord | None:
        """Adopt the best candidate if it shortens the message; else return None."""
        before = self.length().total
        cand = self.best(executor)
        if cand is None or cand.projected.total >= before:
            return None
        smiles = self.smiles(cand)
        self.apply(cand, delta_bits=before - cand.projected.total)
        after = self.length().total
        if not after < before:
            raise StateMismatch(f"adopting {smiles!r} did not shorten the message ({before} -> {after})")
        record = IterationRecord(self.iteration, smiles, cand.count, before, after)
        self.trace.append(record)
        log.info("iteration %d: %s x%d, %.3f -> %.3f bits", record.iteration, smiles, cand.count, before, after)
        return record

    def run(self, callback: Callable[[Compressor, IterationRecord], None] | None = None) -> list[IterationRecord]:
        workers = self.config.thread_count
        executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
        try:
            for _ in range(self.config.max_iters):
                record = self.step(executor)
                if record is None:
                    break
                if callback is not None:
                    callback(self, record)
        finally:
            if executor is not None:
                executor.shutdown()
        return self.trace

    def check_invariants(self) -> None:
        """Assert losslessness and count consistency against a full rescan."""
        for i, src in enumerate(self.corpus.sources):
            got = self.corpus.render(i, self.codebook)
            if got != src:
                raise StateMismatch(f"molecule {i} renders as {got!r}, expected {src!r}")
        counts = self.corpus.counts()
        if +counts != +self._counts:
            raise StateMismatch("cached item counts disagree with the corpus")
        for e in self.codebook:
            if counts[self.corpus.meta_item(e.id)] != e.count:
                raise StateMismatch(f"entry {e.id} count {e.count} disagrees with the corpus")
        if self._windows is not None:
            fresh: dict[tuple[int, ...], int] = {}
            for mol in self.corpus.molecules:
                for w, c in molecule_windows(mol, self.config.max_len).items():
                    fresh[w] = fresh.get(w, 0) + c
            if fresh != self._windows:
                raise StateMismatch("cached window counts disagree with the corpus")


def enumerate_candidates(
    corpus: TokenCorpus, max_len: int, min_count: int = 2, codebook: Codebook | None = None
) -> list[Candidate]:
    comp = Compressor(corpus, codebook if codebook is not None else Codebook(), SearchConfig(max_len=max_len, min_count=min_count))
    cands = comp.candidates()
    cands.sort(key=lambda c: (len(c.expanded), comp.smiles(c), c.items))
    return cands


def score_candidate(
    cand: Candidate, corpus: TokenCorpus, codebook: Codebook | None = None, mode: LogStarMode = "rissanen"
) -> MessageLength:
    comp = Compressor(corpus, codebook if codebook is not None else Codebook(), SearchConfig(logstar_mode=mode))
    return comp.project(cand)


def apply_candidate(
    cand: Candidate, corpus: TokenCorpus, codebook: Codebook, mode: LogStarMode = "rissanen"
) -> tuple[TokenCorpus, Codebook]:
    """Adopt ``cand`` in place and return the (mutated) corpus and codebook."""
    Compressor(corpus, codebook, SearchConfig(logstar_mode=mode)).apply(cand)
    return corpus, codebook


def fgcompress(smiles: Sequence[str], config: SearchConfig | None = None) -> tuple[Codebook, list[IterationRecord]]:
    comp = Compressor(TokenCorpus(smiles), Codebook(), config or SearchConfig())
    trace = comp.run()
    return comp.codebook, trace
