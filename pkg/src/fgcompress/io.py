"""Corpus ingestion and codebook persistence."""

from __future__ import annotations

import hashlib
import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .codebook import Codebook, CodebookEntry
from .codelength import LogStarMode, SymbolTable
from .lexer import LexError, Token, meta_token, tokenize
from .search import IterationRecord

__all__ = [
    "FORMAT_VERSION",
    "AllLinesInvalid",
    "VersionMismatch",
    "ChecksumMismatch",
    "LoadedCorpus",
    "CodebookFile",
    "load_corpus",
    "corpus_fingerprint",
    "save_codebook",
    "load_codebook",
    "write_trace",
]

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
_META_RE = re.compile(r"^\{(\d+)\}$")


class AllLinesInvalid(ValueError):
    pass


class VersionMismatch(ValueError):
    pass


class ChecksumMismatch(ValueError):
    pass


@dataclass
class LoadedCorpus:
    molecules: list[str]
    n_duplicates: int = 0
    invalid: list[tuple[int, str]] = field(default_factory=list)


def load_corpus(path: str | Path) -> LoadedCorpus:
    """Read one SMILES per line.

    Lines are stripped and blank lines ignored.  Exact duplicates are dropped
    (first occurrence kept) and lines that fail to lex are skipped; both are
    logged with counts and line numbers.
    """
    seen: set[str] = set()
    molecules: list[str] = []
    invalid: list[tuple[int, str]] = []
    duplicates = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line in seen:
                duplicates += 1
                continue
            try:
                tokenize(line)
            except LexError as exc:
                invalid.append((lineno, str(exc)))
                log.warning("%s:%d: skipped: %s", path, lineno, exc)
                continue
            seen.add(line)
            molecules.append(line)
    if duplicates:
        log.info("%s: removed %d duplicate line(s)", path, duplicates)
    if not molecules:
        raise AllLinesInvalid(f"{path}: no valid SMILES lines")
    return LoadedCorpus(molecules, duplicates, invalid)


def corpus_fingerprint(molecules: Iterable[str]) -> str:
    h = hashlib.sha256()
    for m in molecules:
        h.update(m.encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


@dataclass
class CodebookFile:
    codebook: Codebook
    logstar_mode: LogStarMode
    symbol_table: SymbolTable
    corpus_fingerprint: str
    config: dict = field(default_factory=dict)
    format_version: int = FORMAT_VERSION


def _surface_texts(tokens: Sequence[Token]) -> list[str]:
    return [t.text for t in tokens]


def _parse_surface(texts: Sequence[str]) -> tuple[Token, ...]:
    out = []
    for text in texts:
        m = _META_RE.match(text)
        if m:
            out.append(meta_token(int(m.group(1))))
        else:
            toks = tokenize(text).tokens
            if len(toks) != 1:
                raise ValueError(f"surface item {text!r} is not a single symbol")
            out.append(toks[0])
    return tuple(out)


def _entry_to_json(e: CodebookEntry) -> dict:
    return {
        "id": e.id,
        "expanded_smiles": e.smiles,
        "surface": _surface_texts(e.surface),
        "iteration": e.iteration,
        "count": e.count,
        "delta_bits": e.delta_bits,
    }


def _entry_from_json(d: dict) -> CodebookEntry:
    return CodebookEntry(
        id=int(d["id"]),
        expanded=tokenize(d["expanded_smiles"]).tokens,
        surface=_parse_surface(d["surface"]),
        iteration=int(d["iteration"]),
        count=int(d["count"]),
        delta_bits=float(d["delta_bits"]),
    )


def _checksum(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def save_codebook(cb_file: CodebookFile, path: str | Path) -> None:
    cb = cb_file.codebook
    payload = {
        "format_version": cb_file.format_version,
        "logstar_mode": cb_file.logstar_mode,
        "symbol_table": dict(cb_file.symbol_table.probs),
        "entries": [_entry_to_json(e) for e in cb],
        "retired": [_entry_to_json(e) for e in cb.retired.values()],
        "next_id": cb.next_id,
        "corpus_fingerprint": cb_file.corpus_fingerprint,
        "config": cb_file.config,
    }
    payload["checksum"] = _checksum(payload)
    Path(path).write_text(json.dumps(payload, indent=1) + "\n", encoding="utf-8")


def load_codebook(path: str | Path) -> CodebookFile:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"{path}: format_version {version!r}, expected {FORMAT_VERSION}")
    checksum = data.pop("checksum", None)
    if checksum != _checksum(data):
        raise ChecksumMismatch(f"{path}: checksum does not match contents")
    entries = [_entry_from_json(d) for d in data["entries"]]
    retired = {int(d["id"]): _entry_from_json(d) for d in data["retired"]}
    return CodebookFile(
        codebook=Codebook(entries, retired, int(data["next_id"])),
        logstar_mode=data["logstar_mode"],
        symbol_table=SymbolTable(data["symbol_table"]),
        corpus_fingerprint=data["corpus_fingerprint"],
        config=data.get("config", {}),
        format_version=version,
    )


TRACE_HEADER = ("iteration", "expanded_smiles", "count", "total_bits_before", "total_bits_after", "delta_bits")


def write_trace(records: Iterable[IterationRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(TRACE_HEADER) + "\n")
        for r in records:
            fh.write(
                f"{r.iteration}\t{r.smiles}\t{r.count}\t{r.total_before!r}\t{r.total_after!r}\t{r.delta_bits!r}\n"
            )
