"""Command-line interface.

Exit status is 0 on success, 1 on a usage error and 2 on a data error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from collections import Counter
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .codelength import MessageLength
from .config import MAX_LEN_LARGE, SearchConfig, default_threads
from .evaluation import (
    DEFAULT_ALPHAS,
    LabeledTable,
    TooFewPairs,
    bh_adjust,
    benjamini_hochberg,
    run_benchmark,
    unigram_baseline,
    wilcoxon_signed_rank,
)
from .fingerprint import fingerprint_corpus, write_fingerprint_csv
from .io import CodebookFile, corpus_fingerprint, load_codebook, load_corpus, save_codebook, write_trace
from .search import Compressor, TokenCorpus

log = logging.getLogger("fgcompress")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _alphas(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from None
    if not values or any(v < 0 for v in values):
        raise argparse.ArgumentTypeError("alphas must be non-negative and non-empty")
    return values


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fgcompress", description="MML substructure discovery for SMILES corpora.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compress", help="discover a codebook")
    c.add_argument("--input", required=True, help="SMILES file, one molecule per line")
    c.add_argument("--out", required=True, help="codebook JSON to write")
    c.add_argument("--max-len", type=int, default=MAX_LEN_LARGE)
    c.add_argument("--iters", type=int, default=500)
    c.add_argument("--min-count", type=int, default=2)
    c.add_argument("--logstar", choices=("rissanen", "simple"), default="rissanen")
    c.add_argument("--threads", type=int, default=None, help="worker threads (default: $FGC_THREADS or 1)")
    c.add_argument("--trace", help="iteration trace TSV to write")

    f = sub.add_parser("fingerprint", help="count fingerprints over a codebook")
    f.add_argument("--codebook", required=True)
    f.add_argument("--input", required=True, help="SMILES file, one molecule per line")
    f.add_argument("--out", required=True, help="CSV to write")
    g = f.add_mutually_exclusive_group()
    g.add_argument("--overlap", dest="overlap", action="store_true", default=True)
    g.add_argument("--no-overlap", dest="overlap", action="store_false")
    f.add_argument("--threads", type=int, default=None)

    e = sub.add_parser("eval", help="ridge-regression benchmark")
    e.add_argument("--features", required=True, help="fingerprint CSV with a smiles column")
    e.add_argument("--targets", required=True, help="CSV with a smiles column and numeric targets")
    e.add_argument("--target-column", action="append", dest="target_columns",
                   help="target column (repeatable; default: every column except smiles)")
    e.add_argument("--baseline", action="append", default=[], metavar="NAME=CSV|unigram",
                   help="comparator features; 'unigram' computes symbol counts")
    e.add_argument("--alphas", type=_alphas, default=list(DEFAULT_ALPHAS))
    e.add_argument("--repeats", type=int, default=5)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--q", type=float, default=0.05, help="Benjamini-Hochberg level")
    e.add_argument("--out", required=True, help="JSON report to write")

    s = sub.add_parser("stats", help="symbol frequencies and symbol-only message length")
    s.add_argument("--input", required=True)
    s.add_argument("--logstar", choices=("rissanen", "simple"), default="rissanen")
    return p


def _threads(value: int | None) -> int:
    if value is None:
        return default_threads()
    if value < 1:
        raise UsageError("--threads must be >= 1")
    return value


def cmd_compress(args) -> int:
    try:
        config = SearchConfig(
            max_len=args.max_len,
            max_iters=args.iters,
            min_count=args.min_count,
            logstar_mode=args.logstar,
            thread_count=_threads(args.threads),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    loaded = load_corpus(args.input)
    corpus = TokenCorpus(loaded.molecules)
    comp = Compressor(corpus, config=config)
    initial = comp.length()
    log.info("%d molecules, %d symbols, initial length %s", len(corpus), corpus.n_tokens(), initial)
    comp.run()
    final = comp.length()
    cfg = config.to_dict()
    del cfg["thread_count"]  # output must not depend on parallelism
    save_codebook(
        CodebookFile(comp.codebook, config.logstar_mode, corpus.table, corpus_fingerprint(loaded.molecules), cfg),
        args.out,
    )
    if args.trace:
        write_trace(comp.trace, args.trace)
    print(
        f"{len(comp.trace)} iteration(s), {len(comp.codebook)} entries; "
        f"{initial.total:.3f} -> {final.total:.3f} bits ({final.total / initial.total:.4f} of symbol-only)"
    )
    return EXIT_OK


def _read_smiles_lines(path: str) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]


def cmd_fingerprint(args) -> int:
    cb_file = load_codebook(args.codebook)
    molecules = _read_smiles_lines(args.input)
    batch = fingerprint_corpus(molecules, cb_file.codebook, overlap=args.overlap, threads=_threads(args.threads))
    for lineno, msg in batch.errors:
        print(f"{args.input}:{lineno}: skipped: {msg}", file=sys.stderr)
    write_fingerprint_csv(args.out, batch, cb_file.codebook)
    print(f"{batch.matrix.shape[0]} molecule(s) x {batch.matrix.shape[1]} entries")
    return EXIT_OK


def _read_feature_csv(path: str) -> tuple[dict[str, np.ndarray], list[str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != "smiles":
            raise ValueError(f"{path}: first column must be 'smiles'")
        rows: dict[str, np.ndarray] = {}
        for rec in reader:
            if rec and rec[0] not in rows:
                rows[rec[0]] = np.array([float(x) for x in rec[1:]])
    return rows, header[1:]


def _read_targets(path: str, columns: list[str] | None) -> tuple[list[str], dict[str, list[float]]]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "smiles" not in reader.fieldnames:
            raise ValueError(f"{path}: needs a 'smiles' column")
        columns = columns or [c for c in reader.fieldnames if c != "smiles"]
        missing = [c for c in columns if c not in reader.fieldnames]
        if missing:
            raise ValueError(f"{path}: missing target column(s) {missing}")
        smiles: list[str] = []
        values: dict[str, list[float]] = {c: [] for c in columns}
        for rec in reader:
            smiles.append(rec["smiles"].strip())
            for c in columns:
                try:
                    values[c].append(float(rec[c]))
                except (TypeError, ValueError):
                    values[c].append(math.nan)
    return smiles, values


def _table(smiles: list[str], target: list[float], features: dict[str, np.ndarray]) -> LabeledTable:
    ids, X, y, seen = [], [], [], set()
    for s, t in zip(smiles, target):
        # duplicates by exact SMILES text; first row wins
        if s in seen or not math.isfinite(t) or s not in features:
            continue
        seen.add(s)
        ids.append(s)
        X.append(features[s])
        y.append(t)
    if not ids:
        raise ValueError("no rows left after joining features and targets")
    return LabeledTable(np.vstack(X), np.array(y), ids)


def cmd_eval(args) -> int:
    if args.repeats < 1:
        raise UsageError("--repeats must be >= 1")
    primary, _ = _read_feature_csv(args.features)
    smiles, targets = _read_targets(args.targets, args.target_columns)

    feature_sets: dict[str, dict[str, np.ndarray]] = {"primary": primary}
    for spec in args.baseline:
        if spec == "unigram":
            uniq = list(dict.fromkeys(smiles))
            X, _ = unigram_baseline(uniq)
            feature_sets["unigram"] = dict(zip(uniq, X.astype(float)))
        elif "=" in spec:
            name, path = spec.split("=", 1)
            if name in feature_sets:
                raise UsageError(f"duplicate feature set name {name!r}")
            feature_sets[name] = _read_feature_csv(path)[0]
        else:
            raise UsageError(f"--baseline expects NAME=CSV or 'unigram', got {spec!r}")

    reports = []
    means: dict[str, dict[str, float]] = {name: {} for name in feature_sets}
    for dataset, target in targets.items():
        for name, feats in feature_sets.items():
            table = _table(smiles, target, feats)
            rep = run_benchmark(table, repeats=args.repeats, seed=args.seed, alphas=args.alphas)
            means[name][dataset] = rep.mean_mse
            reports.append({"dataset": dataset, "features": name, "n_rows": len(table), **rep.to_dict()})

    comparison = []
    for name in feature_sets:
        if name == "primary":
            continue
        datasets = list(targets)
        a = [means["primary"][d] for d in datasets]
        b = [means[name][d] for d in datasets]
        row = {
            "baseline": name,
            "n_datasets": len(datasets),
            "primary_wins": int(sum(x < y for x, y in zip(a, b))),
            "p_value": None,
        }
        try:
            row["p_value"] = wilcoxon_signed_rank(a, b)
        except TooFewPairs as exc:
            row["note"] = str(exc)
        comparison.append(row)
    tested = [r for r in comparison if r["p_value"] is not None]
    if tested:
        pv = [r["p_value"] for r in tested]
        for r, adj, rej in zip(tested, bh_adjust(pv), benjamini_hochberg(pv, args.q)):
            r["p_adjusted"] = float(adj)
            r["reject"] = bool(rej)
            r["reject_raw"] = bool(r["p_value"] <= args.q)

    out = {"q": args.q, "alphas": args.alphas, "repeats": args.repeats, "seed": args.seed,
           "reports": reports, "comparison": comparison}
    Path(args.out).write_text(json.dumps(out, indent=1) + "\n", encoding="utf-8")
    for r in reports:
        print(f"{r['dataset']}\t{r['features']}\t{r['mean_mse']:.4f} +/- {r['stderr']:.4f}")
    return EXIT_OK


def cmd_stats(args) -> int:
    loaded = load_corpus(args.input)
    corpus = TokenCorpus(loaded.molecules)
    counts = Counter()
    for stream in corpus.streams():
        counts.update(stream.texts)
    total = sum(counts.values())
    print(f"molecules\t{len(corpus)}")
    print(f"duplicates_removed\t{loaded.n_duplicates}")
    print(f"invalid_lines\t{len(loaded.invalid)}")
    print(f"symbols\t{total}")
    print("symbol\tcount\tprobability")
    for sym, c in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])):
        print(f"{sym}\t{c}\t{c / total:.6g}")
    length: MessageLength = Compressor(corpus, config=SearchConfig(logstar_mode=args.logstar)).length()
    print(f"symbol_only_bits\t{length.total:.6f}")
    print(f"p1\t{length.p1:.6f}\np2\t{length.p2:.6f}\np3\t{length.p3:.6f}")
    return EXIT_OK


COMMANDS = {"compress": cmd_compress, "fingerprint": cmd_fingerprint, "eval": cmd_eval, "stats": cmd_stats}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"fgcompress {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError, KeyError) as exc:
        print(f"fgcompress {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
