"""Minimum-message-length discovery of compressing SMILES substructures."""

__version__ = "0.1.0"

from .codebook import Codebook, CodebookEntry
from .codelength import MessageLength, SymbolTable, VocabularyCounts, log_star, part1, part2, part3, substring_cost, total_length
from .config import SearchConfig
from .fingerprint import Fingerprinter, fingerprint, fingerprint_corpus
from .lexer import LexError, Token, TokenKind, TokenStream, render, tokenize
from .search import Compressor, TokenCorpus, apply_candidate, enumerate_candidates, fgcompress, score_candidate
from .validity import Rule, ValidityVerdict, is_valid_substring

__all__ = [
    "Codebook",
    "CodebookEntry",
    "Compressor",
    "Fingerprinter",
    "LexError",
    "MessageLength",
    "Rule",
    "SearchConfig",
    "SymbolTable",
    "Token",
    "TokenCorpus",
    "TokenKind",
    "TokenStream",
    "ValidityVerdict",
    "VocabularyCounts",
    "apply_candidate",
    "enumerate_candidates",
    "fgcompress",
    "fingerprint",
    "fingerprint_corpus",
    "is_valid_substring",
    "log_star",
    "part1",
    "part2",
    "part3",
    "render",
    "score_candidate",
    "substring_cost",
    "tokenize",
    "total_length",
]
