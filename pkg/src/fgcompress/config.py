from __future__ import annotations

import logging
import os
from dataclasses import asdict, dataclass

from .codelength import LogStarMode

log = logging.getLogger(__name__)

# Window limits used for a large reference corpus and for small per-target sets.
MAX_LEN_LARGE = 8
MAX_LEN_SMALL = 15


@dataclass(frozen=True)
class SearchConfig:
    max_len: int = MAX_LEN_LARGE
    max_iters: int = 500
    min_count: int = 2
    logstar_mode: LogStarMode = "rissanen"
    seed: int = 0
    thread_count: int = 1

    def __post_init__(self) -> None:
        if self.max_len < 2:
            raise ValueError("max_len must be >= 2")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.min_count < 1:
            raise ValueError("min_count must be >= 1")
        if self.logstar_mode not in ("rissanen", "simple"):
            raise ValueError(f"unknown log_star mode {self.logstar_mode!r}")
        if self.thread_count < 1:
            raise ValueError("thread_count must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


def default_threads() -> int:
    """Worker count from ``FGC_THREADS``, else 1."""
    raw = os.environ.get("FGC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        log.warning("ignoring FGC_THREADS=%r, using 1 thread", raw)
        return 1
