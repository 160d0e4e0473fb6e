"""Ridge-regression benchmark for fingerprint representations.

Each repeat splits the data 75/25, picks the ridge penalty on the training
part by leave-one-out error, refits and reports test MSE.  Fingerprints are
compared across datasets with a Wilcoxon signed-rank test and a
Benjamini-Hochberg correction.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.stats import norm

from .lexer import tokenize

__all__ = [
    "TooFewRows",
    "TooFewPairs",
    "SingularSystem",
    "DEFAULT_ALPHAS",
    "LabeledTable",
    "RegressionReport",
    "RidgeFit",
    "split",
    "ridge_fit",
    "loo_errors",
    "loocv_alpha",
    "run_benchmark",
    "wilcoxon_signed_rank",
    "benjamini_hochberg",
    "bh_adjust",
    "unigram_baseline",
    "splitmix64",
    "derive_seeds",
]

DEFAULT_ALPHAS = (0.001, 0.01, 0.1, 1.0)
TRAIN_FRACTION = 0.75
EXACT_MAX_N = 25


class TooFewRows(ValueError):
    pass


class TooFewPairs(ValueError):
    pass


class SingularSystem(np.linalg.LinAlgError):
    pass


_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seeds(root: int, n: int) -> list[int]:
    """Per-task seeds, independent of how tasks are scheduled."""
    return [splitmix64((root + i) & _MASK64) for i in range(n)]


@dataclass
class LabeledTable:
    features: np.ndarray
    target: np.ndarray
    ids: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=float)
        self.target = np.asarray(self.target, dtype=float).ravel()
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-d matrix")
        if not self.ids:
            self.ids = [str(i) for i in range(len(self.target))]
        if not (self.features.shape[0] == len(self.target) == len(self.ids)):
            raise ValueError("features, target and ids disagree on the number of rows")
        if not (np.isfinite(self.features).all() and np.isfinite(self.target).all()):
            raise ValueError("non-finite values in table")

    def __len__(self) -> int:
        return len(self.target)

    def take(self, rows: np.ndarray) -> LabeledTable:
        return LabeledTable(self.features[rows], self.target[rows], [self.ids[i] for i in rows])

    def deduplicated(self) -> LabeledTable:
        """Keep the first row for each id."""
        seen: set[str] = set()
        keep = []
        for i, key in enumerate(self.ids):
            if key not in seen:
                seen.add(key)
                keep.append(i)
        return self.take(np.array(keep, dtype=int))


def split(table: LabeledTable, fraction: float = TRAIN_FRACTION, seed: int = 0) -> tuple[LabeledTable, LabeledTable]:
    n = len(table)
    if n < 8:
        raise TooFewRows(f"need at least 8 rows to split, got {n}")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = int(math.floor(fraction * n + 0.5))
    return table.take(np.sort(perm[:n_train])), table.take(np.sort(perm[n_train:]))


@dataclass(frozen=True)
class RidgeFit:
    coef: np.ndarray
    intercept: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.coef + self.intercept


def ridge_fit(X: np.ndarray, y: np.ndarray, alpha: float) -> RidgeFit:
    """Minimise ``||y - Xw - b||^2 + alpha ||w||^2`` with an unpenalised intercept."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or X.shape[1] < 1:
        raise ValueError("X needs at least one column")
    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    Xc = X - x_mean
    gram = Xc.T @ Xc + alpha * np.eye(X.shape[1])
    try:
        if alpha == 0:
            if np.linalg.matrix_rank(gram) < gram.shape[0]:
                raise SingularSystem("centered Gram matrix is singular at alpha = 0")
        coef = np.linalg.solve(gram, Xc.T @ (y - y_mean))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    return RidgeFit(coef, float(y_mean - x_mean @ coef))


def loo_errors(X: np.ndarray, y: np.ndarray, alpha: float) -> np.ndarray:
    """Leave-one-out residuals from a single fit: ``e_i / (1 - h_ii)``.

    The hat matrix of ridge with a free intercept is
    ``11'/n + Xc (Xc'Xc + alpha I)^-1 Xc'``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    Xc = X - X.mean(axis=0)
    gram = Xc.T @ Xc + alpha * np.eye(p)
    try:
        inv_xt = np.linalg.solve(gram, Xc.T)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc
    leverage = 1.0 / n + np.einsum("ij,ji->i", Xc, inv_xt)
    resid = (y - y.mean()) - Xc @ (inv_xt @ (y - y.mean()))
    return resid / (1.0 - leverage)


def loocv_alpha(X: np.ndarray, y: np.ndarray, alphas: Sequence[float] = DEFAULT_ALPHAS) -> float:
    """Penalty with the smallest mean LOO squared error; ties go to the smaller alpha."""
    if not alphas:
        raise ValueError("alphas must be non-empty")
    best_alpha, best_err = None, math.inf
    for alpha in sorted(alphas):
        err = float(np.mean(loo_errors(X, y, alpha) ** 2))
        if err < best_err:
            best_alpha, best_err = alpha, err
    return best_alpha


@dataclass
class RegressionReport:
    per_repeat: list[float]
    alphas: list[float]
    seeds: list[int]

    @property
    def repeats(self) -> int:
        return len(self.per_repeat)

    @property
    def mean_mse(self) -> float:
        return float(np.mean(self.per_repeat))

    @property
    def stderr(self) -> float:
        if self.repeats < 2:
            return 0.0
        return float(np.std(self.per_repeat, ddof=1) / math.sqrt(self.repeats))

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(mean_mse=self.mean_mse, stderr=self.stderr)
        return d


def run_benchmark(
    table: LabeledTable,
    repeats: int = 5,
    seed: int = 0,
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    fraction: float = TRAIN_FRACTION,
) -> RegressionReport:
    seeds = derive_seeds(seed, repeats)
    mses, chosen = [], []
    for s in seeds:
        train, test = split(table, fraction, s)
        alpha = loocv_alpha(train.features, train.target, alphas)
        model = ridge_fit(train.features, train.target, alpha)
        mses.append(float(np.mean((model.predict(test.features) - test.target) ** 2)))
        chosen.append(alpha)
    return RegressionReport(mses, chosen, seeds)


def _signed_rank_counts(doubled_ranks: Sequence[int]) -> np.ndarray:
    """Number of sign assignments giving each positive doubled-rank sum."""
    total = sum(doubled_ranks)
    dist = np.zeros(total + 1, dtype=object)
    dist[0] = 1
    for r in doubled_ranks:
        shifted = np.zeros_like(dist)
        shifted[r:] = dist[: total + 1 - r]
        dist = dist + shifted
    return dist


def wilcoxon_signed_rank(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sided p-value for paired samples.

    Zero differences are dropped.  Up to 25 remaining pairs use the exact
    permutation distribution of the positive rank sum (midranks for ties);
    larger samples use the normal approximation with a tie correction.
    """
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    d = d[d != 0]
    n = len(d)
    if n < 6:
        raise TooFewPairs(f"need at least 6 non-zero differences, got {n}")
    absd = np.abs(d)
    order = np.argsort(absd, kind="mergesort")
    ranks = np.empty(n)
    sorted_abs = absd[order]
    i = 0
    while i < n:
        j = i
        while j + 1 < n and sorted_abs[j + 1] == sorted_abs[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j + 2) / 2.0
        i = j + 1
    t_plus = ranks[d > 0].sum()

    if n <= EXACT_MAX_N:
        doubled = [int(round(2 * r)) for r in ranks]
        dist = _signed_rank_counts(doubled)
        t2 = int(round(2 * t_plus))
        n_total = 2**n
        lower = sum(dist[: t2 + 1])
        upper = sum(dist[t2:])
        p = 2 * min(lower, upper) / n_total
        return float(min(1.0, p))

    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(sorted_abs, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(tie_counts**3 - tie_counts) / 48.0
    z = (t_plus - mean) / math.sqrt(var)
    return float(min(1.0, 2 * norm.sf(abs(z))))


def benjamini_hochberg(p_values: Sequence[float], q: float = 0.05) -> np.ndarray:
    """Step-up rejections: reject the ``k`` smallest p-values, where ``k`` is
    the largest rank with ``p_(k) <= k q / m``."""
    p = np.asarray(p_values, dtype=float)
    if np.any((p < 0) | (p > 1)):
        raise ValueError("p-values must lie in [0, 1]")
    m = len(p)
    reject = np.zeros(m, dtype=bool)
    if m == 0:
        return reject
    order = np.argsort(p, kind="mergesort")
    below = p[order] <= q * np.arange(1, m + 1) / m
    if below.any():
        k = int(np.nonzero(below)[0].max()) + 1
        reject[order[:k]] = True
    return reject


def bh_adjust(p_values: Sequence[float]) -> np.ndarray:
    """BH-adjusted p-values (``adjusted <= q`` iff rejected at level ``q``)."""
    p = np.asarray(p_values, dtype=float)
    m = len(p)
    if m == 0:
        return p
    order = np.argsort(p, kind="mergesort")
    scaled = p[order] * m / np.arange(1, m + 1)
    adjusted = np.minimum.accumulate(scaled[::-1])[::-1]
    out = np.empty(m)
    out[order] = np.minimum(adjusted, 1.0)
    return out


def unigram_baseline(molecules: Sequence[str]) -> tuple[np.ndarray, list[str]]:
    """Per-molecule counts of each SMILES symbol, columns in first-seen order."""
    streams = [tokenize(m).texts for m in molecules]
    columns: dict[str, int] = {}
    for s in streams:
        for sym in s:
            columns.setdefault(sym, len(columns))
    X = np.zeros((len(streams), len(columns)), dtype=np.int64)
    for i, s in enumerate(streams):
        for sym in s:
            X[i, columns[sym]] += 1
    return X, list(columns)
