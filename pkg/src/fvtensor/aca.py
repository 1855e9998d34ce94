"""Adaptive cross sampling of function-valued tensors.

Grows one index per mode per iteration: a start column is drawn (uniform,
round-robin, or leverage-score weighted), refined by rook pivoting on a
lazily evaluated residual row matrix restricted to auxiliary index sets,
and the Tucker-cross model is rebuilt from the enlarged sets.  The
residual matrices are never materialized beyond the scanned entries.
"""

from dataclasses import dataclass, field
from itertools import product
from math import ceil, gcd

import numpy as np

from .bmatrix import BMatrix, DEFAULT_TOL, svd
from .btensor import model_gather, tucker_cross, tucker_rank


@dataclass
class AbcConfig:
    """Knobs of the adaptive run.

    ``init_aux`` holds one non-empty auxiliary index set per mode.  The
    early-stop tolerance is relative to the largest core-entry norm and
    is disabled at 0, which keeps the fixed-iteration semantics exact.
    """

    n_iter: int
    init_aux: list
    n_rook: int = 1
    draw: str = "uniform"
    seed: int = 0
    tol_rel: float = DEFAULT_TOL
    early_stop_tol: float = 0.0

    def validate(self, dims):
        if self.n_iter < 1:
            raise ValueError("n_iter must be at least 1")
        if self.n_rook < 0:
            raise ValueError("n_rook must be nonnegative")
        if self.draw not in ("uniform", "round_robin", "leverage"):
            raise ValueError(f"unknown draw rule {self.draw!r}")
        if len(self.init_aux) != len(dims):
            raise ValueError("need one auxiliary index set per mode")
        for k, (aux, n) in enumerate(zip(self.init_aux, dims)):
            idx = sorted(set(int(i) for i in aux))
            if not idx:
                raise ValueError(f"auxiliary index set for mode {k} is empty")
            if idx[0] < 0 or idx[-1] >= n:
                raise ValueError(f"auxiliary index set for mode {k} out of range")


@dataclass
class AbcReport:
    """What the adaptive run did, iteration by iteration."""

    index_sets: tuple
    aux_sets: tuple
    rank_history: list = field(default_factory=list)
    evals_by_iter: list = field(default_factory=list)
    index_set_history: list = field(default_factory=list)
    max_residual_by_iter: list = field(default_factory=list)
    converged: bool = False
    n_iter_run: int = 0


class _ResidualRowView:
    """Residual row matrix over the auxiliary sets, one mode at a time.

    Rows are big-endian combinations of the other modes' auxiliary sets,
    columns the full mode-``k`` range.  Entries are evaluated on demand:
    the tensor side goes through the cache, the model side through factor
    contractions.  The largest entry norm seen so far is tracked for the
    early-stopping test.
    """

    def __init__(self, cached, model, aux, k):
        self.cached = cached
        self.model = model
        self.aux = aux
        self.k = k
        self.row_dims = tuple(len(aux[l]) for l in range(cached.d) if l != k)
        self.shape = (int(np.prod(self.row_dims, dtype=np.int64)), cached.dims[k])
        self.max_seen = 0.0

    def _norms(self, grids):
        vals = self.cached.gather(grids)
        if self.model is not None:
            vals = vals - model_gather(self.model, grids)
        flat = vals.reshape(-1, self.cached.ip.h)
        norms = self.cached.ip.norms(flat)
        if norms.size:
            self.max_seen = max(self.max_seen, float(norms.max()))
        return norms

    def col_norms(self, j):
        grids = [self.aux[l] if l != self.k else [int(j)]
                 for l in range(self.cached.d)]
        return self._norms(grids)

    def row_norms(self, i):
        combo = np.unravel_index(int(i), self.row_dims)
        grids = []
        t = 0
        for l in range(self.cached.d):
            if l == self.k:
                grids.append(np.arange(self.cached.dims[l]))
            else:
                grids.append([self.aux[l][combo[t]]])
                t += 1
        return self._norms(grids)

    def all_col_norms(self):
        grids = [self.aux[l] if l != self.k else np.arange(self.cached.dims[l])
                 for l in range(self.cached.d)]
        vals = self.cached.gather(grids)
        if self.model is not None:
            vals = vals - model_gather(self.model, grids)
        sq = self.cached.ip.pair(vals, vals)
        axes = tuple(l for l in range(self.cached.d) if l != self.k)
        norms = np.sqrt(np.sum(sq, axis=axes).clip(min=0.0))
        if norms.size:
            self.max_seen = max(self.max_seen, float(np.max(self.cached.ip.norms(
                vals.reshape(-1, self.cached.ip.h)))))
        return norms


class _MatrixView:
    """Norm-scan adapter so rook pivoting runs on a plain BMatrix."""

    def __init__(self, A):
        self.A = A
        self.shape = A.shape
        self.max_seen = 0.0

    def col_norms(self, j):
        norms = self.A.ip.norms(self.A.data[:, int(j)])
        self.max_seen = max(self.max_seen, float(norms.max()))
        return norms

    def row_norms(self, i):
        norms = self.A.ip.norms(self.A.data[int(i)])
        self.max_seen = max(self.max_seen, float(norms.max()))
        return norms


def rook_pivot(view, j_start, n_rook):
    """Alternating argmax scans locating a large row/column crossing.

    Starting from column ``j_start``, each round finds the largest entry
    of the current column, then the largest entry of that row; ties go to
    the smallest index.  With ``n_rook = 0`` no entry is inspected and
    ``(None, j_start)`` is returned.
    """
    if isinstance(view, BMatrix):
        view = _MatrixView(view)
    m, n = view.shape
    if m == 0 or n == 0:
        raise ValueError("cannot pivot on an empty matrix")
    j = int(j_start)
    if not 0 <= j < n:
        raise IndexError(f"start column {j} out of range")
    i = None
    for _ in range(int(n_rook)):
        i = int(np.argmax(view.col_norms(j)))
        j = int(np.argmax(view.row_norms(i)))
    return i, j


def _round_robin_stride(n):
    for s in range(ceil(n / 2), 0, -1):
        if gcd(s, n) == 1:
            return s
    return 1


def draw(rule, n_k, rng, iteration=None, scores=None):
    """Draw a start column index in ``[0, n_k)`` under the given rule."""
    if n_k < 1:
        raise ValueError("mode size must be positive")
    if rule == "uniform":
        return int(rng.integers(n_k))
    if rule == "round_robin":
        if iteration is None or iteration < 1:
            raise ValueError("round_robin needs a 1-based iteration number")
        return ((iteration - 1) * _round_robin_stride(n_k)) % n_k
    if rule == "leverage":
        p = np.asarray(scores, dtype=float)
        if p.shape != (n_k,) or np.any(p < 0.0) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("leverage scores must form a probability vector")
        return int(rng.choice(n_k, p=p))
    raise ValueError(f"unknown draw rule {rule!r}")


def leverage_scores(slab, tol_rel=DEFAULT_TOL):
    """Sampling distribution from the right singular vectors of a slab.

    ``slab`` collects sampled mode-``k`` fibers as the rows of a
    function-valued matrix with ``n_k`` columns; the scores are the
    squared row norms of the right singular factor, divided by the rank.
    """
    fac = svd(slab, tol_rel)
    if fac.sigma.size == 0:
        raise ValueError("cannot compute leverage scores of a zero slab")
    p = np.sum(fac.V**2, axis=1) / fac.sigma.size
    return p / p.sum()


def _estimate_leverage(cached, aux_sizes, rng, tol_rel):
    """Approximate per-mode leverage scores from random fiber samples."""
    dims = cached.dims
    d = len(dims)
    scores = []
    for k in range(d):
        other = [dims[l] for l in range(d) if l != k]
        n_other = int(np.prod(other, dtype=np.int64))
        ncols = min(aux_sizes[k], n_other)
        cols = np.sort(rng.choice(n_other, size=ncols, replace=False))
        rows = []
        for c in cols:
            combo = np.unravel_index(int(c), tuple(other))
            grids = []
            t = 0
            for l in range(d):
                if l == k:
                    grids.append(np.arange(dims[k]))
                else:
                    grids.append([int(combo[t])])
                    t += 1
            rows.append(cached.gather(grids).reshape(dims[k], cached.ip.h))
        slab = BMatrix(np.stack(rows, axis=0), cached.ip)
        scores.append(leverage_scores(slab, tol_rel))
    return scores


def tucker_abc(cached, cfg):
    """Adaptive Tucker-cross approximation from sparse entry samples.

    Runs ``cfg.n_iter`` sweeps; in each sweep every mode receives one new
    index found by rook pivoting on the residual restricted to the
    auxiliary sets, and the Tucker-cross model is rebuilt at the enlarged
    index sets.  Returns the final model and a report with per-iteration
    ranks, budgets, and index-set snapshots.

    If a pivot lands on an index already in the set, a fresh start column
    is drawn up to five times; failing that, the unused column with the
    largest residual norm over the auxiliary rows is taken, and a mode
    with every column used is skipped for the sweep.
    """
    dims = cached.dims
    d = len(dims)
    cfg.validate(dims)
    rng = np.random.default_rng(cfg.seed)

    aux = [sorted(set(int(i) for i in s)) for s in cfg.init_aux]
    sets = [[] for _ in range(d)]
    model = None

    scores = None
    if cfg.draw == "leverage":
        scores = _estimate_leverage(cached, [len(s) for s in aux], rng, cfg.tol_rel)

    report = AbcReport(index_sets=(), aux_sets=())
    for s in range(1, cfg.n_iter + 1):
        sweep_max = 0.0
        scanned = False
        for k in range(d):
            used = set(sets[k])
            if len(used) == dims[k]:
                continue
            view = _ResidualRowView(cached, model, aux, k)
            chosen = None
            for _ in range(6):
                j = draw(cfg.draw, dims[k], rng, iteration=s,
                         scores=None if scores is None else scores[k])
                if cfg.n_rook > 0:
                    _, j = rook_pivot(view, j, cfg.n_rook)
                    scanned = True
                if j not in used:
                    chosen = j
                    break
            if chosen is None:
                norms = view.all_col_norms()
                scanned = True
                norms[sorted(used)] = -1.0
                chosen = int(np.argmax(norms))
            sets[k] = sorted(used | {chosen})
            if chosen not in aux[k]:
                aux[k] = sorted(aux[k] + [chosen])
            sweep_max = max(sweep_max, view.max_seen)

        model = tucker_cross(cached, sets, cfg.tol_rel)
        report.rank_history.append(tucker_rank(model.core, cfg.tol_rel))
        report.evals_by_iter.append(cached.count)
        report.index_set_history.append(tuple(tuple(I) for I in sets))
        report.max_residual_by_iter.append(sweep_max)
        report.n_iter_run = s

        if cfg.early_stop_tol > 0.0 and scanned:
            core_scale = float(np.max(cached.ip.norms(model.core.data)))
            if sweep_max <= cfg.early_stop_tol * core_scale:
                report.converged = True
                break

    report.index_sets = tuple(tuple(I) for I in sets)
    report.aux_sets = tuple(tuple(a) for a in aux)
    return model, report
