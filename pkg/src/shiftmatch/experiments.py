"""Monte Carlo scans that set sampled match statistics against transfer-matrix predictions.

Every result is a pure function of the plan and its seed.  Trials are cut
into fixed-size chunks that do not depend on the worker count, and the
per-trial integers are reassembled in trial order before any floating-point
reduction, so output bytes do not change with ``workers``.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .matcher import CrossIndex
from .potential import Interaction
from .sampler import DiracChain, build_chain, sample, sample_pair
from .suffix import SuffixIndex, compact_codes
from .thermo import alpha, alpha_tilde, cylinder_prob, pair_overlap_sum, run_decay

MODES = ("self", "pair-same", "pair-different", "dirac")
KINDS = ("regime", "tightness", "slope", "dirac")

DEFAULT_SEED = 314159
CELL_STRIDE = 1_000_003  # seed gap between successive n of a grid
CHUNK = 50  # trials per work unit
EXCEED_LEVELS = (1, 2, 4, 8, 16, 32, 64)

PREDICTION_KIND = {
    "self": "order-of-magnitude only",
    "pair-same": "exact",
    "pair-different": "exact",
    "dirac": "exact",
}


class DegenerateGrid(ValueError):
    pass


class NoAdmissibleK(ValueError):
    pass


def default_trials(n: int) -> int:
    return 200 if n >= 2**16 else 2000


# ---------------------------------------------------------------- plans

def _check_offset(o):
    if isinstance(o, bool) or not (isinstance(o, int) or o in ("+half", "-half")):
        raise ValueError(f"k offset must be an integer, '+half' or '-half', got {o!r}")
    return o


@dataclass(frozen=True)
class ExperimentPlan:
    model: Interaction
    mode: str = "self"
    n_grid: tuple = ()
    k_offsets: tuple = (0,)
    k_list: tuple | None = None
    trials: int | None = None
    seed: int = DEFAULT_SEED
    model2: Interaction | None = None
    symbol: object = None
    kind: str = "regime"
    name: str = "scan"
    m_list: tuple = tuple(range(1, 65))

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown scan kind {self.kind!r}; expected one of {KINDS}")
        grid = tuple(int(n) for n in self.n_grid)
        if not grid:
            raise ValueError("empty n grid")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError(f"n grid must be strictly increasing: {list(grid)}")
        if grid[0] < 2:
            raise ValueError("n must be >= 2")
        object.__setattr__(self, "n_grid", grid)
        object.__setattr__(self, "k_offsets", tuple(_check_offset(o) for o in self.k_offsets))
        if self.k_list is not None:
            ks = tuple(int(k) for k in self.k_list)
            if any(k < 1 for k in ks):
                raise ValueError("explicit k values must be >= 1")
            object.__setattr__(self, "k_list", ks)
        if self.trials is not None and int(self.trials) < 1:
            raise ValueError("trials must be >= 1")
        if self.mode == "pair-different" and self.model2 is None:
            raise ValueError("pair-different mode needs a second model")
        if self.model2 is not None and self.model2.alphabet != self.model.alphabet:
            raise ValueError("both models must share one alphabet")
        if self.mode == "dirac":
            sym = self.symbol if self.symbol is not None else self.model.alphabet.symbols[0]
            self.model.alphabet.index(sym)
            object.__setattr__(self, "symbol", sym)

    def trials_for(self, n: int) -> int:
        return int(self.trials) if self.trials is not None else default_trials(n)

    @property
    def second(self) -> Interaction:
        return self.model2 if self.mode == "pair-different" else self.model

    def k_star(self, n: int) -> float:
        if self.mode == "pair-different":
            return math.log(n) / alpha_tilde(self.model, self.model2)
        return math.log(n) / alpha(self.model)

    def ks_for(self, n: int) -> list[tuple[object, int]]:
        """``(label, k)`` pairs for one ``n``: explicit values or offsets around ``k*``."""
        if self.k_list is not None:
            return [(k, min(k, n)) for k in self.k_list]
        ks = self.k_star(n)
        base = math.floor(ks + 1e-9)
        out = []
        for o in self.k_offsets:
            if o == "+half":
                shift = math.floor(ks / 2 + 1e-9)
            elif o == "-half":
                shift = -math.floor(ks / 2 + 1e-9)
            else:
                shift = o
            out.append((o, min(max(base + shift, 1), n)))
        return out


def trial_seed(base: int, n_index: int, trial: int) -> int:
    return base + CELL_STRIDE * n_index + trial


# ---------------------------------------------------------------- predictions

def predicted_mean(mode: str, U: Interaction, V, n: int, k: int, symbol=None) -> float:
    """Closed-form ``E N`` (pair modes, dirac) or the order-bound scale (self).

    Pair modes use ``(n-k+1)(n-k) sum_A P(A) Q(A)`` with the sum run exactly
    through the product chain, so no enumeration cap applies.  ``dirac``
    returns ``n (n-k+1) P([a]_k)``; see ``dirac_exact_mean`` for the
    off-diagonal count.
    """
    if not 1 <= k <= n:
        raise ValueError(f"k = {k} out of range 1..{n}")
    if mode == "self":
        a = alpha(U)
        return (n - k) * math.exp(-k * a) + max(n - 2 * k, 0) ** 2 * math.exp(-2 * k * a)
    if mode == "pair-same":
        return (n - k + 1) * (n - k) * pair_overlap_sum(U, U, k)
    if mode == "pair-different":
        if V is None:
            raise ValueError("pair-different needs a second model")
        return (n - k + 1) * (n - k) * pair_overlap_sum(U, V, k)
    if mode == "dirac":
        a = symbol if symbol is not None else V
        return n * (n - k + 1) * cylinder_prob(U, [a] * k)
    raise ValueError(f"unknown mode {mode!r}")


def dirac_exact_mean(U: Interaction, a, n: int, k: int) -> float:
    """``E N`` against the constant word: ``(n-k)(n-k+1) P([a]_k)``."""
    return (n - k) * (n - k + 1) * cylinder_prob(U, [a] * k)


# ---------------------------------------------------------------- trials

def _chains(mode, U, V, symbol):
    first = build_chain(U)
    if mode == "self":
        return first, None
    if mode == "dirac":
        return first, DiracChain(U.alphabet, symbol)
    return first, build_chain(V if mode == "pair-different" else U)


def _run_chunk(task) -> np.ndarray:
    """Rows ``[N(k_1), ..., N(k_r), M]`` for a run of consecutive trial seeds."""
    mode, U, V, symbol, n, ks, seeds = task
    c1, c2 = _chains(mode, U, V, symbol)
    out = np.empty((len(seeds), len(ks) + 1), dtype=np.int64)
    for row, seed in enumerate(seeds):
        if mode == "self":
            s = sample(c1, n, seed)
            (codes,) = compact_codes(s.codes)
            idx = SuffixIndex(codes)
            out[row, :-1] = [idx.count_pairs(k) for k in ks]
            out[row, -1] = idx.max_lcp()
        else:
            s, t = sample_pair(c1, c2, n, seed)
            cross = CrossIndex(s, t)
            out[row, :-1] = [cross.count(k) for k in ks]
            out[row, -1] = -1  # not needed by any pair scan
    return out


def run_trials(mode, U, V, symbol, n: int, ks, seeds, workers: int = 1) -> np.ndarray:
    seeds = list(seeds)
    tasks = [(mode, U, V, symbol, n, tuple(ks), seeds[i : i + CHUNK])
             for i in range(0, len(seeds), CHUNK)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, tasks))
    else:
        parts = [_run_chunk(t) for t in tasks]
    return np.concatenate(parts, axis=0)


# ---------------------------------------------------------------- summaries

@dataclass(frozen=True)
class CellSummary:
    n: int
    k: int
    trials: int
    mean: float
    var: float
    q05: float
    q50: float
    q95: float
    zero_frac: float
    pred_mean: float
    label: object = None
    k_star: float = float("nan")
    exceed: dict = field(default_factory=dict)
    pred_kind: str = ""

    @property
    def stderr(self) -> float:
        return math.sqrt(self.var / self.trials) if self.trials > 0 else float("nan")

    @property
    def ratio(self) -> float:
        return self.mean / self.pred_mean if self.pred_mean > 0 else float("nan")

    def row(self) -> list:
        return [self.n, self.k, self.trials, self.mean, self.var, self.q05, self.q50,
                self.q95, self.zero_frac, self.pred_mean, self.ratio]


CSV_COLUMNS = ["n", "k", "trials", "mean", "var", "q05", "q50", "q95", "zero_frac",
               "pred_mean", "ratio"]


def summarize(values, n, k, pred, label=None, k_star=float("nan"), pred_kind="",
              levels=EXCEED_LEVELS) -> CellSummary:
    x = np.asarray(values, dtype=np.int64)
    xf = x.astype(float)
    var = float(xf.var(ddof=1)) if len(x) > 1 else 0.0
    q05, q50, q95 = (float(q) for q in np.quantile(xf, [0.05, 0.5, 0.95]))
    exceed = {m: float(np.mean(x > m)) for m in levels}
    return CellSummary(n, k, len(x), float(xf.mean()), var, q05, q50, q95,
                       float(np.mean(x == 0)), float(pred), label, k_star, exceed, pred_kind)


# ---------------------------------------------------------------- scans

@dataclass
class ScanResult:
    plan: ExperimentPlan
    cells: list
    verdicts: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)


def _collect(plan: ExperimentPlan, workers: int, levels=EXCEED_LEVELS):
    """Run every n of the grid once, sharing samples across its k values."""
    cells, raw = [], {}
    for i, n in enumerate(plan.n_grid):
        pairs = plan.ks_for(n)
        ks = [k for _, k in pairs]
        T = plan.trials_for(n)
        seeds = [trial_seed(plan.seed, i, t) for t in range(T)]
        data = run_trials(plan.mode, plan.model, plan.second, plan.symbol, n, ks, seeds, workers)
        raw[n] = data
        kstar = plan.k_star(n)
        for col, (label, k) in enumerate(pairs):
            pred = predicted_mean(plan.mode, plan.model, plan.second, n, k, symbol=plan.symbol)
            cells.append(summarize(data[:, col], n, k, pred, label, kstar,
                                   PREDICTION_KIND[plan.mode], levels))
    return cells, raw


def _series(cells):
    by_label: dict = {}
    for c in cells:
        by_label.setdefault(c.label, []).append(c)
    return by_label


def _label_sign(label) -> int:
    if label == "+half":
        return 1
    if label == "-half":
        return -1
    if isinstance(label, int):
        return (label > 0) - (label < 0)
    return 0


def regime_scan(plan: ExperimentPlan, workers: int = 1) -> ScanResult:
    """Cells over the n grid; verdicts per k offset describe the trend along n.

    Sub-threshold offsets should show strictly increasing means, positive
    offsets a zero-fraction climbing towards 1, bounded offsets a stable
    mean/prediction ratio.
    """
    cells, _ = _collect(plan, workers)
    verdicts = {}
    for label, series in _series(cells).items():
        means = [c.mean for c in series]
        zf = [c.zero_frac for c in series]
        ratios = [c.ratio for c in series if c.pred_mean > 0 and c.mean > 0]
        verdicts[str(label)] = {
            "side": {-1: "below", 0: "at", 1: "above"}[_label_sign(label)],
            "mean_increasing": all(b > a for a, b in zip(means, means[1:])),
            "zero_frac_nondecreasing": all(b >= a for a, b in zip(zf, zf[1:])),
            "zero_frac_last": zf[-1],
            "ratio_spread": (max(ratios) / min(ratios)) if ratios else float("nan"),
        }
    return ScanResult(plan, cells, verdicts)


@dataclass(frozen=True)
class TightnessRow:
    n: int
    k: int
    trials: int
    p_positive: float
    c: float  # max over m of m * P(N > m)
    m_exceed: tuple  # (m, P(N > m)) pairs


def tightness_scan(plan: ExperimentPlan, m_list=None, workers: int = 1) -> ScanResult:
    """``m P(N > m)`` and ``P(N > 0)`` at bounded offsets around ``k*``."""
    m_list = tuple(m_list) if m_list is not None else plan.m_list
    if plan.k_list is not None or any(isinstance(o, str) for o in plan.k_offsets):
        raise ValueError("tightness needs bounded integer offsets around k*")
    cells, raw = _collect(plan, workers)
    rows = []
    for i, n in enumerate(plan.n_grid):
        for col, (label, k) in enumerate(plan.ks_for(n)):
            x = raw[n][:, col]
            pm = tuple((m, float(np.mean(x > m))) for m in m_list)
            rows.append(TightnessRow(n, k, len(x), float(np.mean(x > 0)),
                                     max(m * p for m, p in pm), pm))
    verdicts = {}
    for off in plan.k_offsets:
        sel = [r for r, (cell) in zip(rows, cells) if cell.label == off]
        cs = [r.c for r in sel]
        verdicts[str(off)] = {
            "c_spread": max(cs) / min(cs) if min(cs) > 0 else float("inf"),
            "min_p_positive": min(r.p_positive for r in sel),
            "c_by_n": [r.c for r in sel],
        }
    return ScanResult(plan, cells, verdicts, {"rows": rows})


@dataclass(frozen=True)
class SlopeFit:
    n_grid: tuple
    mean_M: tuple
    std_M: tuple
    slope: float
    intercept: float
    slope_stderr: float
    target: float
    rel_error: float


def fit_slope(n_grid, mean_M, std_M=None, target=float("nan")) -> SlopeFit:
    x = np.log(np.asarray(n_grid, dtype=float))
    y = np.asarray(mean_M, dtype=float)
    if len(x) < 3 or max(n_grid) / min(n_grid) < 1000:
        raise DegenerateGrid("slope fit needs >= 3 lengths spanning a factor >= 1000 in n")
    X = np.column_stack([x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    dof = len(x) - 2
    s2 = float(resid @ resid) / dof if dof > 0 else 0.0
    se = math.sqrt(s2 / float(((x - x.mean()) ** 2).sum()))
    slope, intercept = float(coef[0]), float(coef[1])
    std = tuple(float(s) for s in std_M) if std_M is not None else ()
    return SlopeFit(tuple(int(n) for n in n_grid), tuple(float(v) for v in y), std,
                    slope, intercept, se, target, abs(slope - target) / target)


def slope_fit(plan: ExperimentPlan, workers: int = 1) -> ScanResult:
    """Least-squares slope of the mean longest repeat against ``ln n``, target ``1/alpha``."""
    if plan.mode != "self":
        raise ValueError("slope fit runs on single sequences (mode = self)")
    if len(plan.n_grid) < 3 or plan.n_grid[-1] / plan.n_grid[0] < 1000:
        raise DegenerateGrid("slope fit needs >= 3 lengths spanning a factor >= 1000 in n")
    a = alpha(plan.model)
    cells, means, stds = [], [], []
    for i, n in enumerate(plan.n_grid):
        T = plan.trials_for(n)
        seeds = [trial_seed(plan.seed, i, t) for t in range(T)]
        M = run_trials("self", plan.model, None, None, n, [1], seeds, workers)[:, -1]
        kstar = math.log(n) / a
        cells.append(summarize(M, n, 0, kstar, "M", kstar, "k*"))
        means.append(float(M.mean()))
        stds.append(float(M.std(ddof=1)) if len(M) > 1 else 0.0)
    fit = fit_slope(plan.n_grid, means, stds, 1.0 / a)
    return ScanResult(plan, cells, {"slope_within_10pct": fit.rel_error < 0.10}, {"fit": fit})


@dataclass(frozen=True)
class DiracRow:
    n: int
    k: int
    trials: int
    pred_mean: float  # n (n-k+1) P([a]_k)
    exact_mean: float  # (n-k)(n-k+1) P([a]_k)
    n_prob: float  # n P([a]_k)
    union_bound: float  # lower bound on P(N = 0)
    zero_frac: float


def dirac_k(U: Interaction, a, n: int) -> int:
    """``ceil(1.5 log_b n)`` with ``b`` the inverse run-extension probability of ``a``."""
    r = run_decay(U, a)
    if not 0 < r < 1:
        raise NoAdmissibleK(f"symbol {a!r} has run-extension probability {r}; need 0 < r < 1")
    return math.ceil(1.5 * math.log(n) / -math.log(r) - 1e-9)


def counterexample_dirac(U: Interaction, a, n_grid, trials=500, delta: float = 0.1,
                         seed: int = DEFAULT_SEED, workers: int = 1) -> ScanResult:
    """Matches of a sample from ``U`` against the constant word ``a a a ...``.

    The chosen ``k_n`` keeps ``n P([a]_k)`` below ``delta`` while
    ``n**2 P([a]_k)`` grows, so the predicted mean diverges though ``N`` is
    usually 0.  ``trials`` may be an int or one count per ``n`` (0 skips
    sampling).
    """
    n_grid = [int(n) for n in n_grid]
    U.alphabet.index(a)
    counts = list(trials) if isinstance(trials, (list, tuple)) else [trials] * len(n_grid)
    rows, cells = [], []
    prev = -math.inf
    for i, n in enumerate(n_grid):
        k = dirac_k(U, a, n)
        if k > n:
            raise NoAdmissibleK(f"n={n}: k_n={k} exceeds n")
        P = cylinder_prob(U, [a] * k)
        if n * P > delta:
            raise NoAdmissibleK(f"n={n}, k={k}: n*P([a]_k) = {n * P:.4g} exceeds delta = {delta}")
        growth = n * n * P
        if growth <= prev:
            raise NoAdmissibleK(f"n={n}, k={k}: n^2*P([a]_k) = {growth:.4g} does not increase")
        prev = growth
        pred = n * (n - k + 1) * P
        exact = (n - k) * (n - k + 1) * P
        T = int(counts[i])
        if T > 0:
            seeds = [trial_seed(seed, i, t) for t in range(T)]
            x = run_trials("dirac", U, None, a, n, [k], seeds, workers)[:, 0]
            cells.append(summarize(x, n, k, pred, "dirac", float("nan"), "exact"))
            zf = float(np.mean(x == 0))
        else:
            zf = float("nan")
        rows.append(DiracRow(n, k, T, pred, exact, n * P, 1.0 - (n - k + 1) * P, zf))
    preds = [r.pred_mean for r in rows]
    verdicts = {
        "pred_increasing": all(b > c for c, b in zip(preds, preds[1:])),
        "zero_frac_min": min((r.zero_frac for r in rows if r.trials > 0), default=float("nan")),
    }
    plan_like = {"model": U, "symbol": a, "n_grid": tuple(n_grid), "delta": delta, "seed": seed}
    return ScanResult(None, cells, verdicts, {"rows": rows, "setup": plan_like})


def run_scan(plan: ExperimentPlan, workers: int = 1, delta: float = 0.1) -> ScanResult:
    if plan.kind == "regime":
        return regime_scan(plan, workers)
    if plan.kind == "tightness":
        return tightness_scan(plan, workers=workers)
    if plan.kind == "slope":
        return slope_fit(plan, workers)
    trials = [plan.trials_for(n) for n in plan.n_grid] if plan.trials is None else plan.trials
    res = counterexample_dirac(plan.model, plan.symbol, plan.n_grid, trials, delta,
                               plan.seed, workers)
    res.plan = plan
    return res


def golden() -> dict:
    """Pilot-calibrated thresholds shipped with the package."""
    from importlib.resources import files

    from .modelfile import tomllib

    return tomllib.loads(files(__package__).joinpath("golden.toml").read_text())
