"""Reproducible trials, ensembles, and the statistical comparisons.

A trial feeds ``n_max`` observations through a RecordBook and emits a
checkpoint row on the observation clock (fixed n grid) and, optionally, on
the records-time clock (one row per record epoch).  Trials are addressed by
(master_seed, trial) through counter-based streams, so every row is a pure
function of the config: ensembles can run across any number of workers and
still produce byte-identical output files.

The engine filters each chunk of observations in two vectorized stages
before touching the book. Stage 1 drops points whose coordinate sum is
below the current smallest frontier sum (minus a safety margin much larger
than any rounding error): such points are strictly dominated, because the
smallest frontier sum only grows.  Stage 2 drops points some chunk-start
record strictly dominates; domination survives record replacement, since a
record's killer dominates everything the record dominated.  Survivors go
through the exact sequential path one by one, and the skipped runs are
absorbed in bulk (count, per-coordinate maxima, top sums).  Net effect:
identical books and rows at any chunk size, at around two orders of
magnitude less sequential work.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .analytics import (
    fplus_centering,
    gumbel_cdf,
    normal_cdf,
    records_time_fplus_centering,
)
from .frontier import f_minus, f_plus
from .records import RecordBook, coord_sums
from .rng import ObservationStream

__all__ = [
    "ExperimentConfig",
    "CheckpointRow",
    "EnsembleResult",
    "LilReport",
    "run_trial",
    "run_ensemble",
    "ks_statistic",
    "strip_coverage",
    "lil_diagnostics",
    "load_rows",
    "geometric_grid",
]

_CHUNK = 1 << 16
_SUM_FILTER_MARGIN = 1e-9  # dwarfs rounding error in any realistic sum


def geometric_grid(n_max: int, ratio: float = 1.2) -> tuple:
    """Log-spaced checkpoint grid from 10 to n_max (always includes n_max)."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if not ratio > 1.0:
        raise ValueError("checkpoint ratio must exceed 1")
    grid = []
    x = 10.0
    while round(x) < n_max:
        v = int(round(x))
        if not grid or v > grid[-1]:
            grid.append(v)
        x *= ratio
    grid.append(n_max)
    return tuple(v for v in grid if v <= n_max)


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one ensemble; everything downstream derives from it."""

    d: int
    n_max: int
    trials: int = 1
    master_seed: int = 0
    checkpoints: tuple | None = None  # explicit grid; None = geometric
    checkpoint_ratio: float = 1.2
    top_m: int = 64
    records_time: bool = False
    strip_check: bool = False

    def __post_init__(self):
        for name in ("d", "n_max", "trials", "top_m"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
        if not isinstance(self.master_seed, (int, np.integer)) or not (
            0 <= self.master_seed < 2**64
        ):
            raise ValueError(f"master_seed must lie in [0, 2**64), got {self.master_seed!r}")
        if not self.checkpoint_ratio > 1.0:
            raise ValueError("checkpoint_ratio must exceed 1")
        if self.checkpoints is not None:
            pts = sorted(set(int(c) for c in self.checkpoints))
            if not pts:
                raise ValueError("empty checkpoint grid")
            if pts[0] < 1 or pts[-1] > self.n_max:
                raise ValueError(f"checkpoints must lie in [1, n_max={self.n_max}]")
            object.__setattr__(self, "checkpoints", tuple(pts))

    @property
    def grid(self) -> tuple:
        if self.checkpoints is not None:
            return self.checkpoints
        return geometric_grid(self.n_max, self.checkpoint_ratio)


@dataclass(frozen=True)
class CheckpointRow:
    """One emitted trajectory state, on either clock."""

    trial: int
    clock: str  # "obs" or "rec"
    n: int
    m: int  # records set so far
    r: int  # current records
    beta: int
    f_minus: float
    f_plus: float
    width: float
    dim_max_min: float
    bhat: tuple
    norm_fplus: float
    norm_width: float
    norm_r: float
    strip_cov: float = math.nan


def _make_row(cfg: ExperimentConfig, trial: int, clock: str, book: RecordBook, fmin: float) -> CheckpointRow:
    fp = f_plus(book)
    width = fp - fmin
    n, m, d = book.n, book.R, cfg.d
    top = book.top_sums
    pad = np.full(cfg.top_m, math.nan)
    pad[: top.size] = top
    norm_fplus = norm_width = norm_r = math.nan
    if n >= 3:
        log_n = math.log(n)
        loglog_n = math.log(log_n)
        norm_r = book.r * d * loglog_n / log_n
        if clock == "obs":
            norm_fplus = fp - fplus_centering(n, d)
            norm_width = width / loglog_n
    if clock == "rec" and m >= 2:
        norm_width = width / math.log(m)
        if d >= 3:
            norm_fplus = fp - records_time_fplus_centering(m, d)
    strip = math.nan
    if cfg.strip_check and d >= 2 and n >= 16:
        strip = strip_coverage(book)
    return CheckpointRow(
        trial=trial,
        clock=clock,
        n=n,
        m=m,
        r=book.r,
        beta=book.beta,
        f_minus=fmin,
        f_plus=fp,
        width=width,
        dim_max_min=float(book.dim_max.min()),
        bhat=tuple(pad.tolist()),
        norm_fplus=norm_fplus,
        norm_width=norm_width,
        norm_r=norm_r,
        strip_cov=strip,
    )


def _simulate(cfg: ExperimentConfig, trial: int, chunk: int = _CHUNK) -> list:
    stream = ObservationStream(cfg.master_seed, trial, cfg.d)
    book = RecordBook(cfg.d, top_capacity=cfg.top_m)
    grid = cfg.grid
    rows: list[CheckpointRow] = []
    fmin = 0.0
    gi = 0
    pos = 0
    while pos < cfg.n_max:
        target = grid[gi] if gi < len(grid) else cfg.n_max
        take = min(chunk, target - pos)
        pts = stream.take(take)
        sums = coord_sums(pts)
        cand = np.nonzero(sums >= fmin - _SUM_FILTER_MARGIN)[0]
        if cand.size:
            cand = cand[~book.dominated_by_current(pts[cand])]
        prev = 0
        for i in cand.tolist():
            if i > prev:
                book.absorb_nonrecords(pts[prev:i], sums[prev:i])
            out = book._observe_raw(pts[i], float(sums[i]))
            if out.is_record:
                fmin = f_minus(book)
                if cfg.records_time:
                    rows.append(_make_row(cfg, trial, "rec", book, fmin))
            prev = i + 1
        if prev < take:
            book.absorb_nonrecords(pts[prev:take], sums[prev:take])
        pos += take
        if gi < len(grid) and pos == grid[gi]:
            rows.append(_make_row(cfg, trial, "obs", book, fmin))
            gi += 1
    return rows


def run_trial(cfg: ExperimentConfig, trial: int) -> list:
    """All checkpoint rows of one trial; deterministic in (cfg, trial)."""
    if not isinstance(trial, (int, np.integer)) or trial < 0:
        raise ValueError(f"trial must be a nonnegative integer, got {trial!r}")
    return _simulate(cfg, int(trial))


# -- serialization -------------------------------------------------------------

def _f17(x: float) -> str:
    return format(float(x), ".17g")


def _header(cfg: ExperimentConfig) -> list:
    cols = [
        "trial", "clock", "n", "m", "r", "beta",
        "f_minus", "f_plus", "width", "dim_max_min",
    ]
    cols += [f"bhat_{k}" for k in range(1, cfg.top_m + 1)]
    cols += ["norm_fplus", "norm_width", "norm_r"]
    if cfg.strip_check:
        cols.append("strip_cov")
    return cols


def _row_fields(row: CheckpointRow, strip_check: bool) -> list:
    out = [
        str(row.trial), row.clock, str(row.n), str(row.m), str(row.r), str(row.beta),
        _f17(row.f_minus), _f17(row.f_plus), _f17(row.width), _f17(row.dim_max_min),
    ]
    out += [_f17(v) for v in row.bhat]
    out += [_f17(row.norm_fplus), _f17(row.norm_width), _f17(row.norm_r)]
    if strip_check:
        out.append(_f17(row.strip_cov))
    return out


def _write_rows(path: Path, rows: list, cfg: ExperimentConfig) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_header(cfg))
        for row in rows:
            writer.writerow(_row_fields(row, cfg.strip_check))


_AGG_COLS = [
    "m", "r", "beta", "f_minus", "f_plus", "width", "dim_max_min",
    "norm_fplus", "norm_width", "norm_r", "strip_cov",
]
_AGG_STATS = ["mean", "sd", "median", "q10", "q90", "min", "max", "count"]


def _agg_value(stat: str, col: np.ndarray) -> float:
    finite = col[np.isfinite(col)]
    if stat == "count":
        return float(finite.size)
    if finite.size == 0:
        return math.nan
    if stat == "mean":
        return float(finite.mean())
    if stat == "sd":
        return float(finite.std(ddof=1)) if finite.size > 1 else math.nan
    if stat == "median":
        return float(np.median(finite))
    if stat == "q10":
        return float(np.quantile(finite, 0.10))
    if stat == "q90":
        return float(np.quantile(finite, 0.90))
    if stat == "min":
        return float(finite.min())
    return float(finite.max())


def _write_aggregates(path: Path, rows: list, key_attr: str) -> None:
    """One output row per (checkpoint value, statistic), trial-order reduce."""
    keys = sorted(set(getattr(r, key_attr) for r in rows))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([key_attr, "statistic"] + _AGG_COLS)
        for key in keys:
            group = [r for r in rows if getattr(r, key_attr) == key]
            data = {
                c: np.array([float(getattr(r, c)) for r in group]) for c in _AGG_COLS
            }
            for stat in _AGG_STATS:
                writer.writerow(
                    [str(key), stat] + [_f17(_agg_value(stat, data[c])) for c in _AGG_COLS]
                )


def load_rows(path) -> list:
    """Read a rows CSV back into CheckpointRow objects (17g round-trips)."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        bhat_cols = [i for i, name in enumerate(header) if name.startswith("bhat_")]
        idx = {name: i for i, name in enumerate(header)}
        has_strip = "strip_cov" in idx
        for rec in reader:
            out.append(
                CheckpointRow(
                    trial=int(rec[idx["trial"]]),
                    clock=rec[idx["clock"]],
                    n=int(rec[idx["n"]]),
                    m=int(rec[idx["m"]]),
                    r=int(rec[idx["r"]]),
                    beta=int(rec[idx["beta"]]),
                    f_minus=float(rec[idx["f_minus"]]),
                    f_plus=float(rec[idx["f_plus"]]),
                    width=float(rec[idx["width"]]),
                    dim_max_min=float(rec[idx["dim_max_min"]]),
                    bhat=tuple(float(rec[i]) for i in bhat_cols),
                    norm_fplus=float(rec[idx["norm_fplus"]]),
                    norm_width=float(rec[idx["norm_width"]]),
                    norm_r=float(rec[idx["norm_r"]]),
                    strip_cov=float(rec[idx["strip_cov"]]) if has_strip else math.nan,
                )
            )
    return out


@dataclass(frozen=True)
class EnsembleResult:
    """In-memory handle on a finished ensemble plus its on-disk artifacts."""

    config: ExperimentConfig
    out_dir: Path
    obs_rows: list
    rec_rows: list
    files: dict
    summary: dict


def run_ensemble(cfg: ExperimentConfig, out_dir, threads: int = 1) -> EnsembleResult:
    """Run all trials, write row and aggregate CSVs plus a summary JSON.

    ``threads`` is the worker count (processes under the hood); any value
    yields byte-identical outputs because trials are reduced in trial order
    and each trial's randomness is addressed, not shared.
    """
    out = Path(out_dir)
    if not isinstance(threads, (int, np.integer)) or threads < 1:
        raise ValueError(f"threads must be a positive integer, got {threads!r}")
    try:
        out.mkdir(exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc

    trials = range(cfg.trials)
    if threads == 1:
        per_trial = [run_trial(cfg, t) for t in trials]
    else:
        with ProcessPoolExecutor(max_workers=int(threads)) as pool:
            chunksize = max(1, cfg.trials // (int(threads) * 8))
            per_trial = list(pool.map(_worker, [(cfg, t) for t in trials], chunksize=chunksize))

    obs_rows = [row for rows in per_trial for row in rows if row.clock == "obs"]
    rec_rows = [row for rows in per_trial for row in rows if row.clock == "rec"]

    files = {}
    obs_path = out / "rows_obs.csv"
    _write_rows(obs_path, obs_rows, cfg)
    files["rows_obs"] = str(obs_path)
    agg_obs = out / "aggregate_obs.csv"
    _write_aggregates(agg_obs, obs_rows, "n")
    files["aggregate_obs"] = str(agg_obs)
    if cfg.records_time:
        rec_path = out / "rows_rec.csv"
        _write_rows(rec_path, rec_rows, cfg)
        files["rows_rec"] = str(rec_path)
        agg_rec = out / "aggregate_rec.csv"
        _write_aggregates(agg_rec, rec_rows, "m")
        files["aggregate_rec"] = str(agg_rec)

    summary = {
        "config": asdict(cfg),
        "grid": list(cfg.grid),
        "rows_obs": len(obs_rows),
        "rows_rec": len(rec_rows),
        "files": {key: Path(p).name for key, p in files.items()},
    }
    summary_path = out / "summary.json"
    with open(summary_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    files["summary"] = str(summary_path)
    return EnsembleResult(cfg, out, obs_rows, rec_rows, files, summary)


def _worker(args):
    cfg, trial = args
    return run_trial(cfg, trial)


# -- statistics ------------------------------------------------------------------

_CDF_TAGS = {
    "uniform": lambda x: np.clip(x, 0.0, 1.0),
    "exponential": lambda x: -np.expm1(-np.maximum(x, 0.0)),
    "gumbel": gumbel_cdf,
    "normal": normal_cdf,
}


def ks_statistic(samples, cdf, loc: float = 0.0, scale: float = 1.0) -> float:
    """Two-sided Kolmogorov-Smirnov distance to a reference distribution.

    ``cdf`` is a tag ("uniform", "exponential", "gumbel", "normal") or any
    vectorizable CDF callable; samples are standardized by (x - loc)/scale
    before evaluation.
    """
    xs = np.sort(np.asarray(samples, dtype=np.float64))
    if xs.size == 0:
        raise ValueError("ks_statistic needs at least one sample")
    if not np.all(np.isfinite(xs)):
        raise ValueError("samples must be finite")
    if callable(cdf):
        ref = cdf
    else:
        try:
            ref = _CDF_TAGS[cdf]
        except KeyError:
            raise ValueError(f"unknown reference distribution {cdf!r}") from None
    fvals = np.asarray(ref((xs - loc) / scale), dtype=np.float64)
    n = xs.size
    hi = np.arange(1, n + 1) / n
    lo = np.arange(0, n) / n
    return float(max(np.max(hi - fvals), np.max(fvals - lo)))


def strip_coverage(book: RecordBook) -> float:
    """Fraction of current records whose sum lies in the thin log strip
    [ln n - ln ln ln n - ln(4(d-1)), ln n + 4(d-1) ln ln n]."""
    if book.d < 2:
        raise ValueError("strip coverage requires d >= 2")
    if book.n < 16:
        raise ValueError("strip coverage requires n >= 16")
    log_n = math.log(book.n)
    lo = log_n - math.log(math.log(log_n)) - math.log(4 * (book.d - 1))
    hi = log_n + 4 * (book.d - 1) * math.log(log_n)
    sums = book.record_sums
    return float(np.mean((sums >= lo) & (sums <= hi)))


# -- logged diagnostics ------------------------------------------------------------

@dataclass(frozen=True)
class LilReport:
    """Dyadic-window extremes of the boundary ratios; inspection output only.

    Almost-sure and infinitely-often boundary statements cannot be falsified
    from finitely many trajectories, so nothing here is pass/fail.
    """

    obs_windows: list = field(default_factory=list)
    rec_windows: list = field(default_factory=list)

    def to_text(self) -> str:
        lines = []
        if self.obs_windows:
            lines.append(
                "obs windows: n-range, count, fplus_dev[min,max,run_max], "
                "fminus_dev[min,max,run_min]  (dev = (F - ln n)/ln ln n)"
            )
            for w in self.obs_windows:
                lines.append(
                    "  [{lo}, {hi}) k={count}  f+ [{fplus_min:+.4f}, {fplus_max:+.4f}, "
                    "run {run_fplus_max:+.4f}]  f- [{fminus_min:+.4f}, {fminus_max:+.4f}, "
                    "run {run_fminus_min:+.4f}]".format(**w)
                )
        if self.rec_windows:
            lines.append("rec windows: m-range, count, width/ln m [min,max,run_max]")
            for w in self.rec_windows:
                lines.append(
                    "  [{lo}, {hi}) k={count}  [{ratio_min:.4f}, {ratio_max:.4f}, "
                    "run {run_ratio_max:.4f}]".format(**w)
                )
        return "\n".join(lines) if lines else "(empty trajectory: no report)"


def lil_diagnostics(rows) -> LilReport:
    """Boundary-law diagnostics over dyadic windows of a trajectory."""
    obs = [r for r in rows if r.clock == "obs" and r.n >= 3]
    rec = [r for r in rows if r.clock == "rec" and r.m >= 2]
    obs_windows = []
    run_max, run_min = -math.inf, math.inf
    for k in sorted(set(int(math.floor(math.log2(r.n))) for r in obs)):
        group = [r for r in obs if 2**k <= r.n < 2 ** (k + 1)]
        fplus_dev = [(r.f_plus - math.log(r.n)) / math.log(math.log(r.n)) for r in group]
        fminus_dev = [(r.f_minus - math.log(r.n)) / math.log(math.log(r.n)) for r in group]
        run_max = max(run_max, max(fplus_dev))
        run_min = min(run_min, min(fminus_dev))
        obs_windows.append(
            {
                "lo": 2**k,
                "hi": 2 ** (k + 1),
                "count": len(group),
                "fplus_min": min(fplus_dev),
                "fplus_max": max(fplus_dev),
                "run_fplus_max": run_max,
                "fminus_min": min(fminus_dev),
                "fminus_max": max(fminus_dev),
                "run_fminus_min": run_min,
            }
        )
    rec_windows = []
    run_ratio = -math.inf
    for k in sorted(set(int(math.floor(math.log2(r.m))) for r in rec)):
        group = [r for r in rec if 2**k <= r.m < 2 ** (k + 1)]
        ratios = [r.width / math.log(r.m) for r in group]
        run_ratio = max(run_ratio, max(ratios))
        rec_windows.append(
            {
                "lo": 2**k,
                "hi": 2 ** (k + 1),
                "count": len(group),
                "ratio_min": min(ratios),
                "ratio_max": max(ratios),
                "run_ratio_max": run_ratio,
            }
        )
    return LilReport(obs_windows=obs_windows, rec_windows=rec_windows)
