"""Exact frontier extremes and the record-setting region.

The record-setting region after n observations is the set of nonnegative
points not strictly dominated by any current record.  Its boundary meets
the diagonal planes x_1 + ... + x_d = c between two extremes: the smallest
frontier coordinate sum (``f_minus``) and the largest (``f_plus``, which is
just the largest observation sum).  The gap is the frontier width.

``f_minus`` is computed exactly through a covering reformulation: a point x
lies in the closed record-setting region iff every record z has some
coordinate j with x_j >= z_j.  Minimizing the coordinate sum over such x
means choosing, for every record, one dimension that blocks it, and paying
the per-dimension maxima of the blocked coordinates.  So

    f_minus = min over assignments sigma: records -> dims
              of sum_j max{ z_j : sigma(z) = j }   (empty max = 0).

Dimension 2 admits an O(r log r) corner sweep along the record staircase;
higher dimensions use branch and bound over assignments.  Every route sums
per-dimension maxima with math.fsum (correctly rounded, order independent),
which is what makes the independent routes agree bitwise, not just roughly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .records import Point, RecordBook, _as_coords, _strict_gt, coord_sums

__all__ = [
    "FrontierSummary",
    "IntegerGridPoint",
    "f_plus",
    "f_minus",
    "f_minus_witness",
    "f_minus_bruteforce",
    "f_minus_candidate_grid",
    "in_rs",
    "bhat",
    "sweeten",
    "lower_bound_probability",
    "frontier_summary",
]

# enumeration oracles refuse above this record count (d**r assignments)
_BRUTE_MAX_RECORDS = 12


@dataclass(frozen=True)
class FrontierSummary:
    """Frontier extremes and bounding statistics at one trajectory state."""

    f_minus: float
    f_plus: float
    width: float
    dim_max: np.ndarray
    bhat: tuple

    def __post_init__(self):
        if self.width < 0.0:
            raise ValueError("width must be nonnegative")


@dataclass(frozen=True)
class IntegerGridPoint:
    """Lattice point with nonnegative integer coordinates."""

    coords: tuple

    def __post_init__(self):
        coords = tuple(int(c) for c in self.coords)
        if any(c < 0 for c in coords):
            raise ValueError("integer grid coordinates must be nonnegative")
        object.__setattr__(self, "coords", coords)

    @property
    def coord_sum(self) -> int:
        return sum(self.coords)


def _records_array(records) -> np.ndarray:
    """Coerce a RecordBook, array, or list of points to an (r, d) array."""
    if isinstance(records, RecordBook):
        return records.record_coords
    if isinstance(records, np.ndarray) and records.ndim == 2:
        return np.asarray(records, dtype=np.float64)
    rows = [p.coords if isinstance(p, Point) else _as_coords(p) for p in records]
    if not rows:
        raise ValueError("need at least one record")
    return np.stack(rows)


# -- extremes ---------------------------------------------------------------

def f_plus(book: RecordBook) -> float:
    """Largest coordinate sum over the frontier: max observation sum seen."""
    if book.n == 0:
        return 0.0
    return float(book.record_sums.max())


def f_minus(book: RecordBook) -> float:
    """Smallest coordinate sum over the frontier, exactly."""
    if book.n == 0:
        return 0.0
    value, _ = _min_cover(book.record_coords)
    return value


def f_minus_witness(book: RecordBook):
    """(f_minus, witness): the witness is an optimal-cover point in the
    record-setting region whose coordinate sum equals f_minus."""
    if book.n == 0:
        return 0.0, np.zeros(book.d)
    return _min_cover(book.record_coords)


def _min_cover(recs: np.ndarray):
    d = recs.shape[1]
    if d == 1:
        j = int(np.argmax(recs[:, 0]))
        return float(recs[j, 0]), recs[j].copy()
    if d == 2:
        return _staircase(recs)
    return _branch_and_bound(recs)


def _staircase(recs: np.ndarray):
    # corners of the d=2 record staircase: split records into an x1-prefix
    # (blocked in dim 1) and the rest (blocked in dim 2). The suffix max of
    # x2 keeps the sweep correct when several records share an x1 value.
    pts = sorted(map(tuple, recs.tolist()))
    r = len(pts)
    sufmax = [0.0] * (r + 1)
    for i in range(r - 1, -1, -1):
        sufmax[i] = max(pts[i][1], sufmax[i + 1])
    best = math.inf
    best_corner = None
    for i in range(r + 1):
        a = pts[i - 1][0] if i > 0 else 0.0
        b = sufmax[i]
        cost = math.fsum((a, b))
        if cost < best:
            best = cost
            best_corner = (a, b)
    return best, np.array(best_corner)


def _branch_and_bound(recs: np.ndarray):
    d = recs.shape[1]
    colmax = recs.max(axis=0)
    # initial incumbent: put every record in one dimension
    j0 = int(np.argmin(colmax))
    best = [float(colmax[j0]), None]
    best[1] = np.zeros(d)
    best[1][j0] = colmax[j0]
    # expensive records first: large min coordinate forces cost wherever it goes
    order = np.argsort(-recs.min(axis=1), kind="stable")
    rows = [tuple(recs[i]) for i in order]
    r = len(rows)
    cur = [0.0] * d

    def walk(k: int):
        while k < r:
            row = rows[k]
            if any(cur[j] >= row[j] for j in range(d)):
                k += 1  # already covered, no branching needed
                continue
            children = []
            for j in range(d):
                saved = cur[j]
                cur[j] = row[j]
                cost = math.fsum(cur)
                cur[j] = saved
                if cost < best[0]:  # value-safe: fsum is monotone per slot
                    children.append((cost, j))
            children.sort()
            for _, j in children:
                saved = cur[j]
                cur[j] = row[j]
                # re-check: an earlier sibling may have lowered the incumbent
                if math.fsum(cur) < best[0]:
                    walk(k + 1)
                cur[j] = saved
            return
        cost = math.fsum(cur)
        if cost < best[0]:
            best[0] = cost
            best[1] = np.array(cur)

    walk(0)
    return best[0], best[1]


# -- enumeration oracles ------------------------------------------------------

def _refine_min(sums: np.ndarray, maxima_of) -> float:
    """Exact min of fsum costs given fast float-add costs for ordering.

    ``sums`` orders the candidates; every candidate within a few ulp of the
    smallest is re-evaluated with fsum so near-ties cannot pick the wrong
    winner.  Returns the exact minimum fsum value.
    """
    lo = float(sums.min())
    tol = 64.0 * np.finfo(np.float64).eps * max(abs(lo), 1.0)
    near = np.nonzero(sums <= lo + tol)[0]
    return min(math.fsum(maxima_of(int(i))) for i in near)


def f_minus_bruteforce(records) -> float:
    """Exhaustive minimum over all d**r record-to-dimension assignments.

    Testing oracle: refuses more than 12 records.  Cross-validates itself
    against the candidate-grid route and raises if the two exact values
    disagree, since that can only mean a bug.
    """
    recs = _records_array(records)
    r, d = recs.shape
    if r > _BRUTE_MAX_RECORDS:
        raise ValueError(
            f"brute force enumerates d**r assignments; r={r} exceeds {_BRUTE_MAX_RECORDS}"
        )
    total = d**r
    best = math.inf
    chunk = 1 << 18
    cols = recs.T.copy()  # (d, r)
    for lo in range(0, total, chunk):
        ids = np.arange(lo, min(lo + chunk, total), dtype=np.int64)
        digits = np.empty((r, ids.size), dtype=np.int64)
        q = ids
        for k in range(r):
            digits[k] = q % d
            q = q // d
        # cost_j = max over records assigned to dim j of their j-coordinate
        cost = np.zeros(ids.size, dtype=np.float64)
        permax = np.empty((d, ids.size), dtype=np.float64)
        for j in range(d):
            vals = np.where(digits == j, cols[j][:, None], 0.0)
            permax[j] = vals.max(axis=0)
            cost += permax[j]
        lo_val = _refine_min(cost, lambda i: permax[:, i].tolist())
        best = min(best, lo_val)
    grid = f_minus_candidate_grid(recs)
    if grid != best:
        raise RuntimeError(
            f"internal inconsistency: assignment minimum {best!r} != candidate-grid {grid!r}"
        )
    return best


def f_minus_candidate_grid(records) -> float:
    """Independent oracle: scan the grid of candidate corners.

    Every coordinate of an optimal region point is 0 or some record's
    coordinate, so the finite grid of such combinations contains a minimizer;
    keep the candidates inside the record-setting region and take the
    smallest coordinate sum.
    """
    recs = _records_array(records)
    r, d = recs.shape
    if r > _BRUTE_MAX_RECORDS:
        raise ValueError(
            f"candidate grid is exponential in d; r={r} exceeds {_BRUTE_MAX_RECORDS}"
        )
    axes = [np.unique(np.concatenate([[0.0], recs[:, j]])) for j in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    cand = np.stack([m.ravel() for m in mesh], axis=1)
    # keep candidates no record strictly dominates
    ok = np.all(np.any(cand[:, None, :] >= recs[None, :, :], axis=2), axis=1)
    cand = cand[ok]
    sums = cand.sum(axis=1)
    return _refine_min(sums, lambda i: cand[i].tolist())


# -- membership and bounding processes ---------------------------------------

def in_rs(book: RecordBook, x) -> bool:
    """Is x inside the current record-setting region?

    True iff no current record strictly dominates x, i.e. every record has
    some coordinate where x is at least as large.
    """
    coords = x.coords if isinstance(x, Point) else _as_coords(x)
    if coords.size != book.d:
        raise ValueError(f"dimension mismatch: expected {book.d}, got {coords.size}")
    return not bool(book.dominated_by_current(coords[None, :])[0])


def bhat(book: RecordBook, m: int) -> float:
    """m-th largest coordinate sum among all observations seen."""
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise ValueError(f"m must be a positive integer, got {m!r}")
    if m > book.top_capacity:
        raise ValueError(
            f"m={m} exceeds the top-sum tracker capacity {book.top_capacity}"
        )
    if m > book.n:
        raise ValueError(f"m={m} exceeds the number of observations {book.n}")
    return float(book.top_sums[m - 1])


def frontier_summary(book: RecordBook) -> FrontierSummary:
    fm = f_minus(book)
    fp = f_plus(book)
    return FrontierSummary(
        f_minus=fm,
        f_plus=fp,
        width=fp - fm,
        dim_max=book.dim_max,
        bhat=tuple(book.top_sums.tolist()),
    )


# -- integer repair ----------------------------------------------------------

def sweeten(x, m: int) -> IntegerGridPoint:
    """Round x up to an integer point with a fixed coordinate sum.

    Given x >= 0 with coordinate sum 2m - 2(d-1) (tolerance 1e-9) and an
    integer m >= d-1, returns an integer point i >= x componentwise with
    i_+ = 2m - (d-1): take ceilings, then add 1 to the first few coordinates
    (lowest index first) until the target sum is reached.  The upper orthant
    at i is then contained in the upper orthant at x.
    """
    coords = x.coords if isinstance(x, Point) else _as_coords(x)
    d = coords.size
    if not isinstance(m, (int, np.integer)):
        raise ValueError(f"m must be an integer, got {m!r}")
    m = int(m)
    if m < 1 or m < d - 1:
        raise ValueError(f"m must be a positive integer >= d-1 = {d-1}, got {m}")
    target_x = 2 * m - 2 * (d - 1)
    xsum = math.fsum(coords.tolist())
    if abs(xsum - target_x) > 1e-9:
        raise ValueError(
            f"coordinate sum {xsum!r} must equal 2m - 2(d-1) = {target_x} within 1e-9"
        )
    ints = [math.ceil(c) for c in coords.tolist()]
    deficit = (2 * m - (d - 1)) - sum(ints)
    if not 0 <= deficit <= d - 1:  # implied by the precondition
        raise RuntimeError(f"sweetening deficit {deficit} out of range [0, {d-1}]")
    for j in range(deficit):
        ints[j] += 1
    return IntegerGridPoint(tuple(ints))


def lower_bound_probability(n, b, d: int) -> float:
    """Non-asymptotic tail bound for the smallest frontier sum.

    Upper-bounds the probability that the smallest frontier coordinate sum
    is still <= b after n observations: with m = ceil((d-1) ln n / (ln n - b)),
    returns C(2m, d-1) * exp(-n^((d-1)/(2m))).  Diagnostic overlay only.
    Refused for d = 1, where the construction behind it degenerates.
    """
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise ValueError(f"d must be a positive integer, got {d!r}")
    if d == 1:
        raise ValueError("the bound degenerates in dimension 1; use d >= 2")
    n = float(n)
    if not math.isfinite(n) or n <= 1.0:
        raise ValueError(f"n must exceed 1, got {n!r}")
    b = float(b)
    log_n = math.log(n)
    if not 0.0 <= b < log_n:
        raise ValueError(f"b must lie in [0, ln n) = [0, {log_n!r}), got {b!r}")
    m = math.ceil((d - 1) * log_n / (log_n - b))
    exponent = (d - 1) / (2.0 * m)
    return math.comb(2 * m, d - 1) * math.exp(-math.exp(exponent * log_n))
