"""Exact record-count laws, densities, and limit-law centerings.

The probability that observation n sets a record in dimension d has the
exact alternating form

    p(n, d) = sum_{k=0}^{n-1} (-1)^k C(n-1, k) (k+1)^{-d}

and the equivalent integral form

    p(n, d) = int_0^inf  y^{d-1}/(d-1)! * e^{-y} (1 - e^{-y})^{n-1}  dy,

the integrand being the (unnormalized) conditional density of the record's
coordinate sum.  The alternating sum is evaluated in exact rational
arithmetic up to n = 30; beyond that binomial growth destroys double
precision (cancellation exceeds 10 digits by n ~ 50), so larger n switch to
log-space quadrature of the integral.  Expected record counts are prefix
sums of p, with a single-integral shortcut for very large n:

    E[#records among n] = int_0^inf y^{d-1}/(d-1)! * (1-(1-e^{-y})^n) dy.

Quadrature here is composite Gauss-Legendre on half-unit panels of the
log-space integrand, bracketed around the peak at ln n.  The evaluation is
deterministic and vectorized over many n at once, which is what makes the
30k-term prefix cache affordable; accuracy is pinned against independent
adaptive and high-precision quadratures in the tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import erfc

__all__ = [
    "AnalyticContext",
    "EULER_GAMMA",
    "GAMMA_DERIVS_AT_1",
    "KNOWN_VAR_CONSTANTS",
    "N_STABLE",
    "PREFIX_LIMIT",
    "p_record",
    "p_record_exact",
    "mean_remaining",
    "mean_records",
    "y_density",
    "sample_y",
    "gumbel_cdf",
    "normal_cdf",
    "fplus_centering",
    "tm_centering",
    "records_time_fplus_centering",
    "asym_mean_records",
    "gamma_derivative",
]

EULER_GAMMA = 0.5772156649015329

# Gamma^(j)(1) for j = 0..6, exactly rounded doubles. Independently
# cross-checked in the tests by central finite differences of math.gamma.
GAMMA_DERIVS_AT_1 = (
    1.0,
    -0.5772156649015329,
    1.978111990655945,
    -5.4448744564853175,
    23.561474084025605,
    -117.83940826837743,
    715.0673625273189,
)

# Record-count variance constants known in closed form, keyed by dimension:
# d=1 gives 1, d=2 gives pi^2/6 + 1/2. Higher d have no published value.
KNOWN_VAR_CONSTANTS = {1: 1.0, 2: 2.1449340668482266}

N_STABLE = 30  # last n evaluated by the exact rational alternating sum
PREFIX_LIMIT = 30_000  # largest n served by the cached prefix-sum route


@dataclass(frozen=True)
class AnalyticContext:
    """Bundle of the analytic constants for one dimension."""

    d: int
    euler_gamma: float = EULER_GAMMA
    gamma_derivs: tuple = GAMMA_DERIVS_AT_1
    known_var_constants: dict = field(default_factory=lambda: dict(KNOWN_VAR_CONSTANTS))

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.gamma_derivs[0] != 1.0:
            raise ValueError("gamma_derivs[0] must be 1")
        if abs(self.gamma_derivs[1] + self.euler_gamma) > 1e-12:
            raise ValueError("gamma_derivs[1] must equal -euler_gamma")
        if any(v <= 0 for v in self.known_var_constants.values()):
            raise ValueError("variance constants must be positive")


def _check_nd(n, d):
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise ValueError(f"d must be a positive integer, got {d!r}")
    return int(n), int(d)


# -- record probability -------------------------------------------------------

def p_record_exact(n: int, d: int) -> Fraction:
    """Exact rational record probability via the alternating sum."""
    n, d = _check_nd(n, d)
    total = Fraction(0)
    for k in range(n):
        term = Fraction(math.comb(n - 1, k), (k + 1) ** d)
        total += term if k % 2 == 0 else -term
    return total

# quadrature-evaluated p values, shared with the prefix-sum cache so that
# every caller sees one float per (n, d)
_P_CACHE: dict[int, dict[int, float]] = {}


def p_record(n: int, d: int) -> float:
    """P(observation n sets a record) for iid Exponential(1) coordinates."""
    n, d = _check_nd(n, d)
    if n <= N_STABLE:
        return float(p_record_exact(n, d))
    cache = _P_CACHE.setdefault(d, {})
    value = cache.get(n)
    if value is None:
        value = float(_p_batch(np.array([n], dtype=np.int64), d)[0])
        cache[n] = value
    return value


_PANEL = 0.5  # log-space panel width; GL16 per panel

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _panel_nodes(a: float, b: float):
    """Composite GL16 nodes/weights on [a, b] in half-unit panels."""
    n_panels = max(1, math.ceil((b - a) / _PANEL))
    edges = np.linspace(a, b, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    ys = (mid + half * _GL_NODES[None, :]).ravel()
    ws = (half * _GL_WEIGHTS[None, :]).ravel()
    return ys, ws


def _p_batch(ms: np.ndarray, d: int) -> np.ndarray:
    """Quadrature record probabilities for many n at once (all n > N_STABLE).

    Work is grouped into fixed bands, band k holding n in [B e^k, B e^{k+1})
    with B = N_STABLE + 1, and each band owns one absolute node grid wide
    enough for every peak it can contain (peaks sit at ln n).  Absolute band
    edges make the result a pure function of (n, d): the value cannot depend
    on which other n happen to share the batch.
    """
    out = np.empty(ms.size, dtype=np.float64)
    lg = math.lgamma(d)
    log_base_m = math.log(N_STABLE + 1)
    bands = np.floor(np.log(ms / float(N_STABLE + 1))).astype(np.int64)
    bands = np.maximum(bands, 0)
    for k in np.unique(bands):
        sel = np.nonzero(bands == k)[0]
        band = ms[sel].astype(np.float64)
        a = max(0.0, log_base_m + k - 4.0)
        b = log_base_m + k + 61.0
        ys, ws = _panel_nodes(a, b)
        log_base = (d - 1) * np.log(ys) - ys - lg  # ys > 0: panel nodes are interior
        lg1p = np.log1p(-np.exp(-ys))
        # row-wise add.reduce, not a matmul: BLAS kernels round differently
        # for different matrix shapes, and the value of p(n, d) must not
        # depend on which other n shared the batch
        for lo in range(0, band.size, 4096):
            rows = band[lo : lo + 4096, None]
            logf = (rows - 1.0) * lg1p[None, :] + log_base[None, :]
            out[sel[lo : lo + 4096]] = np.add.reduce(np.exp(logf) * ws[None, :], axis=1)
    return out


# -- record-count means --------------------------------------------------------

_PREFIX: dict[int, np.ndarray] = {}  # d -> S with S[k] = sum_{m<=k} p(m, d)


def _ensure_prefix(d: int, n: int) -> np.ndarray:
    s = _PREFIX.get(d)
    if s is not None and s.size > n:
        return s
    top = min(PREFIX_LIMIT, max(n, 1024, 0 if s is None else 2 * (s.size - 1)))
    ps = np.empty(top + 1, dtype=np.float64)
    ps[0] = 0.0
    k_exact = min(top, N_STABLE)
    for m in range(1, k_exact + 1):
        ps[m] = float(p_record_exact(m, d))
    if top > N_STABLE:
        ms = np.arange(N_STABLE + 1, top + 1, dtype=np.int64)
        vals = _p_batch(ms, d)
        ps[N_STABLE + 1 :] = vals
        cache = _P_CACHE.setdefault(d, {})
        for m, v in zip(ms.tolist(), vals.tolist()):
            cache[m] = v
    s = np.cumsum(ps)  # sequential accumulation: keeps telescoping bitwise
    _PREFIX[d] = s
    return s


def mean_records(n: int, d: int) -> float:
    """E[#records among the first n observations], exactly summed.

    Up to ``PREFIX_LIMIT`` this is the cached prefix sum of ``p_record``
    values, so consecutive outputs differ by exactly the probability of the
    new record.  Larger n evaluate the equivalent single integral.
    """
    n, d = _check_nd(n, d)
    if n <= PREFIX_LIMIT:
        return float(_ensure_prefix(d, n)[n])
    return _mean_records_integral(n, d)


def _mean_records_integral(n: int, d: int) -> float:
    ys, ws = _panel_nodes(0.0, math.log(n) + 60.0)
    # 1 - (1-e^{-y})^n without cancellation at either end
    tail = -np.expm1(n * np.log1p(-np.exp(-ys)))
    dens = np.exp((d - 1) * np.log(ys) - math.lgamma(d))
    return float((dens * tail) @ ws)


def mean_remaining(n: int, d: int) -> float:
    """E[#current records at time n] = n * p_record(n, d).

    In dimension 1 there is exactly one current record for every n, and the
    identity n * p(n, 1) = 1 is evaluated in closed form so the result is
    exact rather than quadrature-close.
    """
    n, d = _check_nd(n, d)
    if d == 1:
        return 1.0
    if n <= N_STABLE:
        return float(n * p_record_exact(n, d))
    return n * p_record(n, d)


# -- conditional record density -------------------------------------------------

def y_density(n: int, d: int, y):
    """Density of a record's coordinate sum at time n (0 for y <= 0)."""
    n, d = _check_nd(n, d)
    y_arr = np.asarray(y, dtype=np.float64)
    scalar = y_arr.ndim == 0
    y_arr = np.atleast_1d(y_arr)
    out = np.zeros_like(y_arr)
    pos = y_arr > 0.0
    if np.any(pos):
        yp = y_arr[pos]
        logf = (
            (d - 1) * np.log(yp)
            - math.lgamma(d)
            - yp
            - math.log(p_record(n, d))
        )
        if n > 1:
            logf = logf + (n - 1) * np.log1p(-np.exp(-yp))
        out[pos] = np.exp(logf)
    return float(out[0]) if scalar else out


class _CdfTable:
    """Panelized CDF of the unnormalized record-sum density for one (n, d)."""

    def __init__(self, n: int, d: int):
        self.n, self.d = n, d
        lo = 0.0 if n == 1 else max(0.0, math.log(n - 1) - 4.0)
        hi = math.log(max(n - 1, 1)) + 60.0 + 8.0 * d
        self.edges = np.linspace(lo, hi, 4097)
        mid = 0.5 * (self.edges[:-1] + self.edges[1:])[:, None]
        half = 0.5 * (self.edges[1:] - self.edges[:-1])[:, None]
        ys = (mid + half * _GL_NODES[None, :]).ravel()
        ws = (half * _GL_WEIGHTS[None, :]).ravel()
        vals = (self._raw_density(ys) * ws).reshape(-1, 16).sum(axis=1)
        self.cum = np.concatenate([[0.0], np.cumsum(vals)])
        self.total = float(self.cum[-1])

    def _raw_density(self, ys: np.ndarray) -> np.ndarray:
        logf = (self.d - 1) * np.log(ys) - math.lgamma(self.d) - ys
        if self.n > 1:
            logf = logf + (self.n - 1) * np.log1p(-np.exp(-ys))
        return np.exp(logf)

    def _partial(self, a: float, y: float) -> float:
        half = 0.5 * (y - a)
        nodes = a + half + half * _GL_NODES
        return float((self._raw_density(nodes) * _GL_WEIGHTS).sum() * half)

    def invert(self, u: float) -> float:
        target = u * self.total
        k = int(np.searchsorted(self.cum, target, side="right")) - 1
        k = min(max(k, 0), self.edges.size - 2)
        a, b = float(self.edges[k]), float(self.edges[k + 1])
        base = float(self.cum[k])
        lo, hi = a, b
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if base + self._partial(a, mid) < target:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-12:
                break
        return 0.5 * (lo + hi)


_CDF_TABLES: dict[tuple, _CdfTable] = {}


def sample_y(stream, n: int, d: int) -> float:
    """Exact draw from the record-sum density via inverse-CDF bisection.

    Consumes one observation address from the stream (its first coordinate
    slot), so samples are reproducible and stream-chunking independent.
    """
    n, d = _check_nd(n, d)
    key = (n, d)
    table = _CDF_TABLES.get(key)
    if table is None:
        table = _CDF_TABLES[key] = _CdfTable(n, d)
    u = float(stream.take_uniforms(1)[0, 0])
    return table.invert(u)


# -- reference distributions ----------------------------------------------------

def gumbel_cdf(x):
    """Standard Gumbel distribution function exp(-exp(-x))."""
    x_arr = np.asarray(x, dtype=np.float64)
    out = np.exp(-np.exp(-x_arr))
    return float(out) if out.ndim == 0 else out


def normal_cdf(x):
    """Standard normal distribution function via erfc."""
    x_arr = np.asarray(x, dtype=np.float64)
    out = 0.5 * erfc(-x_arr / math.sqrt(2.0))
    return float(out) if np.ndim(out) == 0 else out


# -- centering and scaling sequences ---------------------------------------------

def _check_real(value, name: str, minimum: float):
    value = float(value)
    if not math.isfinite(value) or value < minimum:
        raise ValueError(f"{name} must be a finite real >= {minimum}, got {value!r}")
    return value


def fplus_centering(n, d: int) -> float:
    """Centering for the largest frontier sum: ln n + (d-1) ln ln n - ln((d-1)!)."""
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise ValueError(f"d must be a positive integer, got {d!r}")
    n = _check_real(n, "n", 3.0)
    log_n = math.log(n)
    return log_n + (d - 1) * math.log(log_n) - math.lgamma(d)


def tm_centering(m, d: int) -> float:
    """Centering for the epoch of record m: (d! m)^(1/d) - gamma."""
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise ValueError(f"d must be a positive integer, got {d!r}")
    m = _check_real(m, "m", 2.0)
    return (math.factorial(d) * m) ** (1.0 / d) - EULER_GAMMA


def records_time_fplus_centering(m, d: int) -> float:
    """Centering for the largest frontier sum on the records-time clock.

    Only meaningful from dimension 3 up:
    (d! m)^(1/d) + (1 - 1/d) ln m + ln d - (1/d) ln(d!) - gamma.
    """
    if not isinstance(d, (int, np.integer)) or d < 3:
        raise ValueError(f"d must be an integer >= 3, got {d!r}")
    m = _check_real(m, "m", 2.0)
    dfact = math.factorial(d)
    return (
        (dfact * m) ** (1.0 / d)
        + (1.0 - 1.0 / d) * math.log(m)
        + math.log(d)
        - math.log(dfact) / d
        - EULER_GAMMA
    )


def asym_mean_records(n, d: int, order: int) -> float:
    """Truncated expansion of E[#records]: (ln n)^d sum_j (-1)^j G_j/(j!(d-j)!) (ln n)^-j
    with G_j the j-th derivative of the Gamma function at 1."""
    if not isinstance(d, (int, np.integer)) or d < 1:
        raise ValueError(f"d must be a positive integer, got {d!r}")
    if not isinstance(order, (int, np.integer)) or order < 0:
        raise ValueError(f"order must be a nonnegative integer, got {order!r}")
    if order > d:
        raise ValueError(f"order must be <= d = {d}, got {order}")
    n = _check_real(n, "n", 3.0)
    log_n = math.log(n)
    terms = [
        (-1.0) ** j
        * GAMMA_DERIVS_AT_1[j]
        / (math.factorial(j) * math.factorial(d - j))
        * log_n ** (d - j)
        for j in range(order + 1)
    ]
    return math.fsum(terms)


def gamma_derivative(j: int) -> float:
    """Gamma^(j)(1) for j in 0..6, from the hardcoded table."""
    if not isinstance(j, (int, np.integer)) or not 0 <= j <= 6:
        raise ValueError(f"j must be an integer in [0, 6], got {j!r}")
    return GAMMA_DERIVS_AT_1[j]
