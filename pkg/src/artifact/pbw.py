"""Exact power series: Euler products, coefficient bounds, dyadic profiles."""
from __future__ import annotations

import math
import operator
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from typing import Callable, Optional, Sequence

from .growth import GrowthProfile


class SeriesError(ValueError):
    pass


@dataclass(frozen=True)
class TruncatedSeries:
    """a_0 + a_1 t + ... + a_N t^N with exact non-negative integers."""

    coeffs: tuple

    def __post_init__(self) -> None:
        if not self.coeffs:
            raise SeriesError("empty series")
        if any(c < 0 for c in self.coeffs):
            raise SeriesError("coefficients must be non-negative")

    @property
    def N(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k: int) -> int:
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else 0

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return TruncatedSeries(tuple(convolve(self.coeffs, other.coeffs,
                                              min(self.N, other.N))))


def convolve(f: Sequence[int], g: Sequence[int], N: int) -> list:
    """Schoolbook product truncated at degree N."""
    out = [0] * (N + 1)
    for i, a in enumerate(f[:N + 1]):
        if a:
            for j, b in enumerate(g[:N + 1 - i]):
                out[i + j] += a * b
    return out


def _check_b(b: Sequence[int], N: int) -> list:
    if N < 1:
        raise SeriesError("N must be >= 1")
    bb = [int(x) for x in b[:N]] + [0] * max(0, N - len(b))
    if any(x < 0 for x in bb):
        raise SeriesError("exponents must be non-negative")
    return bb


def euler_product(b: Sequence[int], N: int) -> TruncatedSeries:
    """Degree-N part of prod_{n>=1} (1 - t^n)^(-b_n); b[0] is b_1.

    Uses n a_n = sum_k c_k a_{n-k} with c_k = sum_{d|k} d b_d; every
    division is exact.
    """
    bb = _check_b(b, N)
    c = [0] * (N + 1)
    for d in range(1, N + 1):
        w = d * bb[d - 1]
        if w:
            for k in range(d, N + 1, d):
                c[k] += w
    a = [1] + [0] * N
    mul = operator.mul
    for n in range(1, N + 1):
        s = sum(map(mul, c[1:n + 1], reversed(a[:n])))
        q, r = divmod(s, n)
        if r:
            raise SeriesError("non-integral coefficient (internal error)")
        a[n] = q
    return TruncatedSeries(tuple(a))


def euler_product_schoolbook(b: Sequence[int], N: int) -> TruncatedSeries:
    """Same product built factor by factor from binomial series."""
    bb = _check_b(b, N)
    acc = [1] + [0] * N
    for n in range(1, N + 1):
        e = bb[n - 1]
        if not e:
            continue
        fac = [0] * (N + 1)
        coef = 1
        for j in range(0, N // n + 1):
            fac[n * j] = coef
            coef = coef * (e + j) // (j + 1)
        acc = convolve(acc, fac, N)
    return TruncatedSeries(tuple(acc))


# ---------------------------------------------------------------- bounds

@dataclass
class BulletResult:
    status: str           # "pass" | "fail" | "hypothesis-not-met"
    lhs: Optional[int] = None
    rhs: Optional[int] = None


@dataclass
class SeriesLemmaReport:
    domination: BulletResult
    convolution_cap: BulletResult
    product_cap: BulletResult
    worst_k: Optional[int] = None

    @property
    def ok(self) -> bool:
        return all(b.status != "fail" for b in (self.domination, self.convolution_cap,
                                                self.product_cap))


def product_coefficients(d: Sequence[int], R: int) -> list:
    """Coefficients 0..R of prod_i (1 - t^i)^(-d_i)."""
    return list(euler_product(list(d), max(R, 1)).coeffs[:R + 1])


def check_series_lemma(f: TruncatedSeries, g: TruncatedSeries, R: int, T: int,
                       d: Sequence[int] = ()) -> SeriesLemmaReport:
    """Check the three coefficient bounds at R (and k <= R for the last)."""
    if R < 0 or R > min(f.N, g.N):
        raise SeriesError("R must not exceed the degree of f and g")
    fg_R = sum(f[i] * g[R - i] for i in range(R + 1))
    if g[0] > 0:
        dom = BulletResult("pass" if fg_R >= f[R] else "fail", fg_R, f[R])
    else:
        dom = BulletResult("hypothesis-not-met")
    if all(f[k] <= T for k in range(R + 1)):
        cap = T * sum(g[k] for k in range(R + 1))
        conv = BulletResult("pass" if fg_R <= cap else "fail", fg_R, cap)
    else:
        conv = BulletResult("hypothesis-not-met")
    bound = R ** sum(d)
    coeffs = product_coefficients(d, R)
    worst = max(range(R + 1), key=lambda k: coeffs[k])
    prod = BulletResult("pass" if coeffs[worst] <= bound else "fail", coeffs[worst], bound)
    return SeriesLemmaReport(dom, conv, prod, worst)


# ------------------------------------------------------- dyadic profiles

@dataclass
class DyadicGProfile:
    """g(2^k) for k = 0..K with regime marks for each step k -> k+1."""

    values: list
    marks: list                     # "square" | "hold", length K
    up_intervals: list = field(default_factory=list)   # [(n_i, n'_i)]
    epochs: list = field(default_factory=list)         # [(n, n', m, m')]

    @property
    def K(self) -> int:
        return len(self.values) - 1

    def at(self, k: int) -> int:
        """g(k) for any k >= 1 by the ceiling/floor extension rule."""
        if k < 1:
            raise SeriesError("k must be >= 1")
        lo = k.bit_length() - 1
        hi = lo if k == 1 << lo else lo + 1
        up = any(k >= 1 << a and k <= 1 << b for a, b in self.up_intervals)
        e = hi if up else lo
        if e > self.K:
            raise SeriesError(f"profile tabulated to 2^{self.K}, need 2^{e}")
        return self.values[e]

    def verify(self) -> dict:
        vals = self.values
        return {
            "squaring_cap": all(vals[k + 1] <= vals[k] ** 2 for k in range(self.K)),
            "divisibility": all(vals[k + 1] % vals[k] == 0 for k in range(self.K)),
            "monotone": all(vals[k] <= vals[k + 1] for k in range(self.K)),
        }


def _first_good(pred: Callable[[int], bool], lo: int, K: int) -> Optional[int]:
    """Least r >= lo with pred(s) for every s in [r, K]."""
    r = None
    for s in range(K, lo - 1, -1):
        if pred(s):
            r = s
        else:
            break
    return r


def build_lemdom_profile(f2: Callable[[int], int], K: int,
                         epochs: Optional[Sequence[tuple]] = None) -> DyadicGProfile:
    """Squaring / holding profile dominating f2 on up-intervals.

    Epoch values are pushed up minimally where the constraints demand it;
    with epochs=None they are chosen automatically.  Tabulated to 2^K.
    """
    if K < 1:
        raise SeriesError("K must be >= 1")
    given = list(epochs or [])
    for ep in given:
        if len(ep) != 4 or not ep[0] < ep[1] < ep[2] < ep[3]:
            raise SeriesError(f"epoch {ep} must be strictly increasing")
    vals = [2]
    marks: list = []
    ups: list = []
    used: list = []

    def extend(target: int, square: bool) -> None:
        while len(vals) - 1 < min(target, K):
            vals.append(vals[-1] ** 2 if square else vals[-1])
            marks.append("square" if square else "hold")

    r = _first_good(lambda s: f2(1 << s) <= 2 ** (1 << s), 0, K)
    if r is None:
        raise SeriesError("invalid-f2: f2(2^s) > 2^(2^s) at the top of the table")
    i = 0
    prev_top = 0
    while len(vals) - 1 < K:
        ep = given[i] if i < len(given) else None
        if i == 0:
            n = max(ep[0] if ep else 2, r, 2)
        else:
            base = vals[-1]
            top = len(vals) - 1
            # f2(2^s) <= base^(2^(s - top)) for all s >= n
            r_i = _first_good(lambda s: s >= top and f2(1 << s) <= base ** (1 << (s - top)),
                              top, K)
            if r_i is None:
                r_i = K + 1
            n = max(ep[0] if ep else top + 1, r_i, top + 1)
        n_p = max(ep[1] if ep else n + 1, n + 1)
        extend(n_p, True)
        ups.append((n, n_p))
        c = vals[min(n_p, K)]
        m_min = 1 << c if c < 62 else K + 1
        m = max(ep[2] if ep else n_p + 1, n_p + 1, m_min)
        m_p = max(ep[3] if ep else m + 1, m + 1)
        extend(m_p, False)
        used.append((n, n_p, m, m_p))
        i += 1
        if len(vals) - 1 == prev_top:
            break
        prev_top = len(vals) - 1
    return DyadicGProfile(vals[:K + 1], marks[:K], ups, used)


# ---------------------------------------------------------- growth of U

def floor_n2_log2(n: int) -> int:
    """floor(n^2 * log2(n + 1)), exact."""
    if n <= 0:
        return 0
    m = n + 1
    if m & (m - 1) == 0:
        return n * n * (m.bit_length() - 1)
    with localcontext() as ctx:
        ctx.prec = 60
        x = Decimal(n * n) * Decimal(m).ln() / Decimal(2).ln()
        lo = int(x)
    # a second, wider pass must agree on the floor
    with localcontext() as ctx:
        ctx.prec = 90
        y = Decimal(n * n) * Decimal(m).ln() / Decimal(2).ln()
        if int(y) != lo:
            raise SeriesError("precision failure")
    return lo


def enveloping_growth(increments: Sequence[int], N: int) -> GrowthProfile:
    """g_U(n) = sum_{s<=n} a_s for a = euler_product(increments, N)."""
    a = euler_product(increments, N).coeffs
    out, acc = [], 0
    for x in a:
        acc += x
        out.append(acc)
    return GrowthProfile(tuple(out), "exact", "enveloping")


def petrogradsky_exponent(N: int = 4096) -> dict:
    """Exponent diagnostics for increments floor(n^2 log2(n+1)).

    ``ratio`` is ln ln a_N / ln N; ``local_slope`` is the dyadic slope
    log2(ln a_N / ln a_{N/2}), which cancels the leading constant.
    """
    b = [floor_n2_log2(n) for n in range(1, N + 1)]
    a = euler_product(b, N).coeffs
    ratio = math.log(math.log(a[N])) / math.log(N)
    slope = math.log2(math.log(a[N]) / math.log(a[N // 2])) if N >= 4 else float("nan")
    return {"N": N, "a_N": a[N], "ln_a_N": math.log(a[N]), "ratio": ratio,
            "local_slope": slope}


# ---------------------------------------------------------- q-dimension

def _iter_ln(x: float, times: int) -> float:
    for _ in range(times):
        if x <= 1:
            return float("nan")
        x = math.log(x)
    return x


def _ln(v) -> float:
    return math.log(v) if v > 0 else float("-inf")


def qdim_point(n: int, gv, q: int) -> float:
    """alpha with Phi^q_alpha(n) = g(n), or nan where undefined."""
    if q == 1:
        return float(gv)
    if n < 2 or gv < 1:
        return float("nan")
    if q == 2:
        return _ln(gv) / math.log(n)
    lg = _ln(gv)
    if lg <= 0:
        return float("nan")
    if q == 3:
        beta = math.log(lg) / math.log(n)
        return beta / (1 - beta) if beta < 1 else float("inf")
    L = _iter_ln(float(n), q - 3)
    if not (L > 1):
        return float("nan")
    denom = math.log(n) - math.log(lg)
    if denom <= 0:
        return float("inf")
    return math.log(L) / denom


def qdim_estimate(g: Sequence, q: int) -> tuple:
    """(inf-side, sup-side) estimates of Dim^q over the tail half of g(0..N)."""
    if q not in range(1, 6):
        raise SeriesError("q must be in 1..5")
    vals = list(g.values if isinstance(g, GrowthProfile) else g)
    if len(vals) < 16:
        raise SeriesError("insufficient-data: need at least 16 points")
    N = len(vals) - 1
    pts = [qdim_point(n, vals[n], q) for n in range(max(N // 2, 2), N + 1)]
    pts = [p for p in pts if not math.isnan(p)]
    if not pts:
        raise SeriesError("insufficient-data: no evaluable points in the tail")
    return min(pts), max(pts)
