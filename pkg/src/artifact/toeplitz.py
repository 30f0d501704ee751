"""Rate sequences with an epoch schedule, complexity envelopes, a 5-adic
Toeplitz generator, and the growth tables behind the tensor-product example."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import gmpy2
import numpy as np

from . import kernels
from .words import WordStream


class ToeplitzError(ValueError):
    def __init__(self, code: str, message: str) -> None:
        super().__init__(f"{code}: {message}")
        self.code = code


def as_fraction(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(str(x))


def ceil_pow5_times(x: Fraction, m: int) -> int:
    """Exact ceil(5^x * m) for rational x >= 0 and integer m >= 0."""
    if x < 0:
        raise ToeplitzError("invalid-argument", "exponent must be non-negative")
    p, q = x.numerator, x.denominator
    y = gmpy2.mpz(5) ** p * gmpy2.mpz(m) ** q
    r, exact = gmpy2.iroot(y, q)
    return int(r) if exact else int(r) + 1


def le_pow5(a: Fraction, x: Fraction) -> bool:
    """a <= 5^x exactly (a >= 0, x rational)."""
    if a <= 0:
        return True
    p, q = x.numerator, x.denominator
    # a^q <= 5^p, with a = u/v
    return a.numerator ** q <= 5 ** p * a.denominator ** q if p >= 0 else \
        a.numerator ** q * 5 ** (-p) <= a.denominator ** q


@dataclass(frozen=True)
class ToeplitzParams:
    alpha: Fraction
    beta: Fraction
    gamma: Fraction
    s: int
    t: int

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if not 2 <= self.gamma <= self.alpha <= self.beta:
            raise ToeplitzError("invalid-argument", "need 2 <= gamma <= alpha <= beta")
        if self.s < 1 or self.t < 1:
            raise ToeplitzError("invalid-argument", "s and t must be positive")


@dataclass(frozen=True)
class EpochSchedule:
    d: tuple            # d_1, d_2, ... (only those that fit)
    e: tuple
    s: int

    def __post_init__(self) -> None:
        if not self.d or self.d[0] <= self.s:
            raise ToeplitzError("invalid-argument", "need s < d_1")

    @classmethod
    def build(cls, s: int, d1: int = 5, reach: int = 1 << 12) -> "EpochSchedule":
        """d_1 given, e_i = 2^{d_i}, d_{i+1} = 2^{e_i}; stops once past ``reach``."""
        d, e = [d1], []
        while True:
            e.append(1 << d[-1])
            if e[-1] > reach:
                break
            d.append(1 << e[-1])
            if d[-1] > reach:
                break
        return cls(tuple(d), tuple(e), s)

    def boundaries(self) -> list:
        """[(d_0, e_0), (d_1, e_1), ...] with d_0 = e_0 = s."""
        return [(self.s, self.s)] + list(zip(self.d, self.e))

    def regime(self, k: int) -> tuple:
        """("low", i) for k in (e_i, d_{i+1}], ("high", i) for k in (d_i, e_i]."""
        if k <= self.s:
            return ("start", 0)
        b = self.boundaries()
        for i, (d, e) in enumerate(b):
            nxt = b[i + 1][0] if i + 1 < len(b) else None
            if i >= 1 and d < k <= e:
                return ("high", i)
            if e < k and (nxt is None or k <= nxt):
                return ("low", i)
        raise ToeplitzError("invalid-argument", f"k = {k} beyond the schedule")


@dataclass
class RateSequences:
    params: ToeplitzParams
    schedule: EpochSchedule
    n: tuple                 # n_1..n_kmax (index k-1)
    m: tuple
    lam: Fraction
    violations: list = field(default_factory=list)

    @property
    def k_max(self) -> int:
        return len(self.n)

    def n_at(self, k: int) -> int:
        return self.n[k - 1]

    def m_at(self, k: int) -> int:
        return self.m[k - 1]

    def seq(self, which: str) -> tuple:
        if which not in ("X", "Y"):
            raise ToeplitzError("invalid-argument", "which must be X or Y")
        return self.n if which == "X" else self.m


def _rates(p: ToeplitzParams, sched: EpochSchedule, k_max: int) -> tuple:
    a, b, g = p.alpha - 2, p.beta - 2, p.gamma - 2
    n, m = [p.t], [p.t]
    for k in range(2, k_max + 1):
        kind, i = sched.regime(k)
        if kind == "start":
            n.append(p.t)
            m.append(p.t)
        elif kind == "low":
            m.append(p.t)
            n.append(ceil_pow5_times(a, n[-1]))
        else:
            m.append(ceil_pow5_times(b, m[-1]))
            d = sched.boundaries()[i][0]
            n.append(p.t if k == d + 1 else ceil_pow5_times(g, n[-1]))
    return tuple(n), tuple(m)


def _violations(n: tuple, m: tuple) -> list:
    out = []
    for name, seq in (("n", n), ("m", m)):
        for k, v in enumerate(seq, 1):
            if v < 3:
                out.append(f"{name}_{k} = {v} < 3")
            if k < len(seq) and seq[k] > (v - 1) ** 2:
                out.append(f"{name}_{k + 1} > ({name}_{k} - 1)^2")
    return out


def build_rates(params: ToeplitzParams, schedule: EpochSchedule, k_max: int,
                check: str = "report") -> RateSequences:
    """Exact n_k, m_k for k = 1..k_max.

    check: "report" lists invariant violations, "raise" turns them into
    params-too-small, "adjust" raises t until none remain.
    """
    if k_max < 1:
        raise ToeplitzError("invalid-argument", "k_max must be positive")
    if check not in ("report", "raise", "adjust"):
        raise ToeplitzError("invalid-argument", f"unknown check mode {check!r}")
    if schedule.s != params.s:
        raise ToeplitzError("invalid-argument", "schedule and params disagree on s")
    while True:
        n, m = _rates(params, schedule, k_max)
        bad = _violations(n, m)
        if not bad or check == "report":
            break
        if check == "raise":
            raise ToeplitzError("params-too-small", bad[0])
        params = ToeplitzParams(params.alpha, params.beta, params.gamma, params.s, params.t + 1)
    lam = max(Fraction(seq[k + 1], seq[k]) for seq in (n, m) for k in range(len(seq) - 1)) \
        if k_max > 1 else Fraction(1)
    top = max(params.alpha, params.beta) - 2
    if not le_pow5(lam - 1, top):
        bad = bad + [f"lambda = {lam} exceeds 5^{top} + 1"]
    return RateSequences(params, schedule, n, m, lam, bad)


def constant_rates(value: int, k_max: int) -> RateSequences:
    """n_k = m_k = value: the degenerate input for the generator."""
    p = ToeplitzParams(2, 2, 2, 1, value)
    sched = EpochSchedule.build(1, 2)
    seq = (value,) * k_max
    return RateSequences(p, sched, seq, seq, Fraction(1), [])


# -------------------------------------------------------------- bounds

def analytic_complexity_envelope(rates: RateSequences, k: int, which: str = "X") -> tuple:
    """(2 5^{k-1} n_k, 2 5^k n_k)."""
    if not 1 <= k <= rates.k_max:
        raise ToeplitzError("invalid-argument", f"k must be in [1, {rates.k_max}]")
    v = rates.seq(which)[k - 1]
    return 2 * 5 ** (k - 1) * v, 2 * 5 ** k * v


def envelope_at(rates: RateSequences, r: int, which: str = "X") -> tuple:
    """(floor(2 r n_k / 25), 10 r n_{k+1}) for 5^k <= r < 5^{k+1}."""
    if r < 5:
        raise ToeplitzError("invalid-argument", "r must be >= 5")
    k = int(gmpy2.mpz(r).num_digits(5)) - 1
    if k + 1 > rates.k_max:
        raise ToeplitzError("invalid-argument", "r beyond the built rates")
    seq = rates.seq(which)
    return 2 * r * seq[k - 1] // 25, 10 * r * seq[k]


def rate_constants(rates: RateSequences) -> dict:
    """Smallest c_1, c_2, c_3 valid on the built range, and the 2^{d_i} bounds."""
    p, sched = rates.params, rates.schedule
    b, g, a = p.beta - 2, p.gamma - 2, p.alpha - 2
    ln5 = math.log(5)
    c = {"c1": None, "c2": None, "c3": None}

    def bump(key, v, x, k):
        val = math.exp(math.log(v) - float(x) * k * ln5)
        c[key] = val if c[key] is None else max(c[key], val)

    for k in range(1, rates.k_max + 1):
        kind, _ = sched.regime(k)
        if kind == "high":
            bump("c1", rates.m_at(k), b, k)
            bump("c2", rates.n_at(k), g, k)
        elif kind == "low" and k > sched.s:
            bump("c3", rates.n_at(k), a, k)
    lows = []
    for d in sched.d:
        k = 1 << d
        if k > rates.k_max:
            break
        # m_{2^d} >= (5^{beta-2})^{2^d - d}: m^q >= 5^{p (2^d - d)}
        for name, val, x in (("m", rates.m_at(k), b), ("n", rates.n_at(k), g)):
            e = x * (k - d)
            ok = val ** e.denominator >= 5 ** e.numerator
            lows.append({"index": k, "seq": name, "ok": ok})
    c["pow2_lower_bounds"] = lows
    return c


# ----------------------------------------------------------- generator
#
# Position n has hole level H = v5(n + 1) and base-5 digit d_H in {0..3}.
# Its letter is (d_H + G(H, floor(n / 5^{H+1}) mod 5^{P_H - H - 1})) mod 2
# with G a fixed hash bit, so n has period 5^{P_H}.  A window of length 5^k
# is fixed by its start mod 5^{M_k}, M_k = max_{H<k} P_H, and the letter of
# its single hole of level >= k, hence p(5^k) <= 2 5^{M_k}; M_k is chosen
# near k - 1/2 + log5 n_k, the log-centre of the envelope.

_MASK = (1 << 64) - 1


def _mix(x: np.ndarray) -> np.ndarray:
    x = x.astype(np.uint64)
    with np.errstate(over="ignore"):
        x = (x + np.uint64(0x9E3779B97F4A7C15)) & np.uint64(_MASK)
        x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        x = x ^ (x >> np.uint64(31))
    return x


def period_exponents(seq: tuple, levels: int, cap: Optional[int] = None) -> list:
    """P_H for H = 0..levels-1 from the rate sequence (index k-1 = n_k).

    ``cap`` bounds P_H (never below H + 1) so that periods repeat inside a
    materialized prefix; it only binds on levels past the checked range.
    """
    P, run = [], 0
    for k in range(1, levels + 1):
        v = seq[k - 1] if k <= len(seq) else seq[-1]
        target = max(k, round(k - 0.5 + math.log(v, 5)))
        run = max(run, target)
        P.append(run if cap is None else max(k, min(run, cap)))
    return P


def toeplitz_letters(P: list, length: int, seed: int = 0) -> np.ndarray:
    n = np.arange(length, dtype=np.int64)
    out = np.zeros(length, dtype=np.int32)
    rest = n + 1
    H = np.zeros(length, dtype=np.int64)
    while True:
        hit = (rest % 5 == 0) & (rest > 0)
        if not hit.any():
            break
        H[hit] += 1
        rest[hit] //= 5
    for h in np.unique(H):
        idx = np.flatnonzero(H == h)
        ph = P[h] if h < len(P) else h + 1
        digit = (n[idx] // 5 ** h) % 5
        q = (n[idx] // 5 ** (h + 1)) % (5 ** (ph - h - 1))
        bit = (_mix((q << 8) ^ (h << 1) ^ (seed << 40)) & np.uint64(1)).astype(np.int64)
        out[idx] = ((digit + bit) % 2).astype(np.int32)
    return out


@dataclass
class EnvelopeCheck:
    k: int
    measured: int
    lo: int
    hi: int
    certified: bool

    @property
    def ok(self) -> bool:
        return self.lo <= self.measured <= self.hi


def envelope_checks(letters: np.ndarray, rates: RateSequences, which: str) -> list:
    L = len(letters)
    out, k = [], 1
    while 5 ** (k + 1) <= L // 2 and k <= rates.k_max:
        c, cert = kernels.count_windows(letters, [0, L], 5 ** k)
        lo, hi = analytic_complexity_envelope(rates, k, which)
        out.append(EnvelopeCheck(k, c, lo, hi, cert))
        k += 1
    return out


def generate_toeplitz(rates: RateSequences, prefix_len: int, which: str = "X",
                      seed: int = 0, check: bool = True) -> WordStream:
    """Binary Toeplitz word tracking the chosen rate sequence; the measured
    p(5^k) is compared to the envelope for every k with 5^{k+1} <= prefix_len/2."""
    if prefix_len < 1:
        raise ToeplitzError("invalid-argument", "prefix_len must be positive")
    digits = int(gmpy2.mpz(prefix_len).num_digits(5))
    P = period_exponents(rates.seq(which), digits + 1, cap=max(1, digits - 2))
    if check:
        bad = [c for c in envelope_checks(toeplitz_letters(P, prefix_len, seed), rates, which)
               if not c.ok]
        if bad:
            c = bad[0]
            raise ToeplitzError("generator-mismatch",
                                f"p(5^{c.k}) = {c.measured} outside [{c.lo}, {c.hi}]")

    def fn(length: int) -> tuple:
        return toeplitz_letters(P, length, seed), None

    return WordStream(fn, f"toeplitz-{which}-seed{seed}", 2)


def toeplitz_failures(letters: np.ndarray, n_max: int, d_max: Optional[int] = None) -> list:
    """Positions n <= n_max with no d in {5, 25, ...}, d <= d_max, and
    w_n = w_{n + i d} for every materialized i."""
    L = len(letters)
    d_max = L // 4 if d_max is None else d_max
    bad = []
    for pos in range(min(n_max, L - 1) + 1):
        d, found = 5, False
        while d <= d_max:
            if (letters[pos::d] == letters[pos]).all():
                found = True
                break
            d *= 5
        if not found:
            bad.append(pos)
    return bad


# ------------------------------------------------------- growth tables

@dataclass
class SampledGrowth:
    points: tuple            # (n, value) with exact integer values
    kind: str
    label: str

    def value(self, n: int) -> int:
        for x, v in self.points:
            if x == n:
                return v
        raise KeyError(n)

    def window_slope(self, lo: int, hi: int) -> float:
        """Least-squares slope of log value against log n on lo < n <= hi."""
        pts = [(math.log(x), math.log(v)) for x, v in self.points if lo < x <= hi and v > 0]
        if len(pts) < 2:
            raise ToeplitzError("insufficient-data", "fewer than two points in the window")
        mx = sum(p[0] for p in pts) / len(pts)
        my = sum(p[1] for p in pts) / len(pts)
        num = sum((x - mx) * (y - my) for x, y in pts)
        den = sum((x - mx) ** 2 for x, _ in pts)
        return num / den


@dataclass
class TheoremDProfiles:
    gX: SampledGrowth            # upper: g(5^k) <= 5^k p(5^k)
    gY: SampledGrowth
    gX_lower: SampledGrowth      # g(2 5^k) >= 5^k p(5^k)
    gY_lower: SampledGrowth
    gTensorLo: SampledGrowth     # index 4 5^k
    gTensorHi: SampledGrowth     # index 5^k
    rates: RateSequences

    def tensor_exponent_at(self, k: int) -> float:
        """log gTensorLo(4 5^k) / log 5^k."""
        return math.log(self.gTensorLo.value(4 * 5 ** k)) / (k * math.log(5))

    def tensor_exponent_at_least(self, k: int, bound: Fraction) -> bool:
        """Exact test gTensorLo(4 5^k) >= (5^k)^bound."""
        v = self.gTensorLo.value(4 * 5 ** k)
        b = as_fraction(bound)
        return v ** b.denominator >= 5 ** (k * b.numerator)


def tensor_lower_log_closed_form(params: ToeplitzParams, k: int) -> float:
    """log_r of 4 r^{beta+gamma} / (625 (log5 r)^{3(beta+gamma-4)}) at r = 5^k."""
    s = float(params.beta + params.gamma)
    ln_r = k * math.log(5)
    return (math.log(4) + s * ln_r - math.log(625) - 3 * (s - 4) * math.log(k)) / ln_r


def theorem_d_profiles(params: ToeplitzParams, k_max: int = 200, d1: int = 5) -> TheoremDProfiles:
    sched = EpochSchedule.build(params.s, d1, reach=k_max)
    rates = build_rates(params, sched, k_max)
    gx, gy, gxl, gyl, lo, hi = [], [], [], [], [], []
    for k in range(1, k_max + 1):
        r = 5 ** k
        ux = r * 2 * r * rates.n_at(k)
        uy = r * 2 * r * rates.m_at(k)
        lx = r * 2 * 5 ** (k - 1) * rates.n_at(k)
        ly = r * 2 * 5 ** (k - 1) * rates.m_at(k)
        gx.append((r, ux))
        gy.append((r, uy))
        gxl.append((2 * r, lx))
        gyl.append((2 * r, ly))
        hi.append((r, ux * uy))
        lo.append((4 * r, lx * ly))
    return TheoremDProfiles(
        SampledGrowth(tuple(gx), "upper", "gX"),
        SampledGrowth(tuple(gy), "upper", "gY"),
        SampledGrowth(tuple(gxl), "lower", "gX"),
        SampledGrowth(tuple(gyl), "lower", "gY"),
        SampledGrowth(tuple(lo), "lower", "gX gY (tensor)"),
        SampledGrowth(tuple(hi), "upper", "gX gY (tensor)"),
        rates,
    )
