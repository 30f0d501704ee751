"""Growth analytics: cumulative profiles, GK-dimension estimates,
oscillation reports and the wreath-product bound pipelines."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import gmpy2

from . import oscillator as osc
from . import sbm
from . import wreath
from .growth import GrowthProfile
from .words import ComplexityProfile

Table = Union[Sequence[int], Callable[[int], int], GrowthProfile]

MODES = ("A1", "A2", "B1", "B2")


class AnalysisError(ValueError):
    """Carries a code and, for pipeline failures, the stage that raised."""

    def __init__(self, code: str, message: str, stage: str = "analysis") -> None:
        super().__init__(f"{code}: {message}")
        self.code = code
        self.stage = stage


def _values(g: Table, N: Optional[int] = None) -> list:
    if isinstance(g, GrowthProfile):
        vals = list(g.values)
    elif callable(g):
        if N is None:
            raise AnalysisError("invalid-argument", "a callable needs an explicit range")
        return [int(g(n)) for n in range(N + 1)]
    else:
        vals = [int(x) for x in g]
    return vals if N is None else vals[:N + 1]


# ------------------------------------------------------------ profiles

def growth_from_complexity(p: ComplexityProfile) -> GrowthProfile:
    """g(n) = p(0) + ... + p(n), exact up to the certified horizon."""
    vals = p.cumulative()[:p.horizon + 1]
    return GrowthProfile(tuple(vals), "exact", "sum of factor complexity")


# ----------------------------------------------------------- estimates

@dataclass
class GKEstimate:
    point_estimates: list        # (n, estimate at n)
    limsup_est: float
    window: tuple                # (lo, hi) of n used for the limsup
    method: str = "slope"


def _point(vals: list, n: int, method: str) -> Optional[float]:
    if vals[n] < 1:
        return None
    if method == "ratio":
        return math.log(vals[n]) / math.log(n)
    h = n // 2
    if vals[h] < 1:
        return None
    return math.log(vals[n] / vals[h]) / math.log(n / h)


def gk_estimate(g: Table, N: Optional[int] = None, method: str = "slope",
                window: Optional[tuple] = None) -> GKEstimate:
    """limsup of log g / log n, read off the tail half n in [N/2, N].

    method "ratio" uses log g(n) / log n itself; "slope" (default) uses the
    dyadic log-log slope log(g(n)/g(n/2)) / log(n/(n/2)), which tends to the
    same limsup but drops the O(1/log n) bias from constant factors.

    Sampled profiles (anything with ``points``, e.g. the Toeplitz tables) are
    accepted with an explicit window (lo, hi]; the slope then runs between
    consecutive samples.
    """
    if method not in ("slope", "ratio"):
        raise AnalysisError("invalid-argument", f"unknown method {method!r}")
    if hasattr(g, "points"):
        return _gk_sampled(list(g.points), method, window)
    vals = _values(g, N)
    top = len(vals) - 1
    if top < 16:
        raise AnalysisError("insufficient-data", "need values at n = 0..16 at least")
    pts = []
    for n in range(2, top + 1):
        e = _point(vals, n, method)
        if e is not None:
            pts.append((n, e))
    lo = max(2, top // 2)
    tail = [e for n, e in pts if n >= lo]
    if not tail:
        raise AnalysisError("insufficient-data", "no finite estimates in the tail half")
    return GKEstimate(pts, max(tail), (lo, top), method)


def _gk_sampled(points: list, method: str, window: Optional[tuple]) -> GKEstimate:
    if window is None:
        raise AnalysisError("invalid-argument", "sampled profiles need a window")
    lo, hi = window
    pts = []
    for (n0, v0), (n, v) in zip(points, points[1:]):
        if not lo < n <= hi or v < 1 or n < 2:
            continue
        if method == "ratio":
            pts.append((n, math.log(v) / math.log(n)))
        elif v0 >= 1 and n0 > lo:
            pts.append((n, math.log(v / v0) / math.log(n / n0)))
    if len(pts) < 2:
        raise AnalysisError("insufficient-data", "fewer than two estimates in the window")
    return GKEstimate(pts, max(e for _, e in pts), (lo, hi), method)


@dataclass
class ScalingReport:
    C: int
    D: int
    base: float
    scaled: float
    difference: float
    allowed: float
    ok: bool


def scaling_invariance_check(g: Table, Cc: int, Dd: int, N: Optional[int] = None,
                             slack: float = 0.05, method: str = "slope") -> ScalingReport:
    """Compare the estimate of g with that of n -> Cc g(Dd n) on a common range.

    The allowed gap is 2 log Cc / log n_min + slack, n_min the left end of
    the tail window; for the slope method the Cc term cancels exactly.
    """
    if Cc < 1 or Dd < 1:
        raise AnalysisError("invalid-argument", "C and D must be positive")
    if callable(g) and not isinstance(g, GrowthProfile):
        if N is None:
            raise AnalysisError("invalid-argument", "a callable needs an explicit range")
        base_vals = [int(g(n)) for n in range(N + 1)]
        scaled = [Cc * int(g(Dd * n)) for n in range(N + 1)]
    else:
        vals = _values(g)
        top = (len(vals) - 1) // Dd if N is None else N
        if Dd * top > len(vals) - 1:
            raise AnalysisError("invalid-argument", "D times the range exceeds the table")
        base_vals = vals[:top + 1]
        scaled = [Cc * vals[Dd * n] for n in range(top + 1)]
    a = gk_estimate(base_vals, method=method)
    b = gk_estimate(scaled, method=method)
    diff = abs(a.limsup_est - b.limsup_est)
    allowed = 2 * math.log(Cc) / math.log(a.window[0]) + slack
    return ScalingReport(Cc, Dd, a.limsup_est, b.limsup_est, diff, allowed, diff <= allowed)


# ---------------------------------------------------------- oscillation

@dataclass
class OscillationReport:
    slow_hits: list
    fast_hits: list
    upper_density_slow: Fraction
    upper_density_fast: Fraction
    range: tuple


def _upper_density(hits: list, top: int) -> Fraction:
    best, count, it = Fraction(0), 0, iter(hits)
    nxt = next(it, None)
    for N in range(1, top + 1):
        while nxt is not None and nxt <= N:
            count += 1
            nxt = next(it, None)
        if count * best.denominator > best.numerator * N:
            best = Fraction(count, N)
    return best


def oscillation_report(g: Table, bound_slow: Table, bound_fast: Table,
                       g_fast: Optional[Table] = None, N: Optional[int] = None,
                       start: int = 1) -> OscillationReport:
    """Hits g(n) <= bound_slow(n) and g_fast(n) >= bound_fast(n) over start..N.

    g_fast defaults to g; pipelines pass a lower envelope there and an upper
    one as g.  Densities are max_N #{hits <= N} / N, exact.
    """
    gs = _values(g, N)
    top = len(gs) - 1
    gf = gs if g_fast is None else _values(g_fast, top)
    bs, bf = _values(bound_slow, top), _values(bound_fast, top)
    if min(len(gf), len(bs), len(bf)) < top + 1:
        raise AnalysisError("invalid-argument", "tables must share the index range")
    idx = range(max(start, 1), top + 1)
    slow = [n for n in idx if gs[n] <= bs[n]]
    fast = [n for n in idx if gf[n] >= bf[n]]
    return OscillationReport(slow, fast, _upper_density(slow, top),
                             _upper_density(fast, top), (max(start, 1), top))


# ------------------------------------------------------------ pipeline

def cube_root_floor(x: int) -> int:
    return int(gmpy2.iroot(gmpy2.mpz(x), 3)[0])


def default_omega(n: int) -> int:
    """(n+1)^(ceil(log2(n+1)) + 3): non-decreasing and super-polynomial."""
    return (n + 1) ** ((n).bit_length() + 3)


def slow_target(n: int) -> int:
    """floor((n/2)^(1/3)), the default slow target for the B modes."""
    return cube_root_floor(n // 2)


def fast_target(n: int) -> int:
    """2^floor(sqrt n)."""
    return 2 ** math.isqrt(n)


@dataclass
class PipelineConfig:
    mode: str
    n_max: int = 512
    f_pow2: Optional[Sequence[int]] = None       # A modes: f(2^0..2^D)
    f_beyond: str = "ratio"
    delta: Optional[Sequence[int]] = None        # A modes: delta(1), delta(2), ...
    f1: Optional[Table] = None                   # B modes: slow target
    f2: Optional[Table] = None                   # B modes: fast target
    f1_inverse: Optional[Callable[[int], int]] = None
    stages: int = 2
    p_min: int = 1
    g_B: Optional[Table] = None                  # stand-in for the nil base algebra
    omega: Optional[Callable[[int], int]] = None  # A2 / B2
    eps: Fraction = Fraction(1, 2)
    w_override: Optional[Sequence[int]] = None   # replaces w_gamma, e.g. w = 0
    threads: int = 1

    def validate(self) -> None:
        if self.mode not in MODES:
            raise AnalysisError("invalid-argument", f"mode must be one of {MODES}", "config")
        if self.n_max < 16:
            raise AnalysisError("invalid-argument", "n_max must be at least 16", "config")
        if self.mode in ("A1", "A2") and self.w_override is None:
            if not self.f_pow2 or not self.delta:
                raise AnalysisError("invalid-argument", "A modes need f_pow2 and delta", "config")
        if self.w_override is not None and len(self.w_override) < self.n_max + 1:
            raise AnalysisError("invalid-argument", "w_override must cover 0..n_max", "config")
        if self.eps <= 0:
            raise AnalysisError("invalid-argument", "eps must be positive", "config")


@dataclass
class PipelineCheck:
    name: str
    ok: bool
    points: int
    witness: Optional[dict] = None


@dataclass
class PipelineReport:
    mode: str
    n_max: int
    g_B: GrowthProfile
    w: GrowthProfile
    lower: GrowthProfile
    upper: GrowthProfile
    checks: list
    oscillation: Optional[OscillationReport] = None
    stages: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)


def _run(stage: str, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except AnalysisError:
        raise
    except (ValueError, KeyError, IndexError) as exc:
        code = getattr(exc, "code", "computation-error")
        raise AnalysisError(code, str(exc), stage) from exc


def _parallel_first_failure(pred, items: list, threads: int):
    """First item (in order) failing pred, or None; chunks run in a pool."""
    if threads <= 1 or len(items) < 64:
        return next((x for x in items if not pred(x)), None)
    size = -(-len(items) // threads)
    chunks = [items[i:i + size] for i in range(0, len(items), size)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        found = list(pool.map(lambda c: next((x for x in c if not pred(x)), None), chunks))
    return next((x for x in found if x is not None), None)


def _default_g_B(cfg: PipelineConfig, omega: Callable[[int], int]) -> GrowthProfile:
    N = cfg.n_max
    if cfg.mode in ("A1", "B1"):
        return GrowthProfile(tuple((n + 1) ** 3 for n in range(N + 1)), "assumed",
                             "(n+1)^3 stand-in, GK dimension 3 base")
    return GrowthProfile(tuple(cube_root_floor(omega(n)) for n in range(N + 1)), "assumed",
                         "floor(omega^(1/3)) stand-in")


def _sandwich_check(lower: GrowthProfile, upper: GrowthProfile, threads: int) -> PipelineCheck:
    ns = list(range(len(lower)))
    bad = _parallel_first_failure(lambda n: lower[n] <= upper[n], ns, threads)
    wit = None if bad is None else {"n": bad, "lower": lower[bad], "upper": upper[bad]}
    return PipelineCheck("lower <= upper", bad is None, len(ns), wit)


def _a_modes(cfg: PipelineConfig, rep: PipelineReport, omega: Callable[[int], int]) -> None:
    N = cfg.n_max
    f = _run("sbm", sbm.GrowthTarget, tuple(int(x) for x in cfg.f_pow2), cfg.f_beyond)
    delta = [int(x) for x in cfg.delta]
    if len(delta) < N // 4:
        raise AnalysisError("invalid-argument", f"delta table must cover 1..{N // 4}", "config")
    M = sbm.ceil_log2(N)
    if cfg.w_override is None:
        depth = max(M + 1, f.depth)
        sets = _run("sbm", sbm.build_sb_sets, f, depth)
        k_max = next((k for k in range(1, delta[-1]) if 2 * sum(1 for x in delta if x <= k) >= M),
                     None)
        if k_max is None:
            raise AnalysisError("invalid-argument", "delta table too short for the range", "sbm")
        sched = _run("sbm", sbm.build_level_schedule, delta, k_max)
        w_lo = _run("sbm", sbm.w_gamma_profile, sets, sched, N // 2, M - 1)
        prof = _run("sbm", sbm.language_complexity, sets, min(N, 128))
        h_up, _, _ = _run("sbm", sbm.cumulative_h, sets, prof, N)
        w_hi = [sbm.w_upper_from_h(h_up, n) for n in range(N + 1)]
        rep.notes.append(f"w lower: leveled factors of W(2^{M - 1}); w upper: h(n) n^2")
    else:
        w_lo = w_hi = [int(x) for x in cfg.w_override[:N + 1]]
    # lower(n) = w(n/2) reads w only up to N/2, which w_lo covers exactly
    w_pad = list(w_lo) + [w_lo[-1]] * (N + 1 - len(w_lo))
    lower, _ = _run("wreath", wreath.compose_growth_bounds, rep.g_B, w_pad)
    _, upper = _run("wreath", wreath.compose_growth_bounds, rep.g_B, w_hi)
    rep.w = GrowthProfile(tuple(w_lo), "lower-bound", "w_gamma, exact count of a sub-language")
    rep.lower, rep.upper = lower, upper
    rep.checks.append(_sandwich_check(lower, upper, cfg.threads))
    if cfg.w_override is not None:
        return
    # f(floor(n/delta(n))) <= w(2n) = lower(4n), n <= N/4
    ns = list(range(1, N // 4 + 1))

    def env_ok(n: int) -> bool:
        return f.at(n // delta[n - 1]) <= lower[4 * n]

    bad = _parallel_first_failure(env_ok, ns, cfg.threads)
    wit = None if bad is None else {"n": bad, "f": f.at(bad // delta[bad - 1]), "lower": lower[4 * bad]}
    rep.checks.append(PipelineCheck("f(n/delta(n)) <= lower(4n)", bad is None, len(ns), wit))
    n, fn, up = N, f.at(N), upper[N]
    if cfg.mode == "A1":
        e = Fraction(11) + cfg.eps
        ok = up ** e.denominator <= n ** e.numerator * fn ** e.denominator
        name = f"upper(n) <= n^{float(e):g} f(n) at n = {n}"
    else:
        ok = up <= omega(n) * fn
        name = f"upper(n) <= omega(n) f(n) at n = {n}"
    rep.checks.append(PipelineCheck(name, ok, 1, {"n": n, "upper": up, "f": fn}))


def _b_modes(cfg: PipelineConfig, rep: PipelineReport, omega: Callable[[int], int]) -> None:
    N = cfg.n_max
    f1 = cfg.f1 if cfg.f1 is not None else slow_target
    f2 = cfg.f2 if cfg.f2 is not None else fast_target
    inv = cfg.f1_inverse
    if inv is None and cfg.f1 is None:
        inv = lambda K: 2 * K ** 3  # least m with floor((m/2)^(1/3)) >= K
    sched = _run("oscillator", osc.build_osc_schedule, f1, f2, cfg.stages,
                 p_min=cfg.p_min, f1_inverse=inv)
    stage_checks = _run("oscillator", osc.verify_oscillation, sched)
    if cfg.w_override is None:
        w = _run("oscillator", osc.w_profile, sched, N)
    else:
        w = [int(x) for x in cfg.w_override[:N + 1]]
    lower, upper = _run("wreath", wreath.compose_growth_bounds, rep.g_B, w)
    rep.w = GrowthProfile(tuple(w), "exact", "w_gamma from the oscillator DP")
    rep.lower, rep.upper = lower, upper
    rep.checks.append(_sandwich_check(lower, upper, cfg.threads))
    e = Fraction(6) + cfg.eps

    def slow_cap(n: int, gb: int, wm: int) -> tuple:
        up = gb * gb * wm + gb
        if cfg.mode == "B1":
            return up, up ** e.denominator <= n ** e.numerator
        return up, up <= omega(n)

    for sc in stage_checks:
        gb = _base_at(cfg, rep.g_B, omega, sc.m)
        w_m = sc.w_m if cfg.w_override is None else w[min(sc.m, N)]
        up, ok = slow_cap(sc.m, gb, w_m)
        w_n = sc.w_n if cfg.w_override is None else (w[sc.n] if sc.n <= N else 0)
        rep.stages.append({"stage": sc.stage, "n": sc.n, "m": sc.m, "w_n": w_n,
                           "f2_n": sc.f2_n, "w_m": w_m, "f1_m": sc.f1_m, "upper_m": up,
                           "slow_hit": ok, "fast_hit": w_n >= sc.f2_n})
    cap = f"n^{float(e):g}" if cfg.mode == "B1" else "omega(n)"
    rep.checks.append(PipelineCheck(f"upper(m_i) <= {cap}", all(s["slow_hit"] for s in rep.stages),
                                    len(rep.stages),
                                    next(({"m": s["m"]} for s in rep.stages if not s["slow_hit"]), None)))
    rep.checks.append(PipelineCheck("w(n_i) >= f(n_i), so g(2 n_i) >= f(n_i)",
                                    all(s["fast_hit"] for s in rep.stages), len(rep.stages),
                                    next(({"n": s["n"]} for s in rep.stages if not s["fast_hit"]), None)))
    # finite-range report: slow side on the upper envelope, fast side on
    # n -> lower(2n) = w(n), both over 1..N/2
    half = N // 2
    if cfg.mode == "B1":
        bound_slow = [int(gmpy2.iroot(gmpy2.mpz(n) ** e.numerator, e.denominator)[0])
                      for n in range(half + 1)]
    else:
        bound_slow = [omega(n) for n in range(half + 1)]
    bound_fast = [int(_lookup_table(f2, n)) for n in range(half + 1)]
    rep.oscillation = oscillation_report(list(upper.values[:half + 1]), bound_slow, bound_fast,
                                         g_fast=[lower[2 * n] for n in range(half + 1)])


def _base_at(cfg: PipelineConfig, table: GrowthProfile, omega: Callable[[int], int],
             n: int) -> int:
    """g_B(n), past the tabulated range only when g_B has a closed form."""
    if n < len(table):
        return table[n]
    if callable(cfg.g_B):
        return int(cfg.g_B(n))
    if cfg.g_B is None:
        return (n + 1) ** 3 if cfg.mode in ("A1", "B1") else cube_root_floor(omega(n))
    raise AnalysisError("invalid-argument", f"g_B table ends before n = {n}", "config")


def _lookup_table(t: Table, n: int) -> int:
    return t(n) if callable(t) else t[n]


def theorem_ab_pipeline(cfg: PipelineConfig) -> PipelineReport:
    """Compose w_gamma bounds with the wreath-product growth bounds.

    lower(n) = w(n/2) <= g_C(n) <= g_B(n)^2 w(n) + g_B(n) = upper(n); the
    base algebra is only ever a growth stand-in, labelled "assumed".
    """
    cfg.validate()
    omega = cfg.omega or default_omega
    N = cfg.n_max
    if cfg.g_B is None:
        g_B = _default_g_B(cfg, omega)
    else:
        g_B = GrowthProfile(tuple(_values(cfg.g_B, N)), "assumed", "supplied base growth")
        if len(g_B) < N + 1:
            raise AnalysisError("invalid-argument", "g_B must cover 0..n_max", "config")
    empty = GrowthProfile((), "exact")
    rep = PipelineReport(cfg.mode, N, g_B, empty, empty, empty, [])
    if cfg.mode in ("A1", "A2"):
        _a_modes(cfg, rep, omega)
    else:
        _b_modes(cfg, rep, omega)
    return rep
