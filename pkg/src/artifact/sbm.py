"""Prescribed-growth words W(2^{n+1}) = W(2^n)C(2^n), levels, and w_gamma.

W(2^j) is the product X x C(1) x ... x C(2^{j-1}) read left to right, so
with every C(2^i) chosen as a lexicographic initial segment, the rank of a
word in W(2^j) is a mixed-radix number with radices (|X|, K_0, ..., K_{j-1}),
K_i = |C(2^i)|, and C(2^j) is exactly the ranks [0, K_j).  Everything below
works on ranks and materializes letters only when needed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .words import ComplexityProfile, WordPrefix, WordStream

DEFAULT_LIMIT = 4_000_000


class SBMError(ValueError):
    def __init__(self, code: str, message: str) -> None:
        super().__init__(f"{code}: {message}")
        self.code = code


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def ceil_log2(n: int) -> int:
    return (n - 1).bit_length() if n > 1 else 0


@dataclass(frozen=True)
class GrowthTarget:
    """f at 2^0..2^D; past the table the ratio rule ``beyond`` applies.

    beyond: "hold" (f constant), "ratio" (repeat the last ratio), or
    "square" (f(2^{k+1}) = f(2^k)^2).
    """

    values_at_pow2: tuple
    beyond: str = "hold"

    def __post_init__(self) -> None:
        v = self.values_at_pow2
        if not v or any(int(x) < 1 for x in v):
            raise SBMError("invalid-argument", "f values must be positive")
        if self.beyond not in ("hold", "ratio", "square"):
            raise SBMError("invalid-argument", f"unknown extension {self.beyond!r}")
        if any(b < a for a, b in zip(v, v[1:])):
            raise SBMError("invalid-argument", "f must be non-decreasing")
        if any(b > a * a for a, b in zip(v, v[1:])):
            raise SBMError("invalid-argument", "need f(2^{n+1}) <= f(2^n)^2")

    @property
    def depth(self) -> int:
        return len(self.values_at_pow2) - 1

    def at_pow2(self, k: int) -> int:
        v = self.values_at_pow2
        if k <= self.depth:
            return int(v[k])
        last = int(v[-1])
        extra = k - self.depth
        if self.beyond == "hold":
            return last
        if self.beyond == "square":
            return last ** (2 ** extra)
        if len(v) < 2:
            return last
        num, den = int(v[-1]), int(v[-2])
        if num % den:
            raise SBMError("invalid-argument", "ratio extension needs f(2^D) divisible by f(2^{D-1})")
        return last * (num // den) ** extra

    def at(self, n: int) -> int:
        """Step extension f(n) = f(2^ceil(log2 n)) for n >= 1."""
        if n < 1:
            raise SBMError("invalid-argument", "f is defined for n >= 1")
        return self.at_pow2(ceil_log2(n))

    def strictly_increasing(self) -> bool:
        v = self.values_at_pow2
        return all(a < b for a, b in zip(v, v[1:]))

    @classmethod
    def from_function(cls, fn, depth: int, beyond: str = "hold") -> "GrowthTarget":
        return cls(tuple(int(fn(2 ** k)) for k in range(depth + 1)), beyond)


@dataclass
class SBSets:
    target: GrowthTarget
    depth: int
    alphabet: int
    rho: bool = False
    _cache: dict = field(default_factory=dict, repr=False)
    _rho_rank: dict = field(default_factory=dict, repr=False)

    # ----- sizes ---------------------------------------------------------
    def K(self, j: int) -> int:
        """|C(2^j)| = ceil(f(2^{j+1}) / f(2^j))."""
        return ceil_div(self.target.at_pow2(j + 1), self.target.at_pow2(j))

    def size_W(self, j: int) -> int:
        size = self.alphabet
        for i in range(j):
            size *= self.K(i)
        return size

    @property
    def divisible_flag(self) -> bool:
        f = self.target
        return all(f.at_pow2(k + 1) % f.at_pow2(k) == 0 for k in range(self.depth + 2))

    def sizes(self) -> list:
        """(|W(2^j)|, |C(2^j)|) for j = 0..depth."""
        return [(self.size_W(j), self.K(j)) for j in range(self.depth + 1)]

    # ----- letters -------------------------------------------------------
    def word(self, j: int, r: int) -> np.ndarray:
        """Letters of the rank-r word of W(2^j)."""
        if not 0 <= r < self.size_W(j):
            raise SBMError("invalid-argument", f"rank {r} outside W(2^{j})")
        if j == 0:
            return np.array([r], dtype=np.int32)
        k = self.K(j - 1)
        return np.concatenate([self.word(j - 1, r // k), self.word(j - 1, self.c_rank(j - 1, r % k))])

    def c_rank(self, j: int, s: int) -> int:
        """W(2^j)-rank of the s-th element of C(2^j)."""
        if self.rho and s == self.K(j) - 1 and (1 << j) >= self.alphabet:
            r = self.rho_rank(j)
            return max(r, s)
        return s

    def rho_rank(self, j: int, max_scan: int = 1 << 16) -> int:
        """Rank of the least word of W(2^j) that uses every letter."""
        if j not in self._rho_rank:
            full = set(range(self.alphabet))
            for r in range(min(self.size_W(j), max_scan)):
                if set(self.word(j, r).tolist()) >= full:
                    self._rho_rank[j] = r
                    break
            else:
                raise SBMError("construction-impossible", f"no word of W(2^{j}) meets every letter")
        return self._rho_rank[j]

    def W(self, j: int, limit: int = DEFAULT_LIMIT) -> np.ndarray:
        """All of W(2^j) as a (|W|, 2^j) array in rank order."""
        if j in self._cache:
            return self._cache[j]
        if self.size_W(j) * (1 << j) > limit:
            raise SBMError("too-large", f"W(2^{j}) has {self.size_W(j)} words")
        if j == 0:
            out = np.arange(self.alphabet, dtype=np.int32).reshape(-1, 1)
        else:
            prev = self.W(j - 1, limit)
            k = self.K(j - 1)
            left = np.repeat(prev, k, axis=0)
            rows = [self.c_rank(j - 1, t) for t in range(k)]
            right = np.tile(prev[rows], (prev.shape[0], 1))
            out = np.concatenate([left, right], axis=1)
        self._cache[j] = out
        return out

    def C(self, j: int, limit: int = DEFAULT_LIMIT) -> np.ndarray:
        return self.W(j, limit)[[self.c_rank(j, t) for t in range(self.K(j))]]

    def check_sizes(self) -> list:
        """Levels j where f(2^j) <= |W(2^j)| <= 2^j f(2^j) fails."""
        f = self.target
        return [j for j in range(self.depth + 1)
                if not f.at_pow2(j) <= self.size_W(j) <= (1 << j) * f.at_pow2(j)]

    # ----- block pairs ----------------------------------------------------
    def pair_rectangles(self, q: int, extra: int = 3, max_steps: int = 256) -> list:
        """Anchored rectangles [0,a) x [0,b) of W(2^q) ranks covering every
        pair of consecutive aligned 2^q-blocks of words of S."""
        rects = [(self.size_W(q), self.K(q))]
        a_run = None
        R = 1
        quiet = 0
        j = q + 1
        start = max(q, self.target.depth) + extra
        while True:
            kprev = self.K(j - 1)
            a_run = kprev if a_run is None else min(a_run, kprev)
            R *= kprev
            b = min(self.size_W(q), ceil_div(self.K(j), R))
            a = min(a_run, self.size_W(q))
            contained = any(a <= a2 and b <= b2 for a2, b2 in rects)
            if not contained:
                rects.append((a, b))
                quiet = 0
            else:
                quiet += 1
            if j >= start and quiet >= extra:
                break
            j += 1
            if j > start + max_steps:
                raise SBMError("no-stabilization", "block-pair rectangles did not settle")
        return rects


def build_sb_sets(f: GrowthTarget, depth: int, rho: bool = False) -> SBSets:
    """Validate and size the W/C system through W(2^depth).

    C(2^j) is the lexicographically least |C(2^j)| words of W(2^j); with
    ``rho`` its last member is swapped for the least word meeting every
    letter when that word is not already present.
    """
    if depth < 0:
        raise SBMError("invalid-argument", "depth must be >= 0")
    sets = SBSets(f, depth, f.at_pow2(0), rho)
    for j in range(depth):
        if sets.K(j) > sets.size_W(j):
            raise SBMError("construction-impossible",
                           f"|C(2^{j})| = {sets.K(j)} exceeds |W(2^{j})| = {sets.size_W(j)}")
    return sets


# --------------------------------------------------------- single words

def generate_S_prefix(sets: SBSets, length: int) -> WordPrefix:
    """Prefix of the word with the first element chosen from W(1) and every C."""
    if length < 1:
        raise SBMError("invalid-argument", "length must be positive")
    j = ceil_log2(length)
    if j > sets.depth + 1:
        raise SBMError("insufficient-depth", f"need depth >= {j - 1}")
    word = sets.word(j, 0)[:length]
    return WordPrefix(tuple(int(c) for c in word), None, "S-first")


def s_stream(sets: SBSets) -> WordStream:
    def fn(n: int) -> tuple:
        return np.asarray(generate_S_prefix(sets, n).letters, dtype=np.int32), None

    return WordStream(fn, "S-first", sets.alphabet)


@dataclass(frozen=True)
class LevelSchedule:
    delta: tuple          # delta(1), delta(2), ...
    n: tuple              # n_1, n_2, ..., n_kmax

    def level_of_block(self, j: int) -> int:
        """Level of the block at positions [2^j, 2^{j+1}) (j = 0 is W(1)C(1))."""
        if j <= self.n[0]:
            return 1
        for i in range(1, len(self.n)):
            if j <= self.n[i]:
                return i + 1
        raise SBMError("insufficient-depth", f"schedule covers blocks up to 2^{self.n[-1]}")

    def levels(self, length: int) -> np.ndarray:
        out = np.ones(length, dtype=np.int32)
        j = 1
        while (1 << j) < length:
            out[1 << j: min(length, 1 << (j + 1))] = self.level_of_block(j)
            j += 1
        return out

    def check(self) -> list:
        """r values where min{k : r <= n_k - log2 k} > delta(r)."""
        bad = []
        for r, d in enumerate(self.delta, 1):
            ks = [k for k, nk in enumerate(self.n, 1) if r <= nk - math.log2(k)]
            if ks and ks[0] > d:
                bad.append(r)
        return bad


def build_level_schedule(delta: Sequence[int], k_max: int) -> LevelSchedule:
    """n_k = 2 max{i : delta(i) <= k}; delta[0] is delta(1)."""
    d = [int(x) for x in delta]
    if k_max < 1 or not d:
        raise SBMError("invalid-argument", "need k_max >= 1 and a non-empty table")
    if any(b < a for a, b in zip(d, d[1:])):
        raise SBMError("invalid-argument", "delta must be non-decreasing")
    if any(x > i for i, x in enumerate(d, 1)) or d[0] < 1:
        raise SBMError("invalid-argument", "need 1 <= delta(i) <= i")
    if d[-1] <= k_max:
        raise SBMError("invalid-argument", f"table must reach a value above k_max = {k_max}")
    ns = []
    for k in range(1, k_max + 1):
        best = max((i for i, x in enumerate(d, 1) if x <= k), default=0)
        ns.append(2 * best)
    if ns[0] < 1:
        raise SBMError("invalid-argument", "delta(1) must be 1")
    sched = LevelSchedule(tuple(d), tuple(ns))
    if sched.check():
        raise SBMError("invalid-argument", "schedule invariant fails")
    return sched


def generate_T_prefix(sets: SBSets, schedule: LevelSchedule, length: int) -> WordPrefix:
    s = generate_S_prefix(sets, length)
    lv = schedule.levels(length)
    return WordPrefix(s.letters, tuple(int(x) for x in lv), "T-first")


def t_stream(sets: SBSets, schedule: LevelSchedule) -> WordStream:
    def fn(n: int) -> tuple:
        p = generate_T_prefix(sets, schedule, n)
        return np.asarray(p.letters, dtype=np.int32), np.asarray(p.levels, dtype=np.int32)

    return WordStream(fn, "T-first", sets.alphabet, has_levels=True)


# ------------------------------------------------------ language counts

def _encode(rows: np.ndarray, base: int) -> np.ndarray:
    out = np.zeros(rows.shape[0], dtype=np.int64)
    for c in range(rows.shape[1]):
        out = out * base + rows[:, c]
    return out


def _staircase_size(rects: list) -> int:
    """Number of points in a union of anchored rectangles."""
    total, prev_a = 0, 0
    for a, b in sorted(rects, key=lambda r: -r[1]):
        if a > prev_a:
            total += (a - prev_a) * b
            prev_a = a
    return total


def _count_segments(sets: SBSets, q: int, lengths: list, limit: int) -> Optional[dict]:
    rects = sets.pair_rectangles(q)
    B = 1 << q
    if _staircase_size(rects) * 2 * B > limit:
        return None
    amax = max(a for a, _ in rects)
    pairs = [(u, max(b for a, b in rects if a > u)) for u in range(amax)]
    need = max(amax, max(b for _, b in rects))
    try:
        W = sets.W(q, limit)
    except SBMError:
        W = np.stack([sets.word(q, r) for r in range(need)])
    segs = [np.concatenate([W[u], W[v]]) for u, bm in pairs for v in range(bm)]
    seq = np.concatenate(segs)
    bounds = np.arange(0, len(seq) + 1, 2 * B, dtype=np.int64)
    return {ell: kernels.count_windows(seq, bounds, ell)[0] for ell in lengths}


def _count_products(sets: SBSets, q: int, lengths: list, limit: int) -> Optional[dict]:
    A = sets.alphabet
    if max(lengths) * math.log2(max(A, 2)) > 62:
        return None
    try:
        W = sets.W(q, limit)
    except SBMError:
        return None
    rects = sets.pair_rectangles(q)
    B = 1 << q
    out = {}
    for ell in lengths:
        pieces = []
        if ell <= B:
            win = np.lib.stride_tricks.sliding_window_view(W, ell, axis=1)
            pieces.append(np.unique(_encode(win.reshape(-1, ell), A)))
        for a, b in rects:
            for x in range(1, ell):
                if x > B or ell - x > B:
                    continue
                suf = np.unique(_encode(W[:a, B - x:], A))
                pre = np.unique(_encode(W[:b, : ell - x], A))
                if suf.size * pre.size > limit:
                    return None
                pieces.append((suf[:, None] * (A ** (ell - x)) + pre[None, :]).reshape(-1))
        out[ell] = int(np.unique(np.concatenate(pieces)).size)
    return out


def language_complexity(sets: SBSets, ell_max: int, limit: int = DEFAULT_LIMIT) -> ComplexityProfile:
    """Exact p(l) for factors of the whole set S, l = 1..ell_max.

    The horizon is the largest l reached before the enumeration would exceed
    ``limit``; values past it are omitted.
    """
    if sets.rho:
        return _materialized_complexity(sets, ell_max, limit)
    values: list = []
    ell = 1
    while ell <= ell_max:
        q = ceil_log2(ell)
        hi = min(ell_max, 1 << q)
        lengths = list(range(ell, hi + 1))
        got = _count_segments(sets, q, lengths, limit)
        if got is None:
            got = _count_products(sets, q, lengths, limit)
        if got is None:
            break
        values += [got[x] for x in lengths]
        ell = hi + 1
    return ComplexityProfile(tuple(values), len(values), -1)


def _materialized_complexity(sets: SBSets, ell_max: int, limit: int) -> ComplexityProfile:
    """Factor counts over the largest materializable W(2^M): lower bounds only."""
    M = 0
    while sets.size_W(M + 1) * (1 << (M + 1)) <= limit and M + 1 <= sets.depth:
        M += 1
    W = sets.W(M, limit)
    seq = W.reshape(-1)
    bounds = np.arange(0, seq.size + 1, 1 << M, dtype=np.int64)
    values = tuple(kernels.count_windows(seq, bounds, ell)[0]
                   for ell in range(1, min(ell_max, max(1, 1 << (M - 1))) + 1))
    return ComplexityProfile(values, 0, -1)


def cumulative_h(sets: SBSets, profile: ComplexityProfile, n_max: int) -> tuple:
    """(upper, lower, exact) versions of h(0..n_max).

    Inside the horizon both are the exact sums.  Past it the upper side uses
    p(a + b) <= p(a) p(b), alphabet^l, and (without rho) the count of start
    positions in the first block of an aligned pair of 2^q-blocks, 2^q <= l;
    the lower side uses that p is non-decreasing and p(l) >= |W(2^floor(log2 l))|.
    """
    H = len(profile.values)
    hi = [1] + list(profile.values)
    lo = list(hi)
    pairs: dict = {}
    for ell in range(H + 1, n_max + 1):
        best = sets.alphabet ** ell
        if not sets.rho:
            q = ceil_log2(ell)
            if q not in pairs:
                pairs[q] = _staircase_size(sets.pair_rectangles(q))
            best = min(best, pairs[q] << q)
        for a in range(1, H + 1):
            best = min(best, hi[a] * hi[ell - a])
        hi.append(best)
        lo.append(max(lo[-1], sets.size_W(ell.bit_length() - 1)))
    up, down, acc_u, acc_d = [], [], 0, 0
    for u, d in zip(hi[: n_max + 1], lo[: n_max + 1]):
        acc_u += u
        acc_d += d
        up.append(acc_u)
        down.append(acc_d)
    exact = [n <= H for n in range(n_max + 1)]
    return up, down, exact


@dataclass
class SandwichRow:
    n: int
    f_n: int
    h_n: int                           # exact, or an upper bound when not exact_n
    h_2n_lower: int                    # exact, or a lower bound when not exact_2n
    exact_n: bool
    exact_2n: bool
    lower_ok: bool                     # f(n) <= h(2n)
    cubic_ok: bool                     # h(n) <= 64 n^3 f(4n)
    square_ok: Optional[bool]          # h(n) <= 16 n^2 f(4n), divisible case only


@dataclass
class SandwichReport:
    rows: list
    divisible: bool
    complete: bool

    @property
    def ok(self) -> bool:
        return all(r.lower_ok and r.cubic_ok and r.square_ok is not False for r in self.rows)


def verify_sbm_sandwich(sets: SBSets, n_max: int, limit: int = DEFAULT_LIMIT) -> SandwichReport:
    """Check the sandwich f(n) <= h(2n), h(n) <= 64 n^3 f(4n) (and the
    16 n^2 f(4n) form when every ratio divides) with exact h where feasible."""
    prof = language_complexity(sets, 2 * n_max, limit)
    h, h_lo, exact = cumulative_h(sets, prof, 2 * n_max)
    f = sets.target
    div = sets.divisible_flag
    rows = []
    for n in range(1, n_max + 1):
        f4 = f.at(4 * n)
        rows.append(SandwichRow(
            n, f.at(n), h[n], h_lo[2 * n], exact[n], exact[2 * n],
            f.at(n) <= h_lo[2 * n],
            h[n] <= 64 * n ** 3 * f4,
            (h[n] <= 16 * n ** 2 * f4) if div else None,
        ))
    return SandwichReport(rows, div, all(exact))


# ------------------------------------------------------------- w_gamma

def _leveled_count(letters: np.ndarray, levels: np.ndarray, bounds: np.ndarray, n: int) -> tuple:
    """Distinct leveled windows with level-sum <= n; (count, certified)."""
    if n <= 0:
        return 0, True
    base = int(letters.max(initial=0)) + 1
    code = levels.astype(np.int64) * base + letters
    if code.max(initial=0) >= 2 ** 31:
        raise SBMError("invalid-argument", "letter/level codes too large")
    total, cert = 0, True
    for ell in range(1, n + 1):
        c, ok = kernels.count_windows(code.astype(np.int32), bounds, ell, levels, n)
        if c == 0:
            break
        total += c
        cert = cert and ok
    return total, cert


@dataclass
class WGamma:
    n: int
    value: int
    lower_bound_only: bool


def w_gamma_leveled(stream: WordStream, n: int, prefix_len: int) -> WGamma:
    """Distinct factors u of the leveled prefix with level-sum(u) <= n."""
    if prefix_len < 4 * n:
        raise SBMError("invalid-argument", "prefix_len must be at least 4n")
    if not stream.has_levels:
        raise SBMError("invalid-argument", "stream carries no levels")
    letters, levels = stream.arrays(prefix_len)
    value, cert = _leveled_count(letters, levels, np.array([0, prefix_len]), n)
    return WGamma(n, value, not cert)


def w_gamma_language(sets: SBSets, schedule: LevelSchedule, n: int, M: int,
                     limit: int = DEFAULT_LIMIT) -> WGamma:
    """Leveled factors of every T-word that fit inside the first 2^M letters.

    All T-words agree with the leveled W(2^M) there, so this is a lower
    bound on w_gamma(n); it is exact only when no longer-range factor of
    level-sum <= n exists, which is not certified here.
    """
    W = sets.W(M, limit)
    lv = schedule.levels(1 << M)
    letters = W.reshape(-1)
    levels = np.tile(lv, W.shape[0])
    bounds = np.arange(0, letters.size + 1, 1 << M, dtype=np.int64)
    value, _ = _leveled_count(letters, levels, bounds, n)
    return WGamma(n, value, True)


def w_upper_from_h(h: Sequence[int], n: int) -> int:
    """The counting bound w_gamma(n) <= h(n) n^2."""
    return h[n] * n * n


def w_gamma_profile(sets: SBSets, schedule: LevelSchedule, n_max: int, M: int,
                    limit: int = DEFAULT_LIMIT) -> list:
    """w(0..n_max) over the leveled words of W(2^M), all budgets at once.

    Windows are identified exactly by rank refinement: the class of a
    length-(l+1) window is the pair (class of its length-l head, next code).
    A window's level-sum only grows with l, so positions over budget drop
    out for good.  Each entry equals ``w_gamma_language(..., n, M).value``.
    """
    if n_max < 0:
        raise SBMError("invalid-argument", "n_max must be non-negative")
    W = sets.W(M, limit)
    seg = 1 << M
    lv = np.asarray(schedule.levels(seg), dtype=np.int64)
    letters = W.reshape(-1).astype(np.int64)
    levels = np.tile(lv, W.shape[0])
    base = int(letters.max(initial=0)) + 1
    code = levels * base + letters
    cum = np.concatenate(([0], np.cumsum(levels)))
    end = (np.arange(letters.size, dtype=np.int64) // seg + 1) * seg
    hist = np.zeros(n_max + 1, dtype=np.int64)
    pos = np.flatnonzero(levels <= n_max)
    _, rank = np.unique(code[pos], return_inverse=True)
    ell, width = 1, int(code.max(initial=0)) + 1
    while pos.size:
        _, first = np.unique(rank, return_index=True)
        sums = cum[pos[first] + ell] - cum[pos[first]]
        hist += np.bincount(sums, minlength=n_max + 1)[:n_max + 1]
        keep = pos + ell < end[pos]
        pos, rank = pos[keep], rank[keep]
        keep = cum[pos + ell + 1] - cum[pos] <= n_max
        pos, rank = pos[keep], rank[keep]
        if not pos.size:
            break
        key = rank.astype(np.int64) * width + code[pos + ell]
        _, rank = np.unique(key, return_inverse=True)
        ell += 1
    return [int(x) for x in np.cumsum(hist)]
