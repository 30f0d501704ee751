"""Costed alphabets with block-nilpotency rules and oscillating schedules."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

Table = Union[Callable[[int], int], Sequence[int]]


class OscillatorError(ValueError):
    """Carries a short machine-readable code next to the message."""

    def __init__(self, code: str, message: str) -> None:
        super().__init__(f"{code}: {message}")
        self.code = code


@dataclass(frozen=True)
class ForbiddenBlockRules:
    """d_M stored as runs (lo, hi, value) covering 1..M_max contiguously."""

    runs: tuple

    def __post_init__(self) -> None:
        expect, prev = 1, 0
        for lo, hi, v in self.runs:
            if lo != expect or hi < lo:
                raise OscillatorError("invalid-argument", "runs must tile 1..M_max")
            if v < 2 or v < prev:
                raise OscillatorError("invalid-argument", "d must be >= 2 and non-decreasing")
            expect, prev = hi + 1, v

    @classmethod
    def from_list(cls, d: Sequence[int]) -> "ForbiddenBlockRules":
        runs: list = []
        for M, v in enumerate(d, 1):
            if runs and runs[-1][2] == v:
                runs[-1] = (runs[-1][0], M, v)
            else:
                runs.append((M, M, v))
        return cls(tuple(runs))

    @property
    def M_max(self) -> int:
        return self.runs[-1][1] if self.runs else 0

    def d(self, M: int) -> int:
        for lo, hi, v in self.runs:
            if lo <= M <= hi:
                return v
        raise OscillatorError("invalid-argument", f"rules tabulated to {self.M_max}, need {M}")

    def extend(self, hi: int, value: int) -> "ForbiddenBlockRules":
        if hi <= self.M_max:
            return self
        return ForbiddenBlockRules(self.runs + ((self.M_max + 1, hi, value),))


@dataclass(frozen=True)
class CostedAlphabet:
    letters: tuple          # ((index, cost), ...)

    def __post_init__(self) -> None:
        idx = [i for i, _ in self.letters]
        if not idx:
            raise OscillatorError("invalid-argument", "alphabet must be non-empty")
        if any(b <= a for a, b in zip(idx, idx[1:])) or idx[0] < 1:
            raise OscillatorError("invalid-argument", "indices must be positive and increasing")
        if any(c < 1 for _, c in self.letters):
            raise OscillatorError("invalid-argument", "costs must be positive")

    def add(self, *letters: tuple) -> "CostedAlphabet":
        return CostedAlphabet(self.letters + tuple(letters))


class _Automaton:
    """Suffix-run state for the thresholds that can actually bind."""

    def __init__(self, alphabet: CostedAlphabet, rules: ForbiddenBlockRules, max_len: int):
        # a run longer than the longest word considered can never occur
        top = alphabet.letters[-1][0]
        if rules.M_max < top:
            raise OscillatorError("invalid-argument",
                                  f"rules tabulated to {rules.M_max} < letter index {top}")
        self.th = [(i, rules.d(i)) for i, _ in alphabet.letters if rules.d(i) <= max_len]
        self.start = (0,) * len(self.th)
        self._memo: dict = {}

    def step(self, state: tuple, index: int) -> Optional[tuple]:
        key = (state, index)
        if key in self._memo:
            return self._memo[key]
        out = []
        for (t, d), r in zip(self.th, state):
            r = r + 1 if index <= t else 0
            if r >= d:
                out = None
                break
            out.append(r)
        res = None if out is None else tuple(out)
        self._memo[key] = res
        return res


def max_cost(alphabet: CostedAlphabet, rules: ForbiddenBlockRules) -> int:
    """Cost of the most expensive surviving word is at most this."""
    top = alphabet.letters[-1][0]
    return (rules.d(top) - 1) * max(c for _, c in alphabet.letters)


def count_by_length(alphabet: CostedAlphabet, rules: ForbiddenBlockRules) -> list:
    """Surviving words of each length 0, 1, 2, ... until none survive."""
    top = alphabet.letters[-1][0]
    max_len = rules.d(top) - 1      # every letter has index <= top
    aut = _Automaton(alphabet, rules, max_len)
    layer = {aut.start: 1}
    out = [1]
    while layer and len(out) <= max_len:
        nxt: dict = {}
        for s, c in layer.items():
            for idx, _ in alphabet.letters:
                t = aut.step(s, idx)
                if t is not None:
                    nxt[t] = nxt.get(t, 0) + c
        layer = nxt
        if layer:
            out.append(sum(layer.values()))
    return out


def count_nonzero_monomials(alphabet: CostedAlphabet, rules: ForbiddenBlockRules,
                            budget: Optional[int]) -> int:
    """Non-empty surviving words of total cost <= budget (None: no limit)."""
    if budget is None:
        return sum(count_by_length(alphabet, rules)) - 1
    if budget < 0:
        raise OscillatorError("invalid-argument", "budget must be non-negative")
    if budget >= max_cost(alphabet, rules):
        return sum(count_by_length(alphabet, rules)) - 1
    return cumulative_counts(alphabet, rules, budget)[-1]


def cumulative_counts(alphabet: CostedAlphabet, rules: ForbiddenBlockRules, n_max: int) -> list:
    """w(0..n_max): non-empty surviving words of total cost <= n."""
    cmin = min(c for _, c in alphabet.letters)
    cmax = max(c for _, c in alphabet.letters)
    top = alphabet.letters[-1][0]
    max_len = min(n_max // cmin, rules.d(top) - 1)
    aut = _Automaton(alphabet, rules, max_len)
    # the length is only tracked when the overall cap can bind before the
    # budget does; dp[c] maps (state, length) -> count, last cmax costs kept
    track = max_len < n_max // cmin
    dp: dict = {0: {(aut.start, 0): 1}}
    out, acc = [0], 0
    for c in range(1, n_max + 1):
        cur: dict = {}
        for idx, cost in alphabet.letters:
            if cost > c:
                continue
            for (s, ln), v in dp.get(c - cost, {}).items():
                if ln >= max_len:
                    continue
                t = aut.step(s, idx)
                if t is not None:
                    key = (t, ln + 1 if track else 0)
                    cur[key] = cur.get(key, 0) + v
        dp[c] = cur
        dp.pop(c - cmax, None)
        acc += sum(cur.values())
        out.append(acc)
    return out


def brute_force_count(alphabet: CostedAlphabet, rules: ForbiddenBlockRules, budget: int) -> int:
    """Enumerate words directly; only for small budgets."""
    letters = alphabet.letters
    total = 0

    def ok(word: list) -> bool:
        for M in sorted({i for i, _ in word}):
            d = rules.d(M)
            run = 0
            for i, _ in word:
                run = run + 1 if i <= M else 0
                if run >= d:
                    return False
        return True

    def rec(word: list, spent: int) -> None:
        nonlocal total
        for lt in letters:
            if spent + lt[1] <= budget:
                w2 = word + [lt]
                if ok(w2):
                    total += 1
                    rec(w2, spent + lt[1])

    rec([], 0)
    return total


# ------------------------------------------------------------- schedules

def _lookup(fn: Table, x: int) -> int:
    if callable(fn):
        return fn(x)
    if x >= len(fn):
        raise OscillatorError("table-exhausted", f"table ends at {len(fn) - 1}, need {x}")
    return fn[x]


def _least_at_least(fn: Table, lo: int, K: int) -> int:
    """Least m > lo with fn(m) >= K for a non-decreasing fn (gallop, then bisect)."""
    limit = 1 << (8 * max(K, 2).bit_length() + 64) if callable(fn) else len(fn) - 1
    bad, hi = lo, lo + 1
    while True:
        if hi > limit:
            hi = limit
            if hi <= bad or _lookup(fn, hi) < K:
                raise OscillatorError("table-exhausted", f"f1 never reaches {K}")
            break
        if _lookup(fn, hi) >= K:
            break
        bad, hi = hi, lo + 2 * (hi - lo)
    while hi - bad > 1:
        mid = (bad + hi) // 2
        if _lookup(fn, mid) >= K:
            hi = mid
        else:
            bad = mid
    return hi


@dataclass
class Stage:
    n: int
    m: int
    K: int
    alphabet: CostedAlphabet


@dataclass
class OscSchedule:
    p: int
    stages: list = field(default_factory=list)
    rules: Optional[ForbiddenBlockRules] = None
    f1: Optional[Table] = field(default=None, repr=False)
    f2: Optional[Table] = field(default=None, repr=False)

    @property
    def pairs(self) -> list:
        return [(s.n, s.m) for s in self.stages]

    def check_invariants(self) -> list:
        """Names of violated schedule invariants (empty when valid)."""
        bad = []
        seq = [x for s in self.stages for x in (s.n, s.m)]
        if any(b <= a for a, b in zip(seq, seq[1:])):
            bad.append("n_1 < m_1 < n_2 < ...")
        if self.stages and self.stages[0].n != 2 * self.p:
            bad.append("n_1 = 2p")
        if self.f2 is not None and self.stages and _lookup(self.f2, 2 * self.p) > 2 ** self.p:
            bad.append("f2(2p) <= 2^p")
        r = self.rules
        if r is not None:
            for i, st in enumerate(self.stages):
                lo_n = 1 if i == 0 else self.stages[i - 1].m + 1
                want = self.p + 1 if i == 0 else st.n + 1
                if r.M_max >= st.n and any(r.d(M) != want for M in {lo_n, st.n}):
                    bad.append(f"d on stage {i + 1} block")
                if i > 0:
                    mp = self.stages[i - 1].m + 2
                    if st.n % mp:
                        bad.append(f"(m_{i}+2) | n_{i + 1}")
                    if self.f2 is not None and _lookup(self.f2, st.n) > 2 ** (st.n // mp):
                        bad.append(f"f2(n_{i + 1}) bound")
        return bad


def build_osc_schedule(f1: Table, f2: Table, stages: int, p_min: int = 1,
                       k_limit: int = 1 << 20,
                       f1_inverse: Optional[Callable[[int], int]] = None) -> OscSchedule:
    """Stage constants p, K_i, n_i, m_i and the d-runs they force.

    p is the least p >= p_min with f2(2p) <= 2^p.  ``f1_inverse(K)``, when
    given, must return the least m with f1(m) >= K; it replaces the search.
    """
    if stages < 0 or p_min < 1:
        raise OscillatorError("invalid-argument", "need stages >= 0 and p_min >= 1")
    p = p_min
    while _lookup(f2, 2 * p) > 2 ** p:
        p += 1
        if p > k_limit:
            raise OscillatorError("no-valid-n", "stage 1: f2(2p) > 2^p throughout")
    sched = OscSchedule(p=p, f1=f1, f2=f2)
    if stages == 0:
        return sched
    n = 2 * p
    alpha = CostedAlphabet(((1, 2), (2, 2)))
    rules = ForbiddenBlockRules(((1, n, p + 1),))
    for i in range(1, stages + 1):
        K = count_nonzero_monomials(alpha, rules, None)
        if f1_inverse is not None:
            m = max(n + 1, f1_inverse(K))
            if _lookup(f1, m) < K or (m > n + 1 and _lookup(f1, m - 1) >= K):
                raise OscillatorError("invalid-argument", "f1_inverse is not the least preimage")
        else:
            m = _least_at_least(f1, n, K)
        sched.stages.append(Stage(n, m, K, alpha))
        sched.rules = rules
        if i == stages:
            break
        mp = m + 2
        k = 1
        while _lookup(f2, k * mp) > 2 ** k:
            k += 1
            if k > k_limit:
                raise OscillatorError("no-valid-n", f"stage {i + 1}: no multiple of {mp} works")
        n_next = k * mp
        # d is held on (n_i, m_i], then jumps on (m_i, n_{i+1}]; only indices
        # up to the newest letter are ever consulted, so stop the table there
        rules = rules.extend(m, rules.d(n)).extend(n_next, n_next + 1)
        alpha = alpha.add((m + 1, mp), (m + 2, mp))
        n = n_next
    return sched


@dataclass
class StageCheck:
    stage: int
    n: int
    m: int
    w_n: int
    f2_n: int
    w_m: int
    f1_m: int

    @property
    def fast_ok(self) -> bool:
        return self.w_n >= self.f2_n

    @property
    def slow_ok(self) -> bool:
        return self.w_m <= self.f1_m


def verify_oscillation(sched: OscSchedule) -> list:
    """Exact w at n_i and m_i for every stage, against f2 and f1."""
    out = []
    for i, st in enumerate(sched.stages, 1):
        rules = sched.rules
        w_n = count_nonzero_monomials(st.alphabet, rules, st.n)
        w_m = count_nonzero_monomials(st.alphabet, rules, st.m)
        out.append(StageCheck(i, st.n, st.m, w_n, _lookup(sched.f2, st.n),
                              w_m, _lookup(sched.f1, st.m)))
    return out


def w_profile(sched: OscSchedule, n_max: int) -> list:
    """w(0..n_max) with every scheduled letter; a letter costing more than n
    cannot appear at budget n, so this agrees stage by stage."""
    if not sched.stages:
        return [0] * (n_max + 1)
    return cumulative_counts(sched.stages[-1].alphabet, sched.rules, n_max)
