"""Words over integer alphabets: factor counting and recurrence witnesses."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from . import kernels


class InvalidArgument(ValueError):
    """Raised when an operation's precondition is violated."""


@dataclass(frozen=True)
class Letter:
    index: int
    level: Optional[int] = None

    def __post_init__(self) -> None:
        if self.index < 0:
            raise InvalidArgument("letter index must be non-negative")
        if self.level is not None and self.level < 1:
            raise InvalidArgument("letter level must be >= 1")


@dataclass(frozen=True)
class WordPrefix:
    """A finite word; levels, when present, run parallel to the letters."""

    letters: tuple
    levels: Optional[tuple] = None
    source_id: str = "literal"

    def __post_init__(self) -> None:
        if self.levels is not None:
            if len(self.levels) != len(self.letters):
                raise InvalidArgument("levels must match letters in length")
            if any(lv < 1 for lv in self.levels):
                raise InvalidArgument("levels must be >= 1")
        if any(c < 0 for c in self.letters):
            raise InvalidArgument("letters must be non-negative")

    def __len__(self) -> int:
        return len(self.letters)

    def __getitem__(self, i: int) -> Letter:
        return Letter(self.letters[i], None if self.levels is None else self.levels[i])

    def erase(self) -> "WordPrefix":
        """Drop the levels (the letter-erasure map)."""
        return WordPrefix(self.letters, None, self.source_id)

    def to_line(self) -> str:
        if self.levels is None:
            return " ".join(str(c) for c in self.letters)
        return " ".join(f"{lv}:{c}" for c, lv in zip(self.letters, self.levels))

    @classmethod
    def from_line(cls, line: str, source_id: str = "literal") -> "WordPrefix":
        toks = line.split()
        if not toks:
            return cls((), None, source_id)
        if all(":" in t for t in toks):
            pairs = [t.split(":") for t in toks]
            return cls(tuple(int(c) for _, c in pairs), tuple(int(lv) for lv, _ in pairs), source_id)
        if any(":" in t for t in toks):
            raise InvalidArgument("mixed leveled and bare tokens")
        return cls(tuple(int(t) for t in toks), None, source_id)

    @classmethod
    def of(cls, letters: Iterable[int], levels: Optional[Iterable[int]] = None,
           source_id: str = "literal") -> "WordPrefix":
        return cls(tuple(int(c) for c in letters),
                   None if levels is None else tuple(int(v) for v in levels), source_id)


@dataclass
class WordStream:
    """Prefixes of an infinite word, produced on demand.

    ``fn(length)`` returns a pair (letters, levels-or-None) of int arrays.
    """

    fn: Callable[[int], tuple]
    source_id: str
    alphabet_size: int
    has_levels: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    def arrays(self, length: int) -> tuple:
        if length < 0:
            raise InvalidArgument("length must be non-negative")
        best = next((k for k in sorted(self._cache) if k >= length), None)
        if best is None:
            letters, levels = self.fn(length)
            letters = np.asarray(letters, dtype=np.int32)
            levels = None if levels is None else np.asarray(levels, dtype=np.int32)
            if len(letters) < length:
                raise InvalidArgument(f"stream {self.source_id} produced too few letters")
            self._cache = {length: (letters, levels)}
            best = length
        letters, levels = self._cache[best]
        return letters[:length], (None if levels is None else levels[:length])

    def prefix(self, length: int) -> WordPrefix:
        letters, levels = self.arrays(length)
        return WordPrefix(tuple(int(c) for c in letters),
                          None if levels is None else tuple(int(v) for v in levels),
                          self.source_id)


def constant_stream(letter: int = 0) -> WordStream:
    return WordStream(lambda n: (np.full(n, letter, dtype=np.int32), None),
                      f"constant({letter})", letter + 1)


def periodic_stream(period: Sequence[int]) -> WordStream:
    per = np.asarray(period, dtype=np.int32)
    if per.size == 0:
        raise InvalidArgument("period must be non-empty")

    def fn(n: int) -> tuple:
        return np.resize(per, n), None

    return WordStream(fn, "periodic(" + ",".join(map(str, period)) + ")", int(per.max()) + 1)


def thue_morse_stream() -> WordStream:
    def fn(n: int) -> tuple:
        idx = np.arange(n, dtype=np.int64)
        bits = np.zeros(n, dtype=np.int32)
        while idx.any():
            bits ^= (idx & 1).astype(np.int32)
            idx >>= 1
        return bits, None

    return WordStream(fn, "thue-morse", 2)


def word_stream(head: Sequence[int], tail: Sequence[int]) -> WordStream:
    """The word head·tail^∞ (tail non-empty)."""
    h = np.asarray(head, dtype=np.int32)
    t = np.asarray(tail, dtype=np.int32)
    if t.size == 0:
        raise InvalidArgument("tail must be non-empty")

    def fn(n: int) -> tuple:
        if n <= h.size:
            return h[:n], None
        return np.concatenate([h, np.resize(t, n - h.size)]), None

    alpha = int(max(h.max(initial=0), t.max())) + 1
    return WordStream(fn, "eventually-periodic", alpha)


def _as_array(prefix) -> np.ndarray:
    if isinstance(prefix, WordPrefix):
        return np.asarray(prefix.letters, dtype=np.int32)
    return np.asarray(prefix, dtype=np.int32)


def distinct_factors(prefix, n: int) -> int:
    """Number of distinct length-n blocks of a finite word."""
    arr = _as_array(prefix)
    if n <= 0 or n > arr.size:
        raise InvalidArgument(f"need 1 <= n <= {arr.size}, got {n}")
    count, _ = kernels.count_windows(arr, [0, arr.size], n)
    return count


@dataclass(frozen=True)
class ComplexityProfile:
    values: tuple            # p(1..n_max)
    horizon: int             # last certified n
    prefix_len: int

    def p(self, n: int) -> int:
        """p(n) with the empty-word convention p(0) = 1."""
        return 1 if n == 0 else self.values[n - 1]

    def cumulative(self) -> list:
        """g(0..n_max) = sum_{k<=n} p(k)."""
        out, acc = [1], 1
        for v in self.values:
            acc += v
            out.append(acc)
        return out

    def to_csv(self) -> str:
        rows = ["n,p,certified"]
        rows += [f"{n},{v},{int(n <= self.horizon)}" for n, v in enumerate(self.values, 1)]
        return "\n".join(rows) + "\n"


def complexity_profile(stream: WordStream, n_max: int, prefix_len: int) -> ComplexityProfile:
    """Per-length factor counts of a finite prefix, with a certified horizon."""
    if n_max <= 0:
        raise InvalidArgument("n_max must be positive")
    if prefix_len < 2 * n_max:
        raise InvalidArgument("prefix_len must be at least 2*n_max")
    letters, _ = stream.arrays(prefix_len)
    values, horizon, broken = [], 0, False
    for n in range(1, n_max + 1):
        count, cert = kernels.count_windows(letters, [0, prefix_len], n)
        values.append(count)
        if cert and not broken:
            horizon = n
        else:
            broken = True
    return ComplexityProfile(tuple(values), horizon, prefix_len)


def occurrences(letters: np.ndarray, factor: np.ndarray) -> np.ndarray:
    """Start positions of factor inside letters."""
    k = factor.size
    if k == 0 or k > letters.size:
        return np.zeros(0, dtype=np.int64)
    win = np.lib.stride_tricks.sliding_window_view(letters, k)
    return np.flatnonzero((win == factor).all(axis=1))


def recurrence_gap(stream: WordStream, factor, horizon: int) -> Optional[int]:
    """Largest gap between consecutive occurrences, or None ("not found")."""
    fac = _as_array(factor)
    if fac.size < 1:
        raise InvalidArgument("factor must be non-empty")
    letters, _ = stream.arrays(horizon)
    occ = occurrences(letters, fac)
    if occ.size < 2:
        return None
    return int(np.diff(occ).max())


def uniform_recurrence_witness(stream: WordStream, ell: int, horizon: int) -> Optional[int]:
    """Smallest C such that each length-C window holds every seen length-ell factor.

    Returns None ("fail") when no C <= horizon/2 works.
    """
    if ell < 1 or horizon < 4 * ell:
        raise InvalidArgument("need ell >= 1 and horizon >= 4*ell")
    letters, _ = stream.arrays(horizon)
    L = horizon
    first: dict = {}
    last: dict = {}
    gap: dict = {}
    win = np.lib.stride_tricks.sliding_window_view(letters, ell)
    keys = [bytes(row.tobytes()) for row in win]
    for p, key in enumerate(keys):
        if key in last:
            g = p - last[key]
            if g > gap.get(key, 0):
                gap[key] = g
        else:
            first[key] = p
        last[key] = p
    need = 0
    for key in first:
        c = max(first[key] + ell, gap.get(key, 0) + ell - 1, L - last[key])
        need = max(need, c)
    return need if need <= horizon // 2 else None
