"""Tabulated growth functions shared between modules."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

KINDS = ("exact", "upper", "lower", "bound", "estimate", "assumed", "lower-bound")


@dataclass(frozen=True)
class GrowthProfile:
    """g(0..N) with a label saying how trustworthy the numbers are."""

    values: tuple
    kind: str = "exact"
    label: str = ""

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, n: int) -> int:
        return self.values[n]

    @property
    def N(self) -> int:
        return len(self.values) - 1

    @classmethod
    def tabulate(cls, fn: Callable[[int], int], N: int, kind: str = "exact",
                 label: str = "", start: int = 0) -> "GrowthProfile":
        vals = [fn(n) for n in range(start, N + 1)]
        return cls(tuple([vals[0]] * start + vals), kind, label)

    def is_monotone(self) -> bool:
        return all(a <= b for a, b in zip(self.values, self.values[1:]))


def prefix_sums(xs: Iterable[int], start: int = 0) -> list:
    out, acc = [], start
    for x in xs:
        acc += x
        out.append(acc)
    return out




def as_table(fn_or_seq, N: int) -> list:
    """Accept a callable or a sequence; return values at 0..N."""
    if callable(fn_or_seq):
        return [fn_or_seq(n) for n in range(N + 1)]
    seq: Sequence = fn_or_seq
    if len(seq) < N + 1:
        raise ValueError(f"table has {len(seq)} entries, need {N + 1}")
    return list(seq[:N + 1])
