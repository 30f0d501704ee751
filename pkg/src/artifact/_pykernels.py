"""Pure-Python window counting, used when the compiled core is missing."""
from __future__ import annotations

from typing import Optional, Sequence


def count_windows(seq: Sequence[int], bounds: Sequence[int], n: int,
                  weights: Optional[Sequence[int]] = None,
                  budget: int = -1) -> tuple[int, bool]:
    """Same contract as the compiled version, keyed on exact slices."""
    seen: dict = {}
    small = max(seq, default=0) < 256
    for s in range(len(bounds) - 1):
        lo, hi = int(bounds[s]), int(bounds[s + 1])
        seglen = hi - lo
        if seglen < n:
            continue
        chunk = bytes(int(c) for c in seq[lo:hi]) if small else tuple(int(c) for c in seq[lo:hi])
        ws = 0
        if weights is not None:
            wl = [int(x) for x in weights[lo:hi]]
            ws = sum(wl[:n])
        for i in range(seglen - n + 1):
            if i:
                if weights is not None:
                    ws += wl[i + n - 1] - wl[i - 1]
            if weights is not None and ws > budget:
                continue
            key = chunk[i:i + n]
            ok = i <= seglen - 2 * n
            rec = seen.get(key)
            if rec is None:
                seen[key] = [1, ok]
            else:
                rec[0] += 1
                rec[1] = rec[1] or ok
    certified = all(c >= 2 or ok for c, ok in seen.values())
    return len(seen), certified
