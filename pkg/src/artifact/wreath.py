"""Matrix wreath products: growth envelopes and a truncated product model."""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .growth import GrowthProfile


class WreathError(ValueError):
    def __init__(self, code: str, message: str) -> None:
        super().__init__(f"{code}: {message}")
        self.code = code


class TruncationOverflow(Exception):
    """A product left the degree-capped part of the free algebra."""


# ------------------------------------------------------------ envelopes

def compose_growth_bounds(g_B: Sequence[int], w: Sequence[int]) -> tuple:
    """lower(n) = w(n // 2) and upper(n) = g_B(n)^2 w(n) + g_B(n)."""
    gb = list(g_B.values if isinstance(g_B, GrowthProfile) else g_B)
    ww = list(w.values if isinstance(w, GrowthProfile) else w)
    if len(gb) != len(ww):
        raise WreathError("invalid-argument", "g_B and w must share the index range")
    for name, t in (("g_B", gb), ("w", ww)):
        if any(a > b for a, b in zip(t, t[1:])):
            raise WreathError("invalid-argument", f"{name} must be non-decreasing")
    lower = tuple(ww[n // 2] for n in range(len(ww)))
    upper = tuple(gb[n] ** 2 * ww[n] + gb[n] for n in range(len(ww)))
    return GrowthProfile(lower, "lower", "w(n/2)"), GrowthProfile(upper, "upper", "gB^2 w + gB")


# ------------------------------------------------------- truncated model
#
# B0 has basis b_0 = 1, b_1, ..., b_r with integer structure constants.
# A0 is the free non-unital algebra on letters 0..k-1 cut at degree cap;
# its elements are dicts {monomial tuple: coefficient}.  A linear map
# B0 -> B0 (x) A0 is a tuple (one entry per input basis element) of dicts
# {(j, monomial): coefficient}.

@dataclass
class TruncatedModel:
    table: np.ndarray            # table[i, j, k]: coefficient of b_k in b_i b_j
    gamma: list                  # gamma[i]: A0 element, image of b_i
    cap: int
    letters: int = 2

    @property
    def dim(self) -> int:
        return self.table.shape[0]

    def is_associative(self) -> bool:
        t = self.table
        left = np.einsum("ijl,lkn->ijkn", t, t)
        right = np.einsum("jkl,iln->ijkn", t, t)
        return bool((left == right).all())

    def has_unit(self) -> bool:
        eye = np.eye(self.dim, dtype=self.table.dtype)
        return bool((self.table[0] == eye).all() and (self.table[:, 0, :] == eye).all())

    # --- B0 ---------------------------------------------------------
    def b_mul(self, i: int, j: int) -> dict:
        row = self.table[i, j]
        return {k: int(c) for k, c in enumerate(row) if c}

    # --- A0 ---------------------------------------------------------
    def a_mul(self, u: dict, v: dict) -> dict:
        out: dict = {}
        for m1, c1 in u.items():
            for m2, c2 in v.items():
                m = m1 + m2
                if len(m) > self.cap:
                    raise TruncationOverflow(m)
                out[m] = out.get(m, 0) + c1 * c2
        return {m: c for m, c in out.items() if c}

    def gamma_of(self, vec: dict) -> dict:
        out: dict = {}
        for i, c in vec.items():
            for m, a in self.gamma[i].items():
                out[m] = out.get(m, 0) + c * a
        return {m: c for m, c in out.items() if c}

    # --- maps B0 -> B0 (x) A0 ----------------------------------------
    def c_map(self, images: Optional[list] = None) -> tuple:
        """c_tau: x -> 1 (x) tau(x); tau defaults to gamma."""
        tau = self.gamma if images is None else images
        return tuple({(0, m): c for m, c in tau[x].items()} for x in range(self.dim))

    def apply(self, f: tuple, vec: dict) -> dict:
        out: dict = {}
        for x, c in vec.items():
            for key, a in f[x].items():
                out[key] = out.get(key, 0) + c * a
        return {k: v for k, v in out.items() if v}

    def lin_b(self, f: tuple, b: int) -> tuple:
        """(f b)(x) = f(b x)."""
        return tuple(self.apply(f, self.b_mul(b, x)) for x in range(self.dim))

    def b_lin(self, b: int, f: tuple) -> tuple:
        """(b f)(x) = (b (x) 1) f(x)."""
        out = []
        for x in range(self.dim):
            acc: dict = {}
            for (j, m), c in f[x].items():
                for k, t in self.b_mul(b, j).items():
                    acc[(k, m)] = acc.get((k, m), 0) + c * t
            out.append({k: v for k, v in acc.items() if v})
        return tuple(out)

    def lin_lin(self, f: tuple, g: tuple) -> tuple:
        """f g = (1 (x) mu)(f (x) 1) g."""
        out = []
        for x in range(self.dim):
            acc: dict = {}
            for (i, a), c in g[x].items():
                for (j, a2), c2 in f[i].items():
                    m = a2 + a
                    if len(m) > self.cap:
                        raise TruncationOverflow(m)
                    acc[(j, m)] = acc.get((j, m), 0) + c * c2
            out.append({k: v for k, v in acc.items() if v})
        return tuple(out)


def _tensor_one(a: dict) -> dict:
    return {(0, m): c for m, c in a.items()}


def decomposition_sides(model: TruncatedModel, bs: Sequence[int], x: int) -> tuple:
    """(left, right) of the c-gamma product identity for basis indices bs, x."""
    prod = model.c_map()
    prod = model.lin_b(prod, bs[0])
    for b in bs[1:]:
        prod = model.lin_lin(prod, model.c_map())
        prod = model.lin_b(prod, b)
    left = model.apply(prod, {x: 1})
    right = model.gamma_of(model.b_mul(bs[-1], x))
    for b in reversed(bs[:-1]):
        right = model.a_mul(model.gamma[b], right)
    return left, _tensor_one(right)


@dataclass
class DecompositionReport:
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    failures: list = field(default_factory=list)
    skips: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.failed == 0 and self.passed > 0

    def merge(self, other: "DecompositionReport") -> None:
        self.passed += other.passed
        self.failed += other.failed
        self.skipped += other.skipped
        self.failures += other.failures
        self.skips += other.skips


def _check(model: TruncatedModel, bs: tuple, x: int, rep: DecompositionReport) -> None:
    try:
        left, right = decomposition_sides(model, bs, x)
    except TruncationOverflow:
        rep.skipped += 1
        rep.skips.append((bs, x))
        return
    if left == right:
        rep.passed += 1
    else:
        rep.failed += 1
        rep.failures.append((bs, x, left, right))


def verify_decomposition(model: TruncatedModel, s: int, trials: int = 0, seed: int = 0,
                         exhaustive: bool = False) -> DecompositionReport:
    """Check the identity on random (or all) basis choices b_1..b_s, x."""
    if s < 1:
        raise WreathError("invalid-argument", "s must be >= 1")
    if not model.has_unit() or not model.is_associative():
        raise WreathError("invalid-model", "B0 table must be unital and associative")
    rep = DecompositionReport()
    if exhaustive:
        for bs in itertools.product(range(model.dim), repeat=s):
            for x in range(model.dim):
                _check(model, bs, x, rep)
        return rep
    rng = random.Random(seed)
    for _ in range(trials):
        bs = tuple(rng.randrange(model.dim) for _ in range(s))
        _check(model, bs, rng.randrange(model.dim), rep)
    return rep


def check_two_map_identity(model: TruncatedModel, tau: list, sigma: list) -> bool:
    """c_tau c_sigma (x) = 1 (x) tau(1) sigma(x) for every basis x."""
    prod = model.lin_lin(model.c_map(tau), model.c_map(sigma))
    for x in range(model.dim):
        if model.apply(prod, {x: 1}) != _tensor_one(model.a_mul(tau[0], sigma[x])):
            return False
    return True


# ---------------------------------------------------------- generators

def _unit_table(dim: int) -> np.ndarray:
    t = np.zeros((dim, dim, dim), dtype=np.int64)
    for i in range(dim):
        t[0, i, i] = 1
        t[i, 0, i] = 1
    return t


def letter_gamma(dim: int) -> list:
    """gamma(b_i) = letter i: free letters make the check universal in gamma."""
    return [{(i,): 1} for i in range(dim)]


def enumerate_models(max_dim: int = 3, cap: int = 4) -> Iterator[TruncatedModel]:
    """Every unital associative table with constants in {-1, 0, 1}, dim <= max_dim."""
    for dim in range(1, max_dim + 1):
        r = dim - 1
        free = r * r * dim
        if free == 0:
            yield TruncatedModel(_unit_table(dim), letter_gamma(dim), cap, dim)
            continue
        vals = np.array(list(itertools.product((-1, 0, 1), repeat=free)), dtype=np.int64)
        T = np.broadcast_to(_unit_table(dim), (len(vals), dim, dim, dim)).copy()
        T[:, 1:, 1:, :] = vals.reshape(len(vals), r, r, dim)
        left = np.einsum("mijl,mlkn->mijkn", T, T)
        right = np.einsum("mjkl,miln->mijkn", T, T)
        ok = (left == right).reshape(len(vals), -1).all(axis=1)
        for t in T[ok]:
            yield TruncatedModel(t.copy(), letter_gamma(dim), cap, dim)


def random_model(dim: int, cap: int, seed: int, letters: int = 2,
                 max_tries: int = 100000) -> TruncatedModel:
    """Seeded rejection sampling of a unital associative {-1,0,1} table."""
    rng = random.Random(seed)
    for _ in range(max_tries):
        t = _unit_table(dim)
        for i in range(1, dim):
            for j in range(1, dim):
                t[i, j] = [rng.choice((-1, 0, 1)) for _ in range(dim)]
        m = TruncatedModel(t, [], cap, letters)
        if m.is_associative():
            m.gamma = [_random_linear(letters, rng) for _ in range(dim)]
            return m
    raise WreathError("invalid-model", "no associative table found")


def _random_linear(letters: int, rng: random.Random) -> dict:
    """A non-zero combination of single letters with coefficients in {-1, 0, 1}."""
    while True:
        el = {(a,): rng.choice((-1, 0, 1)) for a in range(letters)}
        el = {k: v for k, v in el.items() if v}
        if el:
            return el


def random_images(dim: int, letters: int, rng: random.Random, degree: int = 2) -> list:
    out = []
    for _ in range(dim):
        el: dict = {}
        for _ in range(rng.randint(1, 3)):
            m = tuple(rng.randrange(letters) for _ in range(rng.randint(1, degree)))
            el[m] = el.get(m, 0) + rng.choice((-2, -1, 1, 2))
        out.append({k: v for k, v in el.items() if v})
    return out
