"""Command-line entry point: one subcommand per module, JSON/CSV artifacts.

Exit codes: 0 success, 2 invalid configuration, 3 computation error (the
failing stage is named on stderr), 4 an asserted inequality was violated.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from . import __version__
from . import analysis, oscillator, pbw, sbm, toeplitz, words, wreath
from .growth import GrowthProfile

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE, EXIT_CHECK = 0, 2, 3, 4
SUBCOMMANDS = ("complexity", "sbm", "oscillate", "wreath", "pbw", "toeplitz",
               "gkdim", "oscillation", "pipeline")


class ConfigError(Exception):
    pass


class StageError(Exception):
    def __init__(self, stage: str, code: str, message: str) -> None:
        super().__init__(message)
        self.stage = stage
        self.code = code


@dataclass
class ExperimentConfig:
    subcommand: str
    params: dict
    format: str = "json"
    seed: int = 0
    out: Optional[str] = None
    threads: int = 1

    def embedded(self) -> dict:
        """What goes into the artifact; the output path is left out."""
        return {"subcommand": self.subcommand, "params": self.params,
                "format": self.format, "seed": self.seed, "threads": self.threads}


@dataclass
class Outcome:
    result: dict
    header: list
    rows: list
    summary: str
    failed: list = field(default_factory=list)
    inputs: dict = field(default_factory=dict)


# ------------------------------------------------------------- tables
#
# A table argument is a named function, a CSV file (one value per row, or
# "index,value" rows; a non-numeric first row is a header; '#' starts a
# comment) or an inline comma-separated list.

def _ceil_sqrt(n: int) -> int:
    r = math.isqrt(n)
    return r if r * r == n else r + 1


NAMED: dict = {
    "one": lambda n: 1,
    "sqrt": math.isqrt,
    "ceil-sqrt": _ceil_sqrt,
    "exp-sqrt": analysis.fast_target,
    "cbrt-half": analysis.slow_target,
    "square": lambda n: (n + 1) ** 2,
    "cube": lambda n: (n + 1) ** 3,
    "omega": analysis.default_omega,
    "double": lambda k: 2 ** (k + 1),
}
NAMED_INVERSE: dict = {
    "sqrt": lambda K: K * K,
    "cbrt-half": lambda K: 2 * K ** 3,
}


@dataclass
class TableArg:
    source: str
    fn: Optional[Callable[[int], int]] = None
    values: Optional[list] = None
    digest: Optional[str] = None

    def take(self, count: int, start: int = 0) -> list:
        """Values at start, start+1, ...; callables are evaluated there."""
        if self.fn is not None:
            return [int(self.fn(i)) for i in range(start, start + count)]
        vals = self.values[:count]
        if len(vals) < count:
            raise ConfigError(f"table {self.source!r} has {len(self.values)} entries, need {count}")
        return vals

    def as_lookup(self):
        return self.fn if self.fn is not None else list(self.values)


def _parse_int(tok: str, where: str) -> int:
    try:
        return int(tok.strip())
    except ValueError:
        raise ConfigError(f"{where}: not an integer: {tok.strip()!r}") from None


def load_table(source) -> TableArg:
    if isinstance(source, (list, tuple)):
        return TableArg("inline", values=[_parse_int(str(x), "inline table") for x in source])
    source = str(source)
    if source in NAMED:
        return TableArg(source, fn=NAMED[source])
    if os.path.isfile(source):
        with open(source, "rb") as fh:
            raw = fh.read()
        text = raw.decode("utf-8")
        vals, idx = [], []
        for lineno, row in enumerate(csv.reader(io.StringIO(text)), 1):
            row = [c for c in row if c.strip() != ""]
            if not row or row[0].lstrip().startswith("#"):
                continue
            if not vals and not row[-1].strip().lstrip("-").isdigit():
                continue  # header
            if len(row) > 2:
                raise ConfigError(f"{source}:{lineno}: expected 1 or 2 columns")
            if len(row) == 2:
                idx.append(_parse_int(row[0], f"{source}:{lineno}"))
            vals.append(_parse_int(row[-1], f"{source}:{lineno}"))
        if idx and (len(idx) != len(vals) or any(b != a + 1 for a, b in zip(idx, idx[1:]))):
            raise ConfigError(f"{source}: index column must be consecutive")
        if not vals:
            raise ConfigError(f"{source}: table is empty")
        return TableArg(source, values=vals, digest=hashlib.sha256(raw).hexdigest())
    if "," in source or source.strip().lstrip("-").isdigit():
        return TableArg("inline", values=[_parse_int(t, "inline table") for t in source.split(",")])
    raise ConfigError(f"table {source!r}: no such file or named function "
                      f"({', '.join(sorted(NAMED))})")


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _inputs(*tables: Optional[TableArg]) -> dict:
    return {t.source: t.digest for t in tables if t is not None and t.digest}


# ------------------------------------------------------------ handlers

def run_complexity(a, cfg: ExperimentConfig) -> Outcome:
    if (a.word_file is None) == (a.stream is None):
        raise ConfigError("give exactly one of --word-file and --stream")
    inputs = {}
    if a.word_file is not None:
        if not os.path.isfile(a.word_file):
            raise ConfigError(f"{a.word_file}: no such file")
        with open(a.word_file, "rb") as fh:
            raw = fh.read()
        inputs[a.word_file] = hashlib.sha256(raw).hexdigest()
        w = words.WordPrefix.from_line(raw.decode("utf-8"), a.word_file)
        arr = np.asarray(w.letters, dtype=np.int32)
        prefix_len = a.prefix_len or len(arr)
        if prefix_len > len(arr):
            raise ConfigError(f"--prefix-len {prefix_len} exceeds the word length {len(arr)}")
        stream = words.WordStream(lambda n: (arr[:n], None), a.word_file,
                                  int(arr.max(initial=0)) + 1)
    else:
        if a.stream == "thue-morse":
            stream = words.thue_morse_stream()
        elif a.stream.startswith("constant"):
            stream = words.constant_stream(int(a.stream.partition(":")[2] or 0))
        elif a.stream.startswith("period:"):
            stream = words.periodic_stream([_parse_int(t, "--stream")
                                            for t in a.stream[7:].split(",")])
        else:
            raise ConfigError("--stream must be thue-morse, constant[:c] or period:a,b,...")
        prefix_len = a.prefix_len or 4 * a.n_max
    prof = words.complexity_profile(stream, a.n_max, prefix_len)
    p = [1] + list(prof.values)
    H = prof.horizon
    mono = all(p[n] <= p[n + 1] for n in range(1, H))
    sub = all(p[x + y] <= p[x] * p[y] for x in range(1, H + 1) for y in range(1, H + 1 - x))
    failed = [name for name, ok in (("p non-decreasing", mono), ("p submultiplicative", sub))
              if not ok]
    result = {"source": stream.source_id, "prefix_len": prefix_len, "horizon": H,
              "p": list(prof.values), "g": prof.cumulative(),
              "checks": {"p non-decreasing": mono, "p submultiplicative": sub}}
    rows = [[n, v, int(n <= H)] for n, v in enumerate(prof.values, 1)]
    return Outcome(result, ["n", "p", "certified"], rows,
                   f"p(1..{a.n_max}) of {stream.source_id}, certified to {H}", failed, inputs)


def _target(a) -> tuple:
    ft = load_table(a.f_table)
    if ft.fn is not None:
        vals = ft.take((a.depth or 10) + 1)
        beyond = a.beyond or ("ratio" if a.f_table == "double" else "hold")
    else:
        vals = ft.values
        beyond = a.beyond or "hold"
    return sbm.GrowthTarget(tuple(vals), beyond), ft


def run_sbm(a, cfg: ExperimentConfig) -> Outcome:
    f, ft = _target(a)
    depth = a.depth if a.depth is not None else max(f.depth, sbm.ceil_log2(max(a.len, 1)) + 1)
    sets = sbm.build_sb_sets(f, depth, rho=a.rho)
    sizes = [{"j": j, "W": w, "C": c} for j, (w, c) in enumerate(sets.sizes())]
    dt = None
    if a.emit == "word":
        if a.delta_table is not None:
            dt = load_table(a.delta_table)
            delta = dt.take(a.delta_len, start=1)
            sched = sbm.build_level_schedule(delta, a.k_max)
            w = sbm.generate_T_prefix(sets, sched, a.len)
        else:
            w = sbm.generate_S_prefix(sets, a.len)
        lv = w.levels or (None,) * len(w)
        result = {"word": w.to_line(), "length": len(w), "sizes": sizes}
        rows = [[i, c, "" if v is None else v] for i, (c, v) in enumerate(zip(w.letters, lv))]
        return Outcome(result, ["position", "letter", "level"], rows,
                       f"{'T' if dt else 'S'}-word prefix of length {len(w)}", [], _inputs(ft, dt))
    if a.emit == "profile":
        prof = sbm.language_complexity(sets, a.len, a.limit)
        up, lo, exact = sbm.cumulative_h(sets, prof, a.len)
        result = {"p": list(prof.values), "horizon": prof.horizon, "h_upper": up,
                  "h_lower": lo, "sizes": sizes}
        p = [1] + list(prof.values)
        rows = [[n, p[n] if n < len(p) else "", lo[n], up[n], int(exact[n])]
                for n in range(a.len + 1)]
        return Outcome(result, ["n", "p", "h_lower", "h_upper", "exact"], rows,
                       f"S-language complexity exact to {prof.horizon}", [], _inputs(ft))
    rep = sbm.verify_sbm_sandwich(sets, a.len, a.limit)
    keys = ["n", "f_n", "h_n", "h_2n_lower", "exact_n", "exact_2n", "lower_ok", "cubic_ok",
            "square_ok"]
    table = [[getattr(r, k) for k in keys] for r in rep.rows]
    failed = [f"sandwich at n = {r.n}" for r in rep.rows
              if not (r.lower_ok and r.cubic_ok and r.square_ok is not False)]
    result = {"divisible": rep.divisible, "complete": rep.complete, "ok": rep.ok,
              "rows": [dict(zip(keys, t)) for t in table], "sizes": sizes}
    return Outcome(result, keys, table,
                   f"sandwich over n <= {a.len}: {len(rep.rows)} rows, "
                   f"{'complete' if rep.complete else 'partly bounded'}", failed, _inputs(ft))


def run_oscillate(a, cfg: ExperimentConfig) -> Outcome:
    t1, t2 = load_table(a.f1_table), load_table(a.f2_table)
    inv = NAMED_INVERSE.get(a.f1_table) if t1.fn is not None else None
    sched = oscillator.build_osc_schedule(t1.as_lookup(), t2.as_lookup(), a.stages,
                                          p_min=a.p_min, f1_inverse=inv)
    stages = [{"stage": i, "n": s.n, "m": s.m, "K": s.K} for i, s in enumerate(sched.stages, 1)]
    runs = [] if sched.rules is None else [{"lo": lo, "hi": hi, "d": v}
                                           for lo, hi, v in sched.rules.runs]
    result = {"p": sched.p, "stages": stages, "d_runs": runs,
              "invariant_violations": sched.check_invariants()}
    failed = list(result["invariant_violations"])
    if a.emit == "report":
        checks = oscillator.verify_oscillation(sched)
        result["checks"] = [{"stage": c.stage, "n": c.n, "m": c.m, "w_n": c.w_n, "f2_n": c.f2_n,
                             "w_m": c.w_m, "f1_m": c.f1_m, "fast_ok": c.fast_ok,
                             "slow_ok": c.slow_ok} for c in checks]
        failed += [f"stage {c.stage} {side}" for c in checks
                   for side, ok in (("fast", c.fast_ok), ("slow", c.slow_ok)) if not ok]
        rows = [[c.stage, c.n, c.m, c.w_n, c.f2_n, c.w_m, c.f1_m, int(c.fast_ok), int(c.slow_ok)]
                for c in checks]
        header = ["stage", "n", "m", "w_n", "f2_n", "w_m", "f1_m", "fast_ok", "slow_ok"]
    else:
        rows = [[s["stage"], s["n"], s["m"], s["K"]] for s in stages]
        header = ["stage", "n", "m", "K"]
    return Outcome(result, header, rows, f"{len(stages)}-stage schedule, p = {sched.p}",
                   failed, _inputs(t1, t2))


def run_wreath(a, cfg: ExperimentConfig) -> Outcome:
    if a.mode == "bounds":
        if a.gB_csv is None or a.w_csv is None:
            raise ConfigError("--mode bounds needs --gB-csv and --w-csv")
        tg, tw = load_table(a.gB_csv), load_table(a.w_csv)
        if tg.fn is not None and tw.fn is not None and a.N is None:
            raise ConfigError("two named tables need --N")
        N = a.N if a.N is not None else len((tg.values if tg.fn is None else tw.values)) - 1
        gb, w = tg.take(N + 1), tw.take(N + 1)
        lower, upper = wreath.compose_growth_bounds(gb, w)
        ok = all(x <= y for x, y in zip(lower.values, upper.values))
        result = {"N": N, "g_B": gb, "w": w, "lower": list(lower.values),
                  "upper": list(upper.values), "checks": {"lower <= upper": ok}}
        rows = [[n, gb[n], w[n], lower[n], upper[n]] for n in range(N + 1)]
        return Outcome(result, ["n", "g_B", "w", "lower", "upper"], rows,
                       f"wreath bounds on 0..{N}", [] if ok else ["lower <= upper"],
                       _inputs(tg, tw))
    if a.exhaustive:
        rep = wreath.DecompositionReport()
        models = 0
        for model in wreath.enumerate_models(a.dim, a.cap):
            models += 1
            for s in range(1, a.s + 1):
                rep.merge(wreath.verify_decomposition(model, s, exhaustive=True))
    else:
        rep = wreath.DecompositionReport()
        models = a.trials
        for t in range(a.trials):
            model = wreath.random_model(a.dim, a.cap, cfg.seed * 1_000_003 + t)
            rep.merge(wreath.verify_decomposition(model, a.s, trials=1, seed=cfg.seed + t))
    result = {"models": models, "passed": rep.passed, "failed": rep.failed,
              "skipped": rep.skipped, "failures": [repr(f) for f in rep.failures[:20]]}
    rows = [[models, rep.passed, rep.failed, rep.skipped]]
    failed = [] if rep.failed == 0 else [f"{rep.failed} decomposition mismatches"]
    return Outcome(result, ["models", "passed", "failed", "skipped"], rows,
                   f"decomposition identity: {rep.passed} passed, {rep.failed} failed, "
                   f"{rep.skipped} skipped", failed)


def run_pbw(a, cfg: ExperimentConfig) -> Outcome:
    tb = load_table(a.b_csv)
    b = tb.take(a.N, start=1) if tb.fn is not None else tb.values
    prod = pbw.euler_product if a.method == "recurrence" else pbw.euler_product_schoolbook
    series = prod(b, a.N).coeffs
    result = {"N": a.N, "a_N": series[a.N]}
    if a.emit == "series":
        result["series"] = list(series)
        rows = [[n, v] for n, v in enumerate(series)]
        return Outcome(result, ["n", "a"], rows, f"a_{a.N} = {series[a.N]}", [], _inputs(tb))
    g, acc = [], 0
    for x in series:
        acc += x
        g.append(acc)
    if a.emit == "gU":
        result["gU"] = g
        return Outcome(result, ["n", "gU"], [[n, v] for n, v in enumerate(g)],
                       f"g_U({a.N}) = {g[-1]}", [], _inputs(tb))
    lo, hi = pbw.qdim_estimate(g, a.q)
    result.update({"q": a.q, "qdim_lower": lo, "qdim_upper": hi})
    return Outcome(result, ["q", "qdim_lower", "qdim_upper"], [[a.q, lo, hi]],
                   f"Dim^{a.q} estimate in [{lo:.4f}, {hi:.4f}]", [], _inputs(tb))


def run_toeplitz(a, cfg: ExperimentConfig) -> Outcome:
    params = toeplitz.ToeplitzParams(a.alpha, a.beta, a.gamma, a.s, a.t)
    if a.emit == "theorem-d":
        prof = toeplitz.theorem_d_profiles(params, a.kmax, a.d1)
        sch = prof.rates.schedule
        k = 2 ** a.d1
        slopes = {}
        if len(sch.e) > 1 and len(sch.d) > 1 and sch.d[1] <= a.kmax:
            slopes = {"gX_gamma_regime": prof.gX.window_slope(5 ** sch.d[0], 5 ** sch.e[1]),
                      "gX_alpha_regime": prof.gX.window_slope(5 ** sch.e[1], 5 ** sch.d[1]),
                      "gY_beta_regime": prof.gY.window_slope(5 ** sch.d[0], 5 ** sch.e[1])}
        result = {"d": list(sch.d), "e": list(sch.e), "slopes": slopes,
                  "violations": list(prof.rates.violations)}
        failed = []
        if k <= a.kmax:
            ok = prof.tensor_exponent_at_least(k, Fraction(47, 10))
            result["tensor"] = {"k": k, "exponent": prof.tensor_exponent_at(k),
                                "closed_form_lower": toeplitz.tensor_lower_log_closed_form(params, k),
                                "at_least_4.7": ok}
            failed += [] if ok else ["tensor exponent >= 4.7"]
        for name in ("gX", "gY", "gX_lower", "gY_lower", "gTensorLo", "gTensorHi"):
            result[name] = [[n, v] for n, v in getattr(prof, name).points]
        rows = [[kk + 1, p[0], p[1], q[1]] for kk, (p, q) in
                enumerate(zip(prof.gX.points, prof.gY.points))]
        return Outcome(result, ["k", "r", "gX", "gY"], rows,
                       f"tensor growth tables to 5^{a.kmax}", failed)
    sched = toeplitz.EpochSchedule.build(a.s, a.d1, reach=a.kmax)
    rates = toeplitz.build_rates(params, sched, a.kmax, check=a.rate_check)
    if a.emit == "rates":
        result = {"d": list(sched.d), "e": list(sched.e), "n": list(rates.n), "m": list(rates.m),
                  "lambda": rates.lam, "violations": list(rates.violations),
                  "t_used": rates.params.t}
        rows = [[k, rates.n_at(k), rates.m_at(k)] for k in range(1, a.kmax + 1)]
        return Outcome(result, ["k", "n", "m"], rows,
                       f"rates to k = {a.kmax}, {len(rates.violations)} invariant notes", [])
    stream = toeplitz.generate_toeplitz(rates, a.prefix_len, a.which, seed=cfg.seed, check=False)
    letters, _ = stream.arrays(a.prefix_len)
    if a.emit == "word":
        line = " ".join(str(int(c)) for c in letters)
        result = {"which": a.which, "length": a.prefix_len, "word": line}
        rows = [[i, int(c)] for i, c in enumerate(letters)]
        return Outcome(result, ["position", "letter"], rows,
                       f"Toeplitz {a.which}-word prefix of length {a.prefix_len}", [])
    checks = toeplitz.envelope_checks(letters, rates, a.which)
    result = {"which": a.which, "prefix_len": a.prefix_len,
              "envelopes": [{"k": c.k, "measured": c.measured, "lo": c.lo, "hi": c.hi,
                             "certified": c.certified, "ok": c.ok} for c in checks]}
    rows = [[c.k, c.measured, c.lo, c.hi, int(c.certified), int(c.ok)] for c in checks]
    failed = [f"p(5^{c.k}) envelope" for c in checks if not c.ok]
    return Outcome(result, ["k", "measured", "lo", "hi", "certified", "ok"], rows,
                   f"{len(checks)} envelope checks for {a.which}", failed)


def _growth_values(source, N: Optional[int]) -> tuple:
    t = load_table(source)
    if t.fn is not None:
        if N is None:
            raise ConfigError(f"named table {source!r} needs --N")
        return t.take(N + 1), t
    return (t.values if N is None else t.take(N + 1)), t


def run_gkdim(a, cfg: ExperimentConfig) -> Outcome:
    g, t = _growth_values(a.g_csv, a.N)
    est = analysis.gk_estimate(g, method=a.method)
    result = {"limsup_est": est.limsup_est, "window": list(est.window), "method": est.method,
              "point_estimates": [[n, e] for n, e in est.point_estimates]}
    if a.scale:
        C, _, D = a.scale.partition(",")
        C, D = _parse_int(C, "--scale"), _parse_int(D or "1", "--scale")
        rep = analysis.scaling_invariance_check(g, C, D, method=a.method)
        result["scaling"] = {"C": C, "D": D, "base": rep.base, "scaled": rep.scaled,
                             "difference": rep.difference, "allowed": rep.allowed, "ok": rep.ok}
    rows = [[n, e] for n, e in est.point_estimates]
    return Outcome(result, ["n", "estimate"], rows,
                   f"GK estimate {est.limsup_est:.4f} on n in [{est.window[0]}, {est.window[1]}]",
                   [], _inputs(t))


def run_oscillation(a, cfg: ExperimentConfig) -> Outcome:
    g, tg = _growth_values(a.g_csv, a.N)
    N = len(g) - 1
    slow, ts = _growth_values(a.slow_csv, N)
    fast, tf = _growth_values(a.fast_csv, N)
    gf, tgf = (None, None) if a.g_fast_csv is None else _growth_values(a.g_fast_csv, N)
    rep = analysis.oscillation_report(g, slow, fast, g_fast=gf)
    result = {"range": list(rep.range), "slow_hits": rep.slow_hits, "fast_hits": rep.fast_hits,
              "upper_density_slow": rep.upper_density_slow,
              "upper_density_fast": rep.upper_density_fast}
    hs, hf = set(rep.slow_hits), set(rep.fast_hits)
    rows = [[n, int(n in hs), int(n in hf)] for n in range(rep.range[0], rep.range[1] + 1)]
    return Outcome(result, ["n", "slow_hit", "fast_hit"], rows,
                   f"{len(hs)} slow / {len(hf)} fast hits on 1..{N}, densities "
                   f"{rep.upper_density_slow} / {rep.upper_density_fast}", [],
                   _inputs(tg, ts, tf, tgf))


def run_pipeline(a, cfg: ExperimentConfig) -> Outcome:
    kw: dict = {"threads": cfg.threads, "stages": a.stages, "p_min": a.p_min,
                "eps": a.eps}
    tabs = []
    if a.mode in ("A1", "A2"):
        f, ft = _target(a)
        kw["f_pow2"] = list(f.values_at_pow2)
        kw["f_beyond"] = f.beyond
        dt = load_table(a.delta_table)
        kw["delta"] = dt.take(max(a.n_max // 4, 1) + 256, start=1) if dt.fn else dt.values
        tabs += [ft, dt]
    else:
        if a.f1_table is not None:
            t1 = load_table(a.f1_table)
            kw["f1"] = t1.as_lookup()
            kw["f1_inverse"] = NAMED_INVERSE.get(a.f1_table) if t1.fn else None
            tabs.append(t1)
        if a.f2_table is not None:
            t2 = load_table(a.f2_table)
            kw["f2"] = t2.as_lookup()
            tabs.append(t2)
    if a.gB_csv is not None:
        tb = load_table(a.gB_csv)
        kw["g_B"] = tb.fn if tb.fn is not None else tb.values
        tabs.append(tb)
    if a.omega is not None:
        to = load_table(a.omega)
        if to.fn is None:
            raise ConfigError("--omega must name a function")
        kw["omega"] = to.fn
    rep = analysis.theorem_ab_pipeline(analysis.PipelineConfig(a.mode, a.n_max, **kw))
    checks = [{"name": c.name, "ok": c.ok, "points": c.points, "witness": c.witness}
              for c in rep.checks]
    result = {"mode": rep.mode, "n_max": rep.n_max, "checks": checks, "notes": rep.notes,
              "g_B": {"kind": rep.g_B.kind, "label": rep.g_B.label},
              "w": {"kind": rep.w.kind, "label": rep.w.label},
              "lower": list(rep.lower.values), "upper": list(rep.upper.values),
              "stages": rep.stages}
    if rep.oscillation is not None:
        o = rep.oscillation
        result["oscillation"] = {"range": list(o.range), "slow_hits": o.slow_hits,
                                 "fast_hits": o.fast_hits,
                                 "upper_density_slow": o.upper_density_slow,
                                 "upper_density_fast": o.upper_density_fast}
    rows = [[n, rep.g_B[n], rep.lower[n], rep.upper[n]] for n in range(rep.n_max + 1)]
    failed = [c.name for c in rep.checks if not c.ok]
    return Outcome(result, ["n", "g_B", "lower", "upper"], rows,
                   f"pipeline {a.mode}: {sum(c.ok for c in rep.checks)}/{len(rep.checks)} "
                   f"checks passed", failed, _inputs(*tabs))


HANDLERS = {"complexity": run_complexity, "sbm": run_sbm, "oscillate": run_oscillate,
            "wreath": run_wreath, "pbw": run_pbw, "toeplitz": run_toeplitz,
            "gkdim": run_gkdim, "oscillation": run_oscillation, "pipeline": run_pipeline}

STAGE_OF = {"complexity": "words", "oscillate": "oscillator", "gkdim": "analysis",
            "oscillation": "analysis", "pipeline": "analysis"}


# ---------------------------------------------------------------- parser

def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--out", default=d(None), help="artifact path (default: stdout)")
    p.add_argument("--format", choices=("json", "csv"), default=d("json"))
    p.add_argument("--seed", type=int, default=d(0))
    p.add_argument("--threads", type=_positive, default=d(1))


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="artifact", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"artifact {__version__}")
    ap.add_argument("--config", help="JSON experiment file {subcommand, params, ...}")
    _global_flags(ap, suppress=False)
    sub = ap.add_subparsers(dest="subcommand")

    def add(name: str, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        _global_flags(p, suppress=True)
        return p

    p = add("complexity", "factor complexity of a word")
    p.add_argument("--word-file")
    p.add_argument("--stream", help="thue-morse, constant[:c] or period:a,b,...")
    p.add_argument("--n-max", type=_positive, default=32)
    p.add_argument("--prefix-len", type=_positive)

    p = add("sbm", "S- and T-words for a growth target")
    p.add_argument("--f-table", required=True, help="f(2^0), f(2^1), ... or 'double'")
    p.add_argument("--beyond", choices=("hold", "ratio", "square"))
    p.add_argument("--depth", type=int)
    p.add_argument("--delta-table", help="delta(1), delta(2), ... (T-word levels)")
    p.add_argument("--delta-len", type=_positive, default=400)
    p.add_argument("--k-max", type=_positive, default=12)
    p.add_argument("--len", type=_positive, default=64)
    p.add_argument("--rho", action="store_true")
    p.add_argument("--limit", type=_positive, default=sbm.DEFAULT_LIMIT)
    p.add_argument("--emit", choices=("word", "profile", "report"), default="report")

    p = add("oscillate", "two-target oscillator schedule")
    p.add_argument("--f1-table", default="sqrt")
    p.add_argument("--f2-table", default="exp-sqrt")
    p.add_argument("--stages", type=int, default=2)
    p.add_argument("--p-min", type=_positive, default=1)
    p.add_argument("--emit", choices=("schedule", "report"), default="report")

    p = add("wreath", "wreath-product bounds and the decomposition identity")
    p.add_argument("--mode", choices=("bounds", "verify"), default="verify")
    p.add_argument("--gB-csv", dest="gB_csv")
    p.add_argument("--w-csv")
    p.add_argument("--N", type=int)
    p.add_argument("--s", type=_positive, default=3)
    p.add_argument("--dim", type=_positive, default=3)
    p.add_argument("--cap", type=_positive, default=4)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--exhaustive", action="store_true")

    p = add("pbw", "Euler products and enveloping-algebra growth")
    p.add_argument("--b-csv", required=True, help="b_1, b_2, ... or 'one'")
    p.add_argument("--N", type=_positive, required=True)
    p.add_argument("--emit", choices=("series", "gU", "qdim"), default="series")
    p.add_argument("--q", type=int, default=3)
    p.add_argument("--method", choices=("recurrence", "schoolbook"), default="recurrence")

    p = add("toeplitz", "Toeplitz rates, words, envelopes and growth tables")
    p.add_argument("--alpha", type=_fraction, default=Fraction(3))
    p.add_argument("--beta", type=_fraction, default=Fraction(3))
    p.add_argument("--gamma", type=_fraction, default=Fraction(2))
    p.add_argument("--s", type=_positive, default=4)
    p.add_argument("--t", type=_positive, default=2)
    p.add_argument("--d1", type=_positive, default=5)
    p.add_argument("--kmax", type=_positive, default=40)
    p.add_argument("--prefix-len", type=_positive, default=5 ** 6)
    p.add_argument("--which", choices=("X", "Y"), default="X")
    p.add_argument("--rate-check", choices=("report", "raise", "adjust"), default="report")
    p.add_argument("--emit", choices=("rates", "word", "envelopes", "theorem-d"),
                   default="envelopes")

    p = add("gkdim", "GK-dimension estimate of a growth table")
    p.add_argument("--g-csv", required=True)
    p.add_argument("--N", type=int)
    p.add_argument("--method", choices=("slope", "ratio"), default="slope")
    p.add_argument("--scale", help="C,D: also compare with n -> C g(D n)")

    p = add("oscillation", "slow/fast hit report for a growth table")
    p.add_argument("--g-csv", required=True)
    p.add_argument("--g-fast-csv")
    p.add_argument("--slow-csv", required=True)
    p.add_argument("--fast-csv", required=True)
    p.add_argument("--N", type=int)

    p = add("pipeline", "wreath-product bound pipelines")
    p.add_argument("--mode", choices=analysis.MODES, required=True)
    p.add_argument("--n-max", type=int, default=512)
    p.add_argument("--f-table", default="double")
    p.add_argument("--beyond", choices=("hold", "ratio", "square"))
    p.add_argument("--depth", type=int, default=10)
    p.add_argument("--delta-table", default="ceil-sqrt")
    p.add_argument("--f1-table")
    p.add_argument("--f2-table")
    p.add_argument("--gB-csv", dest="gB_csv")
    p.add_argument("--omega")
    p.add_argument("--eps", type=_fraction, default=Fraction(1, 2))
    p.add_argument("--stages", type=int, default=2)
    p.add_argument("--p-min", type=_positive, default=1)
    return ap


def _config_argv(data) -> list:
    if not isinstance(data, dict) or not data:
        raise ConfigError("config is empty")
    name = data.get("subcommand")
    if name not in SUBCOMMANDS:
        raise ConfigError(f"config needs 'subcommand' in {', '.join(SUBCOMMANDS)}")
    unknown = set(data) - {"subcommand", "params", "format", "seed", "out", "threads"}
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    argv = [name]
    params = data.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("'params' must be an object")
    for key in sorted(params):
        val = params[key]
        flag = "--" + key.replace("_", "-")
        if key in ("gB_csv", "gB-csv"):
            flag = "--gB-csv"
        if val is True:
            argv.append(flag)
        elif val is False or val is None:
            continue
        elif isinstance(val, list):
            argv += [flag, ",".join(str(v) for v in val)]
        else:
            argv += [flag, str(val)]
    for key in ("format", "seed", "out", "threads"):
        if key in data:
            argv += ["--" + key, str(data[key])]
    return argv


def parse_config(argv: list) -> tuple:
    """Namespace and ExperimentConfig from argv (and --config, if given)."""
    ap = build_parser()
    a = ap.parse_args(argv)
    if a.config is not None:
        if a.subcommand is not None:
            raise ConfigError("give either --config or a subcommand, not both")
        try:
            with open(a.config, encoding="utf-8") as fh:
                text = fh.read()
            data = json.loads(text) if text.strip() else {}
        except OSError as exc:
            raise ConfigError(f"{a.config}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{a.config}: invalid JSON ({exc.msg})") from None
        outer = [x for flag in ("out", "format", "seed", "threads")
                 if getattr(a, flag) != ap.get_default(flag)
                 for x in ("--" + flag, str(getattr(a, flag)))]
        a = ap.parse_args(outer + _config_argv(data))
    if a.subcommand is None:
        raise ConfigError("no subcommand given")
    skip = {"subcommand", "config", "out", "format", "seed", "threads"}
    params = {k: _plain(v) for k, v in sorted(vars(a).items()) if k not in skip}
    cfg = ExperimentConfig(a.subcommand, params, a.format, a.seed, a.out, a.threads)
    return a, cfg


def _plain(v):
    if isinstance(v, Fraction):
        return str(v)
    return v


# ---------------------------------------------------------------- output

def _jsonable(x):
    """Integers become decimal strings; rationals 'p/q'; non-finite floats strings."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, GrowthProfile):
        return _jsonable(list(x.values))
    raise TypeError(f"cannot serialize {type(x).__name__}")


def render(cfg: ExperimentConfig, out: Outcome) -> str:
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(out.header)
        for row in out.rows:
            w.writerow([_cell(c) for c in row])
        return buf.getvalue()
    doc = {"tool": "artifact", "version": __version__, "config": cfg.embedded(),
           "inputs": out.inputs, "ok": not out.failed, "failed_checks": out.failed,
           "result": _jsonable(out.result)}
    return json.dumps(doc, sort_keys=True, indent=1, ensure_ascii=True) + "\n"


def _cell(c) -> str:
    if isinstance(c, bool):
        return str(int(c))
    if isinstance(c, float):
        return repr(c)
    return "" if c is None else str(c)


def write_atomic(path: str, text: str) -> None:
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".artifact-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        mask = os.umask(0)
        os.umask(mask)
        os.chmod(tmp, 0o666 & ~mask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ------------------------------------------------------------------ main

_COMPUTE_ERRORS = (sbm.SBMError, toeplitz.ToeplitzError, oscillator.OscillatorError,
                   wreath.WreathError, pbw.SeriesError, words.InvalidArgument,
                   analysis.AnalysisError)


def _stage(cfg_name: str, exc: Exception) -> str:
    if isinstance(exc, analysis.AnalysisError):
        return exc.stage
    for mod, cls in (("sbm", sbm.SBMError), ("toeplitz", toeplitz.ToeplitzError),
                     ("oscillator", oscillator.OscillatorError), ("wreath", wreath.WreathError),
                     ("pbw", pbw.SeriesError), ("words", words.InvalidArgument)):
        if isinstance(exc, cls):
            return mod
    return STAGE_OF.get(cfg_name, cfg_name)


def run(argv: Optional[list] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)  # exact big integers are emitted in full
    try:
        a, cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"artifact: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # argparse: --help/--version exit 0, errors exit 2
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        outcome = HANDLERS[cfg.subcommand](a, cfg)
    except ConfigError as exc:
        print(f"artifact: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _COMPUTE_ERRORS as exc:
        code = getattr(exc, "code", "error")
        stage = _stage(cfg.subcommand, exc)
        if code == "invalid-argument" or stage == "config":
            print(f"artifact: invalid config [stage {stage}]: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        print(f"artifact: computation error [stage {stage}]: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    except (ArithmeticError, MemoryError, RuntimeError) as exc:
        stage = STAGE_OF.get(cfg.subcommand, cfg.subcommand)
        print(f"artifact: computation error [stage {stage}]: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return EXIT_COMPUTE
    text = render(cfg, outcome)
    status = "ok" if not outcome.failed else "CHECK FAILED: " + "; ".join(outcome.failed)
    if cfg.out:
        write_atomic(cfg.out, text)
        print(f"{cfg.subcommand}: {outcome.summary} [{status}] -> {cfg.out}")
    else:
        sys.stdout.write(text)
        print(f"{cfg.subcommand}: {outcome.summary} [{status}]", file=sys.stderr)
    return EXIT_CHECK if outcome.failed else EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
