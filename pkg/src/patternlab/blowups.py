"""Blowups of patterns as concrete hypergraphs, their densities, and the
finite-data checks for Lagrangian sequence conditions.

A blowup replaces each pattern index i by a class of size_i fresh vertices
and takes every r-set of vertices whose class profile (multiset of
intersection sizes) is an edge of the pattern.  The edge density of a
blowup with class fractions x converges to the pattern's density polynomial
at x as the blowup grows, which is what ties the simplex optimization to
actual hypergraphs.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import CapExceeded
from .lagrangian import (OptimizerConfig, eval_lagrange, lagrangian_of_hypergraph,
                         maximize, _as_weights)
from .patterns import (Hypergraph, Multiset, Pattern, induced_subpattern,
                       random_pattern)

__all__ = [
    "Partition",
    "profile",
    "blowup",
    "blowup_edge_count",
    "density",
    "blowup_density",
    "apportion",
    "LimitCheckReport",
    "blowup_density_limit_check",
    "ConstructionCheck",
    "construction_lagrangian_check",
    "construction_suite",
    "PerTermCheck",
    "SequenceCheckReport",
    "sequence_check",
]

MATERIALIZE_CAP = 2_000_000  # max C(n, r) candidate r-sets for materialization


@dataclass(frozen=True)
class Partition:
    """Disjoint vertex classes covering {1..n}, in class order."""

    parts: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for part in self.parts:
            for v in part:
                if v in seen:
                    raise ValueError(f"vertex {v} appears in two classes")
                seen.add(v)
        n = len(seen)
        if seen and seen != set(range(1, n + 1)):
            raise ValueError("classes must cover exactly {1..n}")

    @classmethod
    def from_sizes(cls, sizes: Sequence[int]) -> "Partition":
        """Contiguous classes: the first size_1 vertices, the next size_2, ..."""
        parts = []
        next_vertex = 1
        for s in sizes:
            s = int(s)
            if s < 0:
                raise ValueError(f"class sizes must be >= 0, got {s}")
            parts.append(tuple(range(next_vertex, next_vertex + s)))
            next_vertex += s
        return cls(tuple(parts))

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(p) for p in self.parts)

    @property
    def n(self) -> int:
        return sum(len(p) for p in self.parts)


def profile(S: Iterable[int], partition: Partition) -> Multiset:
    """Class profile of a vertex set: index i with multiplicity |S ∩ class_i|."""
    vertices = set(int(v) for v in S)
    expansion: list[int] = []
    for i, part in enumerate(partition.parts, start=1):
        expansion.extend([i] * len(vertices & set(part)))
    if len(expansion) != len(vertices):
        missing = vertices - set(itertools.chain.from_iterable(partition.parts))
        raise ValueError(f"vertices {sorted(missing)} are outside the partition")
    return Multiset(expansion)


def blowup(P: Pattern, sizes: Sequence[int], *,
           cap: int = MATERIALIZE_CAP) -> tuple[Hypergraph, Partition]:
    """Materialize the blowup of P with the given class sizes.

    Every edge's profile is an edge of P, and every r-set whose profile is
    an edge of P is included.  Raises CapExceeded when C(n, r) exceeds cap.
    """
    if len(sizes) != P.m:
        raise ValueError(f"expected {P.m} sizes, got {len(sizes)}")
    part = Partition.from_sizes(sizes)
    n = part.n
    if n < 1:
        raise ValueError("blowup needs at least one vertex")
    candidates = math.comb(n, P.r)
    if candidates > cap:
        raise CapExceeded(f"C({n}, {P.r}) = {candidates} r-sets, cap is {cap}")
    edges: list[tuple[int, ...]] = []
    for e in P.edges:
        pools = [
            itertools.combinations(part.parts[i - 1], mult)
            for i, mult in sorted(e.counts().items())
        ]
        for pick in itertools.product(*pools):
            edges.append(tuple(sorted(itertools.chain.from_iterable(pick))))
    return Hypergraph(n, P.r, edges), part


def blowup_edge_count(P: Pattern, sizes: Sequence[int]) -> int:
    """Closed-form edge count: sum over edges of prod_i C(size_i, mult_i)."""
    if len(sizes) != P.m:
        raise ValueError(f"expected {P.m} sizes, got {len(sizes)}")
    sizes = [int(s) for s in sizes]
    total = 0
    for e in P.edges:
        term = 1
        for i, mult in e.counts().items():
            term *= math.comb(sizes[i - 1], mult)
            if term == 0:
                break
        total += term
    return total


def density(G: Hypergraph) -> float:
    """Edge density |edges| / C(n, r); requires n >= r."""
    if G.n < G.r:
        raise ValueError(f"density needs n >= r, got n={G.n}, r={G.r}")
    return G.edge_count / math.comb(G.n, G.r)


def blowup_density(P: Pattern, sizes: Sequence[int]) -> float:
    """Blowup density from the closed-form count, without materializing."""
    n = sum(int(s) for s in sizes)
    if n < P.r:
        raise ValueError(f"density needs n >= r, got n={n}, r={P.r}")
    return blowup_edge_count(P, sizes) / math.comb(n, P.r)


def apportion(x, total: int) -> tuple[int, ...]:
    """Largest-remainder rounding of total * x to integers summing to total.

    Ties in the remainders go to the lowest index, so the result is
    deterministic.
    """
    w = np.asarray(x, dtype=float)
    total = int(total)
    if total < 0:
        raise ValueError("total must be >= 0")
    raw = w * total
    base = np.floor(raw).astype(int)
    left = total - int(base.sum())
    order = sorted(range(w.size), key=lambda i: (-(raw[i] - base[i]), i))
    for i in order[:left]:
        base[i] += 1
    return tuple(int(v) for v in base)


@dataclass
class LimitCheckReport:
    """Blowup densities along a ladder of sizes against the polynomial value."""

    lambda_value: float
    rows: list[dict]
    monotone_decreasing: bool
    o_one_over_n: bool

    @property
    def ok(self) -> bool:
        return self.monotone_decreasing and self.o_one_over_n

    def to_dict(self) -> dict:
        return {
            "lambda_value": self.lambda_value,
            "rows": self.rows,
            "monotone_decreasing": self.monotone_decreasing,
            "o_one_over_n": self.o_one_over_n,
            "ok": self.ok,
        }


def blowup_density_limit_check(P: Pattern, x, scales: Sequence[int], *,
                               cap: int = MATERIALIZE_CAP) -> LimitCheckReport:
    """Check that blowup densities at sizes ~ N*x approach the polynomial value.

    Uses exact closed-form counts, largest-remainder apportionment of N*x,
    and reports the deviation per N, whether it decreases along the ladder,
    and whether deviation * N stays bounded (the empirical 1/N rate).
    """
    w = _as_weights(P.m, x)
    lam = eval_lagrange(P, w)
    rows = []
    deviations = []
    for N in scales:
        N = int(N)
        if N < P.r:
            raise ValueError(f"scale {N} is below r={P.r}")
        if math.comb(N, P.r) > cap:
            raise CapExceeded(f"C({N}, {P.r}) exceeds cap {cap}")
        sizes = apportion(w, N)
        d = blowup_density(P, sizes)
        dev = abs(d - lam)
        deviations.append(dev)
        rows.append({"n": N, "sizes": list(sizes), "density": d, "deviation": dev})
    monotone = all(b <= a + 1e-12 for a, b in zip(deviations, deviations[1:]))
    constants = [dev * row["n"] for dev, row in zip(deviations, rows)]
    bound = 2.0 * max(constants[0], 1e-9)
    o_one_over_n = all(c <= bound for c in constants)
    return LimitCheckReport(lam, rows, monotone, o_one_over_n)


@dataclass
class ConstructionCheck:
    """A blowup's Lagrangian never exceeds the pattern's."""

    pattern_value: float
    construction_value: float
    slack: float
    ok: bool
    converged: bool

    def to_dict(self) -> dict:
        return {
            "pattern_value": self.pattern_value,
            "construction_value": self.construction_value,
            "slack": self.slack,
            "ok": self.ok,
            "converged": self.converged,
        }


def construction_lagrangian_check(P: Pattern, sizes: Sequence[int],
                                  cfg: OptimizerConfig | None = None, *,
                                  slack: float = 1e-6,
                                  cap: int = MATERIALIZE_CAP) -> ConstructionCheck:
    """Materialize a blowup and compare its Lagrangian with the pattern's."""
    cfg = cfg or OptimizerConfig()
    G, _ = blowup(P, sizes, cap=cap)
    rep_c = lagrangian_of_hypergraph(G, cfg)
    rep_p = maximize(P, cfg)
    ok = rep_c.value <= rep_p.value + slack
    return ConstructionCheck(rep_p.value, rep_c.value, slack, ok,
                             rep_c.converged and rep_p.converged)


def construction_suite(trials: int = 20, seed: int = 0,
                       cfg: OptimizerConfig | None = None, *,
                       n_cap: int = 8, slack: float = 1e-8) -> dict:
    """Randomized blowup-vs-pattern inequality checks; JSON-ready report."""
    cfg = cfg or OptimizerConfig()
    rng = np.random.default_rng(seed)
    cases = []
    all_ok = True
    for _ in range(int(trials)):
        m = int(rng.integers(1, 4))
        P = random_pattern(rng, m, 3, allow_empty=False)
        while True:
            sizes = [int(rng.integers(0, 4)) for _ in range(m)]
            if P.r <= sum(sizes) <= n_cap:
                break
        chk = construction_lagrangian_check(P, sizes, cfg, slack=slack)
        all_ok = all_ok and chk.ok
        cases.append({
            "m": m,
            "sizes": sizes,
            "pattern_value": chk.pattern_value,
            "construction_value": chk.construction_value,
            "ok": chk.ok,
        })
    return {"suite": "construction", "trials": int(trials), "slack": slack,
            "cases": cases, "passed": all_ok}


# ---------------------------------------------------------------------------
# Sequence condition checks
# ---------------------------------------------------------------------------


@dataclass
class PerTermCheck:
    """Per-term verdicts for a pattern sequence against a target level."""

    t: int
    m: int
    lambda_value: float
    eps: float
    cond2_ok: bool
    worst_subset: tuple[int, ...]
    worst_subset_value: float
    cond3_ok: bool

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "m": self.m,
            "lambda_value": self.lambda_value,
            "eps": self.eps,
            "cond2_ok": self.cond2_ok,
            "worst_subset": list(self.worst_subset),
            "worst_subset_value": self.worst_subset_value,
            "cond3_ok": self.cond3_ok,
        }


@dataclass
class SequenceCheckReport:
    """Finite-data evidence for the three sequence conditions.

    Condition 1 (the limit) is reported as a trailing-window slope only: a
    finite prefix cannot certify a limit.  Condition 2 passes are conclusive
    up to optimizer certification (values are lower bounds); condition 3
    violations are conclusive for the same reason, passes are evidence.
    """

    lambda0: float
    k: int
    per_t: list[PerTermCheck]
    trend_slope: float | None
    cond2_all: bool
    cond3_all: bool
    verdicts: dict[str, str]

    @property
    def ok(self) -> bool:
        return self.cond2_all and self.cond3_all

    def to_dict(self) -> dict:
        return {
            "lambda0": self.lambda0,
            "k": self.k,
            "per_t": [p.to_dict() for p in self.per_t],
            "trend_slope": self.trend_slope,
            "cond2_all": self.cond2_all,
            "cond3_all": self.cond3_all,
            "verdicts": self.verdicts,
            "ok": self.ok,
        }


def sequence_check(patterns: Sequence[Pattern], k: int, lambda0: float,
                   eps: Sequence[float] | float,
                   cfg: OptimizerConfig | None = None, *,
                   cond3_slack: float = 1e-8) -> SequenceCheckReport:
    """Check a finite pattern list against the sequence conditions.

    Condition 2: Lagrangian of term t at least lambda0 + eps(t).
    Condition 3: every k-index subpattern's Lagrangian at most lambda0
    (checked exhaustively over all C(m_t, k) subsets, with slack for the
    optimizer's float hair).  eps must be supplied explicitly, either as a
    per-term sequence or a single constant.
    """
    cfg = cfg or OptimizerConfig()
    patterns = list(patterns)
    if not patterns:
        raise ValueError("need at least one pattern")
    k = int(k)
    if isinstance(eps, (int, float)):
        eps_list = [float(eps)] * len(patterns)
    else:
        eps_list = [float(v) for v in eps]
        if len(eps_list) < len(patterns):
            raise ValueError(f"eps has {len(eps_list)} entries for {len(patterns)} patterns")
    for t, P in enumerate(patterns, start=1):
        if P.m < k:
            raise ValueError(f"term {t} has m={P.m} < k={k}")

    per_t: list[PerTermCheck] = []
    values = []
    for t, P in enumerate(patterns, start=1):
        rep = maximize(P, cfg)
        values.append(rep.value)
        cond2 = rep.value >= lambda0 + eps_list[t - 1]
        worst_subset: tuple[int, ...] = ()
        worst_value = -math.inf
        for S in itertools.combinations(range(1, P.m + 1), k):
            sub_value = maximize(induced_subpattern(P, S), cfg).value
            if sub_value > worst_value:
                worst_value = sub_value
                worst_subset = S
        cond3 = worst_value <= lambda0 + cond3_slack
        per_t.append(PerTermCheck(t, P.m, rep.value, eps_list[t - 1], cond2,
                                  worst_subset, worst_value, cond3))

    window = min(5, len(values))
    if window >= 2:
        ts = np.arange(len(values) - window, len(values), dtype=float)
        slope = float(np.polyfit(ts, values[-window:], 1)[0])
    else:
        slope = None
    cond2_all = all(p.cond2_ok for p in per_t)
    cond3_all = all(p.cond3_ok for p in per_t)
    verdicts = {
        "condition1": f"reported only (trailing-window slope {slope}); a finite prefix cannot certify a limit",
        "condition2": "pass (certified lower bounds)" if cond2_all
                      else "fail (lower-bound evidence did not reach lambda0 + eps)",
        "condition3": "pass (evidence; optimizer values are lower bounds)" if cond3_all
                      else "fail (conclusive: a subpattern lower bound exceeds lambda0)",
    }
    return SequenceCheckReport(float(lambda0), k, per_t, slope, cond2_all,
                               cond3_all, verdicts)
