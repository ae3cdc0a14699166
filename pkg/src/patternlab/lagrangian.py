"""Evaluation and maximization of pattern density polynomials over the simplex.

The density polynomial of a pattern P = (m, edges) with uniformity r is

    lam(x) = r! * sum_over_edges prod_i x_i^mult(i) / mult(i)!

restricted to the standard simplex (nonnegative weights summing to 1).  Its
maximum over the simplex, the Lagrangian of P, equals the supremum of edge
densities over large blowups of P.  Global maximization is NP-hard in
general (it contains max-clique through the Motzkin-Straus identity), so
:func:`maximize` returns a certified lower bound from multistart projected
gradient ascent, with the KKT stationarity residual reported, and
:func:`grid_oracle` provides exact rational grid maxima as independent
ground truth at desk scale.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterator

import numpy as np

from .errors import CapExceeded
from .patterns import (Hypergraph, Pattern, complete_graph, complete_pattern,
                       offdiagonal_pattern, pattern_of_hypergraph, random_pattern,
                       remove_index)

__all__ = [
    "SimplexPoint",
    "OptimizerConfig",
    "OptimizerReport",
    "MinimalityReport",
    "eval_lagrange",
    "eval_lagrange_unnormalized",
    "grad_lagrange",
    "maximize",
    "grid_oracle",
    "is_minimal",
    "lagrangian_of_hypergraph",
    "project_to_simplex",
    "minimality_suite",
]

# Accept a run as converged when the KKT residual is within this factor of
# the stopping target; ascent stalls near sqrt(eps) in the objective, which
# still leaves the residual orders of magnitude below this at default tol.
KKT_ACCEPT_FACTOR = 1e3

SIMPLEX_SUM_TOL = 1e-12


class SimplexPoint:
    """A point of the standard simplex: nonnegative weights summing to 1.

    The weight vector is validated on construction (sum within 1e-12) and
    exposed as a read-only numpy array.
    """

    __slots__ = ("_w",)

    def __init__(self, weights):
        w = np.array(weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("weights must be a nonempty 1-D sequence")
        if (w < 0).any():
            raise ValueError(f"negative weight {w.min()}")
        total = float(w.sum())
        if abs(total - 1.0) > SIMPLEX_SUM_TOL:
            raise ValueError(f"weights sum to {total}, not 1 within {SIMPLEX_SUM_TOL}")
        w.setflags(write=False)
        self._w = w

    @classmethod
    def uniform(cls, m: int) -> "SimplexPoint":
        return cls(np.full(int(m), 1.0 / int(m)))

    @property
    def weights(self) -> np.ndarray:
        return self._w

    @property
    def dim(self) -> int:
        return self._w.size

    def __len__(self) -> int:
        return self._w.size

    def __iter__(self):
        return iter(self._w)

    def __getitem__(self, i):
        return self._w[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, SimplexPoint) and np.array_equal(self._w, other._w)

    def __repr__(self) -> str:
        return f"SimplexPoint({self._w.tolist()})"


@dataclass(frozen=True)
class OptimizerConfig:
    """Multistart ascent settings.

    restarts counts the random (symmetric Dirichlet) starts drawn on top of
    the deterministic subset-barycenter starts; tolerance is the KKT
    stationarity target that stops a run, and a run is flagged converged
    when its final residual is within KKT_ACCEPT_FACTOR of that target.
    """

    restarts: int = 64
    max_iterations: int = 5000
    tolerance: float = 1e-10
    seed: int = 0
    support_threshold: float = 1e-7

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.support_threshold < 0:
            raise ValueError("support_threshold must be >= 0")


@dataclass
class OptimizerReport:
    """Outcome of a simplex maximization.

    value is a certified lower bound on the true maximum (it is the exact
    polynomial value at argmax, up to float rounding).  support lists the
    1-based coordinates of argmax above the support threshold.  oracle_gap
    is value minus an exact grid-oracle value when one was requested.
    """

    value: float
    argmax: SimplexPoint
    support: tuple[int, ...]
    restarts_used: int
    converged: bool
    kkt_residual: float
    oracle_gap: float | None = None

    def to_dict(self) -> dict:
        out = {
            "value": self.value,
            "argmax": self.argmax.weights.tolist(),
            "support": list(self.support),
            "restarts_used": self.restarts_used,
            "converged": self.converged,
            "kkt_residual": self.kkt_residual,
        }
        if self.oracle_gap is not None:
            out["oracle_gap"] = self.oracle_gap
        return out


# ---------------------------------------------------------------------------
# Polynomial tables
# ---------------------------------------------------------------------------


@lru_cache(maxsize=8192)
def _polynomial(P: Pattern) -> tuple[np.ndarray, np.ndarray]:
    """Exponent matrix (edges x m) and float coefficients r!/prod(mult!)."""
    A = np.zeros((len(P.edges), P.m), dtype=np.int64)
    coef = np.empty(len(P.edges), dtype=float)
    r_fact = math.factorial(P.r)
    for row, e in enumerate(P.edges):
        denom = 1
        for i, mult in e.counts().items():
            A[row, i - 1] = mult
            denom *= math.factorial(mult)
        coef[row] = r_fact / denom
    A.setflags(write=False)
    coef.setflags(write=False)
    return A, coef


@lru_cache(maxsize=8192)
def _integer_terms(P: Pattern) -> tuple[tuple[int, tuple[tuple[int, int], ...]], ...]:
    """Per edge: the integer multinomial coefficient r!/prod(mult!) and the
    (0-based index, multiplicity) pairs.  Used by the exact grid oracle."""
    r_fact = math.factorial(P.r)
    terms = []
    for e in P.edges:
        items = tuple((i - 1, mult) for i, mult in sorted(e.counts().items()))
        denom = 1
        for _, mult in items:
            denom *= math.factorial(mult)
        terms.append((r_fact // denom, items))
    return tuple(terms)


def _as_weights(m: int, x) -> np.ndarray:
    if isinstance(x, SimplexPoint):
        w = x.weights
    else:
        w = SimplexPoint(x).weights
    if w.size != m:
        raise ValueError(f"point has dimension {w.size}, pattern has m={m}")
    return w


def _value_rows(A: np.ndarray, coef: np.ndarray, X: np.ndarray) -> np.ndarray:
    # 0.0 ** 0 == 1.0 in numpy, so absent indices contribute factor 1.
    return (X[:, None, :] ** A[None, :, :]).prod(axis=2) @ coef


def _grad_rows(A: np.ndarray, coef: np.ndarray, X: np.ndarray) -> np.ndarray:
    S, m = X.shape
    if A.shape[0] == 0:
        return np.zeros((S, m))
    pw = X[:, None, :] ** A[None, :, :]  # S x E x m
    # prod over i != k via exclusive prefix/suffix products along the index axis
    prefix = np.ones_like(pw)
    suffix = np.ones_like(pw)
    if m > 1:
        np.cumprod(pw[:, :, :-1], axis=2, out=prefix[:, :, 1:])
        suffix[:, :, :-1] = np.cumprod(pw[:, :, :0:-1], axis=2)[:, :, ::-1]
    col = A[None, :, :] * X[:, None, :] ** np.maximum(A - 1, 0)[None, :, :]
    return np.einsum("sek,sek,e->sk", prefix * suffix, col, coef)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def eval_lagrange(P: Pattern, x) -> float:
    """Density polynomial of P at a simplex point x (dimension m)."""
    w = _as_weights(P.m, x)
    A, coef = _polynomial(P)
    return float(_value_rows(A, coef, w[None, :])[0])


def eval_lagrange_unnormalized(P: Pattern, y) -> float:
    """Density polynomial at an arbitrary nonnegative vector (no simplex check).

    Plumbing for homogeneity checks and for evaluating block slices of a
    glued point, which sum to less than 1.
    """
    w = np.asarray(y, dtype=float)
    if w.ndim != 1 or w.size != P.m:
        raise ValueError(f"point has dimension {w.size}, pattern has m={P.m}")
    if (w < 0).any():
        raise ValueError(f"negative weight {w.min()}")
    A, coef = _polynomial(P)
    return float(_value_rows(A, coef, w[None, :])[0])


def grad_lagrange(P: Pattern, x) -> np.ndarray:
    """Gradient of the density polynomial at x; satisfies x . grad = r * value."""
    w = _as_weights(P.m, x)
    A, coef = _polynomial(P)
    return _grad_rows(A, coef, w[None, :])[0]


# ---------------------------------------------------------------------------
# Simplex projection (sorting-based Euclidean projection)
# ---------------------------------------------------------------------------


def _project_rows(Y: np.ndarray) -> np.ndarray:
    S, m = Y.shape
    U = np.sort(Y, axis=1)[:, ::-1]
    css = np.cumsum(U, axis=1)
    j = np.arange(1, m + 1)
    cond = U + (1.0 - css) / j > 0.0
    # cond[:, 0] is always true; rho is the last true position per row.
    rho = m - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = (1.0 - css[np.arange(S), rho]) / (rho + 1.0)
    return np.maximum(Y + theta[:, None], 0.0)


def project_to_simplex(y) -> np.ndarray:
    """Euclidean projection of a vector onto the standard simplex."""
    w = np.asarray(y, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("expected a nonempty 1-D vector")
    return _project_rows(w[None, :])[0]


def _kkt_rows(X: np.ndarray, G: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Stationarity residual per row: on the support the gradient must equal
    the multiplier mu = x . grad; off it, it must not exceed mu."""
    act = X > 1e-12
    dev = G - mu[:, None]
    r_eq = np.where(act, np.abs(dev), 0.0).max(axis=1)
    r_in = np.where(~act, np.maximum(dev, 0.0), 0.0).max(axis=1)
    return np.maximum(r_eq, r_in)


def _hessian(A: np.ndarray, coef: np.ndarray, x: np.ndarray) -> np.ndarray:
    m = x.size
    H = np.zeros((m, m))
    if A.shape[0] == 0:
        return H
    pw = x[None, :] ** A
    A1 = np.maximum(A - 1, 0)
    A2 = np.maximum(A - 2, 0)
    for j in range(m):
        aj = A[:, j]
        tmp = pw.copy()
        tmp[:, j] = aj * (aj - 1) * x[j] ** A2[:, j]
        H[j, j] = coef @ tmp.prod(axis=1)
        colj = aj * x[j] ** A1[:, j]
        for k in range(j + 1, m):
            ak = A[:, k]
            tmp = pw.copy()
            tmp[:, j] = colj
            tmp[:, k] = ak * x[k] ** A1[:, k]
            H[j, k] = H[k, j] = coef @ tmp.prod(axis=1)
    return H


def _kkt_polish(A: np.ndarray, coef: np.ndarray, x: np.ndarray,
                max_steps: int = 25) -> np.ndarray:
    """Newton refinement of stationarity on the support face of x.

    Ascent alone floors the KKT residual near sqrt(eps) because objective
    comparisons hit float noise; equalizing the support gradient by Newton
    steps takes the residual to machine precision.  Guarded: any step that
    leaves the face, blows up, or is large is rejected and the input point
    survives unchanged.
    """
    x = x.copy()
    s = np.nonzero(x > 1e-12)[0]
    if s.size == 0:
        return x
    k = s.size
    for _ in range(max_steps):
        g = _grad_rows(A, coef, x[None, :])[0]
        mu = float(x @ g)
        res = g[s] - mu
        if np.abs(res).max() <= 1e-14 * max(1.0, abs(mu)):
            break
        H = _hessian(A, coef, x)[np.ix_(s, s)]
        J = np.zeros((k + 1, k + 1))
        J[:k, :k] = H
        J[:k, k] = -1.0
        J[k, :k] = 1.0
        rhs = np.concatenate([-res, [0.0]])
        try:
            step = np.linalg.solve(J, rhs)
        except np.linalg.LinAlgError:
            break
        dx = step[:k]
        if not np.isfinite(dx).all() or np.abs(dx).max() > 0.1:
            break
        trial = x.copy()
        trial[s] = x[s] + dx
        if (trial[s] <= 0).any():
            break
        x = trial
    return x


def _describe(A: np.ndarray, coef: np.ndarray, x: np.ndarray):
    """(value, kkt residual, multiplier, x) at a single point."""
    f = float(_value_rows(A, coef, x[None, :])[0])
    g = _grad_rows(A, coef, x[None, :])[0]
    mu = float(x @ g)
    kk = float(_kkt_rows(x[None, :], g[None, :], np.array([mu]))[0])
    return f, kk, mu, x


def _finish_row(A: np.ndarray, coef: np.ndarray, x: np.ndarray):
    """Refine a plateaued iterate.

    Degenerate boundary optima (a coordinate decays like 1/k because its
    multiplier vanishes) plateau far from machine precision.  Candidates:
    the point itself, its support-face Newton polish, and polishes of
    snapped copies with near-zero coordinates pinned to the boundary.  The
    best objective value wins, so this step can only sharpen the result.
    """
    cands = [_describe(A, coef, x)]
    cands.append(_describe(A, coef, _kkt_polish(A, coef, x)))
    support_size = int((x > 1e-12).sum())
    for threshold in (1e-2, 1e-3):
        y = x.copy()
        y[y < threshold] = 0.0
        total = y.sum()
        if total <= 0 or int((y > 0).sum()) == support_size:
            continue
        y /= total
        cands.append(_describe(A, coef, _kkt_polish(A, coef, y)))
    best_f = max(c[0] for c in cands)
    viable = [c for c in cands if c[0] >= best_f - 1e-12]
    return min(viable, key=lambda c: (c[1], tuple(c[3])))


# ---------------------------------------------------------------------------
# Multistart projected gradient ascent
# ---------------------------------------------------------------------------


def _barycenter_starts(m: int) -> np.ndarray:
    """Barycenters of index subsets; these hit symmetric optima exactly.

    All nonempty subsets for m <= 10; beyond that, singletons, pairs and the
    full barycenter (the exhaustive list would grow exponentially).
    """
    if m <= 10:
        subsets = itertools.chain.from_iterable(
            itertools.combinations(range(m), size) for size in range(1, m + 1)
        )
    else:
        subsets = itertools.chain(
            itertools.combinations(range(m), 1),
            itertools.combinations(range(m), 2),
            [tuple(range(m))],
        )
    rows = []
    for sub in subsets:
        x = np.zeros(m)
        x[list(sub)] = 1.0 / len(sub)
        rows.append(x)
    return np.array(rows)


def _random_starts(rng: np.random.Generator, m: int, count: int) -> np.ndarray:
    E = rng.standard_exponential((count, m))
    sums = E.sum(axis=1, keepdims=True)
    sums[sums <= 0] = 1.0
    return E / sums


def _maximize_arrays(A: np.ndarray, coef: np.ndarray, m: int, cfg: OptimizerConfig):
    """Multistart projected gradient ascent with Armijo backtracking.

    All starts advance in lockstep (vectorized rows).  Returns the winning
    row: (x, value, kkt_residual, converged, starts_used).  Ties in value
    within 1e-12 go to the lexicographically smallest point.
    """
    value_of = lambda X: _value_rows(A, coef, X)
    grad_of = lambda X: _grad_rows(A, coef, X)

    rng = np.random.default_rng(cfg.seed)
    X = np.vstack([_barycenter_starts(m), _random_starts(rng, m, cfg.restarts)])
    S = X.shape[0]
    F = value_of(X)
    t = np.ones(S)
    alive = np.ones(S, dtype=bool)
    stalled = np.zeros(S, dtype=int)
    needs_finish = np.zeros(S, dtype=bool)

    for _ in range(cfg.max_iterations):
        G = grad_of(X)
        mu = (X * G).sum(axis=1)
        kkt = _kkt_rows(X, G, mu)
        target = cfg.tolerance * np.maximum(1.0, np.abs(mu))
        alive &= kkt > target
        if not alive.any():
            break
        idx = np.nonzero(alive)[0]
        t[idx] = np.minimum(t[idx] * 2.0, 16.0)
        genuine = np.zeros(S, dtype=bool)
        todo = idx
        while todo.size:
            Y = _project_rows(X[todo] + t[todo, None] * G[todo])
            D = Y - X[todo]
            moved = np.abs(D).max(axis=1) > 1e-15
            gd = (G[todo] * D).sum(axis=1)
            FY = value_of(Y)
            noise = 1e-15 * np.maximum(1.0, np.abs(F[todo]))
            # The noise slack keeps the line search alive once improvements
            # drop below float resolution; progress below the stall cutoff
            # only bumps the stall counter.
            accept = FY >= F[todo] + 1e-4 * gd - noise
            take = accept & moved
            genuine[todo[take]] = FY[take] > F[todo][take] + 1e-9 * np.maximum(
                1.0, np.abs(F[todo][take]))
            X[todo[take]] = Y[take]
            F[todo[take]] = FY[take]
            fixed = todo[accept & ~moved]  # projection fixed point
            alive[fixed] = False
            needs_finish[fixed] = True
            rest = todo[~accept]
            t[rest] *= 0.5
            exhausted = t[rest] < 1e-14
            alive[rest[exhausted]] = False
            needs_finish[rest[exhausted]] = True
            todo = rest[~exhausted]
        stalled[idx] = np.where(genuine[idx], 0, stalled[idx] + 1)
        slow = stalled >= 5  # plateaued: progress below the stall cutoff
        needs_finish |= alive & slow
        alive &= ~slow
    needs_finish |= alive  # ran out of iterations

    # Refine plateaued rows that could still contend for the maximum; rows
    # that plateaued at the same point share one refinement.
    contenders = needs_finish & (F >= F.max() - 1e-6)
    finished: dict[tuple, tuple[float, np.ndarray]] = {}
    for row in np.nonzero(contenders)[0]:
        key = tuple(np.round(X[row], 9))
        if key not in finished:
            f_row, _, _, x_row = _finish_row(A, coef, X[row])
            finished[key] = (f_row, x_row)
        F[row], X[row] = finished[key]

    vmax = F.max()
    candidates = np.nonzero(F >= vmax - 1e-12)[0]
    best = int(min(candidates, key=lambda s: tuple(X[s])))
    f_best, kkt_best, mu_best, x_best = _describe(A, coef, X[best].copy())
    accept_tol = KKT_ACCEPT_FACTOR * cfg.tolerance * max(1.0, abs(mu_best))
    return x_best, f_best, kkt_best, bool(kkt_best <= accept_tol), S


def maximize(P: Pattern, cfg: OptimizerConfig | None = None) -> OptimizerReport:
    """Best density-polynomial value found over the simplex.

    The report's value is a certified lower bound on the Lagrangian of P
    (it is the polynomial evaluated at the reported point); converged means
    the KKT stationarity residual met the acceptance threshold.
    """
    cfg = cfg or OptimizerConfig()
    A, coef = _polynomial(P)
    if P.m == 1:
        x = np.ones(1)
        value = float(_value_rows(A, coef, x[None, :])[0])
        point = SimplexPoint(x)
        support = (1,) if x[0] > cfg.support_threshold else ()
        return OptimizerReport(value, point, support, 1, True, 0.0)
    x, value, kkt, converged, used = _maximize_arrays(A, coef, P.m, cfg)
    point = SimplexPoint(x)
    support = tuple(int(i + 1) for i in np.nonzero(x > cfg.support_threshold)[0])
    return OptimizerReport(value, point, support, used, converged, kkt)


def lagrangian_of_hypergraph(G: Hypergraph, cfg: OptimizerConfig | None = None) -> OptimizerReport:
    """Lagrangian of a hypergraph: maximize the pattern of its edge set."""
    return maximize(pattern_of_hypergraph(G), cfg)


# ---------------------------------------------------------------------------
# Exact grid oracle
# ---------------------------------------------------------------------------


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def grid_oracle(P: Pattern, d: int, *, cap: int = 1_000_000) -> Fraction:
    """Exact maximum of the density polynomial over denominator-d grid points.

    Enumerates every simplex point with coordinates k_i/d in exact integer
    arithmetic, so the returned Fraction is an unarguable lower bound on the
    Lagrangian, converging to it as d grows.  Raises CapExceeded when the
    C(d+m-1, m-1) grid is larger than cap.
    """
    d = int(d)
    if d < 1:
        raise ValueError(f"denominator must be >= 1, got {d}")
    points = math.comb(d + P.m - 1, P.m - 1)
    if points > cap:
        raise CapExceeded(f"grid has {points} points, cap is {cap}")
    terms = _integer_terms(P)
    best = 0
    for k in _compositions(d, P.m):
        total = 0
        for mc, items in terms:
            term = mc
            for i, mult in items:
                ki = k[i]
                if ki == 0:
                    term = 0
                    break
                term *= ki**mult
            total += term
        if total > best:
            best = total
    return Fraction(best, d**P.r)


# ---------------------------------------------------------------------------
# Minimality
# ---------------------------------------------------------------------------


@dataclass
class MinimalityReport:
    """Per-index Lagrangian drop when that index is removed.

    minimal is true when every removal drops the value by more than the
    margin tolerance; margins[i] = value(P) - value(P without i).
    """

    minimal: bool
    value: float
    margins: dict[int, float]
    margin_tolerance: float
    converged: bool

    def to_dict(self) -> dict:
        return {
            "minimal": self.minimal,
            "value": self.value,
            "margins": {str(i): g for i, g in self.margins.items()},
            "margin_tolerance": self.margin_tolerance,
            "converged": self.converged,
        }


def is_minimal(P: Pattern, cfg: OptimizerConfig | None = None, *,
               margin_tolerance: float = 1e-9) -> MinimalityReport:
    """Does removing any single index strictly decrease the Lagrangian?

    For m=1 the removal leaves nothing, whose Lagrangian is 0 by convention.
    """
    cfg = cfg or OptimizerConfig()
    base = maximize(P, cfg)
    margins: dict[int, float] = {}
    converged = base.converged
    for i in range(1, P.m + 1):
        if P.m == 1:
            sub_value = 0.0
        else:
            sub = maximize(remove_index(P, i), cfg)
            sub_value = sub.value
            converged = converged and sub.converged
        margins[i] = base.value - sub_value
    minimal = all(g > margin_tolerance for g in margins.values())
    return MinimalityReport(minimal, base.value, margins, margin_tolerance, converged)


# ---------------------------------------------------------------------------
# Verification suite: minimality and full-support argmaxes
# ---------------------------------------------------------------------------


def minimality_suite(cfg: OptimizerConfig | None = None, seed: int = 0) -> dict:
    """Check minimality verdicts on stock patterns and the full-support
    property of maximizers of minimal patterns.  Returns a JSON-ready report."""
    cfg = cfg or OptimizerConfig()
    cases = []
    expected_minimal = [
        ("one-heavy-edge", Pattern(2, 3, [[1, 1, 2]]), True),
        ("crossing-triples", Pattern(2, 3, [[1, 1, 2], [1, 2, 2]]), True),
        ("offdiagonal-3-3", offdiagonal_pattern(3, 3), True),
        ("complete-4-3", complete_pattern(4, 3), True),
        ("complete-graph-5", pattern_of_hypergraph(complete_graph(5)), True),
        ("untouched-index", Pattern(3, 3, [[1, 1, 2]]), False),
    ]
    rng = np.random.default_rng(seed)
    for t in range(4):
        expected_minimal.append((f"random-{t}", random_pattern(rng, 3, 3, allow_empty=False), None))

    all_ok = True
    for name, P, expect in expected_minimal:
        rep = is_minimal(P, cfg)
        ok = True
        if expect is not None:
            ok = rep.minimal == expect
        full_support = None
        if rep.minimal:
            arg = maximize(P, cfg).argmax
            full_support = bool((arg.weights > cfg.support_threshold).all())
            ok = ok and full_support
        all_ok = all_ok and ok
        cases.append({
            "name": name,
            "minimal": rep.minimal,
            "expected": expect,
            "value": rep.value,
            "min_margin": min(rep.margins.values()),
            "full_support_argmax": full_support,
            "ok": ok,
        })
    return {"suite": "minimality", "cases": cases, "passed": all_ok}
