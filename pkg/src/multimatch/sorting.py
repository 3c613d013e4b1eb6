"""Concordance of couple pairs, sorting-pattern checks and transfers."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import networkx as nx

from ._transport import feasible_plan
from .market import ComplementarityPattern, MarketInstance, MatchingMeasure


@dataclass(frozen=True)
class PairClass:
    pn_weak_concordant: bool
    pn_concordant: bool
    np_weak_concordant: bool
    np_concordant: bool


def _products(c1, c2, pattern: ComplementarityPattern):
    (x, y), (xp, yp) = c1, c2
    if len(x) != len(xp) or len(y) != len(yp):
        raise ValueError("couples have different dimensions")
    pattern.check_range(len(x), len(y))
    pos = [(x[i - 1] - xp[i - 1]) * (y[j - 1] - yp[j - 1]) for i, j in sorted(pattern.P)]
    neg = [(x[p - 1] - xp[p - 1]) * (y[q - 1] - yp[q - 1]) for p, q in sorted(pattern.N)]
    return pos, neg


def classify_pair(c1, c2, pattern: ComplementarityPattern, tol: float = 0.0) -> PairClass:
    """Concordance flags for two couples ``(x, y)`` and ``(x', y')``.

    A product within ``tol`` of zero counts as zero.
    """
    pos, neg = _products(c1, c2, pattern)
    pn_weak = all(d >= -tol for d in pos) and all(d <= tol for d in neg)
    np_weak = all(d <= tol for d in pos) and all(d >= -tol for d in neg)
    pn = pn_weak and (any(d > tol for d in pos) or any(d < -tol for d in neg))
    npc = np_weak and (any(d < -tol for d in pos) or any(d > tol for d in neg))
    return PairClass(pn_weak, pn, np_weak, npc)


@dataclass(frozen=True)
class SortCheck:
    """Verdict of a sorting-pattern check.

    ``witness`` is the lexicographically smallest violating pair of support
    cells (in canonical cell order), or ``None`` when the pattern holds.
    """

    holds: bool
    witness: tuple | None = None
    mass_tol: float = 0.0
    detail: str = ""

    def __bool__(self) -> bool:
        return self.holds


def _support_pairs(M: MatchingMeasure, mass_tol: float):
    support = M.support(mass_tol)
    return itertools.combinations(support, 2)


def check_global_pn(M: MatchingMeasure, pattern: ComplementarityPattern, mass_tol: float = 0.0,
                    tol: float = 0.0) -> SortCheck:
    """Every pair of positive-mass cells is P,N weak concordant."""
    for a, b in _support_pairs(M, mass_tol):
        if not classify_pair(a, b, pattern, tol).pn_weak_concordant:
            return SortCheck(False, (a, b), mass_tol, "pair is not P,N weak concordant")
    return SortCheck(True, None, mass_tol)


def check_weak_pn(M: MatchingMeasure, pattern: ComplementarityPattern, mass_tol: float = 0.0,
                  tol: float = 0.0) -> SortCheck:
    """No pair of positive-mass cells is N,P concordant."""
    for a, b in _support_pairs(M, mass_tol):
        if classify_pair(a, b, pattern, tol).np_concordant:
            return SortCheck(False, (a, b), mass_tol, "pair is N,P concordant")
    return SortCheck(True, None, mass_tol)


def _agree_off(u, v, k: int, eq_tol: float) -> bool:
    return all(abs(a - b) <= eq_tol for idx, (a, b) in enumerate(zip(u, v)) if idx != k)


def check_within_group(M: MatchingMeasure, pattern: ComplementarityPattern, mass_tol: float = 0.0,
                       tol: float = 0.0, eq_tol: float = 0.0) -> SortCheck:
    """Positive (negative) sorting on each (i, j) in P (N) among couples that
    agree on every other firm and worker attribute.

    ``eq_tol`` is the tolerance for "agree"; the default demands exact
    equality.
    """
    support = M.support(mass_tol)
    if support:
        pattern.check_range(len(support[0][0]), len(support[0][1]))
    rules = [(i, j, 1) for i, j in pattern.P] + [(p, q, -1) for p, q in pattern.N]
    worst = None
    for a, b in itertools.combinations(support, 2):
        (x, y), (xp, yp) = a, b
        for i, j, sign in sorted(rules):
            if not (_agree_off(x, xp, i - 1, eq_tol) and _agree_off(y, yp, j - 1, eq_tol)):
                continue
            if sign * (xp[i - 1] - x[i - 1]) * (yp[j - 1] - y[j - 1]) < -tol:
                kind = "positive" if sign > 0 else "negative"
                worst = (a, b, f"within-group {kind} sorting fails on ({i},{j})")
                break
        if worst:
            break
    if worst:
        return SortCheck(False, worst[:2], mass_tol, worst[2])
    return SortCheck(True, None, mass_tol)


# --------------------------------------------------------------------------
# transfers


class InsufficientMassError(ValueError):
    """A transfer would drive a losing cell negative."""


@dataclass(frozen=True)
class Transfer:
    """Move ``alpha`` from (x, y'), (x', y) onto (x, y), (x', y')."""

    x: tuple
    y: tuple
    xp: tuple
    yp: tuple
    alpha: float = 1

    @property
    def receiving(self) -> tuple:
        return (self.x, self.y), (self.xp, self.yp)

    @property
    def losing(self) -> tuple:
        return (self.x, self.yp), (self.xp, self.y)

    def scaled(self, alpha) -> "Transfer":
        return Transfer(self.x, self.y, self.xp, self.yp, alpha)

    def is_pn_improving(self, pattern: ComplementarityPattern, tol: float = 0.0) -> bool:
        return (
            classify_pair(*self.receiving, pattern, tol).pn_weak_concordant
            and classify_pair(*self.losing, pattern, tol).np_weak_concordant
        )


def apply_transfer(M: MatchingMeasure, t: Transfer, pattern: ComplementarityPattern | None = None,
                   tol: float = 0.0) -> MatchingMeasure:
    """Return ``M`` after the transfer; marginals are unchanged by construction.

    With ``pattern`` given, the transfer must be P,N concordance improving.
    """
    if t.alpha < 0:
        raise ValueError("transfer mass must be nonnegative")
    if pattern is not None and not t.is_pn_improving(pattern):
        raise ValueError("transfer is not P,N concordance improving for this pattern")
    if t.alpha == 0:
        return M
    cells = M.as_dict()
    for c in t.losing:
        have = cells.get(c, 0)
        if have < t.alpha - tol:
            raise InsufficientMassError(f"cell {c[0]}->{c[1]} has {have}, transfer needs {t.alpha}")
    for c in t.losing:
        cells[c] = cells.get(c, 0) - t.alpha
    for c in t.receiving:
        cells[c] = cells.get(c, 0) + t.alpha
    return MatchingMeasure.from_dict(cells)


# --------------------------------------------------------------------------
# existence of a globally sorted coupling


@dataclass(frozen=True)
class GlobalSortingResult:
    """``exists`` is ``None`` when the search budget ran out."""

    exists: bool | None
    witness: MatchingMeasure | None
    status: str  # "found" | "none" | "inconclusive"
    explored: int


def exists_global_pn(m: MarketInstance, pattern: ComplementarityPattern, budget: int = 10**6,
                     precision: int = 9) -> GlobalSortingResult:
    """Search for a coupling of ``m`` whose support is pairwise P,N weak concordant.

    Any such support is a clique of the compatibility graph on cells
    (edges join P,N weak concordant cells), hence lies inside a maximal
    clique. The maximal cliques are enumerated (Bron-Kerbosch) and each one
    is tested with a transportation feasibility LP. ``budget`` bounds the
    number of cliques examined.
    """
    pattern.check_range(m.K, m.L)
    xs = [x for x, w in m.firms.atoms if w > 0]
    ys = [y for y, w in m.workers.atoms if w > 0]
    supply = [w for _, w in m.firms.atoms if w > 0]
    demand = [w for _, w in m.workers.atoms if w > 0]
    cells = [(r, c) for r in range(len(xs)) for c in range(len(ys))]
    G = nx.Graph()
    G.add_nodes_from(cells)
    for a, b in itertools.combinations(cells, 2):
        if classify_pair((xs[a[0]], ys[a[1]]), (xs[b[0]], ys[b[1]]), pattern).pn_weak_concordant:
            G.add_edge(a, b)
    explored = 0
    for clique in nx.find_cliques(G):
        explored += 1
        if explored > budget:
            return GlobalSortingResult(None, None, "inconclusive", explored - 1)
        rows = {r for r, _ in clique}
        cols = {c for _, c in clique}
        if len(rows) < len(xs) or len(cols) < len(ys):
            continue
        members = set(clique)
        allowed = [[(r, c) in members for c in range(len(ys))] for r in range(len(xs))]
        plan = feasible_plan(supply, demand, allowed, precision)
        if plan is not None:
            M = MatchingMeasure.from_matrix(xs, ys, plan)
            return GlobalSortingResult(True, M, "found", explored)
    return GlobalSortingResult(False, None, "none", explored)
