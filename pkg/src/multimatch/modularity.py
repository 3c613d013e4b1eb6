"""Pairwise super/submodularity and P,N modularity of output functions.

All checks are finite: double differences are evaluated on a grid of firm
and worker attribute vectors, so a verdict is a statement about that grid
only. For output functions that can be evaluated anywhere (quadratic or
callable) the grid is first completed to the Cartesian product of the
per-coordinate values, so that "other attributes held fixed" comparisons
exist even on sparse supports.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

from .market import (
    ComplementarityPattern,
    MarketInstance,
    MatchingMeasure,
    OutputSpec,
    Quadratic,
)


def grid_vectors(grid) -> tuple[list, list]:
    """Firm and worker attribute vectors of a market, matching or ``(xs, ys)`` pair."""
    if isinstance(grid, MarketInstance):
        return grid.firms.support, grid.workers.support
    if isinstance(grid, MatchingMeasure):
        xs = sorted({x for (x, _), _ in grid.cells})
        ys = sorted({y for (_, y), _ in grid.cells})
        return xs, ys
    xs, ys = grid
    return sorted({tuple(x) for x in xs}), sorted({tuple(y) for y in ys})


def complete_grid(vectors: Sequence[tuple]) -> list:
    """Cartesian product of the distinct values taken by each coordinate."""
    if not vectors:
        return []
    axes = [sorted({v[k] for v in vectors}) for k in range(len(vectors[0]))]
    return [tuple(p) for p in itertools.product(*axes)]


def _prepare(Q: OutputSpec, grid, complete: bool | None) -> tuple[list, list]:
    xs, ys = grid_vectors(grid)
    if complete is None:
        complete = getattr(Q, "everywhere_defined", True)
    if complete:
        xs, ys = complete_grid(xs), complete_grid(ys)
    return xs, ys


def double_difference(Q: OutputSpec, x, xp, y, yp):
    """{Q(x',y') - Q(x,y')} - {Q(x',y) - Q(x,y)}."""
    return Q(xp, yp) - Q(x, yp) - Q(xp, y) + Q(x, y)


def _ordered_pairs(vectors: list, i: int) -> list:
    """Pairs (v, v') agreeing off coordinate ``i`` (0-based) with v_i < v'_i."""
    groups: dict = defaultdict(list)
    for v in vectors:
        groups[v[:i] + v[i + 1:]].append(v)
    out = []
    for key in sorted(groups):
        members = sorted(groups[key], key=lambda v: v[i])
        for a, b in itertools.combinations(members, 2):
            if a[i] < b[i]:
                out.append((a, b))
    return out


@dataclass(frozen=True)
class PairwiseVerdict:
    """Sign classification of the (i, j) double differences on a grid.

    ``super_witness`` is the first quadruple ``(x, x', y, y')`` with a
    negative double difference, ``sub_witness`` the first with a positive one.
    ``degenerate`` means no quadruple could be formed (a coordinate takes a
    single value on the grid), so every verdict is vacuous.
    """

    supermodular: bool
    strictly_supermodular: bool
    submodular: bool
    strictly_submodular: bool
    super_witness: tuple | None = None
    sub_witness: tuple | None = None
    degenerate: bool = False
    n_quadruples: int = 0

    @property
    def modular(self) -> bool:
        return self.supermodular and self.submodular

    @property
    def witness(self) -> tuple | None:
        if not self.supermodular and not self.submodular:
            return self.super_witness
        return None


def check_pairwise(
    Q: OutputSpec,
    i: int,
    j: int,
    grid,
    eps: float = 0.0,
    tol: float = 0.0,
    complete: bool | None = None,
) -> PairwiseVerdict:
    """Classify Q as i,j supermodular and/or submodular on ``grid``.

    Parameters
    ----------
    Q : OutputSpec
    i, j : int
        1-based firm and worker attribute indices.
    grid : MarketInstance, MatchingMeasure or (xs, ys)
    eps : float
        Strictness margin: strict means double difference > eps everywhere.
    tol : float
        Slack for the weak inequalities (a double difference within ``tol``
        of zero counts as zero).
    complete : bool, optional
        Complete the grid to a Cartesian product first. Defaults to whether
        Q is defined everywhere.
    """
    xs, ys = _prepare(Q, grid, complete)
    if not xs or not ys:
        raise ValueError("grid is empty")
    K, L = len(xs[0]), len(ys[0])
    if not (1 <= i <= K and 1 <= j <= L):
        raise IndexError(f"attribute pair {(i, j)} outside [1,{K}]x[1,{L}]")
    xpairs, ypairs = _ordered_pairs(xs, i - 1), _ordered_pairs(ys, j - 1)
    n = 0
    sup = sub = True
    ssup = ssub = True
    sup_w = sub_w = None
    for x, xp in xpairs:
        for y, yp in ypairs:
            dd = double_difference(Q, x, xp, y, yp)
            n += 1
            if dd < -tol:
                sup = False
                if sup_w is None:
                    sup_w = (x, xp, y, yp)
            if dd > tol:
                sub = False
                if sub_w is None:
                    sub_w = (x, xp, y, yp)
            if not dd > eps:
                ssup = False
            if not dd < -eps:
                ssub = False
    if n == 0:
        return PairwiseVerdict(True, False, True, False, degenerate=True)
    return PairwiseVerdict(sup, ssup and sup, sub, ssub and sub, sup_w, sub_w, False, n)


@dataclass(frozen=True)
class PNClassification:
    """Result of :func:`classify_pn`.

    ``pattern`` holds the pairs that are supermodular but not modular (P) and
    submodular but not modular (N). ``strict`` lists pairs whose sign is
    strict on every quadruple. ``violations`` lists ``(i, j, witness)`` for
    pairs that change sign. ``degenerate`` lists pairs with no quadruple.
    """

    pattern: ComplementarityPattern
    strict: frozenset
    violations: tuple
    degenerate: frozenset = frozenset()
    verdicts: dict = field(default_factory=dict, compare=False)

    def __iter__(self):
        return iter((self.pattern, self.strict, self.violations))


def classify_pn(
    Q: OutputSpec, grid, eps: float = 0.0, tol: float = 0.0, complete: bool | None = None
) -> PNClassification:
    """Largest pattern (P, N) for which Q is P,N modular on the grid."""
    xs, ys = _prepare(Q, grid, complete)
    K, L = len(xs[0]), len(ys[0])
    P, N, strict, violations, degenerate = set(), set(), set(), [], set()
    verdicts = {}
    for i in range(1, K + 1):
        for j in range(1, L + 1):
            v = check_pairwise(Q, i, j, (xs, ys), eps, tol, complete=False)
            verdicts[(i, j)] = v
            if v.degenerate:
                degenerate.add((i, j))
            elif v.modular:
                pass
            elif v.supermodular:
                P.add((i, j))
                if v.strictly_supermodular:
                    strict.add((i, j))
            elif v.submodular:
                N.add((i, j))
                if v.strictly_submodular:
                    strict.add((i, j))
            else:
                violations.append((i, j, v.witness))
    return PNClassification(
        ComplementarityPattern(P, N), frozenset(strict), tuple(violations), frozenset(degenerate), verdicts
    )


def is_pn_modular(
    Q: OutputSpec,
    pattern: ComplementarityPattern,
    grid,
    strict: bool = False,
    eps: float = 0.0,
    tol: float = 0.0,
    complete: bool | None = None,
) -> bool:
    """Whether Q is (strictly) P,N modular for the given pattern on the grid.

    For a :class:`Quadratic` Q the answer is read from the coefficient signs,
    which is exact on any grid with two values per coordinate.
    """
    if isinstance(Q, Quadratic):
        K, L = Q.shape
        pattern.check_range(K, L)
        for k in range(1, K + 1):
            for l in range(1, L + 1):
                t = Q.theta[k - 1][l - 1]
                if (k, l) in pattern.P:
                    ok = t > eps if strict else t >= -tol
                elif (k, l) in pattern.N:
                    ok = t < -eps if strict else t <= tol
                else:
                    ok = abs(t) <= tol
                if not ok:
                    return False
        return True
    xs, ys = _prepare(Q, grid, complete)
    pattern.check_range(len(xs[0]), len(ys[0]))
    for i in range(1, len(xs[0]) + 1):
        for j in range(1, len(ys[0]) + 1):
            v = check_pairwise(Q, i, j, (xs, ys), eps, tol, complete=False)
            if (i, j) in pattern.P:
                ok = v.strictly_supermodular if strict else v.supermodular
            elif (i, j) in pattern.N:
                ok = v.strictly_submodular if strict else v.submodular
            else:
                ok = v.modular
            if not ok:
                return False
    return True


@dataclass(frozen=True)
class ModularityComparison:
    """Result of :func:`compare_modularity`.

    ``higher`` is the double-difference test over all P,N concordant pairs of
    grid couples. ``coefficient_test`` is the sign test on the coefficient
    difference, set only when both inputs are quadratic; ``agree`` tells
    whether the two tests gave the same answer. They can disagree on small
    grids, where the coefficient test is sufficient but not necessary.
    """

    higher: bool
    witness: tuple | None
    coefficient_test: bool | None = None
    n_pairs: int = 0

    @property
    def agree(self) -> bool | None:
        if self.coefficient_test is None:
            return None
        return self.coefficient_test == self.higher


def coefficient_test(theta, beta, pattern: ComplementarityPattern) -> bool:
    """theta >= beta on P, theta <= beta on N, equal elsewhere."""
    K, L = len(theta), len(theta[0])
    for k in range(K):
        for l in range(L):
            t, b = theta[k][l], beta[k][l]
            if (k + 1, l + 1) in pattern.P:
                ok = t >= b
            elif (k + 1, l + 1) in pattern.N:
                ok = t <= b
            else:
                ok = t == b
            if not ok:
                return False
    return True


def compare_modularity(
    Q: OutputSpec,
    Qp: OutputSpec,
    pattern: ComplementarityPattern,
    grid,
    tol: float = 0.0,
    complete: bool | None = None,
) -> ModularityComparison:
    """Does Q exhibit higher P,N modularity than Qp on the grid?"""
    from .sorting import classify_pair  # local import keeps module layering flat

    if complete is None:
        complete = Q.everywhere_defined and Qp.everywhere_defined
    xs, ys = _prepare(Q, grid, complete)
    pattern.check_range(len(xs[0]), len(ys[0]))
    couples = [(x, y) for x in xs for y in ys]
    witness = None
    n = 0
    for a, b in itertools.combinations(couples, 2):
        if not classify_pair(a, b, pattern).pn_concordant:
            continue
        (x, y), (xp, yp) = a, b
        n += 1
        lhs = Q(x, y) + Q(xp, yp) - Q(xp, y) - Q(x, yp)
        rhs = Qp(x, y) + Qp(xp, yp) - Qp(xp, y) - Qp(x, yp)
        if lhs < rhs - tol:
            witness = (a, b)
            break
    coef = None
    if isinstance(Q, Quadratic) and isinstance(Qp, Quadratic):
        coef = coefficient_test(Q.theta, Qp.theta, pattern)
    return ModularityComparison(witness is None, witness, coef, n)
