"""Dominance in the P,N modular order, decided as cone membership.

A matching dominates another on the same marginals exactly when their
difference is a nonnegative combination of P,N concordance improving
transfer vectors. On a finite grid this is a linear feasibility problem;
when it is infeasible the Farkas alternative yields a grid function Q with
``Q . t >= 0`` for every transfer t that ranks the two matchings the other
way round.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix

from .market import ComplementarityPattern, MatchingMeasure, Tabulated
from .sorting import Transfer, classify_pair

FEAS_TOL = 1e-9


class MarginalMismatchError(ValueError):
    """The two matchings do not share both marginals."""


@dataclass(frozen=True)
class Generator:
    transfer: Transfer  # with alpha = 1
    strict: bool  # receiving pair is P,N concordant, not merely weak


@dataclass(frozen=True)
class ConeCertificate:
    """Evidence for a dominance verdict.

    ``weights`` lists ``(transfer, alpha)`` whose sum carries the dominated
    matching onto the dominating one; ``separating`` is a grid function that
    ranks the pair against the claimed order (set when dominance fails).
    ``residual`` is the max-abs replay error of the weights.
    """

    weights: tuple = ()
    separating: Tabulated | None = None
    residual: float = 0.0


def generators(xs, ys, pattern: ComplementarityPattern) -> list:
    """Unit P,N concordance improving transfers on the grid ``xs`` x ``ys``.

    For every rectangle x < x', y < y' the orientation whose receiving pair
    is P,N weak concordant is included; when every P and N product vanishes
    on the rectangle both orientations qualify.
    """
    xs, ys = sorted(xs), sorted(ys)
    out = []
    for x, xp in itertools.combinations(xs, 2):
        for y, yp in itertools.combinations(ys, 2):
            for t in (Transfer(x, y, xp, yp, 1), Transfer(x, yp, xp, y, 1)):
                cls = classify_pair(*t.receiving, pattern)
                if cls.pn_weak_concordant:
                    out.append(Generator(t, cls.pn_concordant))
    return out


def _grid(*Ms: MatchingMeasure):
    xs = sorted({x for M in Ms for (x, _), _ in M.cells})
    ys = sorted({y for M in Ms for (_, y), _ in M.cells})
    return xs, ys


def _matrix(gens, index) -> "coo_matrix":
    rows, cols, vals = [], [], []
    for k, g in enumerate(gens):
        t = g.transfer
        for c in t.receiving:
            rows.append(index[c]); cols.append(k); vals.append(1.0)
        for c in t.losing:
            rows.append(index[c]); cols.append(k); vals.append(-1.0)
    return coo_matrix((vals, (rows, cols)), shape=(len(index), len(gens))).tocsr()


def _vector(M: MatchingMeasure, index) -> np.ndarray:
    v = np.zeros(len(index))
    for c, m in M.cells:
        v[index[c]] = m
    return v


def _same_marginals(M, Mp, tol):
    for a, b in ((M.firm_marginal(), Mp.firm_marginal()), (M.worker_marginal(), Mp.worker_marginal())):
        for k in set(a) | set(b):
            if abs(a.get(k, 0) - b.get(k, 0)) > tol * max(1.0, abs(a.get(k, 0))):
                return False
    return True


@dataclass(frozen=True)
class DominanceResult:
    dominates: bool
    certificate: ConeCertificate

    def __iter__(self):
        return iter((self.dominates, self.certificate))


def dominates_pn(M: MatchingMeasure, Mp: MatchingMeasure, pattern: ComplementarityPattern,
                 tol: float = FEAS_TOL) -> DominanceResult:
    """Does ``M`` dominate ``Mp`` in the P,N modular order?"""
    if not _same_marginals(M, Mp, tol):
        raise MarginalMismatchError("matchings must share both marginals")
    xs, ys = _grid(M, Mp)
    if xs and ys:
        pattern.check_range(len(xs[0]), len(ys[0]))
    cells = [(x, y) for x in xs for y in ys]
    index = {c: k for k, c in enumerate(cells)}
    diff = _vector(M, index) - _vector(Mp, index)
    scale = max(1.0, float(np.abs(_vector(Mp, index)).max(initial=0.0)))
    if np.abs(diff).max(initial=0.0) <= tol * scale:
        return DominanceResult(True, ConeCertificate((), None, 0.0))
    gens = generators(xs, ys, pattern)
    # with no generators the cone is {0}, so a nonzero difference is simply
    # not dominance; the separation LP below still yields a certificate
    A = _matrix(gens, index)
    res = linprog(np.ones(len(gens)), A_eq=A, b_eq=diff, bounds=(0, None), method="highs") if gens else None
    if res is not None and res.status == 0:
        alpha = res.x
        resid = float(np.abs(A @ alpha - diff).max())
        if resid <= tol * scale * 10:
            weights = tuple(
                (g.transfer, float(a)) for g, a in zip(gens, alpha) if a > tol * scale
            )
            return DominanceResult(True, ConeCertificate(weights, None, resid))
    # Farkas alternative: q with q.t >= 0 for all generators and q.diff < 0
    if gens:
        sep = linprog(diff, A_ub=-A.T, b_ub=np.zeros(len(gens)), bounds=(-1, 1), method="highs")
    else:
        sep = linprog(diff, bounds=(-1, 1), method="highs")
    if sep.status != 0:
        raise RuntimeError(f"separation LP failed: {sep.message}")
    if sep.fun > -tol * scale:
        raise RuntimeError("dominance undecided: no separating function beyond tolerance")
    q = sep.x
    Q = Tabulated({c: float(q[k]) for c, k in index.items()})
    return DominanceResult(False, ConeCertificate((), Q, float(sep.fun)))


def replay(Mp: MatchingMeasure, cert: ConeCertificate) -> MatchingMeasure:
    """Add every weighted transfer of ``cert`` to ``Mp``."""
    cells = Mp.as_dict()
    for t, a in cert.weights:
        for c in t.receiving:
            cells[c] = cells.get(c, 0) + a
        for c in t.losing:
            cells[c] = cells.get(c, 0) - a
    return MatchingMeasure.from_dict(cells)


@dataclass(frozen=True)
class UndominanceResult:
    """``improved`` is a strictly dominating matching when one exists."""

    undominated: bool
    direction: ConeCertificate | None
    improved: MatchingMeasure | None
    gain: float  # total weight on strict transfers at the LP optimum

    def __iter__(self):
        return iter((self.undominated, self.direction))


def is_undominated(M: MatchingMeasure, pattern: ComplementarityPattern,
                   tol: float = FEAS_TOL) -> UndominanceResult:
    """Is there no feasible matching that strictly dominates ``M``?

    Maximizes the weight on strict generators subject to ``M + sum a t >= 0``.
    Weights are capped at the total mass, which loses nothing since any
    improving combination can be scaled down.
    """
    xs, ys = _grid(M)
    if len(xs) < 2 or len(ys) < 2:
        return UndominanceResult(True, None, None, 0.0)
    pattern.check_range(len(xs[0]), len(ys[0]))
    cells = [(x, y) for x in xs for y in ys]
    index = {c: k for k, c in enumerate(cells)}
    m = _vector(M, index)
    gens = generators(xs, ys, pattern)
    if not any(g.strict for g in gens):
        return UndominanceResult(True, None, None, 0.0)
    A = _matrix(gens, index)
    total = float(m.sum())
    c = -np.array([1.0 if g.strict else 0.0 for g in gens])
    res = linprog(c, A_ub=-A, b_ub=m, bounds=(0, total), method="highs")
    if res.status != 0:
        raise RuntimeError(f"undominance LP failed: {res.message}")
    gain = -float(res.fun)
    if gain <= tol * max(1.0, total):
        return UndominanceResult(True, None, None, gain)
    weights = tuple((g.transfer, float(a)) for g, a in zip(gens, res.x) if a > tol * max(1.0, total))
    cert = ConeCertificate(weights, None, 0.0)
    improved = replay(M, cert)
    # clean LP noise on cells that should be empty
    improved = MatchingMeasure.from_dict({k: v for k, v in improved.as_dict().items() if abs(v) > tol * total})
    return UndominanceResult(False, cert, improved, gain)
