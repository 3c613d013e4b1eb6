"""Balanced transportation LP with exact integer recovery.

Supplies and demands are brought to integers (either they already are, or
they are scaled by ``10**precision`` and rounded). Transportation polytopes
with integer margins have integer vertices, so a simplex vertex can be
rounded and then checked exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from numbers import Integral

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix


class UnbalancedError(ValueError):
    """Supply and demand totals differ."""


class NumericalError(RuntimeError):
    """The LP solver returned something that failed exact verification."""


@dataclass(frozen=True)
class TransportResult:
    plan: list  # nested lists of cell masses in original units
    value: float  # objective in original units
    scale: int  # 1 for integer input, else 10**precision
    face_size: int  # number of cells with zero reduced cost
    tie_broken: bool


def _to_units(values, precision: int) -> tuple[list, int]:
    if all(isinstance(v, Integral) and not isinstance(v, bool) for v in values):
        return [int(v) for v in values], 1
    scale = 10**precision
    return [int(round(float(v) * scale)) for v in values], scale


def integer_margins(supply, demand, precision: int = 9) -> tuple[list, list, int]:
    s, scale_s = _to_units(supply, precision)
    d, scale_d = _to_units(demand, precision)
    scale = max(scale_s, scale_d)
    if scale_s != scale:
        s = [v * scale for v in s]
    if scale_d != scale:
        d = [v * scale for v in d]
    if sum(s) != sum(d):
        diff = (sum(s) - sum(d)) / scale
        # float totals that agree to the stated precision are nudged onto
        # the largest atom; anything larger is a genuinely unbalanced market
        if scale > 1 and abs(sum(s) - sum(d)) <= max(len(s), len(d)):
            k = int(np.argmax(d))
            d[k] += sum(s) - sum(d)
        else:
            raise UnbalancedError(f"mass mismatch {abs(diff)}")
    return s, d, scale


def _constraints(nr: int, nc: int, cells: list):
    rows, cols = [], []
    for k, (r, c) in enumerate(cells):
        rows += [r, nr + c]
        cols += [k, k]
    data = np.ones(len(rows))
    return coo_matrix((data, (rows, cols)), shape=(nr + nc, len(cells))).tocsr()


def _lp(c, A, b, *, need_duals=False):
    res = linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs-ds")
    if res.status == 2:
        return None
    if res.status != 0:
        raise NumericalError(f"transport LP failed: {res.message}")
    return res


def _check_margins(x: list, cells: list, s: list, d: list) -> bool:
    rs, cs = [0] * len(s), [0] * len(d)
    for v, (r, c) in zip(x, cells):
        if v < 0:
            return False
        rs[r] += v
        cs[c] += v
    return rs == s and cs == d


def feasible_plan(supply, demand, allowed, precision: int = 9):
    """Integer-unit feasible plan using only ``allowed`` cells, or ``None``."""
    s, d, scale = integer_margins(supply, demand, precision)
    cells = [(r, c) for r in range(len(s)) for c in range(len(d)) if allowed[r][c]]
    if not cells:
        return None
    A = _constraints(len(s), len(d), cells)
    res = _lp(np.zeros(len(cells)), A, np.array(s + d, dtype=float))
    if res is None:
        return None
    x = [int(round(v)) for v in res.x]
    if not _check_margins(x, cells, s, d):
        raise NumericalError("feasible transport vertex is not integral")
    plan = [[0] * len(d) for _ in s]
    for v, (r, c) in zip(x, cells):
        plan[r][c] = v if scale == 1 else v / scale
    return plan


def solve_transport(
    supply, demand, weights, precision: int = 9, tiebreak: bool = True, face_tol: float = 1e-9,
    max_tiebreak_cells: int = 2000,
) -> TransportResult:
    """Maximize sum(plan * weights) over couplings of ``supply`` and ``demand``.

    Among optimal plans, the one that is lexicographically smallest in
    row-major cell order is returned when ``tiebreak`` is set.
    """
    s, d, scale = integer_margins(supply, demand, precision)
    nr, nc = len(s), len(d)
    W = np.array(weights, dtype=float)
    cells = [(r, c) for r in range(nr) for c in range(nc)]
    A = _constraints(nr, nc, cells)
    b = np.array(s + d, dtype=float)
    res = _lp(-W.ravel(), A, b)
    if res is None:
        raise NumericalError("transport LP reported infeasible on balanced margins")
    x = [int(round(v)) for v in res.x]
    if not _check_margins(x, cells, s, d):
        raise NumericalError("transport vertex is not integral")
    best = sum(v * weights[r][c] for v, (r, c) in zip(x, cells))

    # optimal face from complementary slackness with the returned duals
    duals = res.eqlin.marginals
    u, v = duals[:nr], duals[nr:]
    reduced = -W - u[:, None] - v[None, :]
    wscale = max(1.0, float(np.abs(W).max()))
    face = [(r, c) for r, c in cells if reduced[r, c] <= face_tol * wscale]
    tie_broken = False
    if tiebreak and len(face) > nr + nc - 1 and len(face) <= max_tiebreak_cells:
        y = _lexmin(face, s, d)
        if y is not None:
            val = sum(m * weights[r][c] for (r, c), m in y.items())
            if _same_value(val, best, wscale * scale):
                x = [y.get(cell, 0) for cell in cells]
                best = val
                tie_broken = True
    plan = [[0] * nc for _ in range(nr)]
    for val, (r, c) in zip(x, cells):
        plan[r][c] = val if scale == 1 else val / scale
    value = best if scale == 1 else best / scale
    return TransportResult(plan, value, scale, len(face), tie_broken)


def _same_value(a, b, mag: float) -> bool:
    if isinstance(a, Integral) and isinstance(b, Integral):
        return a == b
    return abs(a - b) <= 1e-9 * max(1.0, mag)


def _lexmin(face: list, s: list, d: list) -> dict | None:
    """Lexicographically smallest plan supported on ``face`` (row-major)."""
    order = sorted(face)
    fixed: dict = {}
    s_left, d_left = list(s), list(d)
    free = list(order)
    while free:
        cell = free[0]
        A = _constraints(len(s), len(d), free)
        c = np.zeros(len(free))
        c[0] = 1.0
        res = _lp(c, A, np.array(s_left + d_left, dtype=float))
        if res is None:
            return None
        xs = [int(round(v)) for v in res.x]
        if not _check_margins(xs, free, s_left, d_left):
            return None
        fixed[cell] = xs[0]
        r, col = cell
        s_left[r] -= xs[0]
        d_left[col] -= xs[0]
        free = free[1:]
        # once every remaining row or column is forced the rest follows
        if len(free) <= 1 or all(v == 0 for v in s_left):
            for k, cc in enumerate(free):
                fixed[cc] = xs[k + 1]
            break
    if not _check_margins([fixed.get(c, 0) for c in order], order, s, d):
        return None
    return {c: v for c, v in fixed.items() if v}
