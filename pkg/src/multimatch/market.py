"""Finite matching markets: type measures, matchings, complementarity patterns.

Attribute vectors are plain tuples of real numbers. Attribute indices are
1-based everywhere in the public API, so ``(1, 2)`` in a pattern means the
firm's first attribute paired with the worker's second attribute.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from numbers import Integral, Real
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

AttrVector = tuple
Cell = tuple  # (firm AttrVector, worker AttrVector)

DEFAULT_TOL = 1e-9


class DomainError(ValueError):
    """An output function was evaluated outside the points it is defined on."""


def attr_vector(values: Iterable[Real]) -> AttrVector:
    vec = tuple(values)
    if not vec:
        raise ValueError("attribute vector must be non-empty")
    for v in vec:
        if not isinstance(v, Real) or not math.isfinite(v):
            raise ValueError(f"attribute values must be finite reals, got {v!r}")
    return vec


def _is_int(mass) -> bool:
    return isinstance(mass, Integral) and not isinstance(mass, bool)


def _close(a, b, tol: float) -> bool:
    if _is_int(a) and _is_int(b):
        return a == b
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


@dataclass
class ValidationReport:
    """Problems found while validating a market or matching.

    ``violations`` make the object invalid; ``warnings`` (for example merged
    duplicate atoms) do not.
    """

    violations: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.valid


# --------------------------------------------------------------------------
# measures


@dataclass(frozen=True)
class DiscreteMeasure:
    """Finitely supported measure over attribute vectors.

    Build with :meth:`from_pairs`, which merges duplicate atoms by summing
    their mass and remembers that it did so.
    """

    atoms: tuple  # ((AttrVector, mass), ...) sorted by AttrVector
    merged: tuple = ()  # attribute vectors that appeared more than once

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Sequence[Real], Real]]) -> "DiscreteMeasure":
        acc: dict = {}
        seen: dict = defaultdict(int)
        for attrs, mass in pairs:
            vec = attr_vector(attrs)
            seen[vec] += 1
            acc[vec] = acc[vec] + mass if vec in acc else mass
        merged = tuple(sorted(v for v, n in seen.items() if n > 1))
        return cls(tuple(sorted(acc.items())), merged)

    @classmethod
    def from_dict(cls, masses: Mapping[Sequence[Real], Real]) -> "DiscreteMeasure":
        return cls.from_pairs(masses.items())

    @property
    def dimension(self) -> int:
        return len(self.atoms[0][0]) if self.atoms else 0

    @property
    def support(self) -> list:
        return [v for v, _ in self.atoms]

    @property
    def total(self):
        return sum(m for _, m in self.atoms)

    def mass(self, vec: AttrVector):
        for v, m in self.atoms:
            if v == vec:
                return m
        return 0

    def as_dict(self) -> dict:
        return dict(self.atoms)

    def is_integral(self) -> bool:
        return all(_is_int(m) for _, m in self.atoms)

    def normalized(self) -> "DiscreteMeasure":
        total = float(self.total)
        return DiscreteMeasure(tuple((v, m / total) for v, m in self.atoms), self.merged)

    def __len__(self) -> int:
        return len(self.atoms)


@dataclass(frozen=True)
class MarketInstance:
    firms: DiscreteMeasure
    workers: DiscreteMeasure

    @property
    def K(self) -> int:
        return self.firms.dimension

    @property
    def L(self) -> int:
        return self.workers.dimension

    @property
    def total(self):
        return self.firms.total

    def is_integral(self) -> bool:
        return self.firms.is_integral() and self.workers.is_integral()


@dataclass(frozen=True)
class MatchingMeasure:
    """Mass on (firm type, worker type) cells.

    Stored canonically (sorted, zero cells dropped, duplicates merged), so two
    matchings with the same cell masses compare and hash equal.
    """

    cells: tuple  # (((x, y), mass), ...)

    @classmethod
    def from_cells(cls, cells: Iterable[tuple[Sequence[Real], Sequence[Real], Real]]) -> "MatchingMeasure":
        acc: dict = {}
        for x, y, mass in cells:
            key = (attr_vector(x), attr_vector(y))
            acc[key] = acc[key] + mass if key in acc else mass
        return cls(tuple(sorted((k, m) for k, m in acc.items() if m != 0)))

    @classmethod
    def from_dict(cls, masses: Mapping[Cell, Real]) -> "MatchingMeasure":
        return cls.from_cells((x, y, m) for (x, y), m in masses.items())

    @classmethod
    def from_matrix(cls, firms: Sequence, workers: Sequence, matrix) -> "MatchingMeasure":
        return cls.from_cells(
            (x, y, matrix[r][c]) for r, x in enumerate(firms) for c, y in enumerate(workers)
        )

    def as_dict(self) -> dict:
        return dict(self.cells)

    def mass(self, x: AttrVector, y: AttrVector):
        return self.as_dict().get((tuple(x), tuple(y)), 0)

    def support(self, tol: float = 0.0) -> list:
        """Cells with mass strictly above ``tol``, in canonical order."""
        return [c for c, m in self.cells if m > tol]

    @property
    def firm_dim(self) -> int:
        return len(self.cells[0][0][0]) if self.cells else 0

    @property
    def worker_dim(self) -> int:
        return len(self.cells[0][0][1]) if self.cells else 0

    @property
    def total(self):
        return sum(m for _, m in self.cells)

    def firm_marginal(self) -> dict:
        out: dict = defaultdict(int)
        for (x, _), m in self.cells:
            out[x] += m
        return dict(out)

    def worker_marginal(self) -> dict:
        out: dict = defaultdict(int)
        for (_, y), m in self.cells:
            out[y] += m
        return dict(out)

    def to_matrix(self, firms: Sequence, workers: Sequence) -> list:
        d = self.as_dict()
        return [[d.get((tuple(x), tuple(y)), 0) for y in workers] for x in firms]

    def integrate(self, Q: Callable) -> float:
        """Aggregate output: sum over cells of mass times Q(x, y)."""
        return sum(m * Q(x, y) for (x, y), m in self.cells)

    def __iter__(self) -> Iterator:
        return iter(self.cells)

    def __len__(self) -> int:
        return len(self.cells)


def product_coupling(market: MarketInstance) -> MatchingMeasure:
    """Independent coupling F x G / total mass."""
    total = market.total
    return MatchingMeasure.from_cells(
        (x, y, mx * my / total)
        for x, mx in market.firms.atoms
        for y, my in market.workers.atoms
    )


# --------------------------------------------------------------------------
# complementarity patterns and output functions


@dataclass(frozen=True)
class ComplementarityPattern:
    """Disjoint sets ``P`` (positive) and ``N`` (negative) of 1-based (i, j) pairs."""

    P: frozenset = frozenset()
    N: frozenset = frozenset()

    def __init__(self, P: Iterable = (), N: Iterable = ()):
        P = frozenset(tuple(int(v) for v in p) for p in P)
        N = frozenset(tuple(int(v) for v in p) for p in N)
        if P & N:
            raise ValueError(f"P and N overlap on {sorted(P & N)}")
        for i, j in P | N:
            if i < 1 or j < 1:
                raise ValueError(f"pattern indices are 1-based, got {(i, j)}")
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "N", N)

    def check_range(self, K: int, L: int) -> None:
        for i, j in self.P | self.N:
            if i > K or j > L:
                raise IndexError(f"pattern pair {(i, j)} outside [1,{K}]x[1,{L}]")

    def swapped(self) -> "ComplementarityPattern":
        return ComplementarityPattern(self.N, self.P)

    @property
    def empty(self) -> bool:
        return not (self.P or self.N)

    def to_json(self) -> dict:
        return {"P": [list(p) for p in sorted(self.P)], "N": [list(p) for p in sorted(self.N)]}

    @classmethod
    def from_json(cls, obj: Mapping) -> "ComplementarityPattern":
        return cls(obj.get("P", ()), obj.get("N", ()))


class OutputSpec:
    """Matching output Q(x, y). Subclasses implement ``__call__``."""

    #: whether Q can be evaluated at any attribute vectors (not just a table)
    everywhere_defined = True

    def __call__(self, x: AttrVector, y: AttrVector):
        raise NotImplementedError

    def __neg__(self) -> "OutputSpec":
        return FunctionOutput(lambda x, y: -self(x, y), everywhere_defined=self.everywhere_defined)


@dataclass(frozen=True)
class Quadratic(OutputSpec):
    """Q(x, y) = sum_k sum_l theta[k][l] * x_k * y_l.

    Evaluated with plain Python arithmetic, so integer coefficients and
    integer attributes give exact integer outputs.
    """

    theta: tuple

    def __init__(self, theta):
        rows = tuple(tuple(row) for row in (theta.tolist() if isinstance(theta, np.ndarray) else theta))
        if not rows or len({len(r) for r in rows}) != 1:
            raise ValueError("theta must be a non-empty rectangular matrix")
        if not all(math.isfinite(v) for r in rows for v in r):
            raise ValueError("theta must be finite")
        object.__setattr__(self, "theta", rows)

    @property
    def shape(self) -> tuple:
        return len(self.theta), len(self.theta[0])

    def __call__(self, x, y):
        return sum(
            t * xk * yl
            for xk, row in zip(x, self.theta, strict=True)
            for t, yl in zip(row, y, strict=True)
            if t
        )

    def __neg__(self) -> "Quadratic":
        return Quadratic([[-t for t in row] for row in self.theta])

    def array(self) -> np.ndarray:
        return np.array(self.theta, dtype=float)


class Tabulated(OutputSpec):
    """Q given by a finite table of (x, y) -> value."""

    everywhere_defined = False

    def __init__(self, values: Mapping[Cell, Real]):
        self.values = {(tuple(x), tuple(y)): v for (x, y), v in values.items()}

    def __call__(self, x, y):
        try:
            return self.values[(tuple(x), tuple(y))]
        except KeyError:
            raise DomainError(f"Q not tabulated at x={tuple(x)}, y={tuple(y)}") from None

    def __neg__(self) -> "Tabulated":
        return Tabulated({k: -v for k, v in self.values.items()})

    def __repr__(self) -> str:
        return f"Tabulated({len(self.values)} cells)"


class FunctionOutput(OutputSpec):
    """Wrap an arbitrary Python callable ``f(x, y)`` as an output function."""

    def __init__(self, func: Callable, everywhere_defined: bool = True):
        self.func = func
        self.everywhere_defined = everywhere_defined

    def __call__(self, x, y):
        return self.func(tuple(x), tuple(y))


# --------------------------------------------------------------------------
# validation


def validate_market(m: MarketInstance, tol: float = DEFAULT_TOL) -> ValidationReport:
    """List every broken market invariant. Never raises on bad data."""
    report = ValidationReport()
    for side, measure in (("firm", m.firms), ("worker", m.workers)):
        if not measure.atoms:
            report.violations.append(f"{side} measure is empty")
            continue
        dims = {len(v) for v, _ in measure.atoms}
        if len(dims) > 1:
            report.violations.append(f"{side} atoms have mixed dimensions {sorted(dims)}")
        for v, mass in measure.atoms:
            if not isinstance(mass, Real) or not math.isfinite(mass):
                report.violations.append(f"{side} atom {v} has non-finite mass {mass!r}")
            elif mass < 0:
                report.violations.append(f"negative mass {mass} at {side} atom {v}")
        for v in measure.merged:
            report.warnings.append(f"duplicate {side} atom {v} merged by summing mass")
    if m.firms.atoms and m.workers.atoms:
        ft, wt = m.firms.total, m.workers.total
        if not _close(ft, wt, tol):
            report.violations.append(f"mass mismatch {float(abs(ft - wt))}")
    return report


def validate_matching(M: MatchingMeasure, m: MarketInstance, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Check the no-single property: both marginals of ``M`` equal the market."""
    if M.cells and (M.firm_dim != m.K or M.worker_dim != m.L):
        raise ValueError(
            f"dimension mismatch: matching is {M.firm_dim}x{M.worker_dim}, market is {m.K}x{m.L}"
        )
    report = ValidationReport()
    for (x, y), mass in M.cells:
        if mass < 0:
            report.violations.append(f"negative mass {mass} at cell {x}->{y}")
        if len(x) != m.K or len(y) != m.L:
            report.violations.append(f"cell {x}->{y} has wrong dimensions")
    for side, marginal, measure in (
        ("firm", M.firm_marginal(), m.firms),
        ("worker", M.worker_marginal(), m.workers),
    ):
        target = measure.as_dict()
        for v in sorted(set(marginal) | set(target)):
            got, want = marginal.get(v, 0), target.get(v, 0)
            if not _close(got, want, tol):
                report.violations.append(f"{side} marginal at {v} is {got}, expected {want}")
    return report


# --------------------------------------------------------------------------
# bivariate aggregation


@dataclass(frozen=True)
class BivariateTable:
    """Masses over (row values) x (column values), both strictly increasing."""

    rows: tuple
    cols: tuple
    masses: np.ndarray

    def __post_init__(self):
        masses = np.asarray(self.masses, dtype=float)
        if masses.shape != (len(self.rows), len(self.cols)):
            raise ValueError("mass array shape does not match row/column values")
        if any(b <= a for a, b in zip(self.rows, self.rows[1:])) or any(
            b <= a for a, b in zip(self.cols, self.cols[1:])
        ):
            raise ValueError("row and column values must be strictly increasing")
        if (masses < 0).any():
            raise ValueError("table masses must be nonnegative")
        object.__setattr__(self, "masses", masses)

    @classmethod
    def from_array(cls, masses, rows: Sequence | None = None, cols: Sequence | None = None) -> "BivariateTable":
        masses = np.asarray(masses, dtype=float)
        rows = tuple(rows) if rows is not None else tuple(range(1, masses.shape[0] + 1))
        cols = tuple(cols) if cols is not None else tuple(range(1, masses.shape[1] + 1))
        return cls(rows, cols, masses)

    @property
    def total(self) -> float:
        return float(self.masses.sum())

    def mass(self, a, b) -> float:
        return float(self.masses[self.rows.index(a), self.cols.index(b)])

    def reversed_rows(self) -> "BivariateTable":
        """Same table with the row variable's order flipped (values negated)."""
        return BivariateTable(tuple(-a for a in reversed(self.rows)), self.cols, self.masses[::-1])


def aggregate_bivariate(M: MatchingMeasure, k: int, l: int) -> BivariateTable:
    """Collapse ``M`` onto firm attribute ``k`` and worker attribute ``l`` (1-based)."""
    if not (1 <= k <= M.firm_dim) or not (1 <= l <= M.worker_dim):
        raise IndexError(f"attribute pair {(k, l)} out of range {M.firm_dim}x{M.worker_dim}")
    acc: dict = defaultdict(float)
    for (x, y), mass in M.cells:
        acc[(x[k - 1], y[l - 1])] += mass
    rows = tuple(sorted({a for a, _ in acc}))
    cols = tuple(sorted({b for _, b in acc}))
    masses = np.zeros((len(rows), len(cols)))
    for (a, b), mass in acc.items():
        masses[rows.index(a), cols.index(b)] = mass
    return BivariateTable(rows, cols, masses)


# --------------------------------------------------------------------------
# JSON


def _num(v):
    return int(v) if isinstance(v, float) and v.is_integer() and abs(v) < 2**53 else v


def _load_number(v):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"expected a number, got {v!r}")
    return v


def measure_from_json(items: Sequence[Mapping]) -> DiscreteMeasure:
    return DiscreteMeasure.from_pairs(
        ([_load_number(a) for a in it["attrs"]], _load_number(it["mass"])) for it in items
    )


def measure_to_json(mu: DiscreteMeasure) -> list:
    return [{"attrs": list(v), "mass": m} for v, m in mu.atoms]


def market_from_json(obj: Mapping) -> MarketInstance:
    return MarketInstance(measure_from_json(obj["firms"]), measure_from_json(obj["workers"]))


def market_to_json(m: MarketInstance) -> dict:
    return {"firms": measure_to_json(m.firms), "workers": measure_to_json(m.workers)}


def matching_from_json(obj: Mapping) -> MatchingMeasure:
    if "matching" in obj:  # a report that embeds a matching
        obj = obj["matching"]
    return MatchingMeasure.from_cells(
        ([_load_number(a) for a in c["x"]], [_load_number(b) for b in c["y"]], _load_number(c["mass"]))
        for c in obj["cells"]
    )


def matching_to_json(M: MatchingMeasure) -> dict:
    return {"cells": [{"x": list(x), "y": list(y), "mass": m} for (x, y), m in M.cells]}


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)
