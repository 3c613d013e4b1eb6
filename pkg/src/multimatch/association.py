"""Concordance counts and Goodman-Kruskal gamma for couples data.

A variable is named by a side and an attribute: ``("W", "H")`` is the
woman's (firm-side) health, ``("M", "E")`` the man's (worker-side)
education. Attributes may also be given by 1-based position.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .market import BivariateTable

#: the five yearly statistics and the two extra pooled ones
STANDARD_GAMMAS = {
    "WW_HE": (("W", "H"), ("W", "E")),
    "MM_HE": (("M", "H"), ("M", "E")),
    "WM_HE": (("W", "H"), ("M", "E")),
    "MW_HE": (("M", "H"), ("W", "E")),
    "WM_HH": (("W", "H"), ("M", "H")),
    "WM_EH": (("W", "E"), ("M", "H")),
    "WM_EE": (("W", "E"), ("M", "E")),
}

FIRM_SIDES = ("W", "x", "F")
WORKER_SIDES = ("M", "y", "G")


class AllTiedError(ValueError):
    """Gamma is undefined because no pair is concordant or discordant."""


@dataclass(frozen=True)
class CoupleDataset:
    """Weighted couples: row k is (weights[k], X[k], Y[k])."""

    weights: np.ndarray
    X: np.ndarray
    Y: np.ndarray
    x_labels: tuple = ()
    y_labels: tuple = ()

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        Y = np.atleast_2d(np.asarray(self.Y, dtype=float))
        if w.ndim != 1 or len(w) == 0:
            raise ValueError("dataset needs at least one record")
        if X.shape[0] != len(w) or Y.shape[0] != len(w):
            raise ValueError("weights, X and Y must have one row per record")
        if (w < 0).any() or not np.isfinite(w).all():
            raise ValueError("weights must be finite and nonnegative")
        if not (np.isfinite(X).all() and np.isfinite(Y).all()):
            raise ValueError("attributes must be finite")
        for labels, n in ((self.x_labels, X.shape[1]), (self.y_labels, Y.shape[1])):
            if labels and len(labels) != n:
                raise ValueError("label count does not match attribute count")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "x_labels", tuple(self.x_labels))
        object.__setattr__(self, "y_labels", tuple(self.y_labels))

    @classmethod
    def from_records(cls, records, x_labels=(), y_labels=()) -> "CoupleDataset":
        records = list(records)
        if not records:
            raise ValueError("dataset needs at least one record")
        w = [r[0] for r in records]
        X = [list(r[1]) for r in records]
        Y = [list(r[2]) for r in records]
        return cls(np.array(w), np.array(X), np.array(Y), x_labels, y_labels)

    def __len__(self) -> int:
        return len(self.weights)

    def column(self, var) -> np.ndarray:
        side, attr = var
        if side in FIRM_SIDES:
            data, labels = self.X, self.x_labels
        elif side in WORKER_SIDES:
            data, labels = self.Y, self.y_labels
        else:
            raise KeyError(f"unknown side {side!r}")
        if isinstance(attr, str):
            if attr not in labels:
                raise KeyError(f"unknown attribute {attr!r} on side {side!r}")
            k = labels.index(attr)
        else:
            k = int(attr) - 1
            if not 0 <= k < data.shape[1]:
                raise KeyError(f"attribute index {attr} out of range on side {side!r}")
        return data[:, k]

    def table(self, spec) -> BivariateTable:
        """Weighted contingency table of the two variables named in ``spec``."""
        a, b = self.column(spec[0]), self.column(spec[1])
        rows, ri = np.unique(a, return_inverse=True)
        cols, ci = np.unique(b, return_inverse=True)
        masses = np.zeros((len(rows), len(cols)))
        np.add.at(masses, (ri, ci), self.weights)
        return BivariateTable(tuple(rows.tolist()), tuple(cols.tolist()), masses)

    def concat(self, other: "CoupleDataset") -> "CoupleDataset":
        return CoupleDataset(
            np.concatenate([self.weights, other.weights]),
            np.vstack([self.X, other.X]),
            np.vstack([self.Y, other.Y]),
            self.x_labels,
            self.y_labels,
        )


@dataclass(frozen=True)
class ConcordanceCounts:
    """Weighted pair masses. ``total`` counts unordered pairs of distinct
    records for datasets and of independent draws for bare tables."""

    C: float
    D: float
    ties: float
    total: float

    def __iter__(self):
        return iter((self.C, self.D, self.ties))


def _table_counts(m: np.ndarray) -> tuple[float, float]:
    # below_right[i, j] = mass in rows > i and cols > j
    rev = m[::-1, ::-1].cumsum(axis=0).cumsum(axis=1)[::-1, ::-1]
    below_right = np.zeros_like(m)
    below_right[:-1, :-1] = rev[1:, 1:]
    # below_left[i, j] = mass in rows > i and cols < j
    cum = m[::-1, :].cumsum(axis=0)[::-1, :].cumsum(axis=1)
    below_left = np.zeros_like(m)
    below_left[:-1, 1:] = cum[1:, :-1]
    return float((m * below_right).sum()), float((m * below_left).sum())


def count_concordance(data, spec=None) -> ConcordanceCounts:
    """Concordant, discordant and tied pair mass for two ordinal variables.

    Parameters
    ----------
    data : CoupleDataset or BivariateTable
        A table is used as is and ``spec`` is ignored.
    spec : pair of variables
        ``((side, attr), (side, attr))`` for a dataset.
    """
    if isinstance(data, BivariateTable):
        table = data
        total = table.total**2 / 2
    else:
        if spec is None:
            raise ValueError("a dataset needs a variable spec")
        table = data.table(spec)
        w = data.weights
        total = float(w.sum() ** 2 - (w**2).sum()) / 2
    if table.total <= 0:
        raise ValueError("data carries no mass")
    C, D = _table_counts(table.masses)
    return ConcordanceCounts(C, D, max(total - C - D, 0.0), total)


@dataclass(frozen=True)
class GammaResult:
    """Gamma with concordant/discordant/tied pair fractions."""

    C: float
    D: float
    ties: float
    gamma: float


def kruskal_gamma(data, spec=None) -> GammaResult:
    """(C - D) / (C + D), ties excluded."""
    counts = count_concordance(data, spec)
    if counts.C + counts.D <= 0:
        raise AllTiedError("every pair is tied; gamma is undefined")
    t = counts.total
    g = (counts.C - counts.D) / (counts.C + counts.D)
    return GammaResult(counts.C / t, counts.D / t, counts.ties / t, float(g))


def standard_gammas(data: CoupleDataset, names=None) -> dict:
    names = names or list(STANDARD_GAMMAS)
    return {n: kruskal_gamma(data, STANDARD_GAMMAS[n]).gamma for n in names}
