"""Logit matching equilibrium with Gumbel unobserved heterogeneity.

The equilibrium density of observable types is the matrix scaling of the
kernel ``exp(Q / (sigma + delta))`` to the two marginals, computed here by
iterative proportional fitting. Its log double differences equal the double
differences of Q divided by ``sigma + delta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .market import (
    BivariateTable,
    ComplementarityPattern,
    DiscreteMeasure,
    MatchingMeasure,
    OutputSpec,
    Tabulated,
)
from .modularity import classify_pn, compare_modularity, is_pn_modular
from .sorting import classify_pair


class IPFConvergenceError(RuntimeError):
    """IPF did not reach the marginal tolerance within the iteration cap."""


class KernelRangeError(ValueError):
    """exp(Q / sigma_delta) is not representable on the support product."""


class ZeroCellError(ValueError):
    """A log ratio needs a cell with zero mass."""


@dataclass(frozen=True)
class LogitConfig:
    sigma_delta: float = 1.0
    ipf_tol: float = 1e-12
    max_iters: int = 100_000

    def __post_init__(self):
        if not self.sigma_delta > 0:
            raise ValueError("sigma_delta must be positive")
        if not self.ipf_tol > 0:
            raise ValueError("ipf_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True)
class LogitSolution:
    """Equilibrium density on the full product of the two supports.

    ``log m(x, y) = W + (Q(x, y) + phi(x) + psi(y)) / sigma_delta`` with
    ``phi(xs[0]) = psi(ys[0]) = 0``.
    """

    xs: tuple
    ys: tuple
    matrix: np.ndarray  # density, rows xs, cols ys
    phi: dict
    psi: dict
    W: float
    iterations: int
    max_marginal_error: float
    sigma_delta: float
    warnings: tuple = ()
    Qmatrix: np.ndarray = field(default=None, repr=False)

    @property
    def density(self) -> MatchingMeasure:
        return MatchingMeasure.from_matrix(self.xs, self.ys, self.matrix.tolist())

    def mass(self, x, y) -> float:
        return float(self.matrix[self.xs.index(tuple(x)), self.ys.index(tuple(y))])

    def log_density(self) -> Tabulated:
        lm = np.log(self.matrix)
        return Tabulated({(x, y): float(lm[r, c]) for r, x in enumerate(self.xs) for c, y in enumerate(self.ys)})

    def decomposition_error(self) -> float:
        """Max deviation between log density and its potential decomposition."""
        phi = np.array([self.phi[x] for x in self.xs])
        psi = np.array([self.psi[y] for y in self.ys])
        rebuilt = self.W + (self.Qmatrix + phi[:, None] + psi[None, :]) / self.sigma_delta
        return float(np.abs(np.log(self.matrix) - rebuilt).max())


def _probabilities(mu: DiscreteMeasure, side: str, warnings: list) -> np.ndarray:
    p = np.array([float(w) for _, w in mu.atoms])
    if not np.isfinite(p).all() or (p <= 0).any():
        raise ValueError(f"{side} marginal must be finite and strictly positive")
    total = p.sum()
    if total <= 0:
        raise ValueError(f"{side} marginal has no mass")
    if abs(total - 1.0) > 1e-12:
        warnings.append(f"{side} marginal total {total:g} normalized to 1")
    return p / total


def ipf_equilibrium(Q: OutputSpec, pF: DiscreteMeasure, pG: DiscreteMeasure,
                    cfg: LogitConfig = LogitConfig()) -> LogitSolution:
    """Scale the kernel exp(Q / sigma_delta) to marginals ``pF`` and ``pG``.

    Rows and columns are rescaled alternately until the row marginal (the
    column marginal is exact after each column pass) is within
    ``cfg.ipf_tol`` of its target in max-abs terms.
    """
    warnings: list = []
    p = _probabilities(pF, "firm", warnings)
    q = _probabilities(pG, "worker", warnings)
    xs, ys = tuple(pF.support), tuple(pG.support)
    Qm = np.array([[float(Q(x, y)) for y in ys] for x in xs])
    bad = ~np.isfinite(Qm)
    if bad.any():
        r, c = np.argwhere(bad)[0]
        raise KernelRangeError(f"Q({xs[r]}, {ys[c]}) = {Qm[r, c]} is not finite")
    sd = cfg.sigma_delta
    qmax = Qm.max()
    K = np.exp((Qm - qmax) / sd)
    if (K == 0).any():
        r, c = np.argwhere(K == 0)[0]
        raise KernelRangeError(
            f"kernel underflows at Q({xs[r]}, {ys[c]}) = {Qm[r, c]} (max Q {qmax}, sigma_delta {sd})"
        )
    a = np.ones(len(xs))
    b = np.ones(len(ys))
    err = math.inf
    it = 0
    for it in range(1, cfg.max_iters + 1):
        a = p / (K @ b)
        b = q / (K.T @ a)
        err = float(np.abs(a * (K @ b) - p).max())
        if err < cfg.ipf_tol:
            break
    else:
        raise IPFConvergenceError(f"marginal error {err:.3g} after {cfg.max_iters} iterations")
    m = a[:, None] * K * b[None, :]
    la, lb = np.log(a), np.log(b)
    phi = sd * (la - la[0])
    psi = sd * (lb - lb[0])
    W = float(la[0] + lb[0] - qmax / sd)
    return LogitSolution(
        xs, ys, m,
        {x: float(v) for x, v in zip(xs, phi)},
        {y: float(v) for y, v in zip(ys, psi)},
        W, it, err, sd, tuple(warnings), Qm,
    )


def double_difference(sol: LogitSolution, x, xp, y, yp) -> float:
    """log{m(x,y) m(x',y') / (m(x',y) m(x,y'))}."""
    vals = [sol.mass(x, y), sol.mass(xp, yp), sol.mass(xp, y), sol.mass(x, yp)]
    if min(vals) <= 0:
        raise ZeroCellError("double difference touches a zero-density cell")
    return math.log(vals[0]) + math.log(vals[1]) - math.log(vals[2]) - math.log(vals[3])


def identity_error(sol: LogitSolution) -> float:
    """Largest gap between log density and Q double differences over all quadruples."""
    lm = np.log(sol.matrix)
    Qm = sol.Qmatrix
    worst = 0.0
    nr, nc = lm.shape
    for r in range(nr):
        for rp in range(r + 1, nr):
            dl = lm[r][:, None] + lm[rp][None, :] - lm[rp][:, None] - lm[r][None, :]
            dq = Qm[r][:, None] + Qm[rp][None, :] - Qm[rp][:, None] - Qm[r][None, :]
            worst = max(worst, float(np.abs(dl - dq / sol.sigma_delta).max()))
    return worst


@dataclass(frozen=True)
class LogPNCheck:
    holds: bool
    witness: tuple | None
    classification: object  # PNClassification of the log density


def check_log_pn(sol: LogitSolution, pattern: ComplementarityPattern, tol: float = 1e-9) -> LogPNCheck:
    """Is the log density P,N modular for ``pattern`` on the solution's grid?"""
    L = sol.log_density()
    grid = (sol.xs, sol.ys)
    cls = classify_pn(L, grid, tol=tol, complete=False)
    holds = is_pn_modular(L, pattern, grid, tol=tol, complete=False)
    witness = None
    if not holds:
        for (i, j), v in sorted(cls.verdicts.items()):
            if (i, j) in pattern.P and not v.supermodular:
                witness = (i, j, v.super_witness)
            elif (i, j) in pattern.N and not v.submodular:
                witness = (i, j, v.sub_witness)
            elif (i, j) not in pattern.P | pattern.N and not v.modular:
                witness = (i, j, v.super_witness or v.sub_witness)
            if witness:
                break
    return LogPNCheck(holds, witness, cls)


def local_log_odds(t: BivariateTable, i: int, j: int) -> float:
    """Log local odds ratio of cells (i, j), (i+1, j+1) against (i+1, j), (i, j+1).

    Indices are 1-based.
    """
    R, C = t.masses.shape
    if not (1 <= i < R and 1 <= j < C):
        raise IndexError(f"local odds ratio ({i},{j}) needs 1 <= i < {R} and 1 <= j < {C}")
    m = t.masses
    cells = [m[i - 1, j - 1], m[i, j], m[i, j - 1], m[i - 1, j]]
    if min(cells) <= 0:
        raise ZeroCellError(f"local odds ratio ({i},{j}) touches a zero cell")
    return float(np.log(cells[0]) + np.log(cells[1]) - np.log(cells[2]) - np.log(cells[3]))


# --------------------------------------------------------------------------
# comparative statics


def concordance_fractions(sol: LogitSolution, pattern: ComplementarityPattern) -> tuple[float, float]:
    """Mass of P,N and of N,P concordant pairs among two independent draws."""
    couples = [(x, y) for x in sol.xs for y in sol.ys]
    w = sol.matrix.ravel()
    pn = npf = 0.0
    for a in range(len(couples)):
        for b in range(a + 1, len(couples)):
            c = classify_pair(couples[a], couples[b], pattern)
            if c.pn_concordant:
                pn += 2 * w[a] * w[b]
            elif c.np_concordant:
                npf += 2 * w[a] * w[b]
    return pn, npf


@dataclass(frozen=True)
class StaticsReport:
    pn_before: float
    np_before: float
    pn_after: float
    np_after: float

    @property
    def ratio_before(self) -> float:
        return self.pn_before / self.np_before if self.np_before > 0 else math.inf

    @property
    def ratio_after(self) -> float:
        return self.pn_after / self.np_after if self.np_after > 0 else math.inf

    @property
    def rose(self) -> bool:
        """Weak rise, allowing relative noise of 1e-9."""
        a, b = self.ratio_before, self.ratio_after
        return b >= a or math.isclose(a, b, rel_tol=1e-9)

    @property
    def strict_rise(self) -> bool:
        return self.ratio_after > self.ratio_before and not math.isclose(
            self.ratio_before, self.ratio_after, rel_tol=1e-9
        )


def comparative_statics(Q: OutputSpec, Qp: OutputSpec, pF: DiscreteMeasure, pG: DiscreteMeasure,
                        pattern: ComplementarityPattern, cfg: LogitConfig = LogitConfig(),
                        check: bool = True) -> StaticsReport:
    """Concordance ratios before (Q) and after (Qp) a P,N modular increase.

    With ``check`` set, ``Qp`` must exhibit higher P,N modularity than ``Q``
    on the support grid.
    """
    grid = (pF.support, pG.support)
    # float Q values carry rounding noise in their double differences
    scale = max(abs(float(f(x, y))) for f in (Q, Qp) for x in grid[0] for y in grid[1])
    if check and not compare_modularity(Qp, Q, pattern, grid, tol=1e-9 * max(1.0, scale)).higher:
        raise ValueError("Qp is not a P,N modular increase over Q on this grid")
    before = ipf_equilibrium(Q, pF, pG, cfg)
    after = ipf_equilibrium(Qp, pF, pG, cfg)
    pn0, np0 = concordance_fractions(before, pattern)
    pn1, np1 = concordance_fractions(after, pattern)
    return StaticsReport(pn0, np0, pn1, np1)
