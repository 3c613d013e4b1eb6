"""Conditional-logit estimation of quadratic complementarities on 25 types.

Each spouse has an education index E and a health index H, both in 1..5.
Type ``c = 5 * (H - 1) + E`` (so types 1..5 share H = 1). A type-r woman
marries a type-c man with probability proportional to
``exp(Q(x_r, y_c) + delta_c)`` where ``Q(x, y) = x' theta y`` and the
offsets satisfy ``delta_1 = 0``.

Attribute vectors are ordered ``(E, H)``; ``theta[k, l]`` pairs the woman's
attribute k with the man's attribute l.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import logsumexp

from .association import STANDARD_GAMMAS, CoupleDataset, kruskal_gamma

ATTRS = ("E", "H")
N_LEVELS = 5
N_TYPES = N_LEVELS * N_LEVELS

#: TYPE_ATTRS[c - 1] = (E, H) of type c
TYPE_ATTRS = np.array([(e, h) for h in range(1, 6) for e in range(1, 6)], dtype=float)

DIAGNOSTIC_GAMMAS = ("WM_HH", "WM_HE", "WM_EH", "WM_EE")


def type_index(e: int, h: int) -> int:
    """1-based type of education ``e`` and health ``h``."""
    if not (1 <= e <= 5 and 1 <= h <= 5):
        raise ValueError(f"indices must lie in 1..5, got E={e}, H={h}")
    return 5 * (h - 1) + e


def type_attrs(c: int) -> tuple[int, int]:
    """(E, H) of 1-based type ``c``."""
    if not 1 <= c <= N_TYPES:
        raise ValueError(f"type must lie in 1..{N_TYPES}, got {c}")
    return (c - 1) % 5 + 1, (c - 1) // 5 + 1


class NonFiniteObjectiveError(RuntimeError):
    """The objective became non-finite at some parameter point."""


class SupportError(ValueError):
    """A KL term divides by a zero-probability cell."""


@dataclass(frozen=True)
class ParamVector:
    """Complementarities ``theta`` (2x2, (E, H) order) and man-type offsets.

    ``offsets[c - 1]`` is delta_c; ``offsets[0]`` is pinned at zero.
    """

    theta: np.ndarray
    offsets: np.ndarray = field(default_factory=lambda: np.zeros(N_TYPES))

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float)
        offsets = np.array(self.offsets, dtype=float)
        if theta.shape != (2, 2) or offsets.shape != (N_TYPES,):
            raise ValueError("theta must be 2x2 and offsets of length 25")
        if not (np.isfinite(theta).all() and np.isfinite(offsets).all()):
            raise ValueError("parameters must be finite")
        if offsets[0] != 0:
            raise ValueError("offsets[0] (delta_1) must be 0")
        theta.setflags(write=False)
        offsets.setflags(write=False)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "offsets", offsets)

    @classmethod
    def from_named(cls, named: dict, offsets=None) -> "ParamVector":
        """Build from ``{("H", "E"): value, ...}`` keyed by (woman attr, man attr)."""
        theta = np.zeros((2, 2))
        for (k, l), v in named.items():
            theta[ATTRS.index(k), ATTRS.index(l)] = v
        return cls(theta, np.zeros(N_TYPES) if offsets is None else offsets)

    def named(self) -> dict:
        return {(k, l): float(self.theta[i, j]) for i, k in enumerate(ATTRS) for j, l in enumerate(ATTRS)}

    def flat(self) -> np.ndarray:
        return np.concatenate([self.theta.ravel(), self.offsets[1:]])

    @classmethod
    def from_flat(cls, v) -> "ParamVector":
        v = np.asarray(v, dtype=float)
        return cls(v[:4].reshape(2, 2), np.concatenate([[0.0], v[4:]]))


N_PARAMS = 4 + N_TYPES - 1


def utilities(p: ParamVector) -> np.ndarray:
    """25x25 systematic utilities Q(x_r, y_c) + delta_c."""
    return TYPE_ATTRS @ p.theta @ TYPE_ATTRS.T + p.offsets[None, :]


def choice_matrix(p: ParamVector) -> np.ndarray:
    """Row r holds the type-r woman's probabilities over the 25 man types."""
    U = utilities(p)
    return np.exp(U - logsumexp(U, axis=1, keepdims=True))


def choice_probabilities(p: ParamVector, r: int) -> np.ndarray:
    """Probabilities over the 25 man types for a woman of 1-based type ``r``."""
    if not 1 <= r <= N_TYPES:
        raise ValueError(f"woman type must lie in 1..{N_TYPES}")
    return choice_matrix(p)[r - 1]


# --------------------------------------------------------------------------
# likelihood


def _check_counts(counts) -> np.ndarray:
    n = np.asarray(counts, dtype=float)
    if n.shape != (N_TYPES, N_TYPES):
        raise ValueError("counts must be a 25x25 matrix")
    if (n < 0).any() or not np.isfinite(n).all():
        raise ValueError("counts must be finite and nonnegative")
    if n.sum() <= 0:
        raise ValueError("counts must contain at least one couple")
    return n


@dataclass(frozen=True)
class LogLikelihood:
    """``param_part`` depends on the parameters; ``constant`` is the
    woman-marginal term, which does not."""

    param_part: float
    constant: float

    @property
    def total(self) -> float:
        return self.param_part + self.constant


def log_likelihood(p: ParamVector, counts, f_m=None) -> LogLikelihood:
    n = _check_counts(counts)
    U = utilities(p)
    logp = U - logsumexp(U, axis=1, keepdims=True)
    param = float((n * logp).sum())
    const = 0.0
    if f_m is not None:
        f = np.asarray(f_m, dtype=float)
        nr = n.sum(axis=1)
        if ((f <= 0) & (nr > 0)).any():
            raise ValueError("woman-type fraction is zero where couples are observed")
        const = float((nr[nr > 0] * np.log(f[nr > 0])).sum())
    return LogLikelihood(param, const)


def _features() -> np.ndarray:
    """Z[r, c, :] = derivative of utility (r, c) with respect to the flat parameters."""
    Z = np.zeros((N_TYPES, N_TYPES, N_PARAMS))
    X = TYPE_ATTRS
    for k in range(2):
        for l in range(2):
            Z[:, :, 2 * k + l] = X[:, k][:, None] * X[:, l][None, :]
    for c in range(1, N_TYPES):
        Z[:, c, 4 + c - 1] = 1.0
    return Z


_Z = _features()


def gradient(p: ParamVector, counts) -> np.ndarray:
    """Gradient of the parameter part: (n_rc - n_r p_rc) contracted with Z."""
    n = _check_counts(counts)
    P = choice_matrix(p)
    resid = n - n.sum(axis=1, keepdims=True) * P
    return np.einsum("rc,rck->k", resid, _Z)


def hessian(p: ParamVector, counts) -> np.ndarray:
    """Hessian of the parameter part (negative semidefinite)."""
    n = _check_counts(counts)
    P = choice_matrix(p)
    nr = n.sum(axis=1)
    zbar = np.einsum("rc,rck->rk", P, _Z)
    second = np.einsum("r,rc,rck,rcj->kj", nr, P, _Z, _Z)
    return -(second - np.einsum("r,rk,rj->kj", nr, zbar, zbar))


# --------------------------------------------------------------------------
# estimation


@dataclass(frozen=True)
class FitConfig:
    """Estimator settings.

    ``method`` is "annealing" (seeded simulated annealing then a Newton
    polish) or "ascent" (polish only, from zero). The annealing schedule is
    geometric: temperature ``t0 * cooling**k`` for ``steps`` steps with
    Gaussian proposals of scale ``step``.
    """

    method: str = "annealing"
    seed: int = 0
    restarts: int = 5
    steps: int = 2000
    t0: float = 1.0
    cooling: float = 0.995
    step: float = 0.05
    polish: bool = True
    tol: float = 1e-10
    threads: int = 1

    def __post_init__(self):
        if self.method not in ("annealing", "ascent"):
            raise ValueError("method must be 'annealing' or 'ascent'")
        if self.restarts < 1 or self.steps < 0 or not 0 < self.cooling <= 1:
            raise ValueError("invalid annealing schedule")


def _anneal(objective, x0: np.ndarray, cfg: FitConfig, seed_seq) -> tuple[float, np.ndarray]:
    rng = np.random.default_rng(seed_seq)
    x = x0.copy()
    fx = objective(x)
    best, fbest = x.copy(), fx
    T = cfg.t0
    scale = cfg.step / math.sqrt(len(x))
    for _ in range(cfg.steps):
        y = x + scale * rng.standard_normal(len(x))
        fy = objective(y)
        if not math.isfinite(fy):
            raise NonFiniteObjectiveError(f"objective is {fy} at {y.tolist()}")
        if fy <= fx or rng.random() < math.exp(-(fy - fx) / T):
            x, fx = y, fy
            if fx < fbest:
                best, fbest = x.copy(), fx
        T *= cfg.cooling
    return fbest, best


@dataclass(frozen=True)
class FitResult:
    params: ParamVector
    loglik: LogLikelihood
    diagnostics: "FitDiagnostics"
    annealing_best: tuple = ()  # per-restart best objective
    converged: bool = True
    grad_norm: float = 0.0

    def __iter__(self):
        return iter((self.params, self.diagnostics))


def fit_mle(counts, f_m=None, cfg: FitConfig = FitConfig()) -> FitResult:
    """Maximize the conditional-logit likelihood over theta and the offsets."""
    n = _check_counts(counts)
    N = n.sum()

    def objective(v):
        return -log_likelihood(ParamVector.from_flat(v), n).param_part / N

    def jac(v):
        return -gradient(ParamVector.from_flat(v), n) / N

    def hess(v):
        return -hessian(ParamVector.from_flat(v), n) / N

    x0 = np.zeros(N_PARAMS)
    anneal_best = ()
    if cfg.method == "annealing":
        seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
        if cfg.threads > 1:
            with ThreadPoolExecutor(cfg.threads) as pool:
                runs = list(pool.map(lambda s: _anneal(objective, x0, cfg, s), seeds))
        else:
            runs = [_anneal(objective, x0, cfg, s) for s in seeds]
        # best objective wins; ties go to the lower restart index
        k = min(range(len(runs)), key=lambda i: (runs[i][0], i))
        x0 = runs[k][1]
        anneal_best = tuple(float(r[0]) for r in runs)
    x = x0
    converged = True
    if cfg.polish or cfg.method == "ascent":
        res = minimize(objective, x0, jac=jac, hess=hess, method="trust-exact", options={"gtol": cfg.tol})
        x = res.x
        converged = bool(res.success)
    if not math.isfinite(objective(x)):
        raise NonFiniteObjectiveError(f"objective is not finite at {x.tolist()}")
    p = ParamVector.from_flat(x)
    ll = log_likelihood(p, n, f_m)
    f = n.sum(axis=1) / N if f_m is None else np.asarray(f_m, dtype=float) / np.sum(f_m)
    predicted = f[:, None] * choice_matrix(p)
    diag = diagnostics(n / N, predicted, log_likelihood=ll.total, strict=False)
    g = float(np.abs(gradient(p, n)).max() / N)
    return FitResult(p, ll, diag, anneal_best, converged, g)


def simulate_couples(p: ParamVector, f_m, n: int, seed: int = 0) -> CoupleDataset:
    """Draw ``n`` couples: woman type from ``f_m``, husband's type by logit."""
    if n <= 0:
        raise ValueError("n must be positive")
    f = np.asarray(f_m, dtype=float)
    if f.shape != (N_TYPES,) or (f < 0).any() or f.sum() <= 0:
        raise ValueError("f_m must be 25 nonnegative weights")
    f = f / f.sum()
    rng = np.random.default_rng(seed)
    r = rng.choice(N_TYPES, size=n, p=f)
    cum = np.cumsum(choice_matrix(p), axis=1)
    cum[:, -1] = 1.0
    u = rng.random(n)
    c = (u[:, None] >= cum[r]).sum(axis=1)
    return CoupleDataset(np.ones(n), TYPE_ATTRS[r], TYPE_ATTRS[c], ATTRS, ATTRS)


def type_counts(data: CoupleDataset) -> np.ndarray:
    """25x25 weighted counts, rows woman type, columns man type."""
    def idx(A):
        e, h = A[:, 0].astype(int), A[:, 1].astype(int)
        if ((e < 1) | (e > 5) | (h < 1) | (h > 5)).any():
            raise ValueError("type attributes must lie in 1..5")
        return 5 * (h - 1) + e - 1

    out = np.zeros((N_TYPES, N_TYPES))
    np.add.at(out, (idx(data.X), idx(data.Y)), data.weights)
    return out


def type_dataset(joint) -> CoupleDataset:
    """The 625 type pairs weighted by a 25x25 joint density."""
    J = np.asarray(joint, dtype=float)
    r, c = np.meshgrid(np.arange(N_TYPES), np.arange(N_TYPES), indexing="ij")
    return CoupleDataset(J.ravel(), TYPE_ATTRS[r.ravel()], TYPE_ATTRS[c.ravel()], ATTRS, ATTRS)


# --------------------------------------------------------------------------
# diagnostics


def efficiency_loss(kl: float, entropy: float) -> float:
    """100 * KL / (KL + entropy)."""
    if kl < 0 or entropy < 0 or kl + entropy <= 0:
        raise ValueError("KL and entropy must be nonnegative and not both zero")
    return 100.0 * kl / (kl + entropy)


def kl_divergence(p, q) -> float:
    """sum p log2(p / q) over cells with p > 0."""
    p, q = np.asarray(p, dtype=float).ravel(), np.asarray(q, dtype=float).ravel()
    mask = p > 0
    if (q[mask] <= 0).any():
        raise SupportError("KL divergence undefined: reference is zero where the first argument is positive")
    return float((p[mask] * np.log2(p[mask] / q[mask])).sum())


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


@dataclass(frozen=True)
class FitDiagnostics:
    log_likelihood: float | None
    kl_divergence: float
    shannon_entropy_predicted: float
    efficiency_loss_percent: float
    predicted_gammas: dict
    empirical_gammas: dict
    direction: str = "predicted"


def diagnostics(empirical, predicted, direction: str = "predicted", log_likelihood: float | None = None,
                strict: bool = True) -> FitDiagnostics:
    """Fit summary of a predicted 25x25 joint density against the empirical one.

    ``direction="predicted"`` takes KL as sum pred * log2(pred / emp), the
    literal reading with the predicted density in the lead; ``"empirical"``
    swaps the roles. With ``strict`` off a support violation yields an
    infinite KL instead of raising.
    """
    E = np.asarray(empirical, dtype=float)
    Pr = np.asarray(predicted, dtype=float)
    if E.shape != Pr.shape:
        raise ValueError("empirical and predicted densities differ in shape")
    for name, A in (("empirical", E), ("predicted", Pr)):
        if (A < 0).any() or abs(A.sum() - 1) > 1e-9:
            raise ValueError(f"{name} density must be nonnegative and sum to 1")
    if direction == "predicted":
        lead, ref = Pr, E
    elif direction == "empirical":
        lead, ref = E, Pr
    else:
        raise ValueError("direction must be 'predicted' or 'empirical'")
    try:
        kl = kl_divergence(lead, ref)
    except SupportError:
        if strict:
            raise
        kl = math.inf
    H = shannon_entropy(Pr)
    loss = efficiency_loss(kl, H) if math.isfinite(kl) else 100.0
    gp = {k: kruskal_gamma(type_dataset(Pr), STANDARD_GAMMAS[k]).gamma for k in DIAGNOSTIC_GAMMAS} if E.shape == (N_TYPES, N_TYPES) else {}
    ge = {k: kruskal_gamma(type_dataset(E), STANDARD_GAMMAS[k]).gamma for k in DIAGNOSTIC_GAMMAS} if E.shape == (N_TYPES, N_TYPES) else {}
    return FitDiagnostics(log_likelihood, kl, H, loss, gp, ge, direction)


def truth_offsets(theta: ParamVector | np.ndarray, f_women, f_men, sigma_delta: float = 1.0) -> np.ndarray:
    """Offsets under which the logit equilibrium reproduces both type marginals.

    Solves the equilibrium on the 25x25 type grid and reads delta_c off the
    worker-side potentials, relative to type 1.
    """
    from .logit import LogitConfig, ipf_equilibrium
    from .market import DiscreteMeasure, Quadratic

    th = theta.theta if isinstance(theta, ParamVector) else np.asarray(theta, dtype=float)
    pts = [tuple(int(v) for v in a) for a in TYPE_ATTRS]
    pF = DiscreteMeasure.from_pairs(zip(pts, np.asarray(f_women, dtype=float) / np.sum(f_women)))
    pG = DiscreteMeasure.from_pairs(zip(pts, np.asarray(f_men, dtype=float) / np.sum(f_men)))
    sol = ipf_equilibrium(Quadratic(th), pF, pG, LogitConfig(sigma_delta=sigma_delta))
    psi = np.array([sol.psi[y] for y in pts]) / sigma_delta
    return psi - psi[0]


def marginal_from_table(table) -> np.ndarray:
    """25 type weights from a 5x5 (health rows, education columns) table."""
    T = np.asarray(table, dtype=float)
    return np.array([T[type_attrs(c)[1] - 1, type_attrs(c)[0] - 1] for c in range(1, N_TYPES + 1)])
