"""Batch command-line interface.

Every subcommand prints one report (JSON by default) and exits with 0 on
success, 1 on usage errors, 2 on bad input data and 3 on numerical
failures. Verdicts such as "sorting fails" are data, not errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import SPEC_VERSION
from ._transport import NumericalError, UnbalancedError
from .association import STANDARD_GAMMAS, AllTiedError, CoupleDataset, kruskal_gamma
from .estimation import (
    ATTRS,
    FitConfig,
    NonFiniteObjectiveError,
    ParamVector,
    SupportError,
    choice_matrix,
    diagnostics,
    efficiency_loss,
    fit_mle,
    marginal_from_table,
    simulate_couples,
    truth_offsets,
    type_counts,
)
from .logit import IPFConvergenceError, KernelRangeError, LogitConfig, identity_error, ipf_equilibrium
from .market import (
    BivariateTable,
    ComplementarityPattern,
    DomainError,
    Quadratic,
    Tabulated,
    load_json,
    market_from_json,
    matching_from_json,
    matching_to_json,
    validate_market,
    validate_matching,
)
from .order import MarginalMismatchError, dominates_pn, is_undominated
from .planner import OracleSizeError, brute_force_oracle, solve_planner
from .sorting import check_global_pn, check_weak_pn, check_within_group, exists_global_pn

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3

#: permitted range of the ordinal education and health codes
CODE_RANGE = (1, 5)


class DataError(ValueError):
    """Input file is missing, malformed or inconsistent."""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass(frozen=True)
class RunConfig:
    tol: float | None = None
    seed: int = 0
    sigma_delta: float = 1.0
    max_iters: int = 100_000
    budget: int = 10**6
    threads: int = 1
    fmt: str = "json"
    output: str | None = None


# --------------------------------------------------------------------------
# input parsing


def _read_text(path: str) -> str:
    try:
        with open(path, newline="") as fh:
            return fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None


def _json(path: str):
    try:
        return load_json(path)
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def parse_couples(path: str) -> tuple[CoupleDataset, list]:
    """Read a couples CSV: ``weight,x_1..x_K,y_1..y_L`` or ``weight,x_E,x_H,y_E,y_H``.

    Returns the dataset and a list of warnings (codes outside 1..5 on
    labeled education or health columns). Malformed rows raise
    :class:`DataError` naming every bad line.
    """
    text = _read_text(path)
    rows = list(csv.reader(io.StringIO(text)))
    rows = [(n, r) for n, r in enumerate(rows, start=1) if any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"{path}: empty file")
    _, header = rows[0]
    header = [h.strip() for h in header]
    if not header or header[0] != "weight":
        raise DataError(f"{path}: missing header (expected 'weight,x_...,y_...')")
    xcols = [k for k, h in enumerate(header) if h.startswith("x_")]
    ycols = [k for k, h in enumerate(header) if h.startswith("y_")]
    if not xcols or not ycols or len(xcols) + len(ycols) + 1 != len(header):
        raise DataError(f"{path}: header must be weight, x_* columns and y_* columns")
    xl = tuple(header[k][2:] for k in xcols)
    yl = tuple(header[k][2:] for k in ycols)
    if all(s.isdigit() for s in xl + yl):
        xl = yl = ()
    records, errors, warnings = [], [], []
    for line, r in rows[1:]:
        if len(r) != len(header):
            errors.append(f"line {line}: expected {len(header)} cells, found {len(r)}")
            continue
        try:
            vals = [float(c) for c in r]
        except ValueError:
            bad = next(c for c in r if not _is_float(c))
            errors.append(f"line {line}: non-numeric cell {bad!r}")
            continue
        if not all(math.isfinite(v) for v in vals):
            errors.append(f"line {line}: non-finite value")
            continue
        if vals[0] < 0:
            errors.append(f"line {line}: negative weight")
            continue
        x = [vals[k] for k in xcols]
        y = [vals[k] for k in ycols]
        for labels, vec, side in ((xl, x, "x"), (yl, y, "y")):
            for lab, v in zip(labels, vec):
                if lab in ATTRS and not CODE_RANGE[0] <= v <= CODE_RANGE[1]:
                    warnings.append(f"line {line}: {side}_{lab}={v:g} outside {CODE_RANGE[0]}-{CODE_RANGE[1]}")
        records.append((vals[0], x, y))
    if errors:
        raise DataError(f"{path}: " + "; ".join(errors))
    if not records:
        raise DataError(f"{path}: no data rows")
    return CoupleDataset.from_records(records, xl, yl), warnings


def _is_float(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def parse_table(path: str) -> BivariateTable:
    """Joint-table CSV: header row of column categories, then one row per row category."""
    rows = [r for r in csv.reader(io.StringIO(_read_text(path))) if any(c.strip() for c in r)]
    if len(rows) < 2:
        raise DataError(f"{path}: a table needs a header row and at least one data row")
    try:
        cols = [float(c) for c in rows[0][1:]]
        row_vals, masses = [], []
        for n, r in enumerate(rows[1:], start=2):
            if len(r) != len(cols) + 1:
                raise DataError(f"{path}: line {n} has {len(r)} cells, expected {len(cols) + 1}")
            row_vals.append(float(r[0]))
            masses.append([float(c) for c in r[1:]])
    except ValueError as exc:
        raise DataError(f"{path}: non-numeric cell ({exc})") from None
    try:
        return BivariateTable(tuple(_num(v) for v in row_vals), tuple(_num(v) for v in cols), np.array(masses))
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None


def _num(v: float):
    return int(v) if float(v).is_integer() else v


def write_table_csv(table: BivariateTable, fh, corner: str = "row\\col") -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow([corner] + list(table.cols))
    for a, row in zip(table.rows, table.masses):
        w.writerow([a] + [repr(float(v)) for v in row])


def _pattern(path: str) -> ComplementarityPattern:
    obj = _json(path)
    try:
        return ComplementarityPattern.from_json(obj)
    except (ValueError, TypeError) as exc:
        raise DataError(f"{path}: bad pattern ({exc})") from None


def _market(path: str, tol: float | None):
    obj = _json(path)
    try:
        m = market_from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: bad market ({exc})") from None
    rep = validate_market(m, tol if tol is not None else 1e-9)
    if not rep.valid:
        raise DataError(f"{path}: invalid market: " + "; ".join(rep.violations))
    return m, rep


def _matching(path: str):
    obj = _json(path)
    try:
        return matching_from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: bad matching ({exc})") from None


def _output_spec(path: str):
    """``{"theta": [[...]]}`` or ``{"table": [{"x":..,"y":..,"value":..}]}``."""
    obj = _json(path)
    try:
        if isinstance(obj, list):
            return Quadratic(obj)
        if "theta" in obj:
            theta = obj["theta"]
            if isinstance(theta, dict):  # named form {"H,E": value}
                return Quadratic(ParamVector.from_named(
                    {tuple(k.split(",")): v for k, v in theta.items()}).theta)
            return Quadratic(theta)
        if "table" in obj:
            return Tabulated({(tuple(c["x"]), tuple(c["y"])): c["value"] for c in obj["table"]})
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}: bad output function ({exc})") from None
    raise DataError(f"{path}: expected a 'theta' or 'table' entry")


def _params(path: str) -> tuple[ParamVector, bool]:
    obj = _json(path)
    try:
        Q = _output_spec(path)
        if not isinstance(Q, Quadratic) or Q.shape != (2, 2):
            raise ValueError("estimation parameters need a 2x2 theta")
        offsets = obj.get("offsets") if isinstance(obj, dict) else None
        if offsets is None:
            return ParamVector(Q.array()), False
        return ParamVector(Q.array(), offsets), True
    except (TypeError, ValueError) as exc:
        raise DataError(f"{path}: bad parameters ({exc})") from None


def _matrix25(path: str) -> np.ndarray:
    if path.endswith(".json"):
        obj = _json(path)
        arr = np.array(obj.get("matrix", obj) if isinstance(obj, dict) else obj, dtype=float)
    else:
        arr = parse_table(path).masses
    if arr.shape != (25, 25):
        raise DataError(f"{path}: expected a 25x25 matrix, found {arr.shape}")
    return arr


# --------------------------------------------------------------------------
# report helpers


def _cell(c) -> dict:
    (x, y) = c
    return {"x": list(x), "y": list(y)}


def _pair(w):
    return None if w is None else [_cell(w[0]), _cell(w[1])]


def _sort_report(chk) -> dict:
    return {"holds": chk.holds, "witness": _pair(chk.witness), "mass_threshold": chk.mass_tol}


def _clean(obj):
    """Make a report JSON-safe: numpy scalars, tuples, infinities."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        if math.isnan(v):
            return "nan"
        return v
    return obj


def _aligned(obj, indent: int = 0) -> list:
    lines = []
    pad = " " * indent
    if isinstance(obj, dict):
        width = max((len(str(k)) for k in obj), default=0)
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not _is_flat_list(v):
                lines.append(f"{pad}{str(k)}:")
                lines += _aligned(v, indent + 2)
            else:
                lines.append(f"{pad}{str(k).ljust(width)}  {_scalar(v)}")
    elif isinstance(obj, list):
        if obj and all(isinstance(r, list) and _is_flat_list(r) for r in obj):
            cells = [[_scalar(v) for v in r] for r in obj]
            w = max(len(c) for r in cells for c in r)
            lines += [pad + "  ".join(c.rjust(w) for c in r) for r in cells]
        else:
            for v in obj:
                if isinstance(v, (dict, list)):
                    lines.append(f"{pad}-")
                    lines += _aligned(v, indent + 2)
                else:
                    lines.append(f"{pad}- {_scalar(v)}")
    else:
        lines.append(pad + _scalar(obj))
    return lines


def _is_flat_list(v) -> bool:
    return isinstance(v, list) and all(not isinstance(e, (dict, list)) for e in v)


def _scalar(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, list):
        return "[" + ", ".join(_scalar(e) for e in v) + "]"
    return json.dumps(v) if isinstance(v, str) else str(v)


def _emit(report: dict, cfg: RunConfig, out) -> None:
    report = _clean({"spec_version": SPEC_VERSION, **report})
    if cfg.fmt == "json":
        text = json.dumps(report, sort_keys=True, indent=2) + "\n"
    else:
        text = "\n".join(_aligned(report)) + "\n"
    if cfg.output:
        with open(cfg.output, "w") as fh:
            fh.write(text)
    else:
        out.write(text)


# --------------------------------------------------------------------------
# subcommands


def cmd_solve(args, cfg: RunConfig) -> dict:
    m, rep = _market(args.market, cfg.tol)
    Q = _output_spec(args.output_function)
    try:
        sol = solve_planner(m, Q)
    except DomainError as exc:
        raise DataError(str(exc)) from None
    xs, ys = m.firms.support, m.workers.support
    report = {
        "command": "solve",
        "value": sol.value,
        "matching": matching_to_json(sol.matching),
        "matrix": {"firms": [list(x) for x in xs], "workers": [list(y) for y in ys],
                   "counts": sol.matching.to_matrix(xs, ys)},
        "scale": sol.scale,
        "optimal_face_cells": sol.face_size,
        "tie_broken": sol.tie_broken,
        "warnings": rep.warnings,
    }
    if args.oracle:
        o = brute_force_oracle(m, Q)
        report["oracle"] = {
            "value": o.value,
            "n_optimal_plans": len(o.all_optimal),
            "unique": len(o.all_optimal) == 1,
            "agrees": o.value == sol.value or math.isclose(o.value, sol.value, rel_tol=1e-9),
        }
    return report


def cmd_sort_check(args, cfg: RunConfig) -> dict:
    M = _matching(args.matching)
    P = _pattern(args.pattern)
    mt = cfg.tol or 0.0
    try:
        report = {
            "command": "sort-check",
            "pattern": P.to_json(),
            "global": _sort_report(check_global_pn(M, P, mass_tol=mt)),
            "within_group": _sort_report(check_within_group(M, P, mass_tol=mt)),
            "weak": _sort_report(check_weak_pn(M, P, mass_tol=mt)),
        }
    except IndexError as exc:
        raise DataError(str(exc)) from None
    if args.market:
        m, _ = _market(args.market, cfg.tol)
        v = validate_matching(M, m, cfg.tol or 1e-9)
        g = exists_global_pn(m, P, budget=cfg.budget)
        report["no_single"] = {"valid": v.valid, "violations": v.violations}
        report["global_exists"] = {
            "exists": g.exists, "status": g.status, "cliques_examined": g.explored,
            "witness": matching_to_json(g.witness) if g.witness else None,
        }
    return report


def cmd_dominance(args, cfg: RunConfig) -> dict:
    M = _matching(args.matching)
    P = _pattern(args.pattern)
    tol = cfg.tol or 1e-9
    report = {"command": "dominance", "pattern": P.to_json()}
    if args.other:
        Mp = _matching(args.other)
        try:
            d = dominates_pn(M, Mp, P, tol=tol)
        except MarginalMismatchError as exc:
            raise DataError(str(exc)) from None
        cert = d.certificate
        report["dominates"] = d.dominates
        report["transfers"] = [
            {"receiving": [_cell(c) for c in t.receiving], "losing": [_cell(c) for c in t.losing], "alpha": a}
            for t, a in cert.weights
        ]
        if cert.separating is not None:
            report["separating_function"] = [
                {"x": list(x), "y": list(y), "value": v} for (x, y), v in sorted(cert.separating.values.items())
            ]
    else:
        u = is_undominated(M, P, tol=tol)
        report["undominated"] = u.undominated
        report["strict_transfer_weight"] = max(u.gain, 0.0) + 0.0  # drop the sign of -0.0
        report["improved"] = matching_to_json(u.improved) if u.improved else None
    return report


def cmd_ipf(args, cfg: RunConfig) -> dict:
    m, rep = _market(args.market, None)
    Q = _output_spec(args.output_function)
    lc = LogitConfig(cfg.sigma_delta, cfg.tol or 1e-12, cfg.max_iters)
    sol = ipf_equilibrium(Q, m.firms, m.workers, lc)
    return {
        "command": "ipf",
        "sigma_delta": cfg.sigma_delta,
        "density": matching_to_json(sol.density),
        "matrix": {"firms": [list(x) for x in sol.xs], "workers": [list(y) for y in sol.ys],
                   "density": sol.matrix},
        "potentials": {
            "firm": [{"x": list(x), "phi": sol.phi[x]} for x in sol.xs],
            "worker": [{"y": list(y), "psi": sol.psi[y]} for y in sol.ys],
            "W": sol.W,
        },
        "iterations": sol.iterations,
        "max_marginal_error": sol.max_marginal_error,
        "identity_error": identity_error(sol),
        "warnings": list(sol.warnings) + rep.warnings,
    }


def cmd_gamma(args, cfg: RunConfig) -> dict:
    report = {"command": "gamma"}
    if args.table:
        t = parse_table(args.table)
        g = kruskal_gamma(t)
        report["gamma"] = {"C": g.C, "D": g.D, "ties": g.ties, "gamma": g.gamma}
        return report
    if not args.couples:
        raise UsageError("gamma needs --couples or --table")
    data, warnings = parse_couples(args.couples)
    names = args.stat or ["WW_HE", "MM_HE", "WM_HE", "MW_HE", "WM_HH"]
    out = {}
    for name in names:
        if name not in STANDARD_GAMMAS:
            raise UsageError(f"unknown statistic {name!r}; choose from {sorted(STANDARD_GAMMAS)}")
        try:
            g = kruskal_gamma(data, STANDARD_GAMMAS[name])
        except KeyError as exc:
            raise DataError(f"{args.couples}: {exc.args[0]}") from None
        out[name] = {"C": g.C, "D": g.D, "ties": g.ties, "gamma": g.gamma}
    report["gamma"] = out
    report["warnings"] = warnings
    return report


def _default_marginals():
    from .data import pooled_table

    return marginal_from_table(pooled_table("WW_HE")), marginal_from_table(pooled_table("MM_HE"))


def cmd_estimate(args, cfg: RunConfig) -> dict:
    warnings = []
    if args.counts:
        n = _matrix25(args.counts)
    elif args.couples:
        data, warnings = parse_couples(args.couples)
        try:
            n = type_counts(data)
        except ValueError as exc:
            raise DataError(f"{args.couples}: {exc}") from None
    else:
        raise UsageError("estimate needs --counts or --couples")
    fc = FitConfig(method=args.method, seed=cfg.seed, restarts=args.restarts, threads=cfg.threads,
                   tol=cfg.tol or 1e-10)
    try:
        res = fit_mle(n, None, fc)
    except ValueError as exc:
        raise DataError(str(exc)) from None
    d = res.diagnostics
    # the literal KL is infinite whenever a predicted cell is empty in the
    # sample; the reversed direction stays finite and is reported alongside
    N = n.sum()
    predicted = (n.sum(axis=1) / N)[:, None] * choice_matrix(res.params)
    rev = diagnostics(n / N, predicted, direction="empirical", strict=False)
    return {
        "command": "estimate",
        "attrs": list(ATTRS),
        "theta": res.params.theta,
        "theta_named": {f"{k},{l}": v for (k, l), v in res.params.named().items()},
        "offsets": res.params.offsets,
        "log_likelihood": {"parameter_part": res.loglik.param_part, "constant": res.loglik.constant},
        "converged": res.converged,
        "max_abs_gradient": res.grad_norm,
        "diagnostics": _diag(d),
        "diagnostics_empirical_lead": _diag(rev),
        "seed": cfg.seed,
        "warnings": warnings,
    }


def _diag(d) -> dict:
    return {
        "kl_divergence_bits": d.kl_divergence,
        "kl_direction": d.direction,
        "entropy_predicted_bits": d.shannon_entropy_predicted,
        "efficiency_loss_percent": d.efficiency_loss_percent,
        "predicted_gammas": d.predicted_gammas,
        "empirical_gammas": d.empirical_gammas,
    }


def cmd_simulate(args, cfg: RunConfig, out) -> dict | None:
    p, has_offsets = _params(args.params)
    fw, fm = _default_marginals()
    if args.women:
        fw = _vector25(args.women)
    if not has_offsets:
        men = _vector25(args.men) if args.men else fm
        p = ParamVector(p.theta, truth_offsets(p, fw, men))
    data = simulate_couples(p, fw, args.n, seed=cfg.seed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["weight", "x_E", "x_H", "y_E", "y_H"])
    for wt, x, y in zip(data.weights, data.X, data.Y):
        w.writerow([int(wt), int(x[0]), int(x[1]), int(y[0]), int(y[1])])
    if not args.out:
        out.write(buf.getvalue())
        return None
    with open(args.out, "w") as fh:
        fh.write(buf.getvalue())
    return {"command": "simulate", "n": args.n, "seed": cfg.seed, "out": args.out,
            "theta": p.theta, "offsets": p.offsets}


def _vector25(path: str) -> np.ndarray:
    rows = [r for r in csv.reader(io.StringIO(_read_text(path))) if any(c.strip() for c in r)]
    try:
        vals = [float(c) for r in rows for c in r if _is_float(c)]
    except ValueError:
        raise DataError(f"{path}: non-numeric marginal") from None
    if len(vals) != 25 or min(vals) < 0:
        raise DataError(f"{path}: expected 25 nonnegative type weights")
    return np.array(vals)


def cmd_diagnostics(args, cfg: RunConfig) -> dict:
    if args.kl is not None or args.entropy is not None:
        if args.kl is None or args.entropy is None:
            raise UsageError("--kl and --entropy go together")
        try:
            loss = efficiency_loss(args.kl, args.entropy)
        except ValueError as exc:
            raise DataError(str(exc)) from None
        return {"command": "diagnostics", "kl_divergence_bits": args.kl,
                "entropy_predicted_bits": args.entropy, "efficiency_loss_percent": loss}
    if not (args.empirical and args.predicted):
        raise UsageError("diagnostics needs --empirical and --predicted, or --kl and --entropy")
    E, Pr = _matrix25(args.empirical), _matrix25(args.predicted)
    try:
        d = diagnostics(E / E.sum(), Pr / Pr.sum(), direction=args.direction)
    except SupportError as exc:
        raise DataError(str(exc)) from None
    return {"command": "diagnostics", **_diag(d)}


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="tolerance override")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--sigma-delta", type=float, default=1.0, help="sum of the Gumbel scales")
    common.add_argument("--max-iters", type=int, default=100_000)
    common.add_argument("--budget", type=int, default=10**6, help="search budget for global sorting")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--format", choices=("json", "aligned-text"), default="json")
    common.add_argument("-o", "--output", help="write the report here instead of stdout")

    parser = _Parser(prog="multimatch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("solve", parents=[common], help="solve the planner's problem")
    p.add_argument("--market", required=True)
    p.add_argument("--q", dest="output_function", required=True, help="theta or table JSON")
    p.add_argument("--oracle", action="store_true", help="also run the enumeration oracle")

    p = sub.add_parser("sort-check", parents=[common], help="check sorting patterns of a matching")
    p.add_argument("--matching", required=True)
    p.add_argument("--pattern", required=True)
    p.add_argument("--market", help="also validate marginals and search for a globally sorted coupling")

    p = sub.add_parser("dominance", parents=[common], help="P,N modular order checks")
    p.add_argument("--matching", required=True)
    p.add_argument("--other", help="second matching; without it, test undominance")
    p.add_argument("--pattern", required=True)

    p = sub.add_parser("ipf", parents=[common], help="logit equilibrium density")
    p.add_argument("--market", required=True, help="market JSON with probability masses")
    p.add_argument("--q", dest="output_function", required=True)

    p = sub.add_parser("gamma", parents=[common], help="Kruskal gamma statistics")
    p.add_argument("--couples")
    p.add_argument("--table")
    p.add_argument("--stat", action="append", help="statistic name, repeatable")

    p = sub.add_parser("estimate", parents=[common], help="conditional-logit estimation")
    p.add_argument("--counts", help="25x25 counts (table CSV or JSON)")
    p.add_argument("--couples")
    p.add_argument("--method", choices=("annealing", "ascent"), default="annealing")
    p.add_argument("--restarts", type=int, default=5)

    p = sub.add_parser("simulate", parents=[common], help="simulate couples from parameters")
    p.add_argument("--params", required=True, help="JSON with theta and optional offsets")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--women", help="25 woman-type weights (CSV)")
    p.add_argument("--men", help="25 man-type weights used to set offsets when absent")
    p.add_argument("--out", help="couples CSV destination (stdout if omitted)")

    p = sub.add_parser("diagnostics", parents=[common], help="fit diagnostics")
    p.add_argument("--empirical")
    p.add_argument("--predicted")
    p.add_argument("--direction", choices=("predicted", "empirical"), default="predicted")
    p.add_argument("--kl", type=float)
    p.add_argument("--entropy", type=float)
    return parser


COMMANDS = {
    "solve": cmd_solve,
    "sort-check": cmd_sort_check,
    "dominance": cmd_dominance,
    "ipf": cmd_ipf,
    "gamma": cmd_gamma,
    "estimate": cmd_estimate,
    "diagnostics": cmd_diagnostics,
}


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if not args.command:
            raise UsageError("multimatch: a subcommand is required")
        cfg = RunConfig(args.tol, args.seed, args.sigma_delta, args.max_iters, args.budget,
                        args.threads, args.format, args.output)
        if args.command == "simulate" and args.n <= 0:
            raise UsageError("--n must be positive")
        if cfg.sigma_delta <= 0 or cfg.max_iters < 1 or cfg.threads < 1 or cfg.budget < 1:
            raise UsageError("--sigma-delta, --max-iters, --threads and --budget must be positive")
        if args.command == "simulate":
            report = cmd_simulate(args, cfg, out)
        else:
            report = COMMANDS[args.command](args, cfg)
        if report is not None:
            _emit(report, cfg, out)
        return EXIT_OK
    except UsageError as exc:
        err.write(f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    except (IPFConvergenceError, KernelRangeError, NumericalError, NonFiniteObjectiveError) as exc:
        err.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except (DataError, UnbalancedError, OracleSizeError, AllTiedError, DomainError) as exc:
        err.write(f"data error: {exc}\n")
        return EXIT_DATA
    except RuntimeError as exc:
        err.write(f"numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except (ValueError, KeyError, IndexError) as exc:
        err.write(f"data error: {exc}\n")
        return EXIT_DATA


def main() -> None:
    sys.exit(run())
