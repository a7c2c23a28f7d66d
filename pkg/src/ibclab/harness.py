"""Experiment driver: build instances, run solvers under ledgers, set
measurements beside the closed-form predictions, and write tables.

Predictions come from the formula functions only; measurements never feed
them.

CSV columns per experiment kind are fixed in ``COLUMNS``. Floats are written
with 17 significant digits.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from ibclab import __version__
from ibclab.core import CostModel
from ibclab.eig import (
    adversary_pair,
    eig_complexity_band,
    gmr_eig,
    lanczos_error_curve,
    lanczos_largest,
    loglog_slope,
    uniform_spectrum_instance,
)
from ibclab.errors import InvalidSpec, IoFailure
from ibclab.integrate import avg_cardinality, integration_error_curve, scaling_slope
from ibclab.linear import (
    cardinality,
    chebyshev_solve,
    complexity_band_linear,
    gen_rho_instance,
    gen_worst_case_spectrum,
    guaranteed_chebyshev_steps,
    minres_solve,
)
from ibclab.operators import MatrixClassSpec

SCHEMA_VERSION = 1

# Pass/fail tolerances. Bump "version" whenever a value changes.
TOLERANCES: Dict[str, Any] = {
    "version": 1,
    "f1_step_slack": 1,
    "f2_step_slack": 2,
    "gain_rel_tol": 0.2,
    "ledger_factor": 10,
    "ledger_min_n": 5,
    "lanczos_slope": [-2.0, 0.3],
    "integration_slope": [-1.0, 0.25],
    "integration_mc_min_n": 256,
    "adversary_info_tol": 1e-12,
    "adversary_output_tol": 1e-10,
}

KINDS = ("linear_f1", "linear_f2", "linear_rho", "eig_gmr", "eig_lanczos_random", "integrate_avg",
         "adversary")

DEFAULT_PARAMS: Dict[str, Dict[str, Any]] = {
    "linear_f1": {"n": 200, "M": 100.0, "eps": [0.1, 0.01, 0.001], "seed": 0, "rotate": False},
    "linear_f2": {"n": 400, "M": 10.0, "eps": [0.01], "seed": 0, "rotate": False},
    "linear_rho": {"n": 300, "rho": 0.5, "eps": [0.01], "trials": 100, "seed": 0},
    "eig_gmr": {"n": 2000, "eps": [0.1, 0.01], "seed": 0, "edge_power": 4.0},
    "eig_lanczos_random": {"n": 1000, "k": [10, 13, 16, 20, 25, 32, 40, 50, 63, 79, 100], "trials": 100,
                           "seed": 0},
    "integrate_avg": {"d": 2, "eps": [2.0 ** -j for j in range(3, 9)], "paths": 200, "grid_m": 512,
                      "seed": 0},
    "adversary": {"n": 2, "k": 1, "mu": 5.0, "seed": 0},
}

LINEAR_COLUMNS = ("kind", "n", "M_or_rho", "eps", "predicted_m", "measured_steps", "band_lo", "band_hi",
                  "ledger_total", "pass")
COLUMNS: Dict[str, tuple] = {
    "linear_f1": LINEAR_COLUMNS,
    "linear_f2": LINEAR_COLUMNS,
    "linear_rho": LINEAR_COLUMNS + ("max_true_residual", "max_minres_steps"),
    "eig_gmr": ("kind", "n", "eps", "measured_steps", "cost", "band_lo", "band_hi", "ledger_total", "pass"),
    "eig_lanczos_random": ("kind", "n", "k", "trials", "mean_rel_error", "log_n_over_k_sq", "pass"),
    "integrate_avg": ("d", "eps", "n", "mean_error", "stderr", "method", "seed_base"),
    "adversary": ("kind", "n", "k", "mu", "max_info_gap", "lambda1_a1", "lambda1_a2", "gap",
                  "estimate_a1", "estimate_a2", "pass"),
}


@dataclass
class ExperimentSpec:
    kind: str
    params: Dict[str, Any] = field(default_factory=dict)

    def effective(self) -> "ExperimentSpec":
        """Defaults filled in and every value range-checked."""
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        unknown = set(self.params) - set(DEFAULT_PARAMS[self.kind]) - {"c"}
        if unknown:
            raise InvalidSpec(f"unknown parameters for {self.kind}: {sorted(unknown)}")
        p = dict(DEFAULT_PARAMS[self.kind])
        p.update(self.params)
        for key in ("eps", "k") if self.kind == "eig_lanczos_random" else ("eps",):
            if key in p and not isinstance(p[key], (list, tuple)):
                p[key] = [p[key]]
            if key in p:
                p[key] = list(p[key])
        if self.kind == "adversary" and isinstance(p["k"], (list, tuple)) and len(p["k"]) == 1:
            p["k"] = p["k"][0]
        _validate(self.kind, p)
        return ExperimentSpec(self.kind, p)

    def as_dict(self) -> dict:
        return {"kind": self.kind, "params": self.params}


def _require(cond: bool, msg: str):
    if not cond:
        raise InvalidSpec(msg)


def _validate(kind: str, p: Dict[str, Any]) -> None:
    if "n" in p:
        _require(isinstance(p["n"], int) and p["n"] >= 1, f"n must be a positive integer, got {p['n']!r}")
    if "c" in p:
        _require(p["c"] > 0, "c must be positive")
    if "trials" in p:
        _require(isinstance(p["trials"], int) and p["trials"] >= 1, "trials must be a positive integer")
    if kind in ("linear_f1", "linear_f2"):
        _require(p["M"] >= 1, "M must be >= 1")
    if kind == "linear_rho":
        _require(0 <= p["rho"] < 1, "rho must lie in [0, 1)")
    if kind in ("linear_f1", "linear_f2", "linear_rho", "eig_gmr"):
        _require(len(p["eps"]) > 0 and all(0 < e <= 1 for e in p["eps"]), "every eps must lie in (0, 1]")
    if kind == "integrate_avg":
        _require(all(0 < e < 1 for e in p["eps"]), "every eps must lie in (0, 1)")
        _require(1 <= p["d"] <= 3, "d must lie in [1, 3]")
        g = p["grid_m"]
        _require(isinstance(g, int) and g >= 1 and (g & (g - 1)) == 0, "grid_m must be a power of two")
        _require(p["paths"] >= 2, "paths must be at least 2")
    if kind == "eig_lanczos_random":
        _require(all(isinstance(k, int) and 1 <= k for k in p["k"]), "k values must be positive integers")
        _require(len(p["k"]) >= 2, "need at least two k values for a slope")
    if kind == "adversary":
        _require(isinstance(p["k"], int) and 1 <= p["k"] <= p["n"] - 1, "adversary needs 1 <= k <= n-1")
        _require(p["mu"] > 0, "mu must be positive")


@dataclass
class RunManifest:
    spec: ExperimentSpec
    records: List[Dict[str, Any]] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    passed: bool = True
    tolerances: Dict[str, Any] = field(default_factory=lambda: dict(TOLERANCES))
    config: Dict[str, Any] = field(default_factory=dict)
    version: str = __version__
    timestamp: str = ""
    schema_version: int = SCHEMA_VERSION

    def payload(self) -> dict:
        """Everything except the timestamp; equal across replays."""
        return {
            "schema_version": self.schema_version,
            "version": self.version,
            "spec": self.spec.as_dict(),
            "config": self.config,
            "tolerances": self.tolerances,
            "records": self.records,
            "summary": self.summary,
            "passed": self.passed,
        }

    def to_dict(self) -> dict:
        d = self.payload()
        d["timestamp"] = self.timestamp
        return d

    def to_json(self) -> str:
        return json.dumps(_jsonable(self.to_dict()), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "RunManifest":
        if d.get("schema_version") != SCHEMA_VERSION:
            raise InvalidSpec(f"unsupported manifest schema {d.get('schema_version')!r}")
        spec = ExperimentSpec(d["spec"]["kind"], d["spec"]["params"])
        return cls(spec=spec, records=d["records"], summary=d["summary"], passed=d["passed"],
                   tolerances=d["tolerances"], config=d.get("config", {}), version=d["version"],
                   timestamp=d.get("timestamp", ""), schema_version=d["schema_version"])

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls.from_dict(json.loads(text))


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


# ---------------------------------------------------------------------------
# experiment kinds


def _ledger_ok(report, n: int) -> bool:
    led = report.ledger
    ok = led.info_count == report.steps
    if n >= TOLERANCES["ledger_min_n"]:
        ok = ok and led.combinatory_count <= TOLERANCES["ledger_factor"] * report.steps * n
    return ok


def _run_linear(kind: str, p: dict) -> tuple:
    n, M = p["n"], float(p["M"])
    cls = MatrixClassSpec.f1(M) if kind == "linear_f1" else MatrixClassSpec.f2(M)
    slack = TOLERANCES["f1_step_slack" if kind == "linear_f1" else "f2_step_slack"]
    model = CostModel(float(p.get("c", n)))
    records = []
    for eps in p["eps"]:
        predicted = cardinality(cls, eps, n)
        band = complexity_band_linear(eps, cls, model, n)
        oracle, b = gen_worst_case_spectrum(cls, n, p["seed"], eps=eps, rotate=p["rotate"])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rep = minres_solve(oracle, b, eps)
        ok = rep.converged and abs(rep.steps - predicted) <= slack and _ledger_ok(rep, n)
        records.append({
            "kind": kind, "n": n, "M_or_rho": M, "eps": eps, "predicted_m": predicted,
            "measured_steps": rep.steps, "band_lo": band.lower, "band_hi": band.upper,
            "ledger_total": rep.ledger.total(model), "pass": bool(ok),
            "info_count": rep.ledger.info_count, "combinatory_count": rep.ledger.combinatory_count,
        })
    return records, {}


def _run_rho(p: dict) -> tuple:
    n, rho, trials = p["n"], float(p["rho"]), p["trials"]
    model = CostModel(float(p.get("c", n)))
    records = []
    for eps in p["eps"]:
        steps = guaranteed_chebyshev_steps(rho, eps)
        worst_res, worst_mr, total, ok = 0.0, 0, 0.0, True
        for t in range(trials):
            oracle, b = gen_rho_instance(rho, n, seed=p["seed"] + t)
            rep = chebyshev_solve(oracle, b, rho, eps)
            true_res = float(np.linalg.norm(oracle.matvec(rep.x) - b))  # verification, uncharged
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                mr = minres_solve(oracle, b, eps)
            worst_res = max(worst_res, true_res)
            worst_mr = max(worst_mr, mr.steps)
            total = max(total, rep.ledger.total(model))
            ok = ok and true_res <= eps and mr.steps <= steps + 1 and _ledger_ok(rep, n) and _ledger_ok(mr, n)
        records.append({
            "kind": "linear_rho", "n": n, "M_or_rho": rho, "eps": eps, "predicted_m": steps,
            "measured_steps": steps, "band_lo": model.c * steps, "band_hi": (model.c + 10 * n) * steps,
            "ledger_total": total, "pass": bool(ok), "max_true_residual": worst_res,
            "max_minres_steps": worst_mr,
        })
    return records, {}


def _run_eig_gmr(p: dict) -> tuple:
    n = p["n"]
    model = CostModel(float(p.get("c", n)))
    oracle, b = uniform_spectrum_instance(n, p["edge_power"])
    records = []
    for eps in p["eps"]:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            band = eig_complexity_band(eps, model, n)
            rep = gmr_eig(oracle, b, eps, norm=1.0)
        cost = model.c * rep.steps
        records.append({
            "kind": "eig_gmr", "n": n, "eps": eps, "measured_steps": rep.steps, "cost": cost,
            "band_lo": band.lower, "band_hi": band.upper, "ledger_total": rep.ledger.total(model),
            "pass": bool(rep.converged and cost in band and band.regime_ok),
        })
    return records, {}


def _run_lanczos(p: dict) -> tuple:
    n, ks, trials = p["n"], sorted(p["k"]), p["trials"]
    errs = lanczos_error_curve(n, ks, trials, p["seed"])
    slope = loglog_slope(ks, errs)
    target, tol = TOLERANCES["lanczos_slope"]
    ok = abs(slope - target) <= tol
    c_fit = float(np.max(errs / ((math.log(n) / np.array(ks, float)) ** 2)))
    records = [{"kind": "eig_lanczos_random", "n": n, "k": k, "trials": trials, "mean_rel_error": float(e),
                "log_n_over_k_sq": (math.log(n) / k) ** 2, "pass": bool(ok)} for k, e in zip(ks, errs)]
    return records, {"slope": slope, "fitted_constant": c_fit}


def _run_integrate(p: dict) -> tuple:
    rows = integration_error_curve(p["d"], p["eps"], p["paths"], p["grid_m"], p["seed"])
    slope = scaling_slope(rows, "hammersley")
    mc_slope = scaling_slope(rows, "monte_carlo")
    target, tol = TOLERANCES["integration_slope"]
    ham = {r.n: r.mean_error for r in rows if r.method == "hammersley"}
    mc = {r.n: r.mean_error for r in rows if r.method == "monte_carlo"}
    beats = all(ham[n] < mc[n] for n in ham if n >= TOLERANCES["integration_mc_min_n"])
    records = [{"d": r.d, "eps": r.eps, "n": r.n, "mean_error": r.mean_error, "stderr": r.stderr,
                "method": r.method, "seed_base": r.seed_base} for r in rows]
    summary = {"slope": slope, "monte_carlo_slope": mc_slope, "hammersley_beats_mc": beats,
               "predicted_n": [avg_cardinality(e, p["d"]) for e in p["eps"]],
               "slope_ok": abs(slope - target) <= tol}
    return records, summary


def _run_adversary(p: dict) -> tuple:
    n, k, mu = p["n"], p["k"], float(p["mu"])
    b = np.zeros(n)
    b[0] = 1.0
    pair = adversary_pair(n, k, b, mu, p["seed"], a1=np.eye(n) if n == 2 else None)
    gap_info = float(np.max(np.abs(pair.krylov_information(1) - pair.krylov_information(2))))
    from ibclab.operators import LinearOracle

    e1 = lanczos_largest(LinearOracle.from_matrix(pair.a1), b, k).estimates[0]
    e2 = lanczos_largest(LinearOracle.from_matrix(pair.a2), b, k).estimates[0]
    l1 = float(np.linalg.eigvalsh(pair.a1)[-1])
    l2 = float(np.linalg.eigvalsh(pair.a2)[-1])
    ok = (gap_info <= TOLERANCES["adversary_info_tol"] and l2 - l1 >= mu - 2
          and abs(e1 - e2) <= TOLERANCES["adversary_output_tol"])
    rec = {"kind": "adversary", "n": n, "k": k, "mu": mu, "max_info_gap": gap_info, "lambda1_a1": l1,
           "lambda1_a2": l2, "gap": l2 - l1, "estimate_a1": float(e1), "estimate_a2": float(e2),
           "pass": bool(ok)}
    return [rec], {"worst_error_lower_bound": (l2 - l1) / 2.0}


def run_experiment(spec: ExperimentSpec, config: Optional[dict] = None) -> RunManifest:
    """Execute one experiment and return its manifest. ``passed`` is the
    conjunction of every embedded check."""
    eff = spec.effective()
    p = eff.params
    kind = eff.kind
    if kind in ("linear_f1", "linear_f2"):
        records, summary = _run_linear(kind, p)
    elif kind == "linear_rho":
        records, summary = _run_rho(p)
    elif kind == "eig_gmr":
        records, summary = _run_eig_gmr(p)
    elif kind == "eig_lanczos_random":
        records, summary = _run_lanczos(p)
    elif kind == "integrate_avg":
        records, summary = _run_integrate(p)
    else:
        records, summary = _run_adversary(p)
    passed = all(r.get("pass", True) for r in records)
    if kind == "integrate_avg":
        passed = passed and summary["slope_ok"] and summary["hammersley_beats_mc"]
    return RunManifest(
        spec=eff,
        records=_jsonable(records),
        summary=_jsonable(summary),
        passed=bool(passed),
        config=_jsonable(config or {}),
        timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


# ---------------------------------------------------------------------------
# tables


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def render_csv(manifest: RunManifest) -> str:
    cols = COLUMNS[manifest.spec.kind]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for rec in manifest.records:
        writer.writerow([_fmt(rec.get(c, "")) for c in cols])
    return buf.getvalue()


def emit_tables(manifest: RunManifest, fmt: str = "csv", path=None) -> str:
    """Render the manifest as CSV rows or the full JSON manifest; write to
    ``path`` when given. Returns the rendered text."""
    if fmt == "csv":
        text = render_csv(manifest)
    elif fmt == "json":
        text = manifest.to_json() + "\n"
    else:
        raise InvalidSpec(f"unknown table format {fmt!r}")
    if path is not None:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise IoFailure(f"cannot write {path}: {exc}") from exc
    return text
