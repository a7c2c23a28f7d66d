"""Command-line entry point: ``ibclab <subcommand> [options]``.

Exit codes: 0 when every embedded check passes, 1 when a check fails,
2 for invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from ibclab.core import CostModel
from ibclab.errors import IBCError, InvalidSpec, IoFailure
from ibclab.harness import KINDS, ExperimentSpec, emit_tables, run_experiment

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InvalidSpec(message)


def _floats(text: str) -> List[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text: str) -> List[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    # SUPPRESS keeps a subcommand from overwriting a global flag given before it
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, help="base RNG seed")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--config", help="JSON file of parameter defaults")

    p = _Parser(prog="ibclab", description="Krylov and average-case integration complexity experiments.",
                parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pr = sub.add_parser("predict", parents=[common], help="closed-form predictions only")
    pr.add_argument("--class", dest="cls", choices=("F1", "F2", "rho", "eig", "integrate"), default=None)
    pr.add_argument("--n", type=int)
    pr.add_argument("--M", type=float)
    pr.add_argument("--rho", type=float)
    pr.add_argument("--d", type=int)
    pr.add_argument("--eps", type=_floats)
    pr.add_argument("--c", type=float)

    sv = sub.add_parser("solve", parents=[common], help="minres or chebyshev on a matrix")
    sv.add_argument("--matrix", help="Matrix Market file; a generated instance is used when omitted")
    sv.add_argument("--rhs", help="right-hand side as a .npy or whitespace text file")
    sv.add_argument("--method", choices=("minres", "chebyshev"), default=None)
    sv.add_argument("--class", dest="cls", choices=("F1", "F2", "rho"), default=None)
    sv.add_argument("--n", type=int)
    sv.add_argument("--M", type=float)
    sv.add_argument("--rho", type=float)
    sv.add_argument("--eps", type=float)
    sv.add_argument("--max-k", type=int, dest="max_k")
    sv.add_argument("--c", type=float)

    ev = sub.add_parser("eig", parents=[common], help="gmr or Ritz eigenpair on a matrix")
    ev.add_argument("--matrix")
    ev.add_argument("--method", choices=("gmr", "ritz"), default=None)
    ev.add_argument("--n", type=int)
    ev.add_argument("--eps", type=float)
    ev.add_argument("--max-k", type=int, dest="max_k")

    iv = sub.add_parser("integrate", parents=[common], help="Brownian-sheet integration error ladder")
    iv.add_argument("--d", type=int)
    iv.add_argument("--eps", type=_floats)
    iv.add_argument("--paths", type=int)
    iv.add_argument("--grid-m", type=int, dest="grid_m")

    av = sub.add_parser("adversary", parents=[common], help="indistinguishable eigenproblem pair")
    av.add_argument("--n", type=int)
    av.add_argument("--k", type=int)
    av.add_argument("--mu", type=float)

    xv = sub.add_parser("experiment", parents=[common], help="full prediction versus measurement run")
    xv.add_argument("kind", choices=KINDS)
    xv.add_argument("--n", type=int)
    xv.add_argument("--M", type=float)
    xv.add_argument("--rho", type=float)
    xv.add_argument("--eps", type=_floats)
    xv.add_argument("--k", type=_ints)
    xv.add_argument("--trials", type=int)
    xv.add_argument("--c", type=float)
    xv.add_argument("--d", type=int)
    xv.add_argument("--paths", type=int)
    xv.add_argument("--grid-m", type=int, dest="grid_m")
    xv.add_argument("--mu", type=float)
    return p


def _load_config(path: Optional[str]) -> Dict[str, Any]:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise IoFailure(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidSpec(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidSpec("config file must hold a JSON object")
    return data


def effective_config(args: argparse.Namespace, defaults: Dict[str, Any]) -> Dict[str, Any]:
    """defaults < config file < command-line flags."""
    cfg = dict(defaults)
    cfg.update(_load_config(getattr(args, "config", None)))
    for key, val in vars(args).items():
        if key in ("config", "command", "kind", "out") or val is None:
            continue
        cfg[key] = val
    cfg.setdefault("seed", 0)
    cfg.setdefault("format", "json")
    return cfg


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {out}: {exc}") from exc


def _dump(obj: dict, cfg: dict, out: Optional[str]) -> None:
    if cfg["format"] == "json":
        _emit(json.dumps(obj, indent=2, sort_keys=True, default=float) + "\n", out)
        return
    rows = obj.get("rows") or [_flatten({k: v for k, v in obj.items() if k != "config"})]
    cols = list(rows[0]) if rows else []
    lines = [",".join(cols)]
    for r in rows:
        lines.append(",".join(format(r[c], ".17g") if isinstance(r[c], float) else str(r[c]) for c in cols))
    _emit("\n".join(lines) + "\n", out)


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, dict):
            out.update(_flatten(v, f"{prefix}{k}."))
        else:
            out[prefix + k] = v
    return out


def _cls(name: str, M, rho):
    from ibclab.operators import MatrixClassSpec

    if name == "F1":
        return MatrixClassSpec.f1(M)
    if name == "F2":
        return MatrixClassSpec.f2(M)
    return MatrixClassSpec.rho_class(rho)


def cmd_predict(args) -> int:
    from ibclab.eig import eig_complexity_band
    from ibclab.integrate import avg_cardinality
    from ibclab.linear import cardinality, complexity_band_linear, guaranteed_chebyshev_steps

    cfg = effective_config(args, {"cls": "F1", "n": 200, "M": 100.0, "rho": 0.5, "d": 2, "eps": [0.01]})
    n = cfg["n"]
    model = CostModel(cfg.get("c", float(n)))
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for eps in cfg["eps"]:
            if cfg["cls"] in ("F1", "F2"):
                cls = _cls(cfg["cls"], cfg["M"], None)
                band = complexity_band_linear(eps, cls, model, n)
                rows.append({"class": cfg["cls"], "n": n, "eps": eps, "predicted_m": cardinality(cls, eps, n),
                             "band_lo": band.lower, "band_hi": band.upper})
            elif cfg["cls"] == "rho":
                rows.append({"class": "rho", "n": n, "eps": eps,
                             "predicted_m": guaranteed_chebyshev_steps(cfg["rho"], eps)})
            elif cfg["cls"] == "eig":
                band = eig_complexity_band(eps, model, n)
                rows.append({"class": "eig", "n": n, "eps": eps, "band_lo": band.lower, "band_hi": band.upper,
                             "regime_ok": band.regime_ok})
            else:
                rows.append({"class": "integrate", "d": cfg["d"], "eps": eps,
                             "predicted_n": avg_cardinality(eps, cfg["d"])})
    _dump({"config": cfg, "rows": rows}, cfg, getattr(args, "out", None))
    return EXIT_OK


def _load_vector(path: str) -> np.ndarray:
    try:
        return np.load(path) if path.endswith(".npy") else np.loadtxt(path)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def cmd_solve(args) -> int:
    from ibclab.linear import chebyshev_solve, gen_rho_instance, gen_worst_case_spectrum, minres_solve
    from ibclab.operators import read_matrix_market

    cfg = effective_config(args, {"method": "minres", "cls": "F1", "n": 200, "M": 100.0, "rho": 0.5,
                                  "eps": 0.01})
    if cfg.get("matrix"):
        oracle = read_matrix_market(cfg["matrix"])
        if cfg.get("rhs"):
            b = _load_vector(cfg["rhs"])
        else:
            b = np.ones(oracle.dim) / np.sqrt(oracle.dim)
    elif cfg["cls"] == "rho" or cfg["method"] == "chebyshev":
        oracle, b = gen_rho_instance(cfg["rho"], cfg["n"], cfg["seed"])
    else:
        oracle, b = gen_worst_case_spectrum(_cls(cfg["cls"], cfg["M"], None), cfg["n"], cfg["seed"], eps=cfg["eps"])
    if cfg["method"] == "chebyshev":
        rep = chebyshev_solve(oracle, b, cfg["rho"], cfg["eps"])
    else:
        rep = minres_solve(oracle, b, cfg["eps"], max_k=cfg.get("max_k"))
    n = oracle.dim
    led = rep.ledger
    ledger_ok = led.info_count == rep.steps and (n < 5 or led.combinatory_count <= 10 * rep.steps * n)
    ok = rep.converged and ledger_ok
    out = {"config": cfg, "steps": rep.steps, "converged": rep.converged, "final_residual": rep.final_residual,
           "residual_bound": rep.residual_bound, "ledger": led.as_dict(),
           "ledger_total": led.total(CostModel(cfg.get("c", float(n)))), "pass": ok}
    _dump(out, cfg, getattr(args, "out", None))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_eig(args) -> int:
    from ibclab.eig import gmr_eig, lanczos_ritz_eig, uniform_spectrum_instance
    from ibclab.operators import read_matrix_market

    cfg = effective_config(args, {"method": "gmr", "n": 2000, "eps": 0.1})
    if cfg.get("matrix"):
        oracle = read_matrix_market(cfg["matrix"])
        b = np.random.default_rng(cfg["seed"]).standard_normal(oracle.dim)
        b /= np.linalg.norm(b)
    else:
        oracle, b = uniform_spectrum_instance(cfg["n"])
    solver = gmr_eig if cfg["method"] == "gmr" else lanczos_ritz_eig
    rep = solver(oracle, b, cfg["eps"], max_k=cfg.get("max_k"))
    out = {"config": cfg, "steps": rep.steps, "converged": rep.converged, "eigenvalue": rep.pair.lam,
           "scaled_residual": rep.pair.scaled_residual, "ledger": rep.ledger.as_dict(), "pass": rep.converged}
    _dump(out, cfg, getattr(args, "out", None))
    return EXIT_OK if rep.converged else EXIT_FAIL


def _run_kind(kind: str, args) -> int:
    from ibclab.harness import DEFAULT_PARAMS

    cfg = effective_config(args, {})
    keys = set(DEFAULT_PARAMS[kind]) | {"c"}
    params = {k: v for k, v in cfg.items() if k in keys}
    manifest = run_experiment(ExperimentSpec(kind, params), config=cfg)
    text = emit_tables(manifest, cfg["format"], getattr(args, "out", None))
    if getattr(args, "out", None) is None:
        sys.stdout.write(text)
    return EXIT_OK if manifest.passed else EXIT_FAIL


def cmd_integrate(args) -> int:
    return _run_kind("integrate_avg", args)


def cmd_adversary(args) -> int:
    return _run_kind("adversary", args)


def cmd_experiment(args) -> int:
    return _run_kind(args.kind, args)


COMMANDS = {
    "predict": cmd_predict,
    "solve": cmd_solve,
    "eig": cmd_eig,
    "integrate": cmd_integrate,
    "adversary": cmd_adversary,
    "experiment": cmd_experiment,
}


def main(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except (IBCError, ValueError) as exc:
        print(f"ibclab: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
