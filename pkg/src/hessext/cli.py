"""Command-line front end.

    hessext extremal --N 5 --k 1 --alpha 1
    hessext expansions --N 5 --k 1 --alpha 1 --eps 1e-2,1e-3,1e-4
    hessext solve-hessian --N 9 --k 2 --alpha 1 --out sol.json
    hessext report --N 5 --k 1 --alpha 1 --out report.json

JSON documents embed the resolved configuration and the derived constants;
floats are written with 17 significant digits so identical runs give
byte-identical files.  Exit codes: 0 success, 2 invalid configuration,
3 solver did not converge, 4 internal consistency failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .errors import BracketError, ConsistencyError, DomainError, HessextError, InvalidInputError
from .extremal import (best_subcritical_constant, maximize_supercritical, step1_gap, u_from_v)
from .hessian_ode import energy_identity_defect, shoot
from .instanton import (expansion_far_tail, expansion_midrange, expansion_near_zero,
                        far_tail_oracle, sobolev_constant_S)
from .mountain_pass import ar_check, mp_upper_bound, noncompactness_level
from .radial_core import (Params, RadialGrid, embedding_constant, luxemburg_norm, radial_bound,
                          random_unit_profiles, supercritical_functional, tail_radius, x1_norm)

log = logging.getLogger("hessext")

COMMANDS = ("inequality", "extremal", "solve-hessian", "expansions", "mountain-pass", "report")
EXIT_OK, EXIT_CONFIG, EXIT_UNCONVERGED, EXIT_CONSISTENCY = 0, 2, 3, 4
DEFAULT_EPS = (1e-2, 1e-3, 1e-4)
CSV_HEADER = ("lemma", "branch", "eps", "numeric", "leading", "ratio")


class Unconverged(HessextError):
    pass


@dataclass
class RunConfig:
    command: str
    params: Params
    grid_n: int = 4096
    grid_g: float = 3.0
    eps_ladder: tuple = DEFAULT_EPS
    gamma: float = 0.25
    seed: int = 0
    fmt: str = "json"
    out: Optional[str] = None
    jobs: int = 1
    r0: float = 0.25
    extras: dict = field(default_factory=dict)

    def validate(self):
        if self.command not in COMMANDS:
            raise InvalidInputError(f"unknown command {self.command!r}")
        if int(self.grid_n) != self.grid_n or self.grid_n < 256:
            raise InvalidInputError(f"grid size must be an integer >= 256 (got {self.grid_n})")
        if not self.grid_g >= 1:
            raise InvalidInputError(f"grid grading must be >= 1 (got {self.grid_g})")
        eps = self.eps_ladder
        if not eps or any(not 0 < e < self.r0 for e in eps):
            raise InvalidInputError(f"eps values must lie in (0, {self.r0})")
        if any(a <= b for a, b in zip(eps[:-1], eps[1:])):
            raise InvalidInputError("eps ladder must be strictly decreasing")
        if not 0 < self.gamma < 1:
            raise InvalidInputError(f"gamma must lie in (0, 1) (got {self.gamma})")
        if self.fmt not in ("json", "csv"):
            raise InvalidInputError(f"format must be json or csv (got {self.fmt})")
        if self.jobs < 1:
            raise InvalidInputError("jobs must be >= 1")
        return self

    def grid(self) -> RadialGrid:
        return RadialGrid(self.grid_n, self.grid_g)

    def as_dict(self) -> dict:
        p = self.params
        return {"command": self.command, "N": p.N, "k": p.k, "alpha": p.alpha,
                "grid_n": self.grid_n, "grid_g": self.grid_g, "eps": list(self.eps_ladder),
                "gamma": self.gamma, "seed": self.seed, "format": self.fmt, "jobs": self.jobs}


# --------------------------------------------------------------------------
# Serialisation


def _num(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    return format(x, ".17g")


def to_json(obj, indent: int = 0) -> str:
    """Deterministic JSON with 17-significant-digit floats."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}"{k}": {to_json(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        seq = list(obj)
        if not seq:
            return "[]"
        return "[" + ", ".join(to_json(v, indent + 1) for v in seq) + "]"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    s = str(obj).replace("\\", "\\\\").replace('"', '\\"')
    return f'"{s}"'


def _rows_to_csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(x) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


# --------------------------------------------------------------------------
# Commands


def _derived(p: Params) -> dict:
    d = p.derived()
    d["S"] = sobolev_constant_S(p)
    d["V_kN"] = best_subcritical_constant(p, d["S"])
    return d


def cmd_inequality(cfg: RunConfig) -> dict:
    p, grid = cfg.params, cfg.grid()
    rng = np.random.default_rng(cfg.seed)
    profiles = random_unit_profiles(grid, p, 100, rng)
    r = grid.nodes[1:]
    bound = radial_bound(r, p)
    worst = max(float(np.max(np.abs(v.values[1:]) / np.where(bound > 0, bound, np.inf)))
                for v in profiles)
    family = profiles + random_unit_profiles(grid, p, 100, rng)
    values = [supercritical_functional(v, p) for v in family]
    running = np.maximum.accumulate(values)
    emb = embedding_constant(family, p)
    lux = max(luxemburg_norm(v, p) / x1_norm(v, p) for v in family[:20])
    return {
        "radial_bound": {"profiles": len(profiles), "max_ratio": worst,
                         "holds": bool(worst <= 1.0 + 1e-6)},
        "boundedness": {"family_size": len(family), "max_functional": float(running[-1]),
                        "finite": bool(np.all(np.isfinite(values))),
                        "running_max_nondecreasing": bool(np.all(np.diff(running) >= 0))},
        "embedding": {"cap": emb["cap"], "lambda_star": emb["lambda_star"],
                      "max_luxemburg_over_x1": lux,
                      "holds": bool(lux <= emb["lambda_star"] * (1 + 1e-12))},
        "tail_radius": tail_radius(p),
    }


def cmd_extremal(cfg: RunConfig) -> dict:
    p = cfg.params
    res = maximize_supercritical(p, cfg.grid())
    gap = step1_gap(res, p)
    out = {"value": res.value, "lambda": res.lam, "el_residual": res.el_residual,
           "gap": gap["gap"], "converged": res.converged, "iterations": res.iterations,
           "V_kN": gap["V_kN"], "quad_error": gap["quad_error"],
           "gap_certified": gap["certified"], "attainable_regime": res.attainable_regime,
           "U_value": u_from_v(res, p)["U_value"]}
    if not res.converged:
        raise Unconverged(out)
    return out


def cmd_solve_hessian(cfg: RunConfig) -> tuple:
    p = cfg.params
    sol = shoot(p, cfg.grid())
    out = sol.summary()
    out["energy_identity_defect"] = energy_identity_defect(sol.v, p)
    profile = _rows_to_csv(zip(sol.v.grid.nodes, sol.v.values), ("r", "v"))
    if not sol.converged:
        raise Unconverged(out)
    return out, profile


def _expansion_rows(args) -> list:
    (N, k, alpha, gamma, eps) = args
    p = Params(N, k, alpha)
    Nk = N / k
    cases = [
        ("near_zero", alpha, 0.0), ("near_zero", alpha, 1.0), ("near_zero", 0.0, 0.0),
        ("near_zero", Nk, 0.0), ("midrange", 0.0, None), ("midrange", Nk, None),
        ("midrange", Nk + 1.0, None), ("far_tail", None, None),
    ]
    reps, labels = [], []
    for lemma, beta, delta in cases:
        if lemma == "near_zero":
            rep = expansion_near_zero(beta, delta, gamma, eps, p)
            labels.append(f"{rep.branch} beta={beta:g} delta={delta:g}")
        elif lemma == "midrange":
            rep = expansion_midrange(beta, gamma, eps, p)
            labels.append(f"{rep.branch} beta={beta:g}")
        else:
            rep = expansion_far_tail(gamma, eps, p)
            labels.append(rep.branch)
        reps.append(rep)
    rows = [(i, r.lemma, lab, r.eps, r.numeric, r.leading, r.ratio)
            for i, (r, lab) in enumerate(zip(reps, labels))]
    tail = reps[-1].numeric
    oracle = far_tail_oracle(eps, p)
    if abs(tail - oracle) > 1e-8 * abs(oracle):
        raise ConsistencyError(f"far-tail quadrature {tail!r} vs oracle {oracle!r} at eps={eps}")
    return rows


def _map(fn, items, jobs: int) -> list:
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def cmd_expansions(cfg: RunConfig) -> list:
    p = cfg.params
    tasks = [(p.N, p.k, p.alpha, cfg.gamma, e) for e in cfg.eps_ladder]
    rows = [row for chunk in _map(_expansion_rows, tasks, cfg.jobs) for row in chunk]
    # results are sorted whatever order the workers finished in
    rows.sort(key=lambda r: (r[0], -r[3]))
    return [r[1:] for r in rows]


def cmd_mountain_pass(cfg: RunConfig) -> dict:
    p = cfg.params
    rep = mp_upper_bound(list(cfg.eps_ladder), p)
    out = rep.as_dict()
    out["ar_check"] = ar_check(p)
    out["level"] = noncompactness_level(p)
    return out


def run(cfg: RunConfig) -> tuple:
    """Execute one command; returns ``(exit code, main document text,
    extra artifacts {suffix: text})``."""
    cfg.validate()
    p = cfg.params
    header = {"config": cfg.as_dict(), "derived": _derived(p), "version": __version__}
    extra = {}
    if cfg.command == "expansions":
        rows = cmd_expansions(cfg)
        if cfg.fmt == "csv":
            return EXIT_OK, _rows_to_csv(rows, CSV_HEADER), extra
        doc = dict(header, rows=[dict(zip(CSV_HEADER, r)) for r in rows])
        return EXIT_OK, to_json(doc) + "\n", extra
    if cfg.command == "solve-hessian":
        out, profile = cmd_solve_hessian(cfg)
        if cfg.fmt == "csv":
            return EXIT_OK, profile, extra
        extra[".profile.csv"] = profile
        return EXIT_OK, to_json(dict(header, result=out)) + "\n", extra
    if cfg.command == "report":
        doc = dict(header)
        doc["inequality"] = cmd_inequality(cfg)
        doc["expansions"] = [dict(zip(CSV_HEADER, r)) for r in cmd_expansions(cfg)]
        doc["mountain_pass"] = cmd_mountain_pass(cfg)
        doc["extremal"] = cmd_extremal(cfg)
        doc["solve_hessian"] = cmd_solve_hessian(cfg)[0]
        return EXIT_OK, to_json(doc) + "\n", extra
    fn = {"inequality": cmd_inequality, "extremal": cmd_extremal,
          "mountain-pass": cmd_mountain_pass}[cfg.command]
    return EXIT_OK, to_json(dict(header, result=fn(cfg))) + "\n", extra


# --------------------------------------------------------------------------
# Entry point


def _eps_list(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad eps list {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hessext", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--N", type=int, required=True, help="dimension")
    common.add_argument("--k", type=int, required=True, help="Hessian order")
    common.add_argument("--alpha", type=float, required=True, help="exponent perturbation")
    common.add_argument("--grid-n", type=int, default=4096)
    common.add_argument("--grid-g", type=float, default=3.0)
    common.add_argument("--eps", type=_eps_list, default=DEFAULT_EPS,
                        help="comma separated, strictly decreasing")
    common.add_argument("--gamma", type=float, default=0.25, help="matching exponent for expansions")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--out", default=None, help="output file (stdout when omitted)")
    common.add_argument("--jobs", type=int, default=1)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return ap


def _setup_logging():
    level = os.environ.get("HESSEXT_LOG", "warn").lower()
    levels = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING,
              "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def _emit(text: str, out: Optional[str], extra: dict):
    if out is None:
        sys.stdout.write(text)
        return
    path = Path(out)
    path.write_text(text)
    for suffix, body in extra.items():
        path.with_name(path.stem + suffix).write_text(body)


def main(argv=None) -> int:
    _setup_logging()
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    fmt = args.format or ("csv" if args.command == "expansions" else "json")
    try:
        params = Params(args.N, args.k, args.alpha)
        cfg = RunConfig(args.command, params, args.grid_n, args.grid_g, tuple(args.eps),
                        args.gamma, args.seed, fmt, args.out, args.jobs)
        cfg.validate()
    except (InvalidInputError, DomainError) as exc:
        print(f"hessext: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        code, text, extra = run(cfg)
    except Unconverged as exc:
        print("hessext: solver did not converge", file=sys.stderr)
        _emit(to_json({"config": cfg.as_dict(), "result": exc.args[0]}) + "\n", cfg.out, {})
        return EXIT_UNCONVERGED
    except BracketError as exc:
        print(f"hessext: shooting failed: {exc}", file=sys.stderr)
        return EXIT_UNCONVERGED
    except ConsistencyError as exc:
        print(f"hessext: consistency failure: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (InvalidInputError, DomainError) as exc:
        print(f"hessext: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    _emit(text, cfg.out, extra)
    return code


if __name__ == "__main__":
    sys.exit(main())
