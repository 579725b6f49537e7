"""Acceptance suite: one test per criterion, each logging a pass/fail line.

Run standalone with ``python3 tests/test_acceptance.py``.
"""

import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import ACCEPTANCE_LINES, SOLVE_SECONDS, solved_extremal, solved_shoot  # noqa: E402
from hessext import InstantonSpec, Params, RadialGrid, shoot  # noqa: E402
from hessext.extremal import best_subcritical_constant, instanton_witness, step1_gap  # noqa: E402
from hessext.hessian_ode import integral_residual  # noqa: E402
from hessext.instanton import (expansion_far_tail, expansion_midrange,  # noqa: E402
                               expansion_near_zero, fit_loglog_slope, mountain_pass_amplitude,
                               sharper_estimates, sobolev_integrals)
from hessext.mountain_pass import ar_check, mp_upper_bound, ray_profile, t_eps_solve  # noqa: E402
from hessext.radial_core import radial_bound, random_unit_profiles  # noqa: E402

NK = [(3, 1), (5, 1), (5, 2), (9, 2), (7, 3)]
TRIPLES = [(5, 1, 1.0), (5, 1, 2.5), (9, 2, 1.0)]


def record(number, ok, detail):
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def test_criterion_01_sobolev_dual_integrals():
    t0 = time.perf_counter()
    worst_side, worst_eps = 0.0, 0.0
    for nk in NK:
        p = Params(*nk, 1.0)
        g1, c1 = sobolev_integrals(p, 1.0)
        g2, c2 = sobolev_integrals(p, 0.1)
        worst_side = max(worst_side, abs(g1 - c1) / c1, abs(g2 - c2) / c2)
        worst_eps = max(worst_eps, abs(g1 - g2) / g1, abs(c1 - c2) / c1)
    dt = time.perf_counter() - t0
    ok = worst_side < 1e-8 and worst_eps < 1e-8 and dt < 5
    assert record(1, ok, f"side mismatch {worst_side:.1e}, eps drift {worst_eps:.1e}, {dt:.2f} s")


def test_criterion_02_normalization_identity_and_witness():
    from hessext.instanton import sobolev_constant_S
    ident, ratios = 0.0, {}
    for nk in NK:
        p = Params(*nk, 1.0)
        S = sobolev_constant_S(p)
        ident = max(ident, abs((p.omega_nk * S) ** (p.kstar / (p.k + 1))
                               * best_subcritical_constant(p, S) - 1))
    # witness on the dimensions whose instanton tail is resolved at eps = 1e-3
    for nk in [(5, 1), (9, 2)]:
        p = Params(*nk, 1.0)
        ratios[nk] = instanton_witness(1e-3, p) / best_subcritical_constant(p)
    ok = ident < 1e-10 and all(r >= 0.99 for r in ratios.values())
    desc = ", ".join(f"{nk}: {r:.6f}" for nk, r in ratios.items())
    assert record(2, ok, f"identity defect {ident:.1e}; witness/V {desc}")


def test_criterion_03_radial_bound():
    grid = RadialGrid()
    rng = np.random.default_rng(2024)
    # interior nodes: the bound vanishes at r = 1 together with v
    r = grid.nodes[1:-1]
    worst, ok = 0.0, True
    for nk in [(5, 1), (9, 2)]:
        p = Params(*nk, 1.0)
        b = radial_bound(r, p)
        for v in random_unit_profiles(grid, p, 100, rng):
            ratio = np.max(np.abs(v.values[1:-1]) / b)
            worst = max(worst, ratio)
            ok &= bool(np.all(np.abs(v.values[1:-1]) <= b * (1 + 1e-6)))
    assert record(3, ok, f"max |v|/bound {worst:.4f} over 200 profiles")


def test_criterion_04_expansions():
    t0 = time.perf_counter()
    p = Params(5, 1, 1.0)
    g = 0.25
    Nk = p.N / p.k
    r0 = expansion_near_zero(p.alpha, 0.0, g, 1e-4, p).ratio
    r1 = expansion_near_zero(p.alpha, 1.0, g, 1e-4, p).ratio
    ladder = 10 ** np.linspace(-1.5, -4, 6)
    slopes = {}
    for beta, target in [(0.0, (1 - g) * Nk), (Nk, Nk), (Nk + 1, Nk)]:
        vals = np.array([expansion_midrange(beta, g, e, p).numeric for e in ladder])
        if beta == Nk:
            vals = vals / np.abs(np.log(ladder))
        slopes[f"mid beta={beta:g}"] = (fit_loglog_slope(ladder, vals)[0], target)
    far = [expansion_far_tail(g, e, p) for e in (1e-1, 1e-2, 1e-3)]
    far_ratio_down = far[0].ratio > far[1].ratio > far[2].ratio
    slopes["far tail"] = (fit_loglog_slope([f.eps for f in far], [f.numeric for f in far])[0], Nk)
    dt = time.perf_counter() - t0
    slopes_ok = all(abs(s / t - 1) <= 0.10 for s, t in slopes.values())
    ok = abs(r0 - 1) <= 0.05 and abs(r1 - 1) <= 0.08 and slopes_ok and far_ratio_down and dt < 30
    desc = ", ".join(f"{k} {s:.3f}/{t:.3f}" for k, (s, t) in slopes.items())
    assert record(4, ok, f"delta=0 ratio {r0:.4f}, delta=1 ratio {r1:.4f}; slopes {desc}; "
                         f"{dt:.1f} s")


def test_criterion_05_sharper_constant():
    out = {}
    for nka in [(5, 1, 1.0), (9, 2, 1.0)]:
        p = Params(*nka)
        s = sharper_estimates(InstantonSpec(1e-4, C=mountain_pass_amplitude(p)), p)
        out[nka] = s["gap_ratio"] / s["C1"]
    ok = all(abs(r - 1) <= 0.10 for r in out.values())
    assert record(5, ok, "gap/C1 " + ", ".join(f"{k}: {v:.4f}" for k, v in out.items()))


@pytest.mark.parametrize("nka", TRIPLES, ids=lambda c: "N%d-k%d-a%g" % c)
def test_criterion_06_strict_gap(nka):
    p = Params(*nka)
    res = solved_extremal(*nka)
    dt = SOLVE_SECONDS[(*nka, 4096)]
    gap = step1_gap(res, p)
    vals = res.v.values
    ok = (res.converged and res.el_residual < 1e-6 and gap["gap"] > 10 * gap["quad_error"]
          and bool(np.all(vals >= 0)) and bool(np.all(np.diff(vals) <= 0)) and dt < 120)
    assert record(6, ok, f"{nka}: residual {res.el_residual:.1e}, gap {gap['gap']:.3e}, "
                         f"quad error {gap['quad_error']:.1e}, {dt:.1f} s")


@pytest.mark.parametrize("nka", TRIPLES, ids=lambda c: "N%d-k%d-a%g" % c)
def test_criterion_07_shooting(nka):
    p = Params(*nka)
    s = solved_shoot(*nka)
    fine = shoot(p, RadialGrid(8192), bracket=(0.5 * s.a0, 2 * s.a0))
    factor = s.strong_residual / fine.strong_residual
    ok = (s.residual < 1e-8 and s.boundary_defect < 1e-8 and all(s.admissible_j)
          and factor >= 3)
    assert record(7, ok, f"{nka}: integral residual {s.residual:.1e}, |v(1)| "
                         f"{s.boundary_defect:.1e}, admissible {s.admissible_j}, "
                         f"refinement {factor:.2f}x")


def test_criterion_08_mountain_pass():
    p = Params(5, 1, 1.0)
    rep = mp_upper_bound([1e-3, 1e-4], p)
    below = all(rep.threshold - rep.i_max_curve[e] > rep.quad_error[e] for e in (1e-3, 1e-4))
    eps = np.array([1e-2, 1e-3, 1e-4])
    dev = np.array([abs(t_eps_solve(e, p) - 1) for e in eps])
    slope, _ = fit_loglog_slope(eps, dev / np.abs(np.log(eps)))
    level_ratio = ray_profile(1e-4, p).I(1.0) / rep.threshold
    ok = below and 0.8 <= slope <= 1.2 and abs(level_ratio - 1) <= 0.03
    margins = ", ".join(f"{rep.threshold - rep.i_max_curve[e]:.3e}" for e in (1e-3, 1e-4))
    assert record(8, ok, f"margins {margins}; t_eps exponent {slope:.4f}; "
                         f"I(w)/level {level_ratio:.4f}")


def test_criterion_09_ar_condition():
    outs = [ar_check(Params(*nka)) for nka in TRIPLES]
    ok = all(o["holds"] for o in outs)
    assert record(9, ok, f"min slack {min(o['min_slack'] for o in outs):.1e} on 100x100 grids")


def test_criterion_10_cli_determinism(tmp_path):
    argv = [sys.executable, "-m", "hessext.cli", "extremal", "--N", "5", "--k", "1",
            "--alpha", "1", "--grid-n", "1024", "--seed", "5"]
    docs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        proc = subprocess.run(argv + ["--out", str(out)], capture_output=True)
        docs.append((proc.returncode, out.read_bytes()))
    ok = docs[0][0] == 0 and docs[0] == docs[1]
    assert record(10, ok, f"{len(docs[0][1])} bytes, identical: {docs[0][1] == docs[1][1]}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
