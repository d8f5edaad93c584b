"""Acceptance gate: one check per criterion, each printing a PASS line.

Quantitative thresholds follow the build contract; runtime budgets are
asserted generously (they bound algorithmic blowups, not machine jitter).
Criterion 4 walks the charge sequences on a geometric subsample of n
(about ten points per channel) up to lambda ~ 150.
"""

import json
import math
import time

import numpy as np
import pytest

from tfatom import aufbau, cli, spectral, tf_core, zero_energy as ze


def _report(num, ok, detail):
    print(f"\nACCEPTANCE {num}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, detail


def test_acceptance_1_tf_solver():
    t0 = time.time()
    chi = tf_core.solve_universal_chi()
    elapsed = time.time() - t0
    residual = tf_core.tf_residual(chi)
    slope_gap = abs(chi.slope_origin - chi.slope_origin_shooting)
    tail_identity = abs(144.0 * tf_core.B_LENGTH**3 - tf_core.C_INFINITY)
    ok = (residual < 1e-8 and slope_gap < 1e-6 and tail_identity < 1e-9
          and elapsed < 5.0)
    _report(1, ok,
            f"residual={residual:.2e} slope-method-gap={slope_gap:.2e} "
            f"|144 b^3 - 81 pi^2|={tail_identity:.2e} runtime={elapsed:.2f}s")


def test_acceptance_2_classical_constant(chi):
    t0 = time.time()
    d_r = tf_core.classical_constant(chi, 1e-9, route="r")
    d_chi = tf_core.classical_constant(chi, 1e-9, route="chi")
    cauchy = abs(tf_core.classical_constant(chi, 1e-8)
                 - tf_core.classical_constant(chi, 1e-11))
    z8 = tf_core.phase_norm_integral(chi, 8.0)
    elapsed = time.time() - t0
    ok = (abs(d_r - d_chi) < 1e-6 and cauchy < 1e-7
          and abs(z8 - 2.0 * d_r) < 1e-9 and elapsed < 5.0)
    _report(2, ok,
            f"route-gap={abs(d_r - d_chi):.2e} cauchy={cauchy:.2e} "
            f"Z=8-scaling-gap={abs(z8 - 2 * d_r):.2e} runtime={elapsed:.2f}s")


def test_acceptance_3_madelung_golden():
    golden = {0: [1, 3, 11, 19, 37, 55, 87],
              1: [5, 13, 31, 49, 81, 113],
              2: [21, 39, 71]}
    ok = all(
        [aufbau.madelung_Z(ell, n) for n in range(1, len(vals) + 1)] == vals
        for ell, vals in golden.items())
    _report(3, ok, "16 listed integers reproduced exactly")


@pytest.mark.parametrize("tau", [0.0, 0.5])
@pytest.mark.parametrize("ell", [0, 1, 2])
def test_acceptance_4_phase_convergence(tf_spec, d_cl, tau, ell):
    n_max = round(d_cl * 150.0 - tau)  # lambda(n_max) ~ 150
    ns = sorted(set(np.round(np.geomspace(6, n_max, 9)).astype(int)))
    t0 = time.time()
    recs = ze.boundary_phase_sweep(tf_spec, tau, ell, ns, d_cl)
    elapsed = time.time() - t0
    dists = [r.distance for r in recs]
    half = len(dists) // 2
    decreasing = float(np.mean(dists[half:])) < float(np.mean(dists[:half]))
    lam_final = recs[-1].lam
    ok = (dists[-1] < 0.05 and decreasing and lam_final > 140.0
          and elapsed < 120.0)
    _report(4, ok,
            f"tau={tau} ell={ell}: final-distance={dists[-1]:.4f} rad at "
            f"lambda={lam_final:.1f}, decreasing-on-average={decreasing}, "
            f"runtime={elapsed:.1f}s")


@pytest.mark.parametrize("ell", [0, 1])
def test_acceptance_5_jwkb_langer(tf_spec, ell):
    t0 = time.time()
    devs = [ze.wkb_ansatz_error(tf_spec, lam, ell, (0.5, 2.0)).sup_deviation
            for lam in (10.0, 20.0, 40.0, 80.0)]
    uncorrected = ze.wkb_ansatz_error(tf_spec, 80.0, ell, (0.5, 2.0),
                                      langer_corrected=False).sup_deviation
    elapsed = time.time() - t0
    strictly_decreasing = all(a > b for a, b in zip(devs, devs[1:]))
    ok = (strictly_decreasing and devs[-1] < uncorrected and elapsed < 60.0)
    _report(5, ok,
            f"ell={ell}: deviations={[f'{d:.4f}' for d in devs]} "
            f"(strictly decreasing={strictly_decreasing}), "
            f"uncorrected@80={uncorrected:.4f} > corrected@80={devs[-1]:.4f}, "
            f"runtime={elapsed:.1f}s")


def test_acceptance_6_phase_offset_lemma():
    t0 = time.time()
    worst = 0.0
    details = []
    for alpha, crossover in ((-1.0, 1e6), (0.0, 1e4)):
        spec = ze.power_law_spec(alpha, 1.0, -4.0, crossover=crossover)
        for ell in (0, 1):
            target = ze.phase_offset(alpha, ell)
            c = (2 * ell + 1) / (2.0 + alpha)
            errs = []
            for lam in (20.0, 40.0, 80.0):
                # truncation point keeping the residual c^2/(2T) below 3e-4
                half = 1.0 + alpha / 2.0
                x = min((c * c / 6e-4 * half / lam) ** (1.0 / half),
                        0.4 * crossover)
                got = ze.measured_phase_offset(spec, lam, ell, x)
                errs.append(abs(got - target))
            worst = max(worst, errs[-1])
            details.append(f"alpha={alpha} ell={ell}: err@80={errs[-1]:.2e}")
    elapsed = time.time() - t0
    ok = worst < 1e-3 and elapsed < 60.0
    _report(6, ok, "; ".join(details) + f"; runtime={elapsed:.1f}s")


def test_acceptance_7_regular_solution_machinery(tf_spec):
    t0 = time.time()
    # series vs ODE in the pre-oscillatory region
    lam, ell = 5.0, 0
    L = ell + 0.5
    traj = ze.regular_solution_ode(tf_spec, lam, ell, t_max=2.0)
    t_min = traj.t_grid[0]
    W_tf = ze.langer_potential(tf_spec, lam)
    gaps = []
    for dt in (2.0, 4.0, 6.0):
        gs, _ = ze.regular_solution_series(W_tf, L, t_min + dt, t_min)
        go, _ = traj.eval_langer(t_min + dt)
        gaps.append(abs(gs - go) / abs(go))
    series_ok = max(gaps) < 1e-8

    # perturbation bound on the TF-vs-power pair at 20 abscissae
    lam_b, ell_b = 5.0, 1
    Lb = ell_b + 0.5
    W_a = ze.langer_potential(tf_spec, lam_b)

    def W_b(t):
        return -(lam_b**2) * np.exp(np.asarray(t, dtype=float))

    t0b = ze.default_t_min(tf_spec, lam_b)
    bound_ok = True
    for x in np.linspace(t0b + 3.0, 2.0 * math.log(Lb / lam_b) - 1.5, 20):
        g1, _ = ze.regular_solution_series(W_a, Lb, x, t0b, normalized=False)
        g2, _ = ze.regular_solution_series(W_b, Lb, x, t0b, normalized=False)
        if abs(g1 - g2) > ze.perturbation_bound(W_a, W_b, Lb, x):
            bound_ok = False
    elapsed = time.time() - t0
    ok = series_ok and bound_ok and elapsed < 30.0
    _report(7, ok,
            f"series-vs-ODE max gap={max(gaps):.2e}, perturbation bound "
            f"holds at 20 abscissae={bound_ok}, runtime={elapsed:.1f}s")


def test_acceptance_8_spectral_round_trip():
    t0 = time.time()
    details = []
    ok = True
    for ell in (0, 1, 2):
        theta = spectral.theta_of_mu(ell, -1.0)
        res = spectral.channel_eigenvalue(ell, theta, (-1.5, -0.5))
        err = abs(res.mu + 1.0)
        details.append(f"l={ell}: |mu+1|={err:.2e} residual={res.residual:.2e}")
        ok = ok and err < 1e-4 and res.residual < 1e-7
    elapsed = time.time() - t0
    ok = ok and elapsed < 30.0
    _report(8, ok, "; ".join(details) + f"; runtime={elapsed:.1f}s")


def test_acceptance_9_counterexample_table(chi, d_cl):
    t0 = time.time()
    rows = spectral.norm_resolvent_counterexample(6, d_cl=d_cl, chi=chi)
    elapsed = time.time() - t0
    zs = [r.Z for r in rows]
    increasing = all(b > a for a, b in zip(zs, zs[1:]))
    within = all(r.residual < 1.0 / r.ell for r in rows)
    ok = increasing and within and len(rows) == 6 and elapsed < 600.0
    table = ", ".join(f"(l={r.ell}, Z={r.Z}, |mu+1|={r.residual:.3f})"
                      for r in rows)
    _report(9, ok, table + f"; runtime={elapsed:.0f}s")


def test_acceptance_10_determinism(tmp_path):
    out1 = tmp_path / "a"
    argv = ["phase-sweep", "--ell", "0", "--n-list", "6,10",
            "--out", str(out1)]
    assert cli.main(argv) == 0
    out2 = tmp_path / "b"
    assert cli.main(["phase-sweep", "--config", str(out1 / "run_config.txt"),
                     "--out", str(out2)]) == 0
    sweep_same = ((out1 / "phase_sweep.csv").read_bytes()
                  == (out2 / "phase_sweep.csv").read_bytes())

    out3 = tmp_path / "c"
    assert cli.main(["aufbau", "--n-max", "25", "--out", str(out3)]) == 0
    out4 = tmp_path / "d"
    assert cli.main(["aufbau", "--config", str(out3 / "run_config.txt"),
                     "--out", str(out4)]) == 0
    aufbau_same = ((out3 / "aufbau_tables.csv").read_bytes()
                   == (out4 / "aufbau_tables.csv").read_bytes())
    _report(10, sweep_same and aufbau_same,
            f"phase-sweep bodies identical={sweep_same}, "
            f"aufbau bodies identical={aufbau_same}")
