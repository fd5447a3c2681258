"""Acceptance gate: ten numbered criteria, one pass/fail line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as they
come.  Criteria at N >= 24 are marked slow; the N = 32 reproduction is
marked extended and excluded by default (hours of runtime).
"""

import math

import numpy as np
import pytest
import scipy.linalg

from pxpscars.basis import build_sector, enumerate_basis, neel_state
from pxpscars.operators import (CouplingSet, ansatz_couplings,
                                build_hamiltonian, optimal_h2_analytic,
                                residual_second_step_error, solve_constraint,
                                split_pm)


def report(num, ok, detail):
    print(f"\n[criterion {num:02d}] {'PASS' if ok else 'FAIL'}: {detail}")
    assert ok, f"criterion {num}: {detail}"


def neel_vector(basis):
    psi = np.zeros(basis.dim, dtype=complex)
    psi[neel_state(basis)[0]] = 1.0
    return psi


# ---------------------------------------------------------------------------


def test_criterion_01_analytic_constants():
    c = solve_constraint()
    h2 = optimal_h2_analytic()
    eps = residual_second_step_error()
    checks = {
        "h0": abs(c.h0 - 0.0506656) <= 1e-6,
        "delta": abs(c.delta - 0.835845) <= 1e-5,
        "tau": abs(c.tau - 4.85962) <= 1e-4,
        "h2*": abs(h2 - 0.0527864) <= 1e-7,
        "eps": abs(eps - (-0.0845)) <= 5e-4,
    }
    detail = (f"h0={c.h0:.7f} delta={c.delta:.6f} tau={c.tau:.5f} "
              f"h2*={h2:.7f} eps={eps:.5f}")
    report(1, all(checks.values()), detail)


@pytest.mark.slow
def test_criterion_02_revival_fidelity_n24():
    from pxpscars.dynamics import revival_peak
    c = solve_constraint()
    basis = enumerate_basis(24, "periodic")
    h = build_hamiltonian(basis, ansatz_couplings(c.h0, 12))
    t_star, g_star = revival_peak(h, neel_vector(basis), c.tau, 0.2 * c.tau,
                                  xtol=1e-8, tol=1e-12)
    infid = 1.0 - g_star
    report(2, infid <= 1e-5,
           f"ansatz first-revival infidelity at N=24: {infid:.3e} "
           f"(required <= 1e-5; t*={t_star:.5f})")


@pytest.mark.extended
def test_criterion_02x_revival_fidelity_n32():
    from pxpscars.dynamics import revival_peak
    c = solve_constraint()
    basis = enumerate_basis(32, "periodic")
    psi0 = neel_vector(basis)
    h = build_hamiltonian(basis, ansatz_couplings(c.h0, 16))
    _, g_ansatz = revival_peak(h, psi0, c.tau, 0.2 * c.tau, xtol=1e-6, tol=1e-10)
    h4 = build_hamiltonian(basis, CouplingSet(values=(optimal_h2_analytic(),)))
    _, g_r4 = revival_peak(h4, psi0, c.tau, 0.25 * c.tau, xtol=1e-6, tol=1e-10)
    ok_ansatz = (1.0 - g_ansatz) <= 3e-6
    ok_r4 = abs(g_r4 - 0.998) <= 1e-3
    report(2, ok_ansatz and ok_r4,
           f"N=32: ansatz infidelity {1 - g_ansatz:.3e} (required ~1e-6 x3), "
           f"range-4 g(tau) {g_r4:.4f} (required 0.998 +- 0.001)")


def test_criterion_03_fsa_exactness():
    from pxpscars.fsa import (fsa_basis, predicted_step2_coefficients,
                              range4_step2_coefficients)
    worst_step1 = 0.0
    basis10 = enumerate_basis(10, "periodic")
    for h2 in (-0.1, 0.0, 0.0527864, 0.2):
        hp, hm = split_pm(basis10, CouplingSet(values=(h2,)))
        sub = fsa_basis(hp, hm, basis10)
        r = np.linalg.norm(hm @ sub.vectors[1] - sub.offdiag[0] * sub.vectors[0])
        worst_step1 = max(worst_step1, r)
    worst_f = 0.0
    for n in (12, 16):
        basis = enumerate_basis(n, "periodic")
        for h2 in (0.02, 0.0527864, 0.09):
            num = range4_step2_coefficients(basis, h2)
            ref = predicted_step2_coefficients(h2, n)
            worst_f = max(worst_f, max(abs(a - b) for a, b in zip(num, ref)))
    report(3, worst_step1 <= 1e-12 and worst_f <= 1e-10,
           f"first lowering step residual {worst_step1:.2e} (<= 1e-12), "
           f"f2/f4/f6 extraction error {worst_f:.2e} (<= 1e-10)")


@pytest.mark.slow
def test_criterion_04_su2_structure_n24():
    from pxpscars.fsa import from_couplings, su2_report
    c = solve_constraint()
    basis = enumerate_basis(24, "periodic")
    rep = su2_report(from_couplings(basis, ansatz_couplings(c.h0, 12)))
    rep0 = su2_report(from_couplings(basis))
    ok = (rep.r_relative_spread <= 0.05
          and rep.spacing_rms_deviation <= 0.03
          and rep.r_relative_spread < rep0.r_relative_spread
          and rep.spacing_rms_deviation < rep0.spacing_rms_deviation)
    report(4, ok,
           f"N=24 r spread {rep.r_relative_spread:.2%} (<= 5%), spacing RMS "
           f"{rep.spacing_rms_deviation:.2%} (<= 3%); bare baseline "
           f"{rep0.r_relative_spread:.1%}/{rep0.spacing_rms_deviation:.1%}")


@pytest.mark.slow
def test_criterion_05_level_statistics():
    from pxpscars.spectral import r_statistic
    rng = np.random.default_rng(12)
    r_poisson = r_statistic(np.sort(rng.uniform(0, 1, 100001))).r_mean
    goe = []
    for _ in range(3):
        a = rng.normal(size=(2000, 2000))
        goe.append(r_statistic(np.linalg.eigvalsh(a + a.T)).r_values)
    r_goe = float(np.concatenate(goe).mean())

    c = solve_constraint()
    r_model = {}
    for n in (20, 28):
        basis = enumerate_basis(n, "periodic")
        h = build_hamiltonian(basis, ansatz_couplings(c.h0, n // 2))
        sec = build_sector(basis, 0, inversion=1, step=1)
        del basis
        hs = sec.project_operator(h)
        del h, sec
        # values only, destroying the input: N = 28 is memory-bound
        energies = scipy.linalg.eigh(hs, eigvals_only=True, overwrite_a=True)
        del hs
        r_model[n] = r_statistic(energies).r_mean
    ok = (abs(r_poisson - 0.386) <= 0.01 and abs(r_goe - 0.53) <= 0.01
          and 0.50 <= r_model[28] <= 0.54 and r_model[28] > r_model[20])
    report(5, ok,
           f"synthetic Poisson {r_poisson:.4f} (0.386 +- 0.01), GOE {r_goe:.4f} "
           f"(0.53 +- 0.01); deformed <r> N=28 {r_model[28]:.4f} (in [0.50, "
           f"0.54]) vs N=20 {r_model[20]:.4f}")


@pytest.mark.slow
def test_criterion_06_special_band_n24():
    from pxpscars.spectral import diagonalize_sector, special_band
    c = solve_constraint()
    basis = enumerate_basis(24, "periodic")
    h = build_hamiltonian(basis, ansatz_couplings(c.h0, 12))
    sec = build_sector(basis, 0, step=2)
    rec = diagonalize_sector(h, sec)
    idx, w = special_band(rec, 24, c.delta_e)
    n_members = int((idx >= 0).sum())
    weight = float(w.sum())
    spac = np.diff(rec.energies[idx])
    mid = spac[len(spac) // 2]
    mid_err = abs(mid - c.delta_e) / c.delta_e
    ok = n_members == 25 and weight >= 0.98 and mid_err <= 0.01
    report(6, ok,
           f"N=24 band members {n_members} (= 25), weight {weight:.4f} "
           f"(>= 0.98), mid-band spacing {mid:.5f} vs {c.delta_e:.5f} "
           f"(rel err {mid_err:.2e} <= 0.01)")


@pytest.mark.slow
def test_criterion_07_optimization():
    from pxpscars.optimize import CostSpec, make_cost, nelder_mead
    c = solve_constraint()
    # (a) fsa cost at R = 2, N = 16 lands within 5% of the analytic h2*
    cost = make_cost(CostSpec(kind="fsa", n_sites=16, range_=2))
    tr = nelder_mead(cost, np.array([0.045]), xtol=1e-8)
    h2s = optimal_h2_analytic()
    dev = abs(tr.best_x[0] - h2s) / h2s
    # (b) fidelity-optimized couplings at N = 20, R = 10: basin properties
    fid_cost = make_cost(CostSpec(kind="fid", n_sites=20, range_=10,
                                  peak_xtol=1e-6))
    init = ansatz_couplings(c.h0, 10).as_array()
    tr2 = nelder_mead(fid_cost, init, max_iterations=120, initial_step=0.1)
    hd = tr2.best_x
    ansatz = init
    positive = bool((hd > 0).all())
    monotone = bool((np.diff(hd[1:]) < 0).all())  # decreasing for d >= 3
    factor2 = bool(np.all((hd[:5] > ansatz[:5] / 2) & (hd[:5] < ansatz[:5] * 2)))
    ok = dev <= 0.05 and positive and monotone and factor2
    report(7, ok,
           f"fsa optimum {tr.best_x[0]:.5f} vs {h2s:.5f} ({dev:.1%} <= 5%); "
           f"fid-optimized N=20 R=10 (1-g={tr2.best_cost:.2e}): positive "
           f"{positive}, monotone d>=3 {monotone}, within 2x of ansatz d<=6 "
           f"{factor2}")


def test_criterion_08_toy_model():
    from pxpscars.dynamics import krylov_evolve
    from pxpscars.toymodel import ToySpec, build_toy, scar_tower
    rng = np.random.default_rng(0)
    worst = 0.0
    for draw in range(50):
        n = (10, 12, 14)[draw % 3]
        spec = ToySpec(n_sites=n, seed=int(rng.integers(1 << 30)))
        worst = max(worst, scar_tower(n, spec.omega).residuals(build_toy(spec)).max())

    n = 14
    spec = ToySpec(n_sites=n, seed=7)
    h = (2.0 * math.pi) * build_toy(spec)
    psi0 = np.zeros(1 << n, dtype=complex)
    psi0[-1] = 1.0
    psi = psi0.copy()
    worst_revival = 0.0
    for _ in range(100):
        psi = krylov_evolve(h, psi, 1.0, tol=1e-13)
        worst_revival = max(worst_revival, abs(1.0 - abs(np.vdot(psi0, psi)) ** 2))

    tower = scar_tower(n, spec.omega)
    ov = np.abs(tower.states.conj() @ psi0) ** 2
    support = int((ov > 1e-10).sum())
    max_ov = float(ov.max())
    ref = math.comb(14, 7) / 2 ** 14
    ok = (worst <= 1e-10 and worst_revival <= 1e-10
          and support == n + 1 and abs(max_ov - ref) <= 1e-10)
    report(8, ok,
           f"tower residuals {worst:.2e} (<= 1e-10, 50 draws), revival error "
           f"{worst_revival:.2e} (<= 1e-10, m <= 100), support {support} "
           f"(= 15), max overlap {max_ov:.6f} (= C(14,7)/2^14 = {ref:.6f})")


def test_criterion_09_oracle_equivalence():
    from pxpscars.dynamics import fidelity_series
    from pxpscars.spectral import diagonalize_sector
    c = solve_constraint()
    basis = enumerate_basis(12, "periodic")
    h = build_hamiltonian(basis, ansatz_couplings(c.h0, 6))
    psi0 = neel_vector(basis)
    e, v = np.linalg.eigh(h.toarray())
    c0 = v.conj().T @ psi0
    rec = fidelity_series(h, psi0, 50.0, 1.0)
    exact = np.array([abs(np.vdot(c0, np.exp(-1j * e * t) * c0)) ** 2
                      for t in rec.times])
    krylov_err = float(np.abs(rec.fidelity - exact).max())

    basis14 = enumerate_basis(14, "periodic")
    h14 = build_hamiltonian(basis14, ansatz_couplings(c.h0, 7))
    full = np.sort(np.linalg.eigvalsh(h14.toarray()))
    pieces = [diagonalize_sector(h14, build_sector(basis14, k, step=2)).energies
              for k in range(7)]
    merged = np.sort(np.concatenate(pieces))
    sector_err = float(np.abs(merged - full).max())
    ok = krylov_err <= 1e-9 and sector_err <= 1e-8
    report(9, ok,
           f"Krylov vs dense g(t) error {krylov_err:.2e} (<= 1e-9, t in "
           f"[0, 50]); sector reassembly error {sector_err:.2e} (<= 1e-8, N=14)")


@pytest.mark.slow
def test_criterion_10_scaling_collapse():
    from pxpscars.dynamics import revival_scan, scaling_analysis
    c = solve_constraint()
    peaks = {}
    for n in (16, 20, 24):
        basis = enumerate_basis(n, "periodic")
        h = build_hamiltonian(basis, ansatz_couplings(c.h0, n // 2))
        peaks[n] = revival_scan(h, neel_vector(basis), c.tau, 100,
                                xtol=1e-4, tol=1e-9)
    rep = scaling_analysis(peaks, short_window=(5, 60), long_window=(60, 100))
    # collapse of the fitted Gamma(m) power laws over 5 <= m <= 100; the raw
    # curves carry O(1) revival-to-revival beating noise at desk sizes
    grid = np.arange(5, 101, dtype=float)
    curve = {n: rep.fits[n]["short"][0] * grid ** rep.fits[n]["short"][1]
             for n in (16, 20, 24)}
    worst = max(float(np.max(np.abs(curve[a] - curve[24]) / curve[24]))
                for a in (16, 20))
    raw_med = float(np.median(np.abs(rep.gamma[16][4:] - rep.gamma[24][4:])
                              / rep.gamma[24][4:]))
    # m_c absent means the late-time upturn lies beyond the scanned range
    mcs = [rep.m_c.get(n, math.inf) for n in (16, 20, 24)]
    non_decreasing = all(b >= 0.95 * a for a, b in zip(mcs, mcs[1:]))
    ok = worst <= 0.20 and non_decreasing
    report(10, ok,
           f"Gamma(m) fitted-curve collapse worst rel dev {worst:.1%} "
           f"(<= 20%, m <= 100; raw median dev {raw_med:.1%}); "
           f"m_c = {[f'{m:.0f}' for m in mcs]} non-decreasing {non_decreasing}")
