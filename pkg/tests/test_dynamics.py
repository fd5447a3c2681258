import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from pxpscars.basis import enumerate_basis, neel_state
from pxpscars.dynamics import (QuenchRecord, WindowError, entanglement_entropy,
                               fidelity_series, krylov_evolve, revival_peak,
                               revival_scan, scaling_analysis)
from pxpscars.operators import (ansatz_couplings, build_hamiltonian,
                                solve_constraint)


@pytest.fixture(scope="module")
def quench12(basis12):
    c = solve_constraint()
    h = build_hamiltonian(basis12, ansatz_couplings(c.h0, 6))
    psi0 = np.zeros(basis12.dim, dtype=complex)
    psi0[neel_state(basis12)[0]] = 1.0
    return h, psi0, c


# ---------------------------------------------------------------------------
# propagator


def test_krylov_matches_dense_eigendecomposition(quench12, basis12):
    h, psi0, _ = quench12
    e, v = np.linalg.eigh(h.toarray())
    for t in (0.3, 2.0, 4.86, 11.7):
        exact = v @ (np.exp(-1j * e * t) * (v.conj().T @ psi0))
        assert np.linalg.norm(krylov_evolve(h, psi0, t) - exact) < 1e-9


def test_krylov_pointwise_echo_oracle(quench12):
    # g(t) over a grid vs the dense-eigendecomposition oracle
    h, psi0, _ = quench12
    e, v = np.linalg.eigh(h.toarray())
    c0 = v.conj().T @ psi0
    rec = fidelity_series(h, psi0, 50.0, 1.0)
    exact = np.array([abs(np.vdot(c0, np.exp(-1j * e * t) * c0)) ** 2
                      for t in rec.times])
    assert np.abs(rec.fidelity - exact).max() < 1e-9


def test_krylov_unitarity_and_zero_step(quench12):
    h, psi0, _ = quench12
    out = krylov_evolve(h, psi0, 7.3)
    assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-12)
    assert np.array_equal(krylov_evolve(h, psi0, 0.0), psi0)


def test_krylov_negative_time_inverts(quench12):
    h, psi0, _ = quench12
    back = krylov_evolve(h, krylov_evolve(h, psi0, 2.5), -2.5)
    assert np.linalg.norm(back - psi0) < 1e-9


def test_krylov_breakdown_invariant_subspace():
    # a block-diagonal H with psi confined to a 2-dim invariant block
    h = sp.diags([1.0, 1.0, 5.0, 9.0]).tolil()
    h[0, 1] = h[1, 0] = 0.7
    h = h.tocsr()
    psi = np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)
    out = krylov_evolve(h, psi, 3.0)
    sub = np.array([[1.0, 0.7], [0.7, 1.0]])
    e, v = np.linalg.eigh(sub)
    exact = v @ (np.exp(-3j * e) * v[0].conj())
    assert np.linalg.norm(out[:2] - exact) < 1e-12
    assert np.abs(out[2:]).max() == 0.0


@given(t=st.floats(min_value=0.05, max_value=6.0))
@settings(deadline=None, max_examples=10)
def test_krylov_composition(quench12, t):
    h, psi0, _ = quench12
    once = krylov_evolve(h, psi0, t, tol=1e-12)
    twice = krylov_evolve(h, krylov_evolve(h, psi0, t / 2, tol=1e-12), t / 2,
                          tol=1e-12)
    assert np.linalg.norm(once - twice) < 1e-9


# ---------------------------------------------------------------------------
# entanglement entropy


def test_entropy_product_state(basis12):
    psi = np.zeros(basis12.dim, dtype=complex)
    psi[neel_state(basis12)[0]] = 1.0
    s, p = entanglement_entropy(psi, basis12)
    assert s == pytest.approx(0.0, abs=1e-12)
    assert p[0] == pytest.approx(1.0, abs=1e-12)


def test_entropy_matches_dense_partial_trace(basis12):
    # reference: embed into the full 2^N space and trace out the right half
    rng = np.random.default_rng(1)
    psi = rng.normal(size=basis12.dim) + 1j * rng.normal(size=basis12.dim)
    psi /= np.linalg.norm(psi)
    n = basis12.n_sites
    cut = n // 2
    full = np.zeros(1 << n, dtype=complex)
    full[basis12.states] = psi
    m = full.reshape(1 << (n - cut), 1 << cut)  # high bits = right half
    rho = m.conj().T @ m
    ev = np.linalg.eigvalsh(rho)
    ev = ev[ev > 1e-16]
    s_ref = -(ev * np.log(ev)).sum()
    s, _ = entanglement_entropy(psi, basis12, cut=cut)
    assert s == pytest.approx(s_ref, abs=1e-10)


def test_entropy_rejects_sector_vectors(basis12):
    with pytest.raises(ValueError):
        entanglement_entropy(np.zeros(10, dtype=complex), basis12)
    with pytest.raises(ValueError):
        entanglement_entropy(np.zeros(basis12.dim, dtype=complex), basis12, cut=0)


# ---------------------------------------------------------------------------
# revivals


def test_first_revival_location_and_height(quench12):
    h, psi0, c = quench12
    t_star, g_star = revival_peak(h, psi0, c.tau, 0.2 * c.tau, xtol=1e-7)
    assert t_star == pytest.approx(4.86040, abs=1e-4)
    assert 1.0 - g_star == pytest.approx(3.904e-5, rel=1e-2)


def test_revival_window_error(quench12):
    h, psi0, _ = quench12
    # a bracket centered far from any peak fails the unimodality probe
    with pytest.raises(WindowError):
        revival_peak(h, psi0, 2.4, 0.3)


def test_revival_scan_tracks_period(quench12):
    h, psi0, c = quench12
    peaks = revival_scan(h, psi0, c.tau, 4, xtol=1e-6)
    ms = [p[0] for p in peaks]
    ts = np.array([p[1] for p in peaks])
    gs = np.array([p[2] for p in peaks])
    assert ms == [1, 2, 3, 4]
    assert np.all(np.diff(ts) > 0)
    periods = np.diff(ts)
    assert np.abs(periods - c.tau).max() < 0.02
    assert np.all(gs > 0.999) and np.all(np.diff(gs) < 0)


def test_fidelity_series_records_entropy(quench12, basis12):
    h, psi0, _ = quench12
    rec = fidelity_series(h, psi0, 1.0, 0.5, basis=basis12)
    assert rec.fidelity[0] == pytest.approx(1.0, abs=1e-12)
    assert rec.entropy is not None and rec.entropy[0] == pytest.approx(0.0, abs=1e-10)
    assert rec.entropy[-1] > 0.0
    with pytest.raises(ValueError):
        fidelity_series(h, psi0, 1.0, 0.0)


def test_quench_record_csv(tmp_path):
    rec = QuenchRecord(n_sites=4, times=np.array([0.0, 0.5]),
                       fidelity=np.array([1.0, 0.9]),
                       entropy=np.array([0.0, 0.1]))
    path = tmp_path / "q.csv"
    rec.to_csv(str(path))
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "t[1/flip],g,S[nats]"
    assert len(lines) == 3


# ---------------------------------------------------------------------------
# scaling analysis


def _synthetic_peaks(n, m_max, gamma_of_m):
    return [(m, m * 4.86, 1.0 - n * m * gamma_of_m(m)) for m in range(1, m_max + 1)]


def test_scaling_recovers_powerlaw_exponents():
    # Gamma(m) = 1e-6 m^{-0.5} early, crossing over to m^{0.9} at m = 100
    def gamma(m):
        if m <= 100:
            return 1e-6 * m ** -0.5
        return 1e-6 * 100 ** -1.4 * m ** 0.9
    peaks = {16: _synthetic_peaks(16, 300, gamma), 20: _synthetic_peaks(20, 300, gamma)}
    rep = scaling_analysis(peaks, short_window=(5, 60), long_window=(150, 300))
    for n in (16, 20):
        c_s, mu_s = rep.fits[n]["short"]
        c_l, mu_l = rep.fits[n]["long"]
        assert mu_s == pytest.approx(-0.5, abs=0.1)
        assert mu_l == pytest.approx(0.9, abs=0.3)
        # m_c near the true crossover Gamma_early = Gamma_late
        assert 50 < rep.m_c[n] < 300


def test_scaling_gamma_definition():
    peaks = {12: [(1, 4.86, 1.0 - 12 * 1 * 2e-6),
                  (2, 9.72, 1.0 - 12 * 2 * 1e-6)]}
    with pytest.raises(WindowError):
        scaling_analysis(peaks)  # default windows need m >= 5
    rep = scaling_analysis(peaks, short_window=(1, 2), long_window=(1, 2))
    assert rep.gamma[12][0] == pytest.approx(2e-6, rel=1e-10)
    assert rep.gamma[12][1] == pytest.approx(1e-6, rel=1e-10)
    assert rep.g_tilde[12][0] == pytest.approx((1.0 - 24e-6) ** (1 / 12))
