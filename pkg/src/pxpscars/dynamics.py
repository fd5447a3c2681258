"""Quench dynamics: Lanczos propagation, fidelity and entropy series,
revival-peak location and the late-time infidelity scaling analysis."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .basis import ConstrainedBasis

__all__ = [
    "QuenchRecord",
    "ScalingReport",
    "WindowError",
    "krylov_evolve",
    "fidelity_series",
    "entanglement_entropy",
    "revival_peak",
    "revival_scan",
    "scaling_analysis",
]


class WindowError(RuntimeError):
    """Peak bracket failed a unimodality or coverage check; widen it."""


# ---------------------------------------------------------------------------
# Krylov propagator


def _lanczos(h: sp.spmatrix, v0: np.ndarray, m: int):
    """Hermitian Lanczos with full reorthogonalization.

    Returns (V, alpha, beta, k) where k <= m is the number of basis vectors
    actually built; k < m signals breakdown, i.e. an exactly invariant
    subspace.
    """
    n = v0.shape[0]
    V = np.zeros((m, n), dtype=np.complex128)
    alpha = np.zeros(m)
    beta = np.zeros(m)  # beta[j] couples vector j to j+1
    V[0] = v0
    for j in range(m):
        w = h @ V[j]
        alpha[j] = np.real(np.vdot(V[j], w))
        w -= alpha[j] * V[j]
        if j > 0:
            w -= beta[j - 1] * V[j - 1]
        # full reorthogonalization keeps unitarity at the 1e-14 level
        w -= V[: j + 1].T @ (V[: j + 1].conj() @ w)
        b = np.linalg.norm(w)
        beta[j] = b
        if b < 1e-13 or j == m - 1:
            return V[: j + 1], alpha[: j + 1], beta[: j + 1], j + 1
        V[j + 1] = w / b
    return V, alpha, beta, m


def _step_from_lanczos(alpha, beta, k, dt):
    """Coefficients of exp(-i dt T) e_1 and the residual-based error proxy."""
    T = np.diag(alpha) + np.diag(beta[: k - 1], 1) + np.diag(beta[: k - 1], -1)
    evals, evecs = np.linalg.eigh(T)
    phases = np.exp(-1j * dt * evals)
    coef = evecs @ (phases * evecs[0].conj())
    err = abs(beta[k - 1]) * abs(coef[-1])
    return coef, err


def krylov_evolve(h: sp.spmatrix, psi: np.ndarray, dt: float,
                  tol: float = 1e-10, krylov_dim: int = 30) -> np.ndarray:
    """Propagate psi by exp(-i h dt) with adaptive Lanczos sub-stepping.

    The a-posteriori residual estimate controls the sub-step; a Lanczos
    breakdown is treated as exact convergence within an invariant subspace.
    """
    psi = np.asarray(psi, dtype=np.complex128)
    if dt == 0.0:
        return psi.copy()
    nrm = np.linalg.norm(psi)
    v = psi / nrm
    remaining = dt
    direction = math.copysign(1.0, dt)
    sub = dt
    budget = tol / max(abs(dt), 1.0)  # error allowance per unit time
    while abs(remaining) > 1e-15 * abs(dt):
        V, alpha, beta, k = _lanczos(h, v, krylov_dim)
        if k < krylov_dim and beta[k - 1] < 1e-13:
            # invariant subspace: the remaining step is exact
            coef, _ = _step_from_lanczos(alpha, beta, k, remaining)
            v = V.T @ coef
            break
        sub = direction * min(abs(sub), abs(remaining))
        while True:
            coef, err = _step_from_lanczos(alpha, beta, k, sub)
            if err <= budget * abs(sub) or abs(sub) < 1e-12:
                break
            sub *= 0.5
        v = V.T @ coef
        v /= np.linalg.norm(v)
        remaining -= sub
        sub *= 1.25
    return nrm * v


# ---------------------------------------------------------------------------
# observables


def entanglement_entropy(psi: np.ndarray, basis: ConstrainedBasis,
                         cut: int | None = None) -> tuple[float, np.ndarray]:
    """Half-chain Schmidt decomposition in the constrained basis.

    Returns (S, p) with S = -sum p ln p over the squared Schmidt values.
    psi must live in the full constrained basis; sector vectors have no
    well-defined site factorization.
    """
    if len(psi) != basis.dim:
        raise ValueError(
            f"state of length {len(psi)} does not match the full basis "
            f"(dim {basis.dim}); lift sector vectors before the cut"
        )
    n = basis.n_sites
    if cut is None:
        cut = n // 2
    if not 0 < cut < n:
        raise ValueError("cut must be interior")
    mask = (np.int64(1) << cut) - 1
    left = basis.states & mask
    right = basis.states >> cut
    ul, li = np.unique(left, return_inverse=True)
    ur, ri = np.unique(right, return_inverse=True)
    m = np.zeros((len(ul), len(ur)), dtype=psi.dtype)
    m[li, ri] = psi
    svals = np.linalg.svd(m, compute_uv=False)
    p = svals ** 2
    p = p[p > 1e-16]
    p = np.sort(p)[::-1]
    s = float(-(p * np.log(p)).sum())
    return s, p


@dataclass
class QuenchRecord:
    """Fidelity/entropy time series with optional Schmidt snapshots."""

    n_sites: int
    times: np.ndarray
    fidelity: np.ndarray
    entropy: np.ndarray | None = None
    schmidt: list[np.ndarray] = field(default_factory=list)
    schmidt_times: np.ndarray | None = None
    peaks: list[tuple[int, float, float]] = field(default_factory=list)

    def to_csv(self, path: str):
        with open(path, "w") as fh:
            fh.write("t[1/flip],g,S[nats]\n")
            ent = self.entropy if self.entropy is not None else np.full_like(self.times, np.nan)
            for t, g, s in zip(self.times, self.fidelity, ent):
                fh.write(f"{float(t)!r},{float(g)!r},{float(s)!r}\n")

    def peaks_json(self) -> str:
        return json.dumps([{"m": m, "t": t, "g": g} for m, t, g in self.peaks])


def fidelity_series(h: sp.spmatrix, psi0: np.ndarray, t_max: float, dt: float,
                    basis: ConstrainedBasis | None = None,
                    entropy_stride: int = 1, schmidt_stride: int = 0,
                    tol: float = 1e-10) -> QuenchRecord:
    """Loschmidt echo |<psi0|psi(t)>|^2 (and optionally entropy) on a grid."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    psi0 = np.asarray(psi0, dtype=np.complex128)
    nsteps = int(round(t_max / dt))
    times = np.arange(nsteps + 1) * dt
    g = np.zeros(nsteps + 1)
    ent = np.full(nsteps + 1, np.nan) if basis is not None else None
    schmidt, stimes = [], []
    psi = psi0.copy()
    for j, t in enumerate(times):
        if j > 0:
            psi = krylov_evolve(h, psi, dt, tol=tol)
        g[j] = abs(np.vdot(psi0, psi)) ** 2
        if basis is not None and j % max(entropy_stride, 1) == 0:
            s, p = entanglement_entropy(psi, basis)
            ent[j] = s
            if schmidt_stride and j % schmidt_stride == 0:
                schmidt.append(p)
                stimes.append(t)
    n_sites = basis.n_sites if basis is not None else 0
    return QuenchRecord(
        n_sites=n_sites, times=times, fidelity=np.clip(g, 0.0, 1.0),
        entropy=ent, schmidt=schmidt,
        schmidt_times=np.array(stimes) if stimes else None,
    )


def _echo_from(h, psi0, checkpoint, t0, t, tol):
    psi = krylov_evolve(h, checkpoint, t - t0, tol=tol)
    return abs(np.vdot(psi0, psi)) ** 2


def revival_peak(h: sp.spmatrix, psi0: np.ndarray, t_guess: float,
                 window: float, xtol: float = 1e-6, tol: float = 1e-10,
                 _checkpoint=None, _t0=None) -> tuple[float, float]:
    """Locate a fidelity maximum near t_guess by golden-section search.

    Checks unimodality of the bracket: the echo at both ends must stay below
    an interior probe, otherwise a WindowError asks the caller to widen.
    """
    from .optimize import golden_section

    a, b = t_guess - window, t_guess + window
    if _checkpoint is None:
        _checkpoint = krylov_evolve(h, psi0, a, tol=tol)
        _t0 = a

    def f(t):
        return _echo_from(h, psi0, _checkpoint, _t0, t, tol)

    g_a, g_b, g_mid = f(a), f(b), f(t_guess)
    if g_mid < g_a or g_mid < g_b:
        raise WindowError(
            f"echo at bracket ends ({g_a:.3g}, {g_b:.3g}) exceeds interior probe "
            f"{g_mid:.3g} at t={t_guess:.4f}; widen the window"
        )
    t_star, g_star = golden_section(f, a, b, xtol=xtol, maximize=True)
    return t_star, g_star


def revival_scan(h: sp.spmatrix, psi0: np.ndarray, tau: float, m_max: int,
                 window_frac: float = 0.2, xtol: float = 1e-5,
                 tol: float = 1e-10) -> list[tuple[int, float, float]]:
    """Track the first m_max revival peaks by sequential evolution.

    The window center follows the measured period so slow drifts do not lose
    the peak.  Returns (m, t_m, g_m) triples.
    """
    from .optimize import golden_section

    peaks = []
    psi = np.asarray(psi0, dtype=np.complex128)
    t_now = 0.0
    period = tau
    for m in range(1, m_max + 1):
        center = (peaks[-1][1] + period) if peaks else tau
        w = window_frac * tau
        a = center - w
        psi = krylov_evolve(h, psi, a - t_now, tol=tol)
        t_now = a
        checkpoint = psi

        def f(t):
            return _echo_from(h, psi0, checkpoint, t_now, t, tol)

        t_star, g_star = golden_section(f, a, center + w, xtol=xtol, maximize=True)
        peaks.append((m, t_star, g_star))
        if m > 1:
            period = (t_star - peaks[0][1]) / (m - 1)
    return peaks


# ---------------------------------------------------------------------------
# scaling analysis


@dataclass
class ScalingReport:
    """Per-size decay rates and the two-window power-law crossing."""

    m: dict[int, np.ndarray]
    gamma: dict[int, np.ndarray]
    g_tilde: dict[int, np.ndarray]
    fits: dict[int, dict[str, tuple[float, float]]]  # N -> window -> (C, mu)
    m_c: dict[int, float]
    short_window: tuple[int, int]
    long_window: tuple[int, int]

    def to_json(self) -> str:
        out = {
            "short_window": list(self.short_window),
            "long_window": list(self.long_window),
            "sizes": {},
        }
        for n in self.m:
            out["sizes"][str(n)] = {
                "m": self.m[n].tolist(),
                "gamma": self.gamma[n].tolist(),
                "g_tilde": self.g_tilde[n].tolist(),
                "fits": {k: list(v) for k, v in self.fits[n].items()},
                "m_c": self.m_c.get(n),
            }
        return json.dumps(out)


def _powerlaw_fit(m: np.ndarray, gamma: np.ndarray, window: tuple[int, int]):
    lo, hi = window
    sel = (m >= lo) & (m <= hi) & (gamma > 0)
    if sel.sum() < 2:
        raise WindowError(f"fewer than 2 usable peaks in window {window}")
    x = np.log(m[sel].astype(float))
    y = np.log(gamma[sel])
    mu, logc = np.polyfit(x, y, 1)
    return math.exp(logc), mu


def scaling_analysis(peaks_by_size: dict[int, list[tuple[int, float, float]]],
                     short_window: tuple[int, int] = (5, 60),
                     long_window: tuple[int, int] = (200, 1000)) -> ScalingReport:
    """Per-spin decay rate Gamma(m) = (1 - g_m)/(N m), power-law fits on a
    short and a long window, and their intersection m_c per system size."""
    ms, gammas, gts, fits, mcs = {}, {}, {}, {}, {}
    for n, peaks in peaks_by_size.items():
        m = np.array([p[0] for p in peaks])
        g = np.array([p[2] for p in peaks])
        gamma = (1.0 - g) / (n * m)
        gamma[g > 1.0 - 1e-14] = 0.0
        ms[n], gammas[n] = m, gamma
        gts[n] = g ** (1.0 / n)
        f_short = _powerlaw_fit(m, gamma, short_window)
        f_long = _powerlaw_fit(m, gamma, long_window)
        fits[n] = {"short": f_short, "long": f_long}
        (c1, mu1), (c2, mu2) = f_short, f_long
        # the turning point is only defined once the late-time rate actually
        # grows; a still-decaying long window means m_c lies beyond the scan
        if mu1 < 0.0 < mu2:
            mcs[n] = (c1 / c2) ** (1.0 / (mu2 - mu1))
    return ScalingReport(m=ms, gamma=gammas, g_tilde=gts, fits=fits, m_c=mcs,
                         short_window=short_window, long_window=long_window)
