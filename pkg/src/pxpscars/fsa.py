"""Forward-scattering subspace: recursive basis, tridiagonal projection,
cost functions, and the ladder-algebra diagnostics."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal

from .basis import ConstrainedBasis, neel_state
from .operators import CouplingSet, build_hamiltonian, commutator_hz, split_pm

__all__ = [
    "FsaSubspace",
    "Su2Report",
    "fsa_basis",
    "project_tridiagonal",
    "subspace_variance",
    "fsa_error3",
    "ritz_anharmonicity",
    "su2_report",
    "range4_step2_coefficients",
    "predicted_step2_coefficients",
]


@dataclass
class FsaSubspace:
    """Orthonormal vectors |k>, k = 0..N, generated by repeated raising.

    Vectors at distinct k have distinct Hamming distance from the Neel state,
    so orthogonality is exact up to rounding.  ``offdiag[k] = <k+1|H+|k>`` is
    the step norm; the step normalization beta_k = 1/offdiag[k-1] and the
    cumulative gamma_k = prod_j beta_j are both exposed since both
    conventions are in circulation.
    """

    basis: ConstrainedBasis
    vectors: np.ndarray  # (N+1, dim)
    offdiag: np.ndarray  # (N,)
    hplus: sp.spmatrix = field(repr=False)
    hminus: sp.spmatrix = field(repr=False)

    @property
    def n_sites(self) -> int:
        return self.basis.n_sites

    @property
    def beta(self) -> np.ndarray:
        """Step normalizations: |k> = beta_k H+ |k-1>, beta_0 = 1."""
        return np.concatenate([[1.0], 1.0 / self.offdiag])

    @property
    def gamma(self) -> np.ndarray:
        """Cumulative normalizations: |k> = gamma_k (H+)^k |0>."""
        return np.cumprod(self.beta)

    def projector_apply(self, psi: np.ndarray) -> np.ndarray:
        """P_K psi in the full basis."""
        return self.vectors.T @ (self.vectors.conj() @ psi)


class DegenerateCouplingError(RuntimeError):
    """The raising chain vanished before reaching the far Neel state."""


def fsa_basis(hplus: sp.spmatrix, hminus: sp.spmatrix,
              basis: ConstrainedBasis) -> FsaSubspace:
    """Build the N+1 forward-scattering vectors from the Neel state.

    The chain must terminate exactly at k = N, where the last vector is the
    translated Neel partner; an earlier vanishing norm signals degenerate
    couplings.
    """
    n = basis.n_sites
    i0, i1 = neel_state(basis)
    vecs = np.zeros((n + 1, basis.dim))
    vecs[0, i0] = 1.0
    offdiag = np.zeros(n)
    for k in range(n):
        w = hplus @ vecs[k]
        t = np.linalg.norm(w)
        if t < 1e-14:
            raise DegenerateCouplingError(
                f"raising chain vanished at step {k + 1} of {n}"
            )
        offdiag[k] = t
        vecs[k + 1] = w / t
    # sanity: top of the chain is the far Neel state and the chain closes
    if abs(abs(vecs[n, i1]) - 1.0) > 1e-10:
        raise DegenerateCouplingError("chain top is not the translated Neel state")
    return FsaSubspace(basis=basis, vectors=vecs, offdiag=offdiag,
                       hplus=hplus, hminus=hminus)


def from_couplings(basis: ConstrainedBasis,
                   couplings: CouplingSet | None = None) -> FsaSubspace:
    """Convenience: split the deformed Hamiltonian and build the subspace."""
    hp, hm = split_pm(basis, couplings)
    return fsa_basis(hp, hm, basis)


def project_tridiagonal(subspace: FsaSubspace, h: sp.spmatrix
                        ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Project H into the subspace: returns (K, ritz_values, ritz_vectors).

    K is tridiagonal with zero diagonal (every term of H changes the Hamming
    distance from the Neel state by one); Ritz values come out ascending.
    """
    n = subspace.n_sites
    hv = np.array([h @ v for v in subspace.vectors])
    k_mat = subspace.vectors @ hv.T
    k_mat = 0.5 * (k_mat + k_mat.T)
    off = np.diag(k_mat, 1).copy()
    vals, vecs = eigh_tridiagonal(np.diag(k_mat).copy(), off)
    return k_mat, vals, vecs


def subspace_variance(subspace: FsaSubspace, h: sp.spmatrix,
                      hz: sp.spmatrix | None = None,
                      rel_tol: float = 1e-8) -> float:
    """tr{K(H^2) - (KH)^2}, evaluated two independent ways.

    Route (i) sums per-vector variances of H against the projected
    tridiagonal; route (ii) is the ladder-weight trace sum_k <k|H^z|k>.
    Disagreement beyond rel_tol signals an inconsistent raising/lowering
    split and raises.
    """
    k_mat, _, _ = project_tridiagonal(subspace, h)
    hv = np.array([h @ v for v in subspace.vectors])
    route_i = float(np.sum(hv * hv) - np.sum(k_mat * k_mat))
    if hz is None:
        hz = commutator_hz(subspace.hplus, subspace.hminus)
    route_ii = float(sum(v @ (hz @ v) for v in subspace.vectors))
    scale = max(abs(route_i), abs(route_ii), 1e-12)
    if abs(route_i - route_ii) > rel_tol * scale:
        raise ArithmeticError(
            f"subspace-variance routes disagree: {route_i!r} vs {route_ii!r} "
            "(inconsistent raising/lowering split?)"
        )
    return route_i


def fsa_error3(subspace: FsaSubspace, hminus: sp.spmatrix | None = None) -> float:
    """First nontrivial forward-scattering error ||H- |3> - t2 |2>||^2
    = <3|H+ H- |3> - t2^2 with t2 = <3|H+|2>.

    Lowering |1> and |2> is exact for any couplings (H- |2> stays parallel
    to |1> by construction), so the leading leakage appears at step three.
    """
    if hminus is None:
        hminus = subspace.hminus
    v3 = subspace.vectors[3]
    w = hminus @ v3
    return float(max(w @ w - subspace.offdiag[2] ** 2, 0.0))


def ritz_anharmonicity(ritz_values: np.ndarray) -> float:
    """RMS residual of the best-fit arithmetic progression through the
    sorted Ritz values."""
    vals = np.sort(np.asarray(ritz_values, dtype=float))
    if len(vals) < 3:
        raise ValueError("need at least 3 Ritz values")
    idx = np.arange(len(vals), dtype=float)
    coeffs = np.polyfit(idx, vals, 1)
    resid = vals - np.polyval(coeffs, idx)
    return float(np.sqrt(np.mean(resid ** 2)))


@dataclass
class Su2Report:
    """Ladder diagnostics: raising matrix elements against the ideal spin-N/2
    values, ladder-weight expectations, spacings and variances."""

    n_sites: int
    t: np.ndarray            # <k+1|H+|k>, length N
    ideal: np.ndarray        # sqrt((s-m_k)(s+m_k+1)), length N
    scale: float             # least-squares factor fitting t ~ scale * ideal
    r: np.ndarray            # t / ideal
    hz_expect: np.ndarray    # <k|H^z|k>, length N+1
    hz_spacing: np.ndarray   # consecutive differences, length N
    hz_var: np.ndarray       # var_k(H^z), length N+1

    @property
    def r_relative_spread(self) -> float:
        return float((self.r.max() - self.r.min()) / abs(self.r.mean()))

    @property
    def spacing_rms_deviation(self) -> float:
        """RMS deviation of the ladder spacing from its mean, relative."""
        d = self.hz_spacing
        return float(np.sqrt(np.mean((d - d.mean()) ** 2)) / abs(d.mean()))

    def spacing_mean(self, drop_edges: int = 0) -> float:
        d = self.hz_spacing
        if drop_edges:
            d = d[drop_edges:-drop_edges]
        return float(d.mean())

    def to_json(self) -> str:
        return json.dumps({
            "n_sites": self.n_sites,
            "t": self.t.tolist(),
            "ideal": self.ideal.tolist(),
            "scale": self.scale,
            "r": self.r.tolist(),
            "hz_expect": self.hz_expect.tolist(),
            "hz_spacing": self.hz_spacing.tolist(),
            "hz_var": self.hz_var.tolist(),
            "spacing_mean_all": self.spacing_mean(),
            "spacing_mean_inner": self.spacing_mean(drop_edges=1),
        })


def su2_report(subspace: FsaSubspace, hz: sp.spmatrix | None = None) -> Su2Report:
    """Compare the raising chain with an exact spin-N/2 ladder."""
    if hz is None:
        hz = commutator_hz(subspace.hplus, subspace.hminus)
    n = subspace.n_sites
    s = n / 2.0
    k = np.arange(n, dtype=float)
    m = k - s
    ideal = np.sqrt((s - m) * (s + m + 1.0))
    t = subspace.offdiag
    scale = float(t @ ideal / (ideal @ ideal))
    hz_expect = np.array([v @ (hz @ v) for v in subspace.vectors])
    hz_sq = np.array([np.linalg.norm(hz @ v) ** 2 for v in subspace.vectors])
    hz_var = np.maximum(hz_sq - hz_expect ** 2, 0.0)
    return Su2Report(
        n_sites=n, t=t, ideal=ideal, scale=scale, r=t / ideal,
        hz_expect=hz_expect, hz_spacing=np.diff(hz_expect), hz_var=hz_var,
    )


# ---------------------------------------------------------------------------
# second-step coefficient extraction for the range-4 deformation


def predicted_step2_coefficients(h2: float, n_sites: int) -> tuple[float, float, float]:
    """Closed-form weights of H^z|2> on the three flip-separation classes
    (distance 2, distance 4, distance >= 6), as functions of h2 and L = N/2."""
    ell = n_sites / 2.0
    h = h2
    f2 = -ell + 3.0 - 4.0 * h * (1.0 - h) * (7.0 - ell)
    f4 = -ell + 4.0 - 2.0 * h * (4.0 * (7.0 - 14.0 * h + 8.0 * h * h)
                                 - (3.0 - 6.0 * h + 4.0 * h * h) * ell)
    f6 = -ell + 4.0 - 4.0 * h * (1.0 - h) * (12.0 - ell)
    return f2, f4, f6


def range4_step2_coefficients(basis: ConstrainedBasis, h2: float
                              ) -> tuple[float, float, float]:
    """Numerically extract the same three weights from H^z|2>.

    The k = 2 vector has a known amplitude pattern over two-defect
    configurations; dividing the H^z|2> amplitudes by it isolates the class
    coefficients.
    """
    n = basis.n_sites
    if n < 12:
        raise ValueError("need N >= 12 to separate the three distance classes")
    couplings = CouplingSet(values=(h2,), provenance="manual")
    hp, hm = split_pm(basis, couplings)
    sub = fsa_basis(hp, hm, basis)
    hz = commutator_hz(hp, hm)
    v2 = sub.vectors[2]
    w = hz @ v2

    neel = sum(1 << i for i in range(0, n, 2))
    # flip 1-based odd sites 1&3 (distance 2), 1&5 (distance 4), 1&7 (>= 6)
    cfg2 = neel ^ (1 << 0) ^ (1 << 2)
    cfg4 = neel ^ (1 << 0) ^ (1 << 4)
    cfg6 = neel ^ (1 << 0) ^ (1 << 6)
    i2, i4, i6 = (basis.index_of(c) for c in (cfg2, cfg4, cfg6))
    common = v2[i2]  # = 2 (1-2h2) gamma_2
    f2 = w[i2] / common
    f4 = w[i4] / common
    f6 = w[i6] / (common * (1.0 - 2.0 * h2))
    return float(f2), float(f4), float(f6)
