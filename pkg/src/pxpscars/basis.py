"""Blockade-constrained Hilbert space enumeration and symmetry sectors.

Spin configurations are stored as integers; bit i (0-based) is site i+1
(1-based), bit value 1 means spin up.  No two adjacent up-spins are allowed;
for periodic chains sites N and 1 count as adjacent.  The basis is sorted by
integer value, so lookups are binary searches.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

__all__ = [
    "ConstrainedBasis",
    "SymmetrySector",
    "enumerate_basis",
    "neel_state",
    "build_sector",
    "lucas_number",
    "fibonacci_number",
]


def fibonacci_number(n: int) -> int:
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def lucas_number(n: int) -> int:
    a, b = 2, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def _open_chain_states(n: int) -> np.ndarray:
    """All n-bit patterns with no two adjacent set bits, ascending."""
    states = np.array([0, 1], dtype=np.int64) if n >= 1 else np.array([0], dtype=np.int64)
    for bit in range(1, n):
        # extend by either leaving bit unset or setting it when bit-1 is clear
        extendable = states[(states >> (bit - 1)) & 1 == 0]
        states = np.concatenate([states, extendable | (np.int64(1) << bit)])
    states.sort()
    return states


def enumerate_basis(n_sites: int, boundary: str = "periodic") -> "ConstrainedBasis":
    """Enumerate all blockade-valid configurations of an even-length chain.

    Periodic chains have Lucas-number dimension L_N, open chains the
    Fibonacci count F_{N+2}.  Built by gluing two open half-chains so that
    large N (up to 32) never touches the full 2^N space.
    """
    if n_sites < 2 or n_sites % 2 != 0:
        raise ValueError(f"n_sites must be even and >= 2, got {n_sites}")
    if boundary not in ("periodic", "open"):
        raise ValueError(f"boundary must be 'periodic' or 'open', got {boundary!r}")

    half = n_sites // 2
    lo = _open_chain_states(half)              # bits 0..half-1
    hi = _open_chain_states(n_sites - half)    # will occupy bits half..n-1

    # adjacency across the interior seam: top bit of lo vs bottom bit of hi
    lo_top = (lo >> (half - 1)) & 1
    hi_bot = hi & 1
    ok = (hi_bot[:, None] & lo_top[None, :]) == 0
    if boundary == "periodic":
        # wrap seam: top bit of hi (site N) vs bottom bit of lo (site 1)
        hi_top = (hi >> (n_sites - half - 1)) & 1
        lo_bot = lo & 1
        ok &= (hi_top[:, None] & lo_bot[None, :]) == 0

    combined = (hi[:, None] << half) | lo[None, :]
    states = np.sort(combined[ok])
    return ConstrainedBasis(n_sites=n_sites, boundary=boundary, states=states)


@dataclass(frozen=True)
class ConstrainedBasis:
    """Ordered blockade-valid configurations with O(log dim) index lookup."""

    n_sites: int
    boundary: str
    states: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.states)

    def index_of(self, config) -> np.ndarray | int:
        """Ordinal(s) of configuration(s); raises KeyError if not in basis."""
        idx = np.searchsorted(self.states, config)
        scalar = np.isscalar(config) or np.ndim(config) == 0
        idx_arr = np.atleast_1d(idx)
        cfg_arr = np.atleast_1d(np.asarray(config, dtype=np.int64))
        bad = (idx_arr >= self.dim) | (self.states[np.minimum(idx_arr, self.dim - 1)] != cfg_arr)
        if bad.any():
            raise KeyError(f"configuration(s) not in basis: {cfg_arr[bad][:5]}")
        return int(idx) if scalar else idx

    def contains(self, config) -> np.ndarray:
        idx = np.clip(np.searchsorted(self.states, config), 0, self.dim - 1)
        return self.states[idx] == config

    def summary(self) -> dict:
        return {"n_sites": self.n_sites, "boundary": self.boundary, "dim": self.dim}

    def to_json(self) -> str:
        return json.dumps(self.summary())


def neel_state(basis: ConstrainedBasis) -> tuple[int, int]:
    """Basis indices of the two Neel configurations.

    Returns (index of up-on-odd-sites, index of up-on-even-sites), odd/even
    in 1-based site labels; the first is the conventional reviving state.
    """
    n = basis.n_sites
    neel = sum(1 << i for i in range(0, n, 2))        # 1-based odd sites up
    neel_prime = sum(1 << i for i in range(1, n, 2))  # 1-based even sites up
    return basis.index_of(neel), basis.index_of(neel_prime)


def _rotate(states: np.ndarray, shift: int, n: int) -> np.ndarray:
    """Cyclic shift of bit patterns: site i -> site i+shift (mod n)."""
    shift %= n
    mask = (np.int64(1) << n) - 1
    return ((states << shift) | (states >> (n - shift))) & mask


def _reflect(states: np.ndarray, n: int) -> np.ndarray:
    """Spatial inversion: site i -> n-1-i (0-based)."""
    out = np.zeros_like(states)
    for bit in range(n):
        out |= ((states >> bit) & 1) << (n - 1 - bit)
    return out


@dataclass
class SymmetrySector:
    """Momentum (+ optional inversion) sector of a periodic constrained chain.

    ``step`` is the elementary translation (2 keeps the Neel state
    symmetry-pure, 1 gives the full translation group used for bulk spectral
    statistics).  ``projector`` is the dim_full x dim isometry whose columns
    are the orthonormal symmetrized states; inversion resolution is only
    defined at momentum 0 and pi.
    """

    basis: ConstrainedBasis
    step: int
    momentum: int
    inversion: int | None
    representatives: np.ndarray
    weights: np.ndarray
    projector: sp.csr_matrix = field(repr=False)

    @property
    def dim(self) -> int:
        return self.projector.shape[1]

    @property
    def n_translations(self) -> int:
        return self.basis.n_sites // self.step

    def label(self) -> str:
        inv = {1: "I+", -1: "I-", None: ""}[self.inversion]
        return f"T{self.step}k{self.momentum}{inv}"

    def project_state(self, psi: np.ndarray) -> np.ndarray:
        return self.projector.conj().T @ psi

    def lift_state(self, v: np.ndarray) -> np.ndarray:
        return self.projector @ v

    def project_operator(self, op: sp.spmatrix) -> np.ndarray:
        """Dense sector Hamiltonian V^dagger op V (hermitized)."""
        # symmetrize while sparse so only one dense copy is ever alive
        m = self.projector.conj().T @ (op @ self.projector)
        m = 0.5 * (m + m.conj().T)
        if self.projector.dtype == np.float64:
            m = m.real
        return m.toarray()

    def summary(self) -> dict:
        return {
            "n_sites": self.basis.n_sites,
            "step": self.step,
            "momentum": self.momentum,
            "inversion": self.inversion,
            "dim": self.dim,
        }


def build_sector(
    basis: ConstrainedBasis,
    momentum: int,
    inversion: int | None = None,
    step: int = 2,
) -> SymmetrySector:
    """Construct a translation(-by-``step``) momentum sector, optionally
    inversion-resolved at momentum 0 or pi.

    The sector is represented by explicit symmetrized full-space vectors, one
    per surviving group orbit, so projecting states and operators needs no
    extra phase bookkeeping.
    """
    if basis.boundary != "periodic":
        raise ValueError("symmetry sectors require a periodic basis")
    if step not in (1, 2):
        raise ValueError("translation step must be 1 or 2")
    n = basis.n_sites
    m_trans = n // step
    if not 0 <= momentum < m_trans:
        raise ValueError(f"momentum must be in 0..{m_trans - 1}, got {momentum}")
    if inversion is not None:
        if inversion not in (-1, 1):
            raise ValueError("inversion must be +1, -1 or None")
        at_pi = m_trans % 2 == 0 and momentum == m_trans // 2
        if momentum != 0 and not at_pi:
            raise ValueError("inversion resolution only defined at momentum 0 or pi")

    states = basis.states
    # orbit representative = minimum over all group images
    rep = states.copy()
    images = [
        _rotate(states, j * step, n) for j in range(m_trans)
    ]
    if inversion is not None:
        refl = _reflect(states, n)
        images += [_rotate(refl, j * step, n) for j in range(m_trans)]
    for img in images:
        np.minimum(rep, img, out=rep)
    reps = np.unique(rep)

    omega = np.exp(-2j * np.pi * momentum / m_trans)
    # only k = 0 and (for an even translation count) k = pi have real phases
    real_sector = momentum == 0 or (m_trans % 2 == 0 and momentum == m_trans // 2)
    dtype = np.float64 if real_sector else np.complex128

    rows, cols, vals = [], [], []
    n_reps = len(reps)
    col_ids = np.arange(n_reps)
    for j in range(m_trans):
        phase = omega ** j
        if real_sector:
            phase = phase.real
        rows.append(basis.index_of(_rotate(reps, j * step, n)))
        cols.append(col_ids)
        vals.append(np.full(n_reps, phase, dtype=dtype))
        if inversion is not None:
            rows.append(basis.index_of(_rotate(_reflect(reps, n), j * step, n)))
            cols.append(col_ids)
            vals.append(np.full(n_reps, inversion * phase, dtype=dtype))
    v = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(basis.dim, n_reps),
        dtype=dtype,
    ).tocsc()
    v.sum_duplicates()

    norms = np.sqrt(np.asarray(abs(v).multiply(abs(v)).sum(axis=0)).ravel())
    keep = norms > 1e-9
    v = v[:, keep]
    v = v @ sp.diags(1.0 / norms[keep])
    return SymmetrySector(
        basis=basis,
        step=step,
        momentum=momentum,
        inversion=inversion,
        representatives=reps[keep],
        weights=norms[keep],
        projector=v.tocsr(),
    )


def sector_table(basis: ConstrainedBasis, step: int = 2) -> list[dict]:
    """Dimensions of all momentum sectors for the chosen translation step."""
    m_trans = basis.n_sites // step
    table = []
    for k in range(m_trans):
        sec = build_sector(basis, k, inversion=None, step=step)
        table.append(sec.summary())
    return table
