"""Sparse Hamiltonians for the constrained chain and its range-R deformation.

All operators are real-symmetric in the configuration basis.  A spin at site
i can flip only when both neighbors are down; the deformation multiplies each
flip amplitude by 1 - sum_d h_d (z_{i-d} + z_{i+d}) with z = +/-1 read off
the (identical) spectator pattern of bra and ket.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq

from .basis import ConstrainedBasis

__all__ = [
    "CouplingSet",
    "AlgebraConstants",
    "GOLDEN_RATIO",
    "ansatz_couplings",
    "solve_constraint",
    "optimal_h2_analytic",
    "residual_second_step_error",
    "build_pxp",
    "build_deformation",
    "build_hamiltonian",
    "split_pm",
    "commutator_hz",
    "export_coo",
]

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class CouplingSet:
    """Deformation strengths h_d for d = 2..range, with provenance."""

    values: tuple[float, ...]
    provenance: str = "manual"

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("couplings must be finite")

    @property
    def range(self) -> int:
        return len(self.values) + 1

    def h(self, d: int) -> float:
        if d < 2 or d > self.range:
            return 0.0
        return self.values[d - 2]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    @staticmethod
    def zero(range_: int = 2) -> "CouplingSet":
        return CouplingSet(values=(0.0,) * (range_ - 1), provenance="manual")

    def to_json(self) -> str:
        return json.dumps(
            {"range": self.range, "values": list(self.values), "provenance": self.provenance}
        )

    @staticmethod
    def from_json(text: str) -> "CouplingSet":
        d = json.loads(text)
        return CouplingSet(values=tuple(d["values"]), provenance=d.get("provenance", "manual"))


def _ansatz_weight(d: int) -> float:
    phi = GOLDEN_RATIO
    return (phi ** (d - 1) - phi ** (-(d - 1))) ** -2


def ansatz_couplings(h0: float, range_: int) -> CouplingSet:
    """Golden-ratio family h_d = h0 (phi^{d-1} - phi^{-(d-1)})^{-2}."""
    if h0 <= 0:
        raise ValueError("h0 must be positive")
    if range_ < 2:
        raise ValueError("range must be >= 2")
    return CouplingSet(
        values=tuple(h0 * _ansatz_weight(d) for d in range(2, range_ + 1)),
        provenance="ansatz",
    )


@dataclass(frozen=True)
class AlgebraConstants:
    """Emergent-algebra constants of the untruncated ansatz family."""

    h0: float
    h: float
    delta: float
    tau: float

    @property
    def delta_e(self) -> float:
        return 2.0 * math.pi / self.tau


def _ansatz_sums(h0: float, cutoff: float = 1e-30) -> tuple[float, float, float]:
    """(h, S1, S2): alternating sum, even-d sum, even-d square sum."""
    h = s1 = s2 = 0.0
    d = 2
    while True:
        hd = h0 * _ansatz_weight(d)
        if hd < cutoff and d > 4:
            break
        h += 2.0 * ((-1) ** d) * hd
        if d % 2 == 0:
            s1 += hd
            s2 += hd * hd
        d += 1
    return h, s1, s2


def solve_constraint(bracket: tuple[float, float] = (0.01, 0.10)) -> AlgebraConstants:
    """Fix the ansatz amplitude by requiring harmonic spacing of the first
    two ladder eigenvalues: (1-h)(1-h-16*S1) = 16*S2.

    Returns the amplitude together with h, the harmonic gap (1-h)^2 and the
    revival period 2*pi/sqrt(2*gap).
    """

    def f(h0: float) -> float:
        h, s1, s2 = _ansatz_sums(h0)
        return (1.0 - h) * (1.0 - h - 16.0 * s1) - 16.0 * s2

    try:
        h0 = brentq(f, *bracket, xtol=1e-14, rtol=8.9e-16)
    except ValueError as exc:
        raise ArithmeticError(f"constraint root not bracketed in {bracket}") from exc
    h, _, _ = _ansatz_sums(h0)
    delta = (1.0 - h) ** 2
    tau = 2.0 * math.pi / math.sqrt(2.0 * delta)
    return AlgebraConstants(h0=h0, h=h, delta=delta, tau=tau)


def optimal_h2_analytic() -> float:
    """Range-4 strength cancelling the leading second-step error:
    the smaller root of 1 - 20 x (1 - x) = 0, i.e. 1/2 - 1/sqrt(5)."""
    return 0.5 - 1.0 / math.sqrt(5.0)


def residual_second_step_error(h2: float | None = None) -> float:
    """Leftover distance-4 coefficient error -32 h2^2 (1 - h2)."""
    if h2 is None:
        h2 = optimal_h2_analytic()
    return -32.0 * h2 ** 2 * (1.0 - h2)


# ---------------------------------------------------------------------------
# sparse builders


def _flip_table(basis: ConstrainedBasis):
    """Yield (site, col_indices, row_indices, z_factor_context) per site.

    z_factor_context is the integer states restricted to the flippable subset;
    callers evaluate whatever diagonal dressing they need from it.
    """
    n = basis.n_sites
    states = basis.states
    periodic = basis.boundary == "periodic"
    for i in range(n):
        if periodic:
            left, right = (i - 1) % n, (i + 1) % n
            free = ((states >> left) & 1 == 0) & ((states >> right) & 1 == 0)
        else:
            free = np.ones(basis.dim, dtype=bool)
            if i > 0:
                free &= (states >> (i - 1)) & 1 == 0
            if i < n - 1:
                free &= (states >> (i + 1)) & 1 == 0
        cols = np.nonzero(free)[0]
        partners = states[cols] ^ (np.int64(1) << i)
        rows = basis.index_of(partners)
        yield i, cols, rows, states[cols]


def _dressing(basis: ConstrainedBasis, site: int, configs: np.ndarray,
              couplings: CouplingSet) -> np.ndarray:
    """1 - sum_d h_d (z_{i-d} + z_{i+d}) on the spectator pattern.

    Open boundary: sigma^z factors falling outside the chain are dropped.
    """
    n = basis.n_sites
    w = np.ones(len(configs), dtype=float)
    periodic = basis.boundary == "periodic"
    for d in range(2, couplings.range + 1):
        hd = couplings.h(d)
        if hd == 0.0:
            continue
        for j in (site - d, site + d):
            if periodic:
                jj = j % n
            elif 0 <= j < n:
                jj = j
            else:
                continue
            z = 2.0 * ((configs >> jj) & 1) - 1.0
            w -= hd * z
    return w


def build_pxp(basis: ConstrainedBasis) -> sp.csr_matrix:
    """Unperturbed constrained-flip Hamiltonian (all matrix elements 1)."""
    rows, cols = [], []
    for _, c, r, _ in _flip_table(basis):
        rows.append(r)
        cols.append(c)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    data = np.ones(len(rows), dtype=float)
    return sp.csr_matrix((data, (rows, cols)), shape=(basis.dim, basis.dim))


def build_deformation(basis: ConstrainedBasis, couplings: CouplingSet) -> sp.csr_matrix:
    """Range-R deformation alone (the dressing minus the bare flip)."""
    _check_range(basis, couplings)
    rows, cols, vals = [], [], []
    for i, c, r, cfg in _flip_table(basis):
        rows.append(r)
        cols.append(c)
        vals.append(_dressing(basis, i, cfg, couplings) - 1.0)
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(basis.dim, basis.dim),
    )


def build_hamiltonian(basis: ConstrainedBasis, couplings: CouplingSet | None = None) -> sp.csr_matrix:
    """Deformed Hamiltonian: dressed flips in a single pass."""
    if couplings is None:
        return build_pxp(basis)
    _check_range(basis, couplings)
    rows, cols, vals = [], [], []
    for i, c, r, cfg in _flip_table(basis):
        rows.append(r)
        cols.append(c)
        vals.append(_dressing(basis, i, cfg, couplings))
    return sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(basis.dim, basis.dim),
    )


def _check_range(basis: ConstrainedBasis, couplings: CouplingSet):
    if basis.boundary == "periodic" and couplings.range > basis.n_sites // 2:
        raise ValueError(
            f"range {couplings.range} exceeds N/2 = {basis.n_sites // 2}: "
            "a site would receive the same sigma^z factor twice"
        )


def split_pm(basis: ConstrainedBasis, couplings: CouplingSet | None = None
             ) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Raising/lowering split: H+ moves one step away from the Neel state.

    H+ applies the dressed lowering operator on 1-based odd sites (up in the
    Neel state) and the dressed raising operator on even sites; H- is its
    transpose and H+ + H- reproduces the deformed Hamiltonian entrywise.
    """
    if basis.boundary != "periodic":
        raise ValueError("the raising/lowering split is defined for periodic chains")
    if couplings is None:
        couplings = CouplingSet.zero()
    _check_range(basis, couplings)
    rows, cols, vals = [], [], []
    for i, c, r, cfg in _flip_table(basis):
        bit_up = ((cfg >> i) & 1) == 1
        # 0-based even index = 1-based odd site: raising means flipping it down
        forward = bit_up if i % 2 == 0 else ~bit_up
        w = _dressing(basis, i, cfg, couplings)
        rows.append(r[forward])
        cols.append(c[forward])
        vals.append(w[forward])
    hplus = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(basis.dim, basis.dim),
    )
    return hplus, hplus.T.tocsr()


def commutator_hz(hplus: sp.spmatrix, hminus: sp.spmatrix) -> sp.csr_matrix:
    """H^z = [H+, H-], the emergent ladder-weight operator."""
    hz = (hplus @ hminus - hminus @ hplus).tocsr()
    hz.eliminate_zeros()
    return hz


def export_coo(op: sp.spmatrix, path: str):
    """Plain (row, col, value) text dump for external cross-validation."""
    coo = op.tocoo()
    with open(path, "w") as fh:
        fh.write("# row col value\n")
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{r} {c} {v!r}\n")
