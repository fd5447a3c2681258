"""Dense sector diagonalization and eigenstate-resolved diagnostics:
overlap fan, special band, level statistics, eigenstate entropies, support
counting, and the small-N open-boundary low-lying proxy."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .basis import ConstrainedBasis, SymmetrySector, neel_state
from .dynamics import entanglement_entropy

__all__ = [
    "SpectrumRecord",
    "LevelStats",
    "SectorTooLargeError",
    "InsufficientDataError",
    "diagonalize_sector",
    "special_band",
    "r_statistic",
    "eigenstate_entropies",
    "overlap_support",
    "low_lying_proxy",
]

DENSE_CAP = 20_000


class SectorTooLargeError(RuntimeError):
    """Sector dimension exceeds the dense-solver cap; reduce N."""


class InsufficientDataError(RuntimeError):
    """Too few levels survive edge discarding for meaningful statistics."""


@dataclass
class SpectrumRecord:
    """Full eigen-decomposition of one symmetry sector."""

    sector: SymmetrySector
    energies: np.ndarray
    overlaps: np.ndarray                     # |<ref|E_i>|^2
    vectors: np.ndarray = field(repr=False)  # columns, sector representation
    entropies: np.ndarray | None = None
    band: np.ndarray | None = None

    def to_csv(self, path: str):
        with open(path, "w") as fh:
            fh.write("E[flip],overlap,S[nats]\n")
            ent = self.entropies if self.entropies is not None else np.full_like(self.energies, np.nan)
            for e, o, s in zip(self.energies, self.overlaps, ent):
                fh.write(f"{e!r},{o!r},{s!r}\n")


def _reference_state(sector: SymmetrySector) -> np.ndarray:
    """Neel reference for overlap fans: the bare Neel state for two-site
    translation sectors, the symmetric Neel combination for one-site ones."""
    basis = sector.basis
    i0, i1 = neel_state(basis)
    psi = np.zeros(basis.dim)
    if sector.step == 2:
        psi[i0] = 1.0
    else:
        psi[i0] = psi[i1] = 1.0 / np.sqrt(2.0)
    return psi


def diagonalize_sector(h: sp.spmatrix, sector: SymmetrySector,
                       reference: np.ndarray | None = None,
                       dense_cap: int = DENSE_CAP) -> SpectrumRecord:
    """Dense eigen-decomposition of H restricted to the sector, with
    overlaps against the sector projection of the Neel reference."""
    if sector.dim > dense_cap:
        raise SectorTooLargeError(
            f"sector dim {sector.dim} exceeds dense cap {dense_cap}"
        )
    hs = sector.project_operator(h)
    energies, vectors = np.linalg.eigh(hs)
    if reference is None:
        reference = _reference_state(sector)
    ref_s = sector.project_state(reference.astype(vectors.dtype))
    overlaps = np.abs(vectors.conj().T @ ref_s) ** 2
    return SpectrumRecord(sector=sector, energies=energies,
                          overlaps=overlaps, vectors=vectors)


def special_band(record: SpectrumRecord, n_sites: int, delta_e: float,
                 window_frac: float = 0.5, degeneracy_tol: float = 1e-8
                 ) -> tuple[np.ndarray, np.ndarray]:
    """Pick the N+1 maximal-overlap band members in harmonic-ladder windows.

    The ladder is anchored at E = 0 (the Neel energy); each window has
    half-width window_frac * delta_e.  Exactly degenerate levels (within
    degeneracy_tol) are treated as one member whose weight is the summed
    overlap: the eigenbasis inside a degenerate block is arbitrary, and one
    rotated member absorbs the whole reference projection.  This matters at
    E = 0, where the mid-band state coexists with the macroscopically
    degenerate zero-energy manifold.

    Returns (indices, member_weights); an empty window leaves index -1 and
    weight 0.
    """
    centers = delta_e * (np.arange(n_sites + 1) - n_sites / 2.0)
    idx = np.full(n_sites + 1, -1, dtype=int)
    weights = np.zeros(n_sites + 1)
    for j, c in enumerate(centers):
        sel = np.nonzero(np.abs(record.energies - c) <= window_frac * delta_e)[0]
        if len(sel) == 0:
            continue
        groups: dict[int, list[int]] = {}
        for i in sel:
            groups.setdefault(round(record.energies[i] / degeneracy_tol), []).append(i)
        best = max(groups.values(), key=lambda g: record.overlaps[g].sum())
        weights[j] = record.overlaps[best].sum()
        idx[j] = best[int(np.argmax(record.overlaps[best]))]
    record.band = idx
    return idx, weights


@dataclass
class LevelStats:
    """Consecutive-gap ratio statistics and unfolded spacings."""

    r_values: np.ndarray
    r_mean: float
    unfolded_spacings: np.ndarray
    histogram: tuple[np.ndarray, np.ndarray]  # (counts, bin_edges), density
    discard_fraction: float
    unfold_degree: int

    def to_json(self) -> str:
        counts, edges = self.histogram
        return json.dumps({
            "r_mean": self.r_mean,
            "discard_fraction": self.discard_fraction,
            "unfold_degree": self.unfold_degree,
            "n_levels": len(self.r_values) + 2,
            "histogram_counts": counts.tolist(),
            "histogram_edges": edges.tolist(),
        })

    def histogram_csv(self, path: str):
        counts, edges = self.histogram
        with open(path, "w") as fh:
            fh.write("s_low,s_high,density\n")
            for lo, hi, c in zip(edges[:-1], edges[1:], counts):
                fh.write(f"{lo!r},{hi!r},{c!r}\n")


def r_statistic(eigenvalues: np.ndarray, discard_fraction: float = 0.1,
                unfold_degree: int = 3, min_levels: int = 100,
                bins: int = 40) -> LevelStats:
    """Mean min/max gap ratio plus polynomially unfolded spacings.

    Spectral edges are discarded symmetrically before both statistics; the
    unfolding fits a degree-``unfold_degree`` polynomial to the cumulative
    level count.
    """
    e = np.sort(np.asarray(eigenvalues, dtype=float))
    cut = int(len(e) * discard_fraction)
    bulk = e[cut: len(e) - cut] if cut else e
    if len(bulk) < min_levels:
        raise InsufficientDataError(
            f"only {len(bulk)} levels after discarding edges (need {min_levels})"
        )
    gaps = np.diff(bulk)
    lo = np.minimum(gaps[:-1], gaps[1:])
    hi = np.maximum(gaps[:-1], gaps[1:])
    r = np.divide(lo, hi, out=np.zeros_like(lo), where=hi > 0)

    staircase = np.arange(len(bulk), dtype=float)
    coeffs = np.polyfit(bulk, staircase, unfold_degree)
    unfolded = np.polyval(coeffs, bulk)
    s = np.diff(unfolded)
    s = s[s > 0]
    counts, edges = np.histogram(s, bins=bins, range=(0.0, 4.0), density=True)
    return LevelStats(r_values=r, r_mean=float(r.mean()),
                      unfolded_spacings=s, histogram=(counts, edges),
                      discard_fraction=discard_fraction,
                      unfold_degree=unfold_degree)


def eigenstate_entropies(record: SpectrumRecord,
                         basis: ConstrainedBasis) -> np.ndarray:
    """Half-chain entropy of every sector eigenstate, lifted to the full
    basis.  Also stored on the record."""
    out = np.zeros(len(record.energies))
    for i in range(record.vectors.shape[1]):
        psi = record.sector.lift_state(record.vectors[:, i])
        out[i], _ = entanglement_entropy(psi, basis)
    record.entropies = out
    return out


def central_special_states(record: SpectrumRecord, n_sites: int,
                           delta_e: float) -> np.ndarray:
    """Indices of the two band members nearest E = 0 (log-scaling study)."""
    idx, _ = special_band(record, n_sites, delta_e)
    valid = idx[idx >= 0]
    order = np.argsort(np.abs(record.energies[valid]))
    return valid[order[:2]]


@dataclass
class SupportReport:
    count: int
    cumulative_weight: float
    max_overlap: float
    max_overlap_times_n: float | None = None


def overlap_support(overlaps: np.ndarray, threshold: float,
                  n_sites: int | None = None) -> SupportReport:
    """How many eigenstates carry weight above threshold, their total
    weight, and the largest single overlap (optionally scaled by N)."""
    o = np.asarray(overlaps, dtype=float)
    above = o > threshold
    mx = float(o.max())
    return SupportReport(
        count=int(above.sum()),
        cumulative_weight=float(o[above].sum()),
        max_overlap=mx,
        max_overlap_times_n=mx * n_sites if n_sites is not None else None,
    )


@dataclass
class LowLyingReport:
    e0: float
    e1: float
    gap: float
    schmidt: np.ndarray

    @property
    def tail_weight(self) -> float:
        """Total Schmidt weight beyond the two leading values."""
        return float(np.sum(self.schmidt[2:] ** 2))


def low_lying_proxy(h_obc: sp.spmatrix, basis: ConstrainedBasis) -> LowLyingReport:
    """Two lowest eigenpairs of the regularized open-boundary Hamiltonian
    and the ground-state Schmidt values at the middle cut."""
    if basis.boundary != "open":
        raise ValueError("low-lying proxy expects an open-boundary basis")
    try:
        vals, vecs = spla.eigsh(h_obc, k=2, which="SA")
    except spla.ArpackNoConvergence as exc:
        raise ArithmeticError("extremal eigensolver did not converge") from exc
    order = np.argsort(vals)
    vals, vecs = vals[order], vecs[:, order]
    _, p = entanglement_entropy(vecs[:, 0].astype(np.complex128), basis)
    return LowLyingReport(e0=float(vals[0]), e1=float(vals[1]),
                          gap=float(vals[1] - vals[0]), schmidt=np.sqrt(p))
