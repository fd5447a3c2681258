"""Derivative-free optimization of deformation couplings: golden-section
line search, a deterministic Nelder-Mead simplex, the four cost functions,
and their cross-evaluation matrix."""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

__all__ = [
    "golden_section",
    "nelder_mead",
    "OptimizationTrace",
    "CostSpec",
    "make_cost",
    "cross_evaluate",
    "COST_KINDS",
]

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

COST_KINDS = ("fid", "fsa", "trvar", "rvals")


def golden_section(f, a: float, b: float, xtol: float = 1e-8,
                   maximize: bool = False) -> tuple[float, float]:
    """Golden-section search for the extremum of a unimodal f on [a, b].

    Returns (x*, f(x*)).
    """
    sign = -1.0 if maximize else 1.0
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = sign * f(c), sign * f(d)
    while b - a > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = sign * f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = sign * f(d)
    x = 0.5 * (a + b)
    return x, f(x)


@dataclass
class OptimizationTrace:
    """Best-so-far iterates of a simplex run plus termination metadata."""

    iterates: list[tuple[np.ndarray, float]]
    best_x: np.ndarray
    best_cost: float
    converged: bool
    n_iterations: int
    n_evaluations: int
    simplex_spread: float
    cost_spread: float
    wall_time: float
    seed: int | None = None
    abort_reason: str | None = None

    def to_json(self) -> str:
        return json.dumps({
            "iterates": [{"x": x.tolist(), "cost": c} for x, c in self.iterates],
            "best_x": self.best_x.tolist(),
            "best_cost": self.best_cost,
            "converged": self.converged,
            "n_iterations": self.n_iterations,
            "n_evaluations": self.n_evaluations,
            "simplex_spread": self.simplex_spread,
            "cost_spread": self.cost_spread,
            "wall_time": self.wall_time,
            "seed": self.seed,
            "abort_reason": self.abort_reason,
        })


def nelder_mead(cost, init: np.ndarray, xtol: float = 1e-6, ftol: float = 1e-10,
                max_iterations: int = 2000, initial_step: float = 0.05,
                seed: int | None = None) -> OptimizationTrace:
    """Standard reflection/expansion/contraction/shrink simplex search.

    Fully deterministic for fixed inputs (the seed is recorded in the trace
    for provenance only).  Terminates when the simplex diameter drops below
    xtol, the cost spread below ftol, or after max_iterations.  A non-finite
    cost aborts with the trace collected so far.
    """
    t0 = time.perf_counter()
    x0 = np.asarray(init, dtype=float)
    ndim = len(x0)
    n_evals = 0

    def ev(x):
        nonlocal n_evals
        n_evals += 1
        return float(cost(x))

    simplex = [x0.copy()]
    for i in range(ndim):
        x = x0.copy()
        step = initial_step * x[i] if x[i] != 0.0 else initial_step
        x[i] += step
        simplex.append(x)
    simplex = np.array(simplex)
    fvals = np.array([ev(x) for x in simplex])

    iterates: list[tuple[np.ndarray, float]] = []
    abort = None

    def record_best():
        i = int(np.argmin(fvals))
        if not iterates or fvals[i] < iterates[-1][1]:
            iterates.append((simplex[i].copy(), float(fvals[i])))

    record_best()
    if not np.all(np.isfinite(fvals)):
        abort = "non-finite cost in initial simplex"

    it = 0
    while abort is None and it < max_iterations:
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        diameter = float(np.max(np.linalg.norm(simplex[1:] - simplex[0], axis=1)))
        spread = float(fvals[-1] - fvals[0])
        if diameter < xtol or spread < ftol:
            break
        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + (centroid - simplex[-1])
        fr = ev(xr)
        if not math.isfinite(fr):
            abort = "non-finite cost at reflection point"
            break
        if fr < fvals[0]:
            xe = centroid + 2.0 * (centroid - simplex[-1])
            fe = ev(xe)
            if math.isfinite(fe) and fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
        elif fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
        else:
            if fr < fvals[-1]:
                xc = centroid + 0.5 * (xr - centroid)
            else:
                xc = centroid + 0.5 * (simplex[-1] - centroid)
            fc = ev(xc)
            if math.isfinite(fc) and fc < min(fr, fvals[-1]):
                simplex[-1], fvals[-1] = xc, fc
            else:
                # shrink toward the best vertex
                for i in range(1, ndim + 1):
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                    fvals[i] = ev(simplex[i])
                if not np.all(np.isfinite(fvals)):
                    abort = "non-finite cost during shrink"
                    break
        record_best()
        it += 1

    order = np.argsort(fvals, kind="stable")
    simplex, fvals = simplex[order], fvals[order]
    diameter = float(np.max(np.linalg.norm(simplex[1:] - simplex[0], axis=1)))
    spread = float(fvals[-1] - fvals[0]) if np.all(np.isfinite(fvals)) else math.inf
    return OptimizationTrace(
        iterates=iterates,
        best_x=simplex[0].copy(),
        best_cost=float(fvals[0]),
        converged=abort is None and (diameter < xtol or spread < ftol),
        n_iterations=it,
        n_evaluations=n_evals,
        simplex_spread=diameter,
        cost_spread=spread,
        wall_time=time.perf_counter() - t0,
        seed=seed,
        abort_reason=abort,
    )


@dataclass(frozen=True)
class CostSpec:
    """Which figure of merit to evaluate, and at what scale/tolerances.

    kind: 'fid' (fidelity deficit at the first revival), 'fsa' (first
    nontrivial forward-scattering error), 'trvar' (subspace variance),
    'rvals' (anharmonicity of the Ritz values).
    """

    kind: str
    n_sites: int
    range_: int
    krylov_tol: float = 1e-10
    peak_xtol: float = 1e-6
    window_frac: float = 0.2

    def __post_init__(self):
        if self.kind not in COST_KINDS:
            raise ValueError(f"kind must be one of {COST_KINDS}, got {self.kind!r}")


def make_cost(spec: CostSpec):
    """Build the cost function over coupling vectors (h_2, ..., h_R).

    Every call rebuilds the Hamiltonian and its raising/lowering split for
    the candidate couplings; module errors surface as +inf with a logged
    reason so the simplex can route around them.
    """
    from . import dynamics, fsa
    from .basis import enumerate_basis, neel_state
    from .operators import (CouplingSet, build_hamiltonian, solve_constraint,
                            split_pm)

    basis = enumerate_basis(spec.n_sites, "periodic")
    tau = solve_constraint().tau

    def cost(hvec) -> float:
        try:
            couplings = CouplingSet(values=tuple(np.asarray(hvec, dtype=float)),
                                    provenance="manual")
            if spec.kind == "fid":
                h = build_hamiltonian(basis, couplings)
                psi0 = np.zeros(basis.dim, dtype=np.complex128)
                psi0[neel_state(basis)[0]] = 1.0
                _, g_star = dynamics.revival_peak(
                    h, psi0, tau, spec.window_frac * tau,
                    xtol=spec.peak_xtol, tol=spec.krylov_tol,
                )
                return 1.0 - g_star
            hp, hm = split_pm(basis, couplings)
            sub = fsa.fsa_basis(hp, hm, basis)
            if spec.kind == "fsa":
                return fsa.fsa_error3(sub)
            h = build_hamiltonian(basis, couplings)
            if spec.kind == "trvar":
                return fsa.subspace_variance(sub, h)
            _, ritz, _ = fsa.project_tridiagonal(sub, h)
            return fsa.ritz_anharmonicity(ritz)
        except Exception as exc:  # surfaces as +inf so the simplex recovers
            log.warning("cost %s failed at %s: %s", spec.kind, hvec, exc)
            return math.inf

    return cost


def cross_evaluate(optima: dict[str, np.ndarray],
                   specs: dict[str, CostSpec]) -> dict[str, dict[str, float]]:
    """Evaluate each optimizer's couplings against every figure of merit.

    Returns matrix[row_kind][col_kind]: couplings optimal for row_kind,
    scored by col_kind.
    """
    costs = {kind: make_cost(spec) for kind, spec in specs.items()}
    return {
        row: {col: float(costs[col](x)) for col in specs}
        for row, x in optima.items()
    }
