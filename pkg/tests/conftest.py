"""Shared fixtures and independent reference implementations.

The reference builders here are deliberately naive (full 2^N loops, dense
matrices) so they cannot share bugs with the library's vectorized paths.
"""

import itertools

import numpy as np
import pytest

from pxpscars.basis import enumerate_basis


def brute_force_states(n, boundary="periodic"):
    """All no-adjacent-up configurations by explicit enumeration."""
    out = []
    for bits in itertools.product([0, 1], repeat=n):
        ok = all(not (bits[i] and bits[(i + 1) % n]) for i in range(n)) \
            if boundary == "periodic" else \
            all(not (bits[i] and bits[i + 1]) for i in range(n - 1))
        if ok:
            out.append(sum(b << i for i, b in enumerate(bits)))
    return sorted(out)


def brute_force_hamiltonian(states, n, couplings=None, boundary="periodic"):
    """Dense deformed Hamiltonian by per-element loops."""
    index = {s: i for i, s in enumerate(states)}
    dim = len(states)
    h = np.zeros((dim, dim))
    periodic = boundary == "periodic"
    for s in states:
        for i in range(n):
            left, right = (i - 1) % n, (i + 1) % n
            if periodic:
                if (s >> left) & 1 or (s >> right) & 1:
                    continue
            else:
                if i > 0 and (s >> (i - 1)) & 1:
                    continue
                if i < n - 1 and (s >> (i + 1)) & 1:
                    continue
            target = s ^ (1 << i)
            amp = 1.0
            if couplings is not None:
                for d in range(2, couplings.range + 1):
                    for j in (i - d, i + d):
                        if periodic:
                            j %= n
                        elif not 0 <= j < n:
                            continue
                        z = 1.0 if (s >> j) & 1 else -1.0
                        amp -= couplings.h(d) * z
            h[index[target], index[s]] += amp
    return h


@pytest.fixture(scope="session")
def basis8():
    return enumerate_basis(8, "periodic")


@pytest.fixture(scope="session")
def basis12():
    return enumerate_basis(12, "periodic")


@pytest.fixture(scope="session")
def basis16():
    return enumerate_basis(16, "periodic")
