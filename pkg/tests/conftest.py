"""Shared test helpers: analytic optimal settings, random unitaries,
random compatible 4-cycles, and small brute-force oracles."""

from __future__ import annotations

import math

import numpy as np

from qwitness.ineq import cycle_from_settings
from qwitness.qobs import BlochVector, SettingsTable, random_settings

SQRT2 = math.sqrt(2.0)


def planar_settings(n: int, first_phase: float = math.pi / 4) -> SettingsTable:
    """Equatorial settings that maximize the Svetlichny operator.

    Setting 0 of party 0 sits at ``first_phase`` and all other setting-0
    directions at phase 0; every setting 1 lags its setting 0 by pi/2.  With
    the phases of the setting-0 directions summing to pi/4 the operator
    reaches its quantum maximum 2^(N-1) * sqrt(2), with the GHZ state as the
    top eigenvector.
    """
    parties = []
    for p in range(n):
        p0 = first_phase if p == 0 else 0.0
        p1 = p0 - math.pi / 2.0
        parties.append(
            (
                BlochVector(math.cos(p0), math.sin(p0), 0.0),
                BlochVector(math.cos(p1), math.sin(p1), 0.0),
            )
        )
    return SettingsTable(tuple(parties))


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-ish random unitary from the QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / SQRT2
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases


def random_compatible_cycle(rng: np.random.Generator):
    """Random involutory 4-cycle with all neighbour commutators zero.

    Starts from the alternating-factor construction (neighbours act on
    disjoint qubits) and conjugates by a random unitary, which preserves
    compatibility and involutions while scrambling the matrices.
    """
    a, b, c, d = cycle_from_settings(random_settings(2, rng))
    u = random_unitary(4, rng)
    ud = u.conj().T
    return tuple(u @ m @ ud for m in (a, b, c, d))


def kron_loops(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Four-nested-loop Kronecker product, the definitional oracle."""
    na, nb = a.shape[0], b.shape[0]
    out = np.empty((na * nb, na * nb), dtype=np.complex128)
    for i in range(na):
        for j in range(na):
            for k in range(nb):
                for l in range(nb):
                    out[i * nb + k, j * nb + l] = a[i, j] * b[k, l]
    return out


def eig2_closed_form(h: np.ndarray) -> tuple[float, float]:
    """Eigenvalues of a 2x2 Hermitian matrix from trace and determinant."""
    mean = (h[0, 0].real + h[1, 1].real) / 2.0
    gap = math.sqrt(((h[0, 0].real - h[1, 1].real) / 2.0) ** 2 + abs(h[0, 1]) ** 2)
    return mean - gap, mean + gap


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (m + m.conj().T) / 2.0
