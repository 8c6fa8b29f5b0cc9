"""Qubit observables and reference states.

Dichotomic observables are realized as Bloch-parametrized qubit operators
n.sigma (Hermitian, squaring to the identity).  Party 0 is always the
leftmost tensor factor; |0> is the +1 eigenvector of sigma_z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .opalg import frob_norm, hermiticity_defect, kron

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
IDENTITY_2 = np.eye(2, dtype=np.complex128)

UNIT_NORM_TOL = 1e-12
INVOLUTION_TOL = 1e-11


@dataclass(frozen=True)
class BlochVector:
    """Unit direction on the Bloch sphere."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        norm2 = self.x * self.x + self.y * self.y + self.z * self.z
        if abs(norm2 - 1.0) > UNIT_NORM_TOL:
            raise ValueError(f"Bloch vector must be unit length, got |n|^2 = {norm2!r}")

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> "BlochVector":
        s = math.sin(theta)
        return cls(s * math.cos(phi), s * math.sin(phi), math.cos(theta))

    def as_list(self) -> list[float]:
        return [self.x, self.y, self.z]


def bloch_observable(n: BlochVector) -> np.ndarray:
    """n.sigma: the +/-1-valued qubit observable along direction n."""
    return n.x * PAULI_X + n.y * PAULI_Y + n.z * PAULI_Z


@dataclass(frozen=True)
class SettingsTable:
    """Per party, two measurement directions indexed by a setting bit."""

    parties: tuple[tuple[BlochVector, BlochVector], ...]

    def __post_init__(self):
        parties = tuple(tuple(pair) for pair in self.parties)
        if len(parties) < 2:
            raise ValueError("a settings table needs at least two parties")
        for pair in parties:
            if len(pair) != 2 or not all(isinstance(v, BlochVector) for v in pair):
                raise ValueError("each party needs exactly two Bloch vectors")
        object.__setattr__(self, "parties", parties)

    @property
    def n_parties(self) -> int:
        return len(self.parties)

    def observable(self, party: int, setting: int) -> np.ndarray:
        return bloch_observable(self.parties[party][setting])

    def observable_pairs(self) -> list[tuple[np.ndarray, np.ndarray]]:
        """All 2x2 observables, one (setting-0, setting-1) pair per party."""
        return [
            (bloch_observable(p0), bloch_observable(p1)) for p0, p1 in self.parties
        ]

    def to_json_dict(self) -> dict:
        return {"parties": [[v0.as_list(), v1.as_list()] for v0, v1 in self.parties]}

    @classmethod
    def from_json_dict(cls, data: dict) -> "SettingsTable":
        parties = tuple(
            (BlochVector(*pair[0]), BlochVector(*pair[1])) for pair in data["parties"]
        )
        return cls(parties)


def random_settings(n_parties: int, rng: np.random.Generator) -> SettingsTable:
    """Settings table with uniform-sphere directions for every slot."""
    parties = []
    for _ in range(n_parties):
        pair = []
        for _ in range(2):
            z = rng.uniform(-1.0, 1.0)
            phi = rng.uniform(0.0, 2.0 * math.pi)
            r = math.sqrt(max(0.0, 1.0 - z * z))
            pair.append(BlochVector(r * math.cos(phi), r * math.sin(phi), z))
        parties.append(tuple(pair))
    return SettingsTable(tuple(parties))


@dataclass(frozen=True)
class Grouping:
    """Bipartition of parties 0..N-1 into two nonempty groups."""

    group_a: tuple[int, ...]
    group_b: tuple[int, ...]

    def __post_init__(self):
        a, b = set(self.group_a), set(self.group_b)
        if not a or not b:
            raise ValueError("both groups must be nonempty")
        if a & b:
            raise ValueError("groups must be disjoint")
        n = len(a) + len(b)
        if a | b != set(range(n)):
            raise ValueError("groups must cover parties 0..N-1 exactly")
        object.__setattr__(self, "group_a", tuple(sorted(a)))
        object.__setattr__(self, "group_b", tuple(sorted(b)))

    @property
    def n_parties(self) -> int:
        return len(self.group_a) + len(self.group_b)


def embed(obs: np.ndarray, party: int, n_parties: int) -> np.ndarray:
    """I x ... x obs x ... x I with obs in the given party slot."""
    if obs.shape != (2, 2):
        raise ValueError("embed expects a single-qubit (2x2) observable")
    if not 0 <= party < n_parties:
        raise ValueError(f"party index {party} out of range for {n_parties} parties")
    out = np.array([[1.0 + 0.0j]])
    for slot in range(n_parties):
        out = kron(out, obs if slot == party else IDENTITY_2)
    return out


def group_observable(settings: SettingsTable, group, choices: dict) -> np.ndarray:
    """Joint observable of a party group: the chosen observable on each member
    slot, identity elsewhere.  Its +/-1 outcome is the parity of the members'
    individual outcomes."""
    members = set(group)
    if set(choices) != members:
        raise ValueError("setting choices must be given exactly for the group members")
    out = np.array([[1.0 + 0.0j]])
    for party in range(settings.n_parties):
        if party in members:
            out = kron(out, settings.observable(party, choices[party]))
        else:
            out = kron(out, IDENTITY_2)
    return out


def parity_projector(g: np.ndarray, s: int) -> np.ndarray:
    """(I + (-1)^s g) / 2 for an involutory observable g.

    The two projectors are idempotent, mutually orthogonal, sum to I, and
    their difference recovers g.
    """
    if s not in (0, 1):
        raise ValueError("parity bit must be 0 or 1")
    dim = g.shape[0]
    eye = np.eye(dim)
    defect = frob_norm(g @ g - eye)
    if defect > INVOLUTION_TOL * dim:
        raise ValueError(f"observable is not involutory: ||g^2 - I|| = {defect:.3e}")
    sign = 1.0 if s == 0 else -1.0
    return (eye + sign * g) / 2.0


def ghz_state(n: int) -> np.ndarray:
    """Projector onto (|0...0> + |1...1>)/sqrt(2)."""
    if n < 2:
        raise ValueError("ghz_state needs at least two qubits")
    dim = 2**n
    vec = np.zeros(dim, dtype=np.complex128)
    vec[0] = vec[-1] = 1.0 / math.sqrt(2.0)
    return np.outer(vec, vec.conj())


def maximally_mixed(n: int) -> np.ndarray:
    """I / 2^n."""
    if n < 1:
        raise ValueError("maximally_mixed needs at least one qubit")
    dim = 2**n
    return np.eye(dim, dtype=np.complex128) / dim


def product_state(blochs) -> np.ndarray:
    """Tensor product of pure single-qubit states (I + n.sigma)/2."""
    blochs = list(blochs)
    if not blochs:
        raise ValueError("product_state needs at least one Bloch vector")
    out = np.array([[1.0 + 0.0j]])
    for n in blochs:
        out = kron(out, (IDENTITY_2 + bloch_observable(n)) / 2.0)
    return out


def noisy_mixture(rho: np.ndarray, v: float) -> np.ndarray:
    """v * rho + (1 - v) * I/d."""
    if not 0.0 <= v <= 1.0:
        raise ValueError("visibility must lie in [0, 1]")
    dim = rho.shape[0]
    return v * rho + (1.0 - v) * np.eye(dim) / dim


def expectation(op: np.ndarray, rho: np.ndarray) -> float:
    """Re tr(op . rho) for a Hermitian operator.

    A non-real trace signals a non-Hermitian operator bug and is rejected.
    """
    if op.shape != rho.shape:
        raise ValueError(f"dimension mismatch: {op.shape} vs {rho.shape}")
    dim = op.shape[0]
    if hermiticity_defect(op) > 1e-10 * dim:
        raise ValueError("operator must be Hermitian")
    tr = complex(np.trace(op @ rho))
    if abs(tr.imag) > 1e-10:
        raise ValueError(f"expectation has imaginary part {tr.imag:.3e}")
    return float(tr.real)
