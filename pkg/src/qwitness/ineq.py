"""Inequality operators.

CHSH, the 4-cycle noncontextual expression, the N-qubit Svetlichny
polynomial, and the split of the Svetlichny polynomial into 2^(N-2)
CHSH-type elements on an effective party pair.

Setting words are read with party 0 as the most significant bit, so word
indices follow binary counting: for N = 3 the word 011 means party 0 uses
setting 0 and parties 1, 2 use setting 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .opalg import commutator, frob_norm, is_psd, kron
from .qobs import IDENTITY_2, BlochVector, Grouping, SettingsTable

COMPATIBILITY_TOL = 1e-10
CYCLE_PSD_TOL = 1e-9


class CertificationError(ValueError):
    """A four-term group whose sign vector is not CHSH-type."""


def svetlichny_sign(index: int) -> int:
    """Coefficient of the full-correlation term at a setting word.

    (-1)^floor(k/2) with k the number of set bits; the sign sequence in k is
    +, +, -, -, repeating with period four.
    """
    if index < 0:
        raise ValueError("setting word must be nonnegative")
    k = int(index).bit_count()
    return -1 if (k >> 1) & 1 else 1


@dataclass(frozen=True)
class SignPattern:
    """One +/-1 coefficient per N-bit setting word (binary counting order)."""

    n_parties: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.coeffs)
        if self.n_parties < 2:
            raise ValueError("sign patterns need at least two parties")
        if len(coeffs) != 2**self.n_parties:
            raise ValueError(
                f"expected {2 ** self.n_parties} coefficients, got {len(coeffs)}"
            )
        if any(c not in (-1, 1) for c in coeffs):
            raise ValueError("coefficients must be +1 or -1")
        object.__setattr__(self, "coeffs", coeffs)

    def flipped(self, index: int) -> "SignPattern":
        """Copy with one coefficient negated (fault-injection hook)."""
        coeffs = list(self.coeffs)
        coeffs[index] = -coeffs[index]
        return SignPattern(self.n_parties, tuple(coeffs))

    def to_json_dict(self) -> dict:
        return {"n": self.n_parties, "coeffs": list(self.coeffs)}

    @classmethod
    def from_json_dict(cls, data: dict) -> "SignPattern":
        return cls(int(data["n"]), tuple(data["coeffs"]))


def svetlichny_pattern(n_parties: int) -> SignPattern:
    return SignPattern(
        n_parties, tuple(svetlichny_sign(w) for w in range(2**n_parties))
    )


def chsh_pattern() -> SignPattern:
    """The CHSH sign pattern (+, +, +, -); equals the two-party Svetlichny one."""
    return svetlichny_pattern(2)


@dataclass(frozen=True)
class InequalityOperator:
    matrix: np.ndarray
    classical_bound: float
    label: str


def correlation_operator(settings: SettingsTable, word: int) -> np.ndarray:
    """Tensor product of the chosen observables for one setting word."""
    n = settings.n_parties
    out = np.array([[1.0 + 0.0j]])
    for party in range(n):
        bit = (word >> (n - 1 - party)) & 1
        out = kron(out, settings.observable(party, bit))
    return out


def _pattern_operator(settings: SettingsTable, pattern: SignPattern) -> np.ndarray:
    if pattern.n_parties != settings.n_parties:
        raise ValueError(
            f"pattern is for {pattern.n_parties} parties, settings for {settings.n_parties}"
        )
    dim = 2**settings.n_parties
    out = np.zeros((dim, dim), dtype=np.complex128)
    for word, coeff in enumerate(pattern.coeffs):
        out += coeff * correlation_operator(settings, word)
    return out


def chsh_operator(settings: SettingsTable) -> InequalityOperator:
    """A1B1 + A1B2 + A2B1 - A2B2 with classical bound 2.

    This is the four-term combination forced by the anticommutator identity
    {X, Y} = 4E for X = 2 - (A1B1 - A2B2), Y = 2 - (A1B2 + A2B1).
    """
    if settings.n_parties != 2:
        raise ValueError("chsh_operator needs exactly two parties")
    return InequalityOperator(_pattern_operator(settings, chsh_pattern()), 2.0, "chsh")


def svetlichny_operator(
    settings: SettingsTable, pattern: SignPattern | None = None
) -> InequalityOperator:
    """Sum over all 2^N setting words of sign(word) times the correlation
    operator; classical and hybrid bound 2^(N-1).  Reduces to the CHSH
    operator for N = 2."""
    n = settings.n_parties
    if pattern is None:
        pattern = svetlichny_pattern(n)
    matrix = _pattern_operator(settings, pattern)
    return InequalityOperator(matrix, float(2 ** (n - 1)), f"svetlichny-{n}")


_CYCLE_PAIRS = (("A", "B"), ("B", "C"), ("C", "D"), ("D", "A"))


def noncontextual_cycle(
    a: np.ndarray, b: np.ndarray, c: np.ndarray, d: np.ndarray
) -> tuple[np.ndarray, np.ndarray, InequalityOperator]:
    """Witness operators and 4-cycle expression for compatible observables.

    For pairwise-compatible dichotomic observables around the cycle
    ([A,B] = [B,C] = [C,D] = [D,A] = 0) returns

        X  = 2 - (BC - AD)          (positive semidefinite)
        Y  = 2 - (AB + CD)          (positive semidefinite)
        Ec = 2 - (AB + BC + CD - AD)

    which satisfy XY = 2Ec + [B,D] + [C,A] and {X, Y} = 4Ec exactly.
    Raises naming the first incompatible pair.
    """
    ops = {"A": a, "B": b, "C": c, "D": d}
    for name, m in ops.items():
        if m.shape != (4, 4):
            raise ValueError(f"cycle observable {name} must be 4x4, got {m.shape}")
    for x, y in _CYCLE_PAIRS:
        defect = frob_norm(commutator(ops[x], ops[y]))
        if defect > COMPATIBILITY_TOL:
            raise ValueError(
                f"observables {x} and {y} are not compatible: ||[{x},{y}]|| = {defect:.3e}"
            )
    eye = np.eye(4)
    x_op = 2.0 * eye - (b @ c - a @ d)
    y_op = 2.0 * eye - (a @ b + c @ d)
    for name, m in (("X", x_op), ("Y", y_op)):
        if not is_psd(m, CYCLE_PSD_TOL):
            raise ValueError(
                f"{name} is not positive semidefinite; cycle observables must be involutory"
            )
    ec = 2.0 * eye - (a @ b + b @ c + c @ d - a @ d)
    return x_op, y_op, InequalityOperator(ec, 2.0, "noncontextual-cycle")


def cycle_from_settings(
    settings: SettingsTable,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Canonical compatible 4-cycle (A, B, C, D) from two-party settings.

    B = A1 x I, D = A2 x I, C = I x B1, A = I x B2: neighbours around the
    cycle act on disjoint factors, so all four commutators vanish exactly,
    and Ec reproduces the CHSH combination.
    """
    if settings.n_parties != 2:
        raise ValueError("the canonical cycle needs a two-party settings table")
    a1, a2 = settings.observable(0, 0), settings.observable(0, 1)
    b1, b2 = settings.observable(1, 0), settings.observable(1, 1)
    b = kron(a1, IDENTITY_2)
    d = kron(a2, IDENTITY_2)
    c = kron(IDENTITY_2, b1)
    a = kron(IDENTITY_2, b2)
    return a, b, c, d


def chsh_optimal_settings() -> SettingsTable:
    """Settings reaching the CHSH quantum maximum 2*sqrt(2):
    A = (sigma_z, sigma_x), B = ((z+x)/sqrt2, (z-x)/sqrt2)."""
    r = 1.0 / math.sqrt(2.0)
    return SettingsTable(
        (
            (BlochVector(0.0, 0.0, 1.0), BlochVector(1.0, 0.0, 0.0)),
            (BlochVector(r, 0.0, r), BlochVector(-r, 0.0, r)),
        )
    )


@dataclass(frozen=True)
class ChshElement:
    """Four signed full-correlation terms forming one CHSH-type block.

    The free setting indices (i, j) belong to an effective party pair: the
    merged group of parties 0..N-2 and the singleton {N-1}.  All remaining
    parties keep the fixed setting bits recorded in ``fixed_choices``.
    Certified sign vectors always take the form (a, b, b, -a), i.e. one of
    the two CHSH patterns (+,+,+,-) and (+,-,-,-) up to overall sign.
    """

    index: int
    grouping: Grouping
    fixed_choices: tuple[int, ...]
    signs: tuple[int, int, int, int]
    terms: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]

    @property
    def sign_variant(self) -> tuple[int, int]:
        """(a, b) such that X = 2 - a(Q00 - Q11) and Y = 2 - b(Q01 + Q10)."""
        return self.signs[0], self.signs[1]

    def signed_terms(self) -> tuple[tuple[int, int, int], ...]:
        """The four (sign, i, j) triples in (i, j) binary counting order."""
        return tuple(
            (self.signs[2 * i + j], i, j) for i in (0, 1) for j in (0, 1)
        )

    def operator(self) -> np.ndarray:
        """The element inequality operator: sum of the signed terms."""
        out = np.zeros_like(self.terms[0])
        for sign, term in zip(self.signs, self.terms):
            out += sign * term
        return out


def _certify_chsh_type(index: int, signs: tuple[int, int, int, int]) -> None:
    a, b1, b2, d = signs
    if b1 != b2 or d != -a:
        raise CertificationError(
            f"element {index}: sign vector {signs} is not CHSH-type "
            "(expected the form (a, b, b, -a))"
        )


def decompose_svetlichny(
    settings: SettingsTable, pattern: SignPattern | None = None
) -> list[ChshElement]:
    """Split the Svetlichny polynomial into 2^(N-2) CHSH-type elements.

    Element index runs over the joint setting word of parties 0..N-3; the
    free indices are the settings of parties N-2 and N-1.  Every four-term
    group is certified CHSH-type, which fails loudly if the sign rule is
    ever wrong; summing the element operators reconstructs the Svetlichny
    operator.
    """
    n = settings.n_parties
    if n < 3:
        raise ValueError(
            "decomposition needs at least three parties; use chsh_element for N = 2"
        )
    if pattern is None:
        pattern = svetlichny_pattern(n)
    if pattern.n_parties != n:
        raise ValueError(
            f"pattern is for {pattern.n_parties} parties, settings for {n}"
        )
    grouping = Grouping(tuple(range(n - 1)), (n - 1,))
    elements = []
    for prefix in range(2 ** (n - 2)):
        words = [(prefix << 2) | (i << 1) | j for i in (0, 1) for j in (0, 1)]
        signs = tuple(pattern.coeffs[w] for w in words)
        _certify_chsh_type(prefix, signs)
        terms = tuple(correlation_operator(settings, w) for w in words)
        fixed = tuple((prefix >> (n - 3 - p)) & 1 for p in range(n - 2))
        elements.append(ChshElement(prefix, grouping, fixed, signs, terms))
    return elements


def chsh_element(
    settings: SettingsTable, pattern: SignPattern | None = None
) -> ChshElement:
    """The CHSH combination packaged as a single element (two parties)."""
    if settings.n_parties != 2:
        raise ValueError("chsh_element needs exactly two parties")
    if pattern is None:
        pattern = chsh_pattern()
    if pattern.n_parties != 2:
        raise ValueError("pattern must be two-party")
    signs = tuple(pattern.coeffs)
    _certify_chsh_type(0, signs)
    terms = tuple(correlation_operator(settings, w) for w in range(4))
    return ChshElement(0, Grouping((0,), (1,)), (), signs, terms)
