"""Witness pairs and their anticommutator identities.

Each CHSH-type element with signs (a, b, b, -a) yields positive operators

    X = 2 - a(Q00 - Q11),    Y = 2 - b(Q01 + Q10)

whose anticommutator satisfies {X, Y} = 4(2I - I_elem) exactly: the cross
terms cancel because the grouped observables square to the identity and the
two effective sides commute.  Summing over all elements gives the total
witness 4(2^(N-1) I - I_svet), nonnegative in expectation on classical
states and negative exactly when the Svetlichny inequality is violated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ineq import (
    ChshElement,
    SignPattern,
    chsh_element,
    chsh_operator,
    decompose_svetlichny,
    svetlichny_operator,
)
from .opalg import anticommutator, frob_distance, is_psd
from .qobs import SettingsTable, expectation

# Identity residual slack scales with dimension, like the hermiticity slack.
ELEMENT_RESIDUAL_TOL = 1e-11
PSD_TOL = 1e-9
# 1e-10 of eigensolver slack scaled by the factor 4 linking witness and
# inequality values, plus margin.
NEGATIVITY_MARGIN = 2.5e-10
VALUE_CROSSCHECK_TOL = 1e-9


class WitnessIdentityError(RuntimeError):
    """An anticommutator failed to reproduce its inequality target."""


@dataclass(frozen=True)
class WitnessPair:
    """Positive operators whose anticommutator is the element witness."""

    x: np.ndarray
    y: np.ndarray
    sign_variant: tuple[int, int]


def witness_pair(e: ChshElement) -> WitnessPair:
    """Build (X, Y) for a certified CHSH-type element.

    Both operators are positive semidefinite since each correlation operator
    has spectrum in [-1, 1]; a PSD failure means the sign layout is wrong.
    """
    a, b = e.sign_variant
    q00, q01, q10, q11 = e.terms
    eye = np.eye(q00.shape[0])
    x = 2.0 * eye - a * (q00 - q11)
    y = 2.0 * eye - b * (q01 + q10)
    for name, m in (("X", x), ("Y", y)):
        if not is_psd(m, PSD_TOL):
            raise WitnessIdentityError(
                f"element {e.index}: {name} is not positive semidefinite"
            )
    return WitnessPair(x=x, y=y, sign_variant=(a, b))


def _witness_matrix(e: ChshElement) -> tuple[np.ndarray, float]:
    """Anticommutator of the element's witness pair and its identity residual."""
    pair = witness_pair(e)
    q = anticommutator(pair.x, pair.y)
    dim = q.shape[0]
    target = 4.0 * (2.0 * np.eye(dim) - e.operator())
    return q, frob_distance(q, target)


def element_witness(e: ChshElement) -> np.ndarray:
    """Q_elem = {X, Y}; certified equal to 4(2I - I_elem)."""
    q, residual = _witness_matrix(e)
    dim = q.shape[0]
    if residual > ELEMENT_RESIDUAL_TOL * dim:
        raise WitnessIdentityError(
            f"element {e.index}: ||{{X,Y}} - 4(2I - I)|| = {residual:.3e}; "
            "cross-term cancellation failed"
        )
    return q


def _kahan_sum(mats: list[np.ndarray]) -> np.ndarray:
    """Compensated matrix summation, independent of small reorderings."""
    total = np.zeros_like(mats[0])
    comp = np.zeros_like(mats[0])
    for m in mats:
        y = m - comp
        t = total + y
        comp = (t - total) - y
        total = t
    return total


def total_witness(
    settings: SettingsTable, pattern: SignPattern | None = None
) -> np.ndarray:
    """Q_tot = sum of element witnesses; certified equal to 4(2^(N-1) I - I_svet)."""
    n = settings.n_parties
    if n < 3:
        raise ValueError(
            "total_witness needs at least three parties; use the CHSH element for N = 2"
        )
    elements = decompose_svetlichny(settings, pattern)
    total = _kahan_sum([element_witness(e) for e in elements])
    svet = svetlichny_operator(settings, pattern)
    dim = total.shape[0]
    target = 4.0 * (2.0 ** (n - 1) * np.eye(dim) - svet.matrix)
    residual = frob_distance(total, target)
    if residual > ELEMENT_RESIDUAL_TOL * dim:
        raise WitnessIdentityError(
            f"||Q_tot - 4(2^(N-1) I - I_svet)|| = {residual:.3e} at N = {n}"
        )
    return total


@dataclass(frozen=True)
class WitnessReport:
    """Evaluated total witness together with its identity residuals."""

    n_parties: int
    value: float
    bound_term: float
    svet_value: float
    negative: bool
    identity_residuals: dict[str, float]

    def to_json_dict(self) -> dict:
        return {
            "n_parties": self.n_parties,
            "value": self.value,
            "bound_term": self.bound_term,
            "svet_value": self.svet_value,
            "negative": self.negative,
            "identity_residuals": dict(self.identity_residuals),
        }


def evaluate_witness(
    settings: SettingsTable, rho: np.ndarray, pattern: SignPattern | None = None
) -> WitnessReport:
    """Evaluate the total witness and the inequality operator on a state.

    The negativity flag fires iff the inequality expectation exceeds the
    classical bound 2^(N-1) by more than NEGATIVITY_MARGIN, equivalently iff
    the witness value drops below -4 * NEGATIVITY_MARGIN.
    """
    n = settings.n_parties
    dim = 2**n
    if rho.shape != (dim, dim):
        raise ValueError(f"state has shape {rho.shape}, expected {(dim, dim)}")
    if n == 2:
        elements = [chsh_element(settings, pattern)]
        ineq_op = (
            chsh_operator(settings)
            if pattern is None
            else svetlichny_operator(settings, pattern)
        )
        keys = ["chsh_4e"]
    else:
        elements = decompose_svetlichny(settings, pattern)
        ineq_op = svetlichny_operator(settings, pattern)
        keys = [f"element_xi{e.index}" for e in elements]

    residuals: dict[str, float] = {}
    witnesses = []
    for key, e in zip(keys, elements):
        q, residual = _witness_matrix(e)
        residuals[key] = residual
        witnesses.append(q)
    total = _kahan_sum(witnesses)
    bound = float(2 ** (n - 1))
    eye = np.eye(dim)
    residuals["total"] = frob_distance(total, 4.0 * (bound * eye - ineq_op.matrix))

    value = expectation(total, rho)
    svet_value = expectation(ineq_op.matrix, rho)
    if abs(value - 4.0 * (bound - svet_value)) > VALUE_CROSSCHECK_TOL:
        raise WitnessIdentityError(
            "witness value and inequality value disagree beyond tolerance"
        )
    negative = bool(svet_value > bound + NEGATIVITY_MARGIN)
    return WitnessReport(
        n_parties=n,
        value=value,
        bound_term=4.0 * bound,
        svet_value=svet_value,
        negative=negative,
        identity_residuals=residuals,
    )
