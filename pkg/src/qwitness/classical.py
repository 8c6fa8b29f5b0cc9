"""Exhaustive classical baselines for full-correlation polynomials.

Everything here is exact integer combinatorics: strategies and coefficients
are +/-1, so bounds carry no float noise.  Enumeration spaces can be split
into a fixed number of contiguous partitions; each partition reports its
first-found local maximizer and the merge keeps the globally first one in
lexicographic strategy order, so results never depend on the partition
count.

Strategy encodings (lexicographic order = ascending index):

* deterministic: index in base 4, party 0 most significant; a party digit d
  encodes outcomes (1 - 2*(d >> 1), 1 - 2*(d & 1)) for settings (0, 1), so
  index 0 is the all-plus strategy.
* hybrid: group A always contains party 0; a response function with index f
  maps the group setting word u to 1 - 2*((f >> u) & 1).  Group setting
  words list member parties in ascending order, first member most
  significant.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .ineq import SignPattern
from .qobs import Grouping

LHV_MAX_PARTIES = 8
HYBRID_MAX_PARTIES = 5


class CapExceededError(ValueError):
    """Enumeration space too large for exhaustive search."""


@dataclass(frozen=True)
class DeterministicStrategy:
    """Per party, a +/-1 outcome for each setting bit."""

    outcomes: tuple[tuple[int, int], ...]

    def to_json_dict(self) -> dict:
        return {"type": "deterministic", "outcomes": [list(o) for o in self.outcomes]}


@dataclass(frozen=True)
class HybridStrategy:
    """Per group, a +/-1 response for every joint setting word of the group."""

    grouping: Grouping
    response_a: tuple[int, ...]
    response_b: tuple[int, ...]

    def to_json_dict(self) -> dict:
        return {
            "type": "hybrid",
            "group_a": list(self.grouping.group_a),
            "group_b": list(self.grouping.group_b),
            "response_a": list(self.response_a),
            "response_b": list(self.response_b),
        }


@dataclass(frozen=True)
class CycleAssignment:
    """Outcome assignment (a, b, c, d) for the 4-cycle expression."""

    a: int
    b: int
    c: int
    d: int

    def to_json_dict(self) -> dict:
        return {"type": "assignment", "a": self.a, "b": self.b, "c": self.c, "d": self.d}


@dataclass(frozen=True)
class BoundResult:
    bound: int
    argmax_strategy: DeterministicStrategy | HybridStrategy | CycleAssignment
    evaluations: int

    def to_json_dict(self) -> dict:
        return {
            "bound": self.bound,
            "strategy": self.argmax_strategy.to_json_dict(),
            "evaluations": self.evaluations,
        }


def _partition_ranges(total: int, n_partitions: int) -> list[tuple[int, int]]:
    if n_partitions < 1:
        raise ValueError("need at least one partition")
    base, extra = divmod(total, n_partitions)
    ranges = []
    lo = 0
    for i in range(n_partitions):
        hi = lo + base + (1 if i < extra else 0)
        ranges.append((lo, hi))
        lo = hi
    return ranges


def _run_jobs(jobs, n_partitions: int) -> list:
    if n_partitions > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=min(n_partitions, len(jobs))) as pool:
            return list(pool.map(lambda job: job(), jobs))
    return [job() for job in jobs]


def _decode_strategy(n: int, index: int) -> DeterministicStrategy:
    outcomes = []
    for p in range(n):
        d = (index >> (2 * (n - 1 - p))) & 3
        outcomes.append((1 - 2 * ((d >> 1) & 1), 1 - 2 * (d & 1)))
    return DeterministicStrategy(tuple(outcomes))


def evaluate_strategy(pattern: SignPattern, strategy: DeterministicStrategy) -> int:
    """Polynomial value of a deterministic strategy, in pure integers."""
    n = pattern.n_parties
    total = 0
    for word, coeff in enumerate(pattern.coeffs):
        prod = 1
        for p in range(n):
            prod *= strategy.outcomes[p][(word >> (n - 1 - p)) & 1]
        total += coeff * prod
    return total


def _lhv_chunk(coeffs: np.ndarray, n: int, lo: int, hi: int) -> tuple[int, int]:
    """Best (value, strategy index) over a contiguous strategy range."""
    idx = np.arange(lo, hi, dtype=np.int64)
    outs = np.empty((n, 2, idx.size), dtype=np.int64)
    for p in range(n):
        d = (idx >> (2 * (n - 1 - p))) & 3
        outs[p, 0] = 1 - 2 * ((d >> 1) & 1)
        outs[p, 1] = 1 - 2 * (d & 1)
    values = np.zeros(idx.size, dtype=np.int64)
    for word in range(2**n):
        term = np.full(idx.size, coeffs[word], dtype=np.int64)
        for p in range(n):
            term = term * outs[p, (word >> (n - 1 - p)) & 1]
        values += term
    k = int(np.argmax(values))
    return int(values[k]), lo + k


def lhv_bound(pattern: SignPattern, n_partitions: int = 1) -> BoundResult:
    """Maximum over all 4^N deterministic local strategies."""
    n = pattern.n_parties
    if n > LHV_MAX_PARTIES:
        raise CapExceededError(
            f"local enumeration is capped at N = {LHV_MAX_PARTIES} "
            f"(4^N strategies); group parties and use hybrid_bound, or sample"
        )
    total = 4**n
    coeffs = np.asarray(pattern.coeffs, dtype=np.int64)
    ranges = [(lo, hi) for lo, hi in _partition_ranges(total, n_partitions) if hi > lo]
    jobs = [lambda lo=lo, hi=hi: _lhv_chunk(coeffs, n, lo, hi) for lo, hi in ranges]
    best_val, best_idx = None, None
    for val, idx in _run_jobs(jobs, n_partitions):
        if best_val is None or val > best_val:
            best_val, best_idx = val, idx
    strategy = _decode_strategy(n, best_idx)
    check = evaluate_strategy(pattern, strategy)
    if check != best_val:  # pragma: no cover - internal consistency
        raise RuntimeError(f"argmax re-evaluation {check} != bound {best_val}")
    return BoundResult(bound=best_val, argmax_strategy=strategy, evaluations=total)


def _group_word(word: int, members: tuple[int, ...], n: int) -> int:
    u = 0
    for p in members:
        u = (u << 1) | ((word >> (n - 1 - p)) & 1)
    return u


def _response_matrix(m: int) -> np.ndarray:
    """All 2^(2^m) response functions as rows of +/-1 over the 2^m words."""
    f = np.arange(2 ** (2**m), dtype=np.int64)[:, None]
    u = np.arange(2**m, dtype=np.int64)[None, :]
    return 1 - 2 * ((f >> u) & 1)


def _hybrid_mask_job(
    coeffs: np.ndarray, n: int, mask: int
) -> tuple[int, int, int, int]:
    """Best (value, f_a, f_b, evaluations) for one bipartition mask."""
    members_a = tuple(p for p in range(n) if (mask >> p) & 1)
    members_b = tuple(p for p in range(n) if not (mask >> p) & 1)
    ma, mb = len(members_a), len(members_b)
    corr = np.zeros((2**ma, 2**mb), dtype=np.int64)
    for word in range(2**n):
        corr[_group_word(word, members_a, n), _group_word(word, members_b, n)] = coeffs[
            word
        ]
    ra = _response_matrix(ma)
    rb = _response_matrix(mb)
    values = ra @ corr @ rb.T
    flat = int(np.argmax(values))
    fa, fb = divmod(flat, values.shape[1])
    return int(values[fa, fb]), fa, fb, ra.shape[0] * rb.shape[0]


def evaluate_hybrid(pattern: SignPattern, strategy: HybridStrategy) -> int:
    """Polynomial value of a hybrid strategy, in pure integers."""
    n = pattern.n_parties
    total = 0
    for word, coeff in enumerate(pattern.coeffs):
        ua = _group_word(word, strategy.grouping.group_a, n)
        ub = _group_word(word, strategy.grouping.group_b, n)
        total += coeff * strategy.response_a[ua] * strategy.response_b[ub]
    return total


def hybrid_bound(pattern: SignPattern, n_partitions: int = 1) -> BoundResult:
    """Maximum over all bipartitions and deterministic group responses.

    Inside each group the response may depend on the group's full joint
    setting word, which models arbitrary correlations within the group;
    only classical correlation crosses the split.
    """
    n = pattern.n_parties
    if n > HYBRID_MAX_PARTIES:
        raise CapExceededError(
            f"hybrid enumeration is capped at N = {HYBRID_MAX_PARTIES} "
            f"(2^(2^m) response functions per group)"
        )
    coeffs = np.asarray(pattern.coeffs, dtype=np.int64)
    masks = [m for m in range(1, 2**n - 1) if m & 1]
    slices = [
        masks[lo:hi]
        for lo, hi in _partition_ranges(len(masks), min(n_partitions, len(masks)))
    ]

    def run_slice(mask_slice):
        return [(mask, _hybrid_mask_job(coeffs, n, mask)) for mask in mask_slice]

    jobs = [lambda s=s: run_slice(s) for s in slices if s]
    best = None  # (value, mask_rank, fa, fb, mask)
    evaluations = 0
    rank = {mask: i for i, mask in enumerate(masks)}
    for chunk in _run_jobs(jobs, n_partitions):
        for mask, (val, fa, fb, count) in chunk:
            evaluations += count
            key = (val, -rank[mask], -fa, -fb)
            if best is None or key > best[0]:
                best = (key, mask, fa, fb, val)
    _, mask, fa, fb, val = best
    members_a = tuple(p for p in range(n) if (mask >> p) & 1)
    members_b = tuple(p for p in range(n) if not (mask >> p) & 1)
    strategy = HybridStrategy(
        grouping=Grouping(members_a, members_b),
        response_a=tuple(1 - 2 * ((fa >> u) & 1) for u in range(2 ** len(members_a))),
        response_b=tuple(1 - 2 * ((fb >> u) & 1) for u in range(2 ** len(members_b))),
    )
    check = evaluate_hybrid(pattern, strategy)
    if check != val:  # pragma: no cover - internal consistency
        raise RuntimeError(f"argmax re-evaluation {check} != bound {val}")
    return BoundResult(bound=val, argmax_strategy=strategy, evaluations=evaluations)


def noncontextual_bound() -> BoundResult:
    """Maximum of ab + bc + cd - ad over the 16 outcome assignments."""
    best_val, best_assign = None, None
    count = 0
    for a in (1, -1):
        for b in (1, -1):
            for c in (1, -1):
                for d in (1, -1):
                    count += 1
                    val = a * b + b * c + c * d - a * d
                    if best_val is None or val > best_val:
                        best_val = val
                        best_assign = CycleAssignment(a, b, c, d)
    return BoundResult(bound=best_val, argmax_strategy=best_assign, evaluations=count)
