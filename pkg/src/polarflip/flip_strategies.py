"""Bit-flipping candidate lists for SC-Flip and dynamic SC-Flip decoding.

A candidate is an ascending set of information indices with a metric; the
list keeps the ``T_max - 1`` untried candidates sorted by metric (ties break
toward the lexicographically smaller index set) and never re-admits a set
that was already attempted.
"""

from __future__ import annotations

import logging
from bisect import insort
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

PENALTY_MODES = ("approx", "exact")

# Step penalty of the hardware-friendly metric: each prefix term contributes
# 1.5 when its decision-LLR magnitude is at most 5.0, else nothing.
APPROX_PENALTY_STEP = 1.5
APPROX_PENALTY_THRESHOLD = 5.0


@dataclass
class FlipCandidate:
    """One bit-flipping set: ascending information indices plus its metric."""

    indices: tuple
    metric: float
    attempted: bool = False

    def __post_init__(self):
        self.indices = tuple(int(i) for i in self.indices)
        if not self.indices:
            raise ValueError("a flip candidate needs at least one index")
        if any(b <= a for a, b in zip(self.indices, self.indices[1:])):
            raise ValueError(f"indices must be strictly ascending: {self.indices}")

    @property
    def first_index(self) -> int:
        return self.indices[0]

    def sort_key(self):
        return (self.metric, self.indices)


class FlipList:
    """Capacity-bounded candidate list sorted ascending by metric."""

    def __init__(self, capacity: int):
        if capacity < 0:
            raise ValueError(f"capacity must be >= 0, got {capacity}")
        self.capacity = capacity
        self.candidates: list[FlipCandidate] = []
        self._members: set[tuple] = set()
        self._attempted: set[tuple] = set()

    def __len__(self) -> int:
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)

    @property
    def worst_key(self):
        return self.candidates[-1].sort_key() if self.candidates else None

    def insert(self, candidate: FlipCandidate) -> bool:
        """Insert keeping order; returns False when the set was already seen
        or the list is full and the candidate is worse than its worst entry."""
        key = candidate.indices
        if key in self._attempted or key in self._members:
            return False
        if self.capacity == 0:
            return False
        if len(self.candidates) >= self.capacity:
            if candidate.sort_key() > self.candidates[-1].sort_key():
                return False
            dropped = self.candidates.pop()
            self._members.discard(dropped.indices)
        insort(self.candidates, candidate, key=FlipCandidate.sort_key)
        self._members.add(key)
        return True

    def pop_best(self) -> FlipCandidate:
        """Remove and return the lowest-metric candidate, marking it tried."""
        if not self.candidates:
            raise IndexError("pop from an empty flip list")
        best = self.candidates.pop(0)
        self._members.discard(best.indices)
        self._attempted.add(best.indices)
        best.attempted = True
        return best

    def was_attempted(self, indices) -> bool:
        return tuple(int(i) for i in indices) in self._attempted

    def audit(self, info_set=None, omega=None) -> None:
        """Raise if any structural invariant is violated."""
        if len(self.candidates) > self.capacity:
            raise AssertionError("flip list over capacity")
        keys = [c.sort_key() for c in self.candidates]
        if any(b < a for a, b in zip(keys, keys[1:])):
            raise AssertionError("flip list not sorted by metric")
        sets = [c.indices for c in self.candidates]
        if len(set(sets)) != len(sets):
            raise AssertionError("duplicate candidate sets")
        if set(sets) != self._members:
            raise AssertionError("member registry out of sync")
        if self._attempted & set(sets):
            raise AssertionError("attempted set present in the list")
        for cand in self.candidates:
            if any(b <= a for a, b in zip(cand.indices, cand.indices[1:])):
                raise AssertionError(f"non-ascending candidate {cand.indices}")
            if omega is not None and len(cand.indices) > omega:
                raise AssertionError(f"candidate larger than omega: {cand.indices}")
            if info_set is not None and not set(cand.indices) <= set(int(i) for i in info_set):
                raise AssertionError(f"candidate outside the information set: {cand.indices}")

    def rows(self):
        """Debug view: ``(indices, metric)`` tuples in list order."""
        return [(c.indices, c.metric) for c in self.candidates]


def _info_positions(info_set) -> np.ndarray:
    info = np.asarray(info_set, dtype=np.int64)
    if info.ndim != 1 or info.size == 0:
        raise ValueError("information set must be a non-empty 1-D index array")
    return info


def _check_count(count: int, limit: int, what: str) -> int:
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    if count > limit:
        logger.warning("%s: requested %d candidates, clamping to |A| = %d",
                       what, count, limit)
        return limit
    return count


def scf_build_candidates(alpha_dec, info_set, count: int) -> FlipList:
    """Singleton candidates for SC-Flip: the ``count`` information indices
    with the smallest ``|alpha_dec|``, ties toward the lower index."""
    info = _info_positions(info_set)
    alpha_dec = np.asarray(alpha_dec, dtype=np.float64)
    take = _check_count(count, info.size, "scf_build_candidates")
    flip_list = FlipList(capacity=count)
    mags = np.abs(alpha_dec[info])
    order = np.lexsort((info, mags))
    for pos in order[:take]:
        flip_list.insert(FlipCandidate(indices=(int(info[pos]),),
                                       metric=float(mags[pos])))
    return flip_list


def dscf_penalty_exact(alpha_dec, info_set, i_lambda: int, c: float) -> float:
    """Prefix penalty ``(1/c) sum ln(1 + exp(-c |alpha_dec(j)|))`` over
    information indices ``j <= i_lambda``."""
    if not 0.0 < c <= 1.0:
        raise ValueError(f"c must be in (0, 1], got {c}")
    info = _info_positions(info_set)
    alpha_dec = np.asarray(alpha_dec, dtype=np.float64)
    prefix = info[info <= i_lambda]
    return float(np.sum(np.log1p(np.exp(-c * np.abs(alpha_dec[prefix])))) / c)


def dscf_penalty_approx(alpha_dec, info_set, i_lambda: int) -> float:
    """Hardware-friendly prefix penalty: 1.5 per information index
    ``j <= i_lambda`` whose ``|alpha_dec(j)|`` is at most 5.0."""
    info = _info_positions(info_set)
    alpha_dec = np.asarray(alpha_dec, dtype=np.float64)
    prefix = info[info <= i_lambda]
    hits = np.abs(alpha_dec[prefix]) <= APPROX_PENALTY_THRESHOLD
    return float(APPROX_PENALTY_STEP * np.count_nonzero(hits))


def dscf_metric(candidate, alpha_dec, info_set, penalty_mode: str = "approx",
                c: float = 1.0) -> float:
    """Flip-set metric: ``sum |alpha_dec(j)| over the set`` plus the prefix
    penalty up to the set's last index."""
    indices = candidate.indices if isinstance(candidate, FlipCandidate) else tuple(candidate)
    if penalty_mode not in PENALTY_MODES:
        raise ValueError(f"unknown penalty mode {penalty_mode!r}")
    info = _info_positions(info_set)
    info_lookup = set(int(i) for i in info)
    if not set(int(i) for i in indices) <= info_lookup:
        raise ValueError(f"flip indices {indices} not all in the information set")
    alpha_dec = np.asarray(alpha_dec, dtype=np.float64)
    i_lambda = max(indices)
    if penalty_mode == "exact":
        penalty = dscf_penalty_exact(alpha_dec, info, i_lambda, c)
    else:
        penalty = dscf_penalty_approx(alpha_dec, info, i_lambda)
    return float(np.sum(np.abs(alpha_dec[np.asarray(indices)])) + penalty)


def _penalty_prefix(alpha_dec, info: np.ndarray, penalty_mode: str, c: float) -> np.ndarray:
    """Cumulative penalty over the ascending information set; entry ``p`` is
    the penalty of any set whose last index is ``info[p]``."""
    mags = np.abs(np.asarray(alpha_dec, dtype=np.float64)[info])
    if penalty_mode == "exact":
        if not 0.0 < c <= 1.0:
            raise ValueError(f"c must be in (0, 1], got {c}")
        terms = np.log1p(np.exp(-c * mags)) / c
    elif penalty_mode == "approx":
        terms = np.where(mags <= APPROX_PENALTY_THRESHOLD, APPROX_PENALTY_STEP, 0.0)
    else:
        raise ValueError(f"unknown penalty mode {penalty_mode!r}")
    return np.cumsum(terms)


def dscf_build_candidates(alpha_dec, info_set, count: int,
                          penalty_mode: str = "approx", c: float = 1.0) -> FlipList:
    """Initial dynamic-SCF list: every information index scored as a
    single-flip set, the best ``count`` kept."""
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    info = _info_positions(info_set)
    alpha_dec = np.asarray(alpha_dec, dtype=np.float64)
    # Capacity beyond |A| is legitimate here: extensions refill the list.
    take = min(count, info.size)
    flip_list = FlipList(capacity=count)
    metrics = np.abs(alpha_dec[info]) + _penalty_prefix(alpha_dec, info, penalty_mode, c)
    order = np.lexsort((info, metrics))
    for pos in order[:take]:
        flip_list.insert(FlipCandidate(indices=(int(info[pos]),),
                                       metric=float(metrics[pos])))
    return flip_list


def dscf_extend_candidates(flip_list: FlipList, failed: FlipCandidate,
                           alpha_dec, info_set, omega: int,
                           penalty_mode: str = "approx", c: float = 1.0) -> FlipList:
    """Grow the list after a failed trial of ``failed``.

    Each information index beyond the failed set's last index spawns a
    superset candidate whose metric is computed from the failed trial's
    decision LLRs.  Sets already at size ``omega`` are not extended.  The
    list is updated in place and returned.
    """
    if len(failed.indices) > omega:
        raise ValueError(f"failed set larger than omega={omega}: {failed.indices}")
    if len(failed.indices) == omega or flip_list.capacity == 0:
        return flip_list
    info = _info_positions(info_set)
    alpha_dec = np.asarray(alpha_dec, dtype=np.float64)
    pos_fail = int(np.searchsorted(info, failed.indices[-1]))
    if pos_fail >= info.size or info[pos_fail] != failed.indices[-1]:
        raise ValueError(f"failed set index {failed.indices[-1]} not in the information set")
    if pos_fail + 1 >= info.size:
        return flip_list

    tail = info[pos_fail + 1:]
    base = float(np.sum(np.abs(alpha_dec[np.asarray(failed.indices)])))
    metrics = base + np.abs(alpha_dec[tail]) + _penalty_prefix(
        alpha_dec, info, penalty_mode, c)[pos_fail + 1:]
    order = np.argsort(metrics, kind="stable")
    for pos in order:
        cand = FlipCandidate(indices=failed.indices + (int(tail[pos]),),
                             metric=float(metrics[pos]))
        inserted = flip_list.insert(cand)
        if not inserted and len(flip_list) >= flip_list.capacity \
                and cand.sort_key() > flip_list.worst_key:
            # Extensions arrive in ascending metric order: once one falls off
            # the end of a full list, all remaining ones do too.
            break
    return flip_list
