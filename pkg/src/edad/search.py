"""Exhaustive search over m-n-1 ED+AD protocols.

Every protocol of a transversal is turned once into a sparse 0/1 operator
from the ``4**m`` input labels to the four kept components, so evaluating
the whole transversal on a new input is one sparse mat-vec.  The Pauli
fix-up and the repetition code are then applied to all (protocol, perm)
combinations at once.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse

from .distill import label_map, product_distribution, repetition_weights
from .errors import ConfigurationError
from .keyrates import bb84_rate_array
from .protocols import Transversal, build_transversal
from .states import (
    BellDiagonalState,
    ComponentPermutation,
    DistillationOutcome,
    permutation_set,
)

OBJECTIVES = ("fidelity", "bb84_rate")
TIE_DECIMALS = 12


@dataclass(frozen=True)
class Family:
    """An m-n-1 protocol family; ``n == 1`` is entanglement distillation only."""

    m: int
    n: int

    @property
    def name(self) -> str:
        return f"{self.m}-1" if self.n == 1 else f"{self.m}-{self.n}-1"

    def __str__(self) -> str:
        return self.name


FAMILIES = tuple(
    Family(m, n)
    for m, n in [(2, 1), (3, 1), (4, 1), (2, 2), (2, 3), (3, 2), (3, 3), (2, 4), (4, 2)]
)
ED_ONLY = tuple(f for f in FAMILIES if f.n == 1)
ED_AD = tuple(f for f in FAMILIES if f.n > 1)

_FAMILY_RE = re.compile(r"^(\d+)-(?:(\d+)-)?1$")


def parse_family(name: str) -> Family:
    match = _FAMILY_RE.match(name.strip())
    if not match:
        raise ConfigurationError(f"bad family name {name!r}; expected 'm-1' or 'm-n-1'")
    fam = Family(int(match.group(1)), int(match.group(2) or 1))
    if fam not in FAMILIES:
        raise ConfigurationError(f"family {name!r} is not one of {[f.name for f in FAMILIES]}")
    return fam


class TransversalOperator:
    """Sparse map from label probabilities to per-protocol kept weights."""

    def __init__(self, transversal: Transversal):
        self.m = transversal.m
        self.size = len(transversal)
        rows, cols = [], []
        for k, p in enumerate(transversal):
            out = label_map(p)
            keep = np.nonzero(out >= 0)[0]
            rows.append(4 * k + out[keep])
            cols.append(keep)
        r, c = np.concatenate(rows), np.concatenate(cols)
        self.matrix = sparse.csr_matrix(
            (np.ones(r.size), (r, c)), shape=(4 * self.size, 4**self.m)
        )

    def weights(self, state: np.ndarray) -> np.ndarray:
        """Unnormalized kept components, shape ``(protocols, 4)``."""
        probs = product_distribution(np.tile(np.asarray(state, dtype=float), (self.m, 1)))
        return (self.matrix @ probs).reshape(self.size, 4)


_OPERATORS: dict[tuple[int, int], TransversalOperator] = {}


def operator_for(transversal: Transversal) -> TransversalOperator:
    key = (transversal.m, transversal.checksum)
    op = _OPERATORS.get(key)
    if op is None:
        op = _OPERATORS[key] = TransversalOperator(transversal)
    return op


@dataclass(frozen=True)
class Evaluation:
    """All (protocol, perm) results of one family on one input."""

    family: Family
    p_ed: np.ndarray  # (P,)
    p_ad: np.ndarray  # (P, K)
    final: np.ndarray  # (P, K, 4), NaN where degenerate
    fidelity: np.ndarray  # (P, K), -inf where degenerate
    key_rate: np.ndarray  # (P, K)

    def objective(self, name: str) -> np.ndarray:
        if name == "fidelity":
            return self.fidelity
        if name in ("bb84_rate", "keyrate"):
            return self.key_rate
        raise ConfigurationError(f"unknown objective {name!r}")


def _stage_two(mid: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    if n == 1:
        return np.ones(mid.shape[:-1]), mid
    w = repetition_weights(n, mid)
    p_ad = w.sum(axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        final = w / p_ad[..., None]
    return p_ad, final


def _evaluate_weights(family: Family, w: np.ndarray, perms) -> Evaluation:
    p_ed = w.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        mid = w / p_ed[:, None]
    src = np.array([q.source for q in perms])
    mid = mid[:, src]  # (P, K, 4)
    p_ad, final = _stage_two(mid, family.n)
    ok = (p_ed[:, None] > 0) & (p_ad > 0)
    final = np.where(ok[..., None], final, np.nan)
    fidelity = np.where(ok, final[..., 0], -np.inf)
    yield_ = p_ed[:, None] * p_ad / (family.m * family.n)
    rate = np.where(ok, bb84_rate_array(np.where(ok[..., None], final, 0.0), yield_), 0.0)
    return Evaluation(family, p_ed, p_ad, final, fidelity, rate)


def _weights(family: Family, state, transversal: Optional[Transversal]) -> np.ndarray:
    if transversal is None:
        transversal = build_transversal(family.m)
    if len(transversal) == 0:
        raise ConfigurationError("empty transversal")
    p = state.as_array() if isinstance(state, BellDiagonalState) else np.asarray(state, float)
    return operator_for(transversal).weights(p)


def evaluate_family(
    family: Family,
    state: BellDiagonalState | np.ndarray,
    perms: tuple[ComponentPermutation, ...],
    transversal: Optional[Transversal] = None,
) -> Evaluation:
    """Results for every (protocol, perm) pair of the transversal."""
    return _evaluate_weights(family, _weights(family, state, transversal), perms)


@dataclass(frozen=True)
class BestProtocol:
    family: Family
    protocol_id: int
    perm_index: int
    perm: ComponentPermutation
    value: float
    outcome: DistillationOutcome
    p_ed: float
    p_ad: float
    key_rate: float


def _best_from(ev: Evaluation, objective: str, perms, ids: np.ndarray) -> BestProtocol:
    obj = ev.objective(objective)
    # values equal to 12 decimals tie (Pauli fix-ups that leave the rate
    # unchanged differ only by rounding); ties go to the lowest protocol id,
    # then permutation order
    primary = np.round(obj, TIE_DECIMALS)
    rows, cols = np.nonzero(primary == primary.max())
    j = np.lexsort((cols, ids[rows]))[0]
    u, k = int(rows[j]), int(cols[j])
    p_ed, p_ad = float(ev.p_ed[u]), float(ev.p_ad[u, k])
    if np.isfinite(ev.fidelity[u, k]):
        final = ev.final[u, k]
        outcome = DistillationOutcome(BellDiagonalState.from_array(final / final.sum()), p_ed * p_ad)
    else:
        outcome = DistillationOutcome(None, 0.0)
    return BestProtocol(
        ev.family, int(ids[u]), k, perms[k], float(obj[u, k]), outcome, p_ed, p_ad,
        float(ev.key_rate[u, k]),
    )


def select_best(ev: Evaluation, objective: str, perms) -> BestProtocol:
    return _best_from(ev, objective, perms, np.arange(ev.p_ed.shape[0]))


def best_protocol(
    family: Family,
    state: BellDiagonalState | np.ndarray,
    perms: tuple[ComponentPermutation, ...],
    objective: str = "fidelity",
    transversal: Optional[Transversal] = None,
) -> BestProtocol:
    """Optimum over the transversal, evaluating each distinct statistic once.

    Protocols whose kept weights agree to 1e-13 are interchangeable; only the
    lowest-id member of each group is evaluated, which preserves the
    tie-break of the exhaustive search.
    """
    w = _weights(family, state, transversal)
    _, first = np.unique(np.round(w, 13), axis=0, return_index=True)
    first = np.sort(first)
    ev = _evaluate_weights(family, w[first], perms)
    return _best_from(ev, objective, perms, first)


def enumerate_best(
    m: int,
    n: int,
    state: BellDiagonalState,
    objective: str = "fidelity",
    perm_set: str = "pauli4",
    transversal: Optional[Transversal] = None,
) -> BestProtocol:
    """Best m-n-1 protocol for ``state`` over transversal x permutation set."""
    perms = permutation_set(perm_set)
    return best_protocol(Family(m, n), state, perms, objective, transversal)
