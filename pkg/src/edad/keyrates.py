"""Asymptotic key rates and secret-key conditions for Bell-diagonal states."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import entr, expit

from .distill import dejmps_order, dejmps_weights
from .errors import ConfigurationError, DomainError, SolverError
from .states import (
    FULL24,
    BellDiagonalState,
    ComponentPermutation,
    IDENTITY,
    bb84,
    bb84_permuted,
    six_state,
)

LN2 = math.log(2.0)


def binary_entropy(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"binary entropy needs x in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def binary_entropy_array(x) -> np.ndarray:
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    return (entr(x) + entr(1.0 - x)) / LN2


@dataclass(frozen=True)
class KeyRateInputs:
    p_bit: float
    p_phase: float
    p_ED: float = 1.0
    p_AD: float = 1.0
    m: int = 1
    n: int = 1

    def __post_init__(self):
        for name in ("p_bit", "p_phase", "p_ED", "p_AD"):
            v = getattr(self, name)
            if not -1e-12 <= v <= 1.0 + 1e-12:
                raise DomainError(f"{name}={v} outside [0, 1]")
        if self.m < 1 or self.n < 1:
            raise DomainError("m and n must be >= 1")

    @classmethod
    def from_state(cls, state: BellDiagonalState, p_ED=1.0, p_AD=1.0, m=1, n=1) -> "KeyRateInputs":
        return cls(min(state.bit_error, 1.0), min(state.phase_error, 1.0), p_ED, p_AD, m, n)


def bb84_rate(inputs: KeyRateInputs) -> float:
    """``max(p_ED p_AD / (m n) * (1 - H(p_bit) - H(p_phase)), 0)``."""
    r = 1.0 - binary_entropy(min(max(inputs.p_bit, 0.0), 1.0)) - binary_entropy(
        min(max(inputs.p_phase, 0.0), 1.0)
    )
    return max(inputs.p_ED * inputs.p_AD / (inputs.m * inputs.n) * r, 0.0)


def bb84_rate_state(state: BellDiagonalState, p_ED=1.0, p_AD=1.0, m=1, n=1) -> float:
    return bb84_rate(KeyRateInputs.from_state(state, p_ED, p_AD, m, n))


def bb84_rate_array(p: np.ndarray, yield_: np.ndarray | float = 1.0) -> np.ndarray:
    """Vectorized rate for normalized components ``p[..., 4]``.

    ``yield_`` is the prefactor ``p_ED p_AD / (m n)``.
    """
    p = np.asarray(p, dtype=float)
    p_bit = p[..., 1] + p[..., 2]
    p_phase = p[..., 3] + p[..., 2]
    r = 1.0 - binary_entropy_array(p_bit) - binary_entropy_array(p_phase)
    return np.maximum(yield_ * r, 0.0)


# secret-key condition with many AD rounds


def ck_margin(p) -> np.ndarray:
    """``(p_I - p_Z)^2 - (p_I + p_Z)(p_X + p_Y)``; positive iff keys can be shared."""
    p = np.asarray(p, dtype=float)
    pI, pX, pY, pZ = np.moveaxis(p, -1, 0)
    return (pI - pZ) ** 2 - (pI + pZ) * (pX + pY)


def ck_condition(state: BellDiagonalState) -> bool:
    return bool(ck_margin(state.as_array()) > 0)


_PERM_SOURCES = np.array([p.source for p in FULL24])


def best_permutation(p) -> tuple[ComponentPermutation, float]:
    """Component permutation maximizing the key-condition margin."""
    margins = ck_margin(np.asarray(p, dtype=float)[_PERM_SOURCES])
    k = int(np.argmax(margins))
    return FULL24[k], float(margins[k])


def _dejmps_self(p: np.ndarray) -> np.ndarray:
    w = dejmps_weights(p, p)
    return w / w.sum()


def _family_margin(family: str) -> Callable[[float], float]:
    if family == "six_state_ad":
        return lambda Q: float(ck_margin(six_state(Q).as_array()))
    if family == "six_state_ed_ad":
        return lambda Q: best_permutation(_dejmps_self(six_state(Q).as_array()))[1]
    if family == "bb84_ad":
        return lambda Q: float(ck_margin(bb84(Q, 0.0).as_array()))
    if family == "bb84_permuted":
        return lambda Q: float(ck_margin(bb84_permuted(Q, 0.0).as_array()))
    raise ConfigurationError(f"unknown security family {family!r}")


SECURITY_FAMILIES = ("six_state_ad", "six_state_ed_ad", "bb84_ad", "bb84_permuted")


def critical_qber(family: str, tol: float = 1e-6, bracket: tuple[float, float] = (0.0, 0.5)) -> float:
    """Boundary QBER of the key condition for ``family``, found by bisection.

    The bracket must have the condition holding at its lower end and failing
    at its upper end.
    """
    if tol <= 0:
        raise ConfigurationError("tol must be positive")
    margin = _family_margin(family)
    lo, hi = bracket
    if not (margin(lo) > 0 and margin(hi) <= 0):
        raise SolverError(f"key condition does not change over [{lo}, {hi}] for {family}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if margin(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def winning_permutation(family: str, Q: float) -> ComponentPermutation:
    """Permutation applied by ``family`` at ``Q`` (identity if none is optimized)."""
    if family == "six_state_ed_ad":
        return best_permutation(_dejmps_self(six_state(Q).as_array()))[0]
    _family_margin(family)
    return IDENTITY


# finite-round mutual information difference


@dataclass(frozen=True)
class MutualInfoParams:
    eps_AB: float
    eps_N: float
    lambda_eq: float
    lambda_diff: float
    N: int


def mutual_info_params(state: BellDiagonalState, N: int) -> MutualInfoParams:
    if N < 1:
        raise DomainError("N must be >= 1")
    pI, pX, pY, pZ = state.as_tuple()
    eps = min(max(pX + pY, 0.0), 1.0)
    if eps == 0.0:
        eps_N = 0.0
    elif eps == 1.0:
        eps_N = 1.0
    else:
        eps_N = float(expit(N * (math.log(eps) - math.log1p(-eps))))
    s_eq = pI + pZ
    lam_eq = (pI - pZ) / s_eq if s_eq > 0 else 0.0
    lam_diff = abs(pX - pY) / eps if eps > 0 else 0.0
    return MutualInfoParams(eps, eps_N, lam_eq, lam_diff, N)


def _entropy_gap(y: float) -> float:
    """``1 - H((1 - y) / 2)`` without cancellation for small ``|y|``."""
    y = abs(y)
    if y == 0.0:
        return 0.0
    if y < 1e-3:
        y2 = y * y
        total, term, k = 0.0, y2, 1
        while True:
            inc = term / (k * (2 * k - 1))
            total += inc
            if inc <= 1e-17 * total:
                break
            term *= y2
            k += 1
        return total / (2.0 * LN2)
    return 1.0 - binary_entropy((1.0 - y) / 2.0)


def mutual_info_difference(state: BellDiagonalState, N: int) -> float:
    """``I(A:B) - I(A:E)`` after ``N`` rounds of repetition AD."""
    prm = mutual_info_params(state, N)
    eq = (1.0 - prm.eps_N) * _entropy_gap(prm.lambda_eq**N) if prm.eps_N < 1.0 else 0.0
    diff = prm.eps_N * _entropy_gap(prm.lambda_diff**N) if prm.eps_N > 0.0 else 0.0
    return -binary_entropy(prm.eps_N) + eq + diff


# ED preprocessing used for the finite-round envelopes

ED_CONFIGS = {
    "six_state": ("edx0", "edx1", "edx2"),
    "bb84": ("edx0", "edx0_permute", "edx1"),
}


def preprocessed_state(family: str, ed_config: str, Q: float) -> BellDiagonalState:
    if family not in ED_CONFIGS:
        raise ConfigurationError(f"unknown family {family!r}; expected one of {sorted(ED_CONFIGS)}")
    if ed_config not in ED_CONFIGS[family]:
        raise ConfigurationError(f"{ed_config!r} is not valid for {family}: {ED_CONFIGS[family]}")
    if ed_config == "edx0_permute":
        return bb84_permuted(Q, 0.0)
    p = six_state(Q).as_array() if family == "six_state" else bb84(Q, 0.0).as_array()
    rounds = {"edx0": 0, "edx1": 1, "edx2": 2}[ed_config]
    for _ in range(rounds):
        p = _dejmps_self(dejmps_order(p))
    if rounds:
        perm, _ = best_permutation(p)
        p = p[perm.source]
    return BellDiagonalState.from_array(p / p.sum())


def finite_envelope(family: str, ed_config: str, N_max: int, Q: float) -> tuple[float, float]:
    """(min, max) of the mutual information difference over ``N = 1..N_max``."""
    if N_max < 1:
        raise ConfigurationError("N_max must be >= 1")
    state = preprocessed_state(family, ed_config, Q)
    vals = [mutual_info_difference(state, N) for N in range(1, N_max + 1)]
    return min(vals), max(vals)
