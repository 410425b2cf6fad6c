"""Bell-diagonal states, noise models and local component permutations.

Component order everywhere is ``(p_I, p_X, p_Y, p_Z)`` for
``|Phi+>, |Psi+>, |Psi->, |Phi->``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError

NORM_TOL = 1e-12
COMPONENTS = ("I", "X", "Y", "Z")


@dataclass(frozen=True)
class BellDiagonalState:
    p_I: float
    p_X: float
    p_Y: float
    p_Z: float

    def __post_init__(self):
        comps = self.as_tuple()
        if any(not np.isfinite(c) for c in comps):
            raise DomainError(f"non-finite component in {comps}")
        if any(c < -NORM_TOL or c > 1 + NORM_TOL for c in comps):
            raise DomainError(f"component outside [0, 1]: {comps}")
        if abs(sum(comps) - 1.0) > NORM_TOL:
            raise DomainError(f"components sum to {sum(comps)!r}, not 1")

    @classmethod
    def from_array(cls, arr) -> "BellDiagonalState":
        a = np.asarray(arr, dtype=float).reshape(4)
        return cls(*(float(x) for x in a))

    @property
    def fidelity(self) -> float:
        return self.p_I

    @property
    def bit_error(self) -> float:
        """Probability of an X-type flip: ``p_X + p_Y``."""
        return self.p_X + self.p_Y

    @property
    def phase_error(self) -> float:
        """Probability of a Z-type flip: ``p_Z + p_Y``."""
        return self.p_Z + self.p_Y

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p_I, self.p_X, self.p_Y, self.p_Z)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=float)

    def allclose(self, other: "BellDiagonalState", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.as_array(), other.as_array(), rtol=0, atol=atol))


@dataclass(frozen=True)
class DistillationOutcome:
    """Post-selected output of a stage; ``state`` is None when degenerate."""

    state: Optional[BellDiagonalState]
    success_prob: float

    @property
    def degenerate(self) -> bool:
        return self.state is None

    @property
    def fidelity(self) -> float:
        if self.state is None:
            raise ValueError("degenerate outcome has no state")
        return self.state.p_I


def outcome_from_unnormalized(weights) -> DistillationOutcome:
    w = np.asarray(weights, dtype=float)
    total = float(w.sum())
    if total <= 0.0:
        return DistillationOutcome(None, 0.0)
    return DistillationOutcome(BellDiagonalState.from_array(w / total), min(total, 1.0))


# noise models


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise DomainError(msg)


def werner(F: float) -> BellDiagonalState:
    _require(0.25 <= F <= 1.0, f"Werner fidelity must lie in [1/4, 1], got {F}")
    e = (1.0 - F) / 3.0
    return BellDiagonalState(F, e, e, e)


def dephasing(p: float) -> BellDiagonalState:
    _require(0.0 <= p <= 1.0, f"dephasing probability must lie in [0, 1], got {p}")
    return BellDiagonalState(1.0 - p, 0.0, 0.0, p)


def six_state(Q: float) -> BellDiagonalState:
    """State assumed by the six-state protocol at QBER ``Q``."""
    _require(0.0 <= Q <= 2.0 / 3.0, f"six-state QBER must lie in [0, 2/3], got {Q}")
    h = Q / 2.0
    return BellDiagonalState(1.0 - 3.0 * h, h, h, h)


def six_state_dejmps(Q: float) -> BellDiagonalState:
    """Six-state state after one DEJMPS round, in closed form."""
    _require(0.0 <= Q <= 2.0 / 3.0, f"six-state QBER must lie in [0, 2/3], got {Q}")
    den = 4 * Q * Q - 4 * Q + 2
    return BellDiagonalState(
        (5 * Q * Q - 6 * Q + 2) / den,
        Q * Q / den,
        Q * Q / den,
        (2 * Q - 3 * Q * Q) / den,
    )


def _check_bb84(Q: float, x: float) -> None:
    _require(0.0 <= x <= Q, f"need 0 <= x <= Q, got Q={Q}, x={x}")
    _require(1.0 - 2.0 * Q + x >= 0.0, f"QBER {Q} with x={x} gives a negative fidelity")


def bb84(Q: float, x: float = 0.0) -> BellDiagonalState:
    _check_bb84(Q, x)
    return BellDiagonalState(1.0 - 2.0 * Q + x, Q - x, x, Q - x)


def bb84_permuted(Q: float, x: float = 0.0) -> BellDiagonalState:
    _check_bb84(Q, x)
    return BellDiagonalState(1.0 - 2.0 * Q + x, Q - x, Q - x, x)


MODELS = {
    "werner": werner,
    "dephasing": dephasing,
    "six_state": six_state,
    "six_state_dejmps": six_state_dejmps,
    "bb84": bb84,
    "bb84_permuted": bb84_permuted,
    "explicit": lambda *p: BellDiagonalState(*p),
}


def make_state(model: str, *params: float) -> BellDiagonalState:
    """Build a state from a named model, e.g. ``make_state("werner", 0.7)``."""
    try:
        fn = MODELS[model]
    except KeyError:
        raise DomainError(f"unknown noise model {model!r}") from None
    return fn(*params)


# component permutations


@dataclass(frozen=True)
class ComponentPermutation:
    """Relabelling of the four Bell components.

    Component ``i`` of the input ends up in slot ``images[i]``.
    """

    images: tuple[int, int, int, int]
    name: str = ""

    def __post_init__(self):
        if sorted(self.images) != [0, 1, 2, 3]:
            raise ValueError(f"not a permutation of 4 slots: {self.images}")

    @property
    def source(self) -> np.ndarray:
        """Index array ``src`` with ``out = in[src]``."""
        src = np.empty(4, dtype=np.intp)
        for i, j in enumerate(self.images):
            src[j] = i
        return src

    def label(self) -> str:
        if self.name:
            return self.name
        return "".join(COMPONENTS[j] for j in self.images)


IDENTITY = ComponentPermutation((0, 1, 2, 3), "I")
# single-sided Paulis multiply the Bell label
PAULI_X = ComponentPermutation((1, 0, 3, 2), "X")
PAULI_Y = ComponentPermutation((2, 3, 0, 1), "Y")
PAULI_Z = ComponentPermutation((3, 2, 1, 0), "Z")

PAULI4 = (IDENTITY, PAULI_X, PAULI_Y, PAULI_Z)
FULL24 = tuple(ComponentPermutation(p) for p in itertools.permutations(range(4)))

PERM_SETS = {"pauli4": PAULI4, "full24": FULL24}


def permutation_set(name: str) -> tuple[ComponentPermutation, ...]:
    try:
        return PERM_SETS[name]
    except KeyError:
        raise DomainError(f"unknown permutation set {name!r}") from None


def apply_permutation(state: BellDiagonalState, perm: ComponentPermutation) -> BellDiagonalState:
    return BellDiagonalState.from_array(state.as_array()[perm.source])
