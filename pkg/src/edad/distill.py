"""Distillation statistics of bi-local Clifford protocols and repetition AD.

The array kernels operate on the last axis of ``(..., 4)`` component
arrays and return *unnormalized* output weights whose sum is the success
probability.  The public functions wrap them for single states.
"""

from __future__ import annotations

import functools
from typing import Sequence, Union

import numpy as np

from .errors import UnsupportedSizeError
from .f2 import F2Matrix, cnot_image, is_symplectic, rx_image
from .protocols import MAX_PAIRS, SymplecticProtocol
from .states import (
    BellDiagonalState,
    ComponentPermutation,
    DistillationOutcome,
    apply_permutation,
    outcome_from_unnormalized,
)

# slot index of the Pauli with code (v, w), addressed as v + 2w
_VW_TO_SLOT = np.array([0, 1, 3, 2], dtype=np.intp)


@functools.lru_cache(maxsize=None)
def label_components(m: int) -> np.ndarray:
    """``comps[a, i]`` = component slot of pair ``i`` in label ``a``."""
    labels = np.arange(4**m)
    v = (labels[:, None] >> np.arange(m)) & 1
    w = (labels[:, None] >> (m + np.arange(m))) & 1
    return _VW_TO_SLOT[v + 2 * w]


def product_distribution(pairs: np.ndarray) -> np.ndarray:
    """Probability of every ``4**m`` label for independent input pairs.

    ``pairs`` has shape ``(m, 4)`` or ``(m, G, 4)``; the result has shape
    ``(4**m,)`` or ``(G, 4**m)``.
    """
    pairs = np.asarray(pairs, dtype=float)
    m = pairs.shape[0]
    comps = label_components(m)
    out = pairs[0][..., comps[:, 0]]
    for i in range(1, m):
        out = out * pairs[i][..., comps[:, i]]
    return out


def _parity(x: np.ndarray) -> np.ndarray:
    return np.bitwise_count(x) & 1


def label_map(protocol: SymplecticProtocol) -> np.ndarray:
    """Output slot of each input label, or -1 where the run is rejected."""
    m = protocol.m
    labels = np.arange(4**m, dtype=np.uint32)
    accept = np.ones(labels.shape, dtype=bool)
    for r in protocol.check_rows:
        accept &= _parity(labels & np.uint32(r)) == 0
    r1, rw = protocol.kept_rows
    v = _parity(labels & np.uint32(r1))
    w = _parity(labels & np.uint32(rw))
    out = _VW_TO_SLOT[v + 2 * w]
    return np.where(accept, out, -1)


StateOrPairs = Union[BellDiagonalState, Sequence[BellDiagonalState]]


def _pair_array(inputs: StateOrPairs, m: int) -> np.ndarray:
    if isinstance(inputs, BellDiagonalState):
        return np.tile(inputs.as_array(), (m, 1))
    arr = np.array([s.as_array() for s in inputs])
    if arr.shape != (m, 4):
        raise ValueError(f"expected {m} input pairs, got {len(arr)}")
    return arr


def pushforward_statistics(protocol: SymplecticProtocol, inputs: StateOrPairs) -> DistillationOutcome:
    """Success probability and kept state of ``protocol`` on the inputs.

    ``inputs`` is one state (used for every pair) or one state per pair.
    """
    if protocol.m > MAX_PAIRS:
        raise UnsupportedSizeError(f"m={protocol.m} exceeds {MAX_PAIRS}")
    probs = product_distribution(_pair_array(inputs, protocol.m))
    out = label_map(protocol)
    keep = out >= 0
    weights = np.bincount(out[keep], weights=probs[keep], minlength=4)
    return outcome_from_unnormalized(weights)


def acceptance_cells(protocol: SymplecticProtocol, inputs: StateOrPairs) -> np.ndarray:
    """Probability of each of the ``2**(m-1)`` syndrome patterns.

    Index 0 is the accepted (all coincident) pattern.
    """
    m = protocol.m
    probs = product_distribution(_pair_array(inputs, m))
    labels = np.arange(4**m, dtype=np.uint32)
    syndrome = np.zeros(labels.shape, dtype=np.intp)
    for k, r in enumerate(protocol.check_rows):
        syndrome |= _parity(labels & np.uint32(r)).astype(np.intp) << k
    return np.bincount(syndrome, weights=probs, minlength=2 ** (m - 1))


# named protocols


def dejmps_protocol() -> SymplecticProtocol:
    """Image of ``CNOT_12 (Rx(pi/2) x Rx(pi/2))`` on two pairs."""
    M = cnot_image(2, 0, 1) @ rx_image(2, 0) @ rx_image(2, 1)
    assert is_symplectic(M)
    return SymplecticProtocol(2, M)


def bilateral_cnot_protocol(n: int) -> SymplecticProtocol:
    """CNOTs from pair 1 onto every other pair: the n-1 repetition code."""
    if not 1 <= n <= MAX_PAIRS:
        raise UnsupportedSizeError(f"n={n} outside 1..{MAX_PAIRS}")
    M = F2Matrix.identity(2 * n)
    for t in range(1, n):
        M = cnot_image(n, 0, t) @ M
    return SymplecticProtocol(n, M)


# closed forms


def dejmps_weights(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Unnormalized DEJMPS output for first pair ``a``, second pair ``b``."""
    aI, aX, aY, aZ = np.moveaxis(np.asarray(a, dtype=float), -1, 0)
    bI, bX, bY, bZ = np.moveaxis(np.asarray(b, dtype=float), -1, 0)
    return np.stack(
        [
            aI * bI + aY * bY,
            aX * bX + aZ * bZ,
            aZ * bX + aX * bZ,
            aY * bI + aI * bY,
        ],
        axis=-1,
    )


def dejmps_order(p: np.ndarray) -> np.ndarray:
    """Relabel components so that ``p_I >= p_X >= p_Z >= p_Y``."""
    p = np.asarray(p, dtype=float)
    desc = np.flip(np.sort(p, axis=-1), axis=-1)
    return desc[..., [0, 1, 3, 2]]


def dejmps(a: BellDiagonalState, b: BellDiagonalState, reorder: bool = False) -> DistillationOutcome:
    pa, pb = a.as_array(), b.as_array()
    if reorder:
        pa, pb = dejmps_order(pa), dejmps_order(pb)
    return outcome_from_unnormalized(dejmps_weights(pa, pb))


def dejmps_recursive(m: int, state: BellDiagonalState, reorder: bool = False) -> DistillationOutcome:
    """m-1 DEJMPS: fold the 2-1 protocol, adding one fresh pair per round."""
    if not 2 <= m <= MAX_PAIRS:
        raise UnsupportedSizeError(f"m={m} outside 2..{MAX_PAIRS}")
    current, success = state, 1.0
    for _ in range(m - 1):
        step = dejmps(current, state, reorder)
        if step.degenerate:
            return DistillationOutcome(None, 0.0)
        current, success = step.state, success * step.success_prob
    return DistillationOutcome(current, success)


def repetition_weights(n: int, p: np.ndarray) -> np.ndarray:
    """Unnormalized output of the n-1 repetition code on ``n`` copies of ``p``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    pI, pX, pY, pZ = np.moveaxis(np.asarray(p, dtype=float), -1, 0)
    s0, d0 = (pI + pZ) ** n, (pI - pZ) ** n
    s1, d1 = (pX + pY) ** n, (pX - pY) ** n
    return 0.5 * np.stack([s0 + d0, s1 + d1, s1 - d1, s0 - d0], axis=-1)


def repetition_ad(n: int, state: BellDiagonalState) -> DistillationOutcome:
    if n == 1:
        return DistillationOutcome(state, 1.0)
    return outcome_from_unnormalized(repetition_weights(n, state.as_array()))


def concatenate_ed_ad(
    protocol: SymplecticProtocol,
    perm: ComponentPermutation,
    n: int,
    state: BellDiagonalState,
) -> tuple[DistillationOutcome, float, float]:
    """Run an m-n-1 protocol; returns (final outcome, p_ED, p_AD)."""
    ed = pushforward_statistics(protocol, state)
    if ed.degenerate:
        return ed, 0.0, 0.0
    mid = apply_permutation(ed.state, perm)
    ad = repetition_ad(n, mid)
    if ad.degenerate:
        return DistillationOutcome(None, 0.0), ed.success_prob, 0.0
    return (
        DistillationOutcome(ad.state, ed.success_prob * ad.success_prob),
        ed.success_prob,
        ad.success_prob,
    )
