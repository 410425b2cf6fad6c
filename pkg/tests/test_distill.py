import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edad.distill import (
    acceptance_cells,
    bilateral_cnot_protocol,
    concatenate_ed_ad,
    dejmps,
    dejmps_protocol,
    dejmps_recursive,
    label_map,
    pushforward_statistics,
    repetition_ad,
)
from edad.errors import UnsupportedSizeError
from edad.f2 import F2Matrix
from edad.protocols import SymplecticProtocol, build_transversal
from edad.states import IDENTITY, BellDiagonalState, six_state, werner
from edad.verify import werner_repetition_printed

# output of one DEJMPS round (and of the 2-1 repetition code) on werner(0.7)
W07_OUT = (0.735294, 0.029412, 0.029412, 0.205882)

states = st.lists(st.floats(0.0, 1.0), min_size=4, max_size=4).filter(lambda x: sum(x) > 1e-3).map(
    lambda x: BellDiagonalState.from_array(np.array(x) / sum(x))
)


def state_grid(k=50, seed=3):
    rng = np.random.default_rng(seed)
    grid = [BellDiagonalState.from_array(x) for x in rng.dirichlet(np.ones(4), size=k - 4)]
    return grid + [werner(F) for F in (0.55, 0.7, 0.85, 1.0)]


def test_identity_protocol():
    p = SymplecticProtocol(1, F2Matrix.identity(2))
    s = BellDiagonalState(0.4, 0.3, 0.2, 0.1)
    out = pushforward_statistics(p, s)
    assert out.success_prob == pytest.approx(1.0, abs=1e-15)
    assert out.state.allclose(s, atol=1e-15)


def test_dejmps_examples():
    out = pushforward_statistics(dejmps_protocol(), werner(0.7))
    assert out.success_prob == pytest.approx(0.68, abs=1e-12)
    assert np.allclose(out.state.as_array(), W07_OUT, atol=1e-6)
    closed = dejmps(werner(0.7), werner(0.7))
    assert closed.success_prob == pytest.approx(0.68, abs=1e-12)
    perfect = dejmps(werner(1.0), werner(1.0))
    assert perfect.success_prob == 1.0 and perfect.state.p_I == 1.0


def test_repetition_examples():
    out = repetition_ad(2, werner(0.7))
    assert out.success_prob == pytest.approx(0.68, abs=1e-12)
    assert np.allclose(out.state.as_array(), W07_OUT, atol=1e-6)
    assert out.state.p_I == pytest.approx(4.5 / 6.12, abs=1e-12)
    s = BellDiagonalState(0.4, 0.3, 0.2, 0.1)
    assert repetition_ad(1, s).state == s
    for F in np.linspace(0.3, 1, 15):
        assert repetition_ad(3, werner(F)).state.p_I == pytest.approx(F, abs=1e-14)


def test_dejmps_closed_form_grid():
    grid = state_grid()
    proto = dejmps_protocol()
    for s in grid:
        a, b = dejmps(s, s), pushforward_statistics(proto, s)
        assert abs(a.success_prob - b.success_prob) <= 1e-12
        assert np.abs(a.state.as_array() - b.state.as_array()).max() <= 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
def test_repetition_closed_form_grid(n):
    proto = bilateral_cnot_protocol(n)
    for s in state_grid():
        a, b = repetition_ad(n, s), pushforward_statistics(proto, s)
        assert abs(a.success_prob - b.success_prob) <= 1e-12
        assert np.abs(a.state.as_array() - b.state.as_array()).max() <= 1e-12


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("F", [0.55, 0.7, 0.85, 1.0])
def test_printed_werner_formulas(n, F):
    out = repetition_ad(n, werner(F))
    assert np.abs(out.state.as_array() - werner_repetition_printed(n, F)).max() <= 1e-12


def test_dejmps_per_pair_inputs():
    a, b = BellDiagonalState(0.6, 0.2, 0.15, 0.05), BellDiagonalState(0.7, 0.05, 0.1, 0.15)
    x, y = dejmps(a, b), pushforward_statistics(dejmps_protocol(), [a, b])
    assert np.allclose(x.state.as_array(), y.state.as_array(), atol=1e-12)


def test_dejmps_reorder():
    s = BellDiagonalState(0.6, 0.05, 0.25, 0.10)
    plain, ordered = dejmps(s, s), dejmps(s, s, reorder=True)
    assert ordered.state.p_I >= plain.state.p_I
    t = BellDiagonalState(0.6, 0.25, 0.05, 0.10)
    assert dejmps(s, s, reorder=True).state.allclose(dejmps(t, t, reorder=True).state)


def test_dejmps_recursive():
    w = werner(0.7)
    assert dejmps_recursive(2, w).state.allclose(dejmps(w, w).state)
    two = dejmps(w, w)
    three = dejmps(two.state, w)
    rec = dejmps_recursive(3, w)
    assert rec.state.allclose(three.state)
    assert rec.success_prob == pytest.approx(two.success_prob * three.success_prob)
    for m in (2, 3, 4):
        out = dejmps_recursive(m, werner(1.0))
        assert out.success_prob == 1.0 and out.state.p_I == 1.0
    with pytest.raises(UnsupportedSizeError):
        dejmps_recursive(5, w)


@pytest.mark.parametrize("m", [2, 3])
def test_acceptance_cells_complete(m):
    s = BellDiagonalState(0.5, 0.2, 0.2, 0.1)
    for p in build_transversal(m):
        cells = acceptance_cells(p, s)
        assert cells.shape == (2 ** (m - 1),)
        assert cells.sum() == pytest.approx(1.0, abs=1e-12)
        assert cells[0] == pytest.approx(pushforward_statistics(p, s).success_prob, abs=1e-15)


def test_label_map_accepts_quarter():
    # a run is accepted on 1/2^(m-1) of all labels
    for m in (2, 3):
        for p in build_transversal(m):
            assert (label_map(p) >= 0).sum() == 4**m // 2 ** (m - 1)


def test_degenerate_outcome():
    # an X error against a perfect pair is always detected
    x, i = BellDiagonalState(0, 1, 0, 0), BellDiagonalState(1, 0, 0, 0)
    out = pushforward_statistics(dejmps_protocol(), [x, i])
    assert out.degenerate and out.success_prob == 0.0
    assert dejmps(x, i).degenerate
    ad = repetition_ad(2, BellDiagonalState(0.5, 0.0, 0.0, 0.5))
    assert ad.state.p_I == pytest.approx(0.5)


def test_unsupported_m():
    with pytest.raises(UnsupportedSizeError):
        bilateral_cnot_protocol(5)


def test_concatenate_examples():
    out, p_ed, p_ad = concatenate_ed_ad(dejmps_protocol(), IDENTITY, 1, werner(0.7))
    assert p_ad == 1.0
    assert out.state.allclose(pushforward_statistics(dejmps_protocol(), werner(0.7)).state)

    ref = repetition_ad(2, BellDiagonalState.from_array(np.array(W07_OUT) / sum(W07_OUT)))
    out, p_ed, p_ad = concatenate_ed_ad(dejmps_protocol(), IDENTITY, 2, werner(0.7))
    assert p_ed == pytest.approx(0.68)
    assert np.allclose(out.state.as_array(), ref.state.as_array(), atol=1e-5)
    assert out.success_prob == pytest.approx(p_ed * p_ad)

    for p in build_transversal(2):
        final, _, _ = concatenate_ed_ad(p, IDENTITY, 3, werner(1.0))
        assert final.state.p_I == 1.0


@settings(max_examples=60, deadline=None)
@given(states, st.integers(1, 4))
def test_repetition_normalized(s, n):
    out = repetition_ad(n, s)
    if not out.degenerate:
        assert abs(out.state.as_array().sum() - 1) <= 1e-12
        assert 0 <= out.success_prob <= 1 + 1e-12


@settings(max_examples=40, deadline=None)
@given(states, st.integers(0, 14))
def test_pushforward_normalized(s, k):
    p = build_transversal(2)[k]
    out = pushforward_statistics(p, s)
    cells = acceptance_cells(p, s)
    assert abs(cells.sum() - 1) <= 1e-12
    if not out.degenerate:
        assert abs(out.state.as_array().sum() - 1) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(states)
def test_dejmps_equivalence_property(s):
    a, b = dejmps(s, s), pushforward_statistics(dejmps_protocol(), s)
    assert abs(a.success_prob - b.success_prob) <= 1e-12
    if not a.degenerate:
        assert np.abs(a.state.as_array() - b.state.as_array()).max() <= 1e-12


def test_six_state_dejmps_pushforward():
    # the six-state preprocessing agrees with the pushforward as well
    s = six_state(0.2)
    assert pushforward_statistics(dejmps_protocol(), s).state.allclose(dejmps(s, s).state)
