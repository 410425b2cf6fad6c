import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from edad.errors import ConfigurationError, DomainError, SolverError
from edad.keyrates import (
    ED_CONFIGS,
    SECURITY_FAMILIES,
    KeyRateInputs,
    bb84_rate,
    bb84_rate_array,
    bb84_rate_state,
    binary_entropy,
    binary_entropy_array,
    ck_condition,
    critical_qber,
    finite_envelope,
    mutual_info_difference,
    mutual_info_params,
    preprocessed_state,
    winning_permutation,
)
from edad.states import BellDiagonalState, bb84, six_state, werner

SIX_AD = (5 - math.sqrt(5)) / 10


def test_binary_entropy():
    assert binary_entropy(0.0) == 0.0
    assert binary_entropy(1.0) == 0.0
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.1) == pytest.approx(0.468996, abs=1e-6)
    with pytest.raises(DomainError):
        binary_entropy(1.1)
    xs = np.linspace(0, 1, 101)
    assert np.allclose(binary_entropy_array(xs), [binary_entropy(x) for x in xs], atol=1e-15)


@given(st.floats(0.0, 1.0))
def test_binary_entropy_symmetric(x):
    assert binary_entropy(x) == pytest.approx(binary_entropy(1 - x), abs=1e-12)


def test_bb84_rate_examples():
    assert bb84_rate(KeyRateInputs(0.0, 0.0)) == 1.0
    r = bb84_rate_state(werner(0.85))
    assert r == pytest.approx(1 - 2 * binary_entropy(0.1), abs=1e-15)
    assert r == pytest.approx(0.062007, abs=2e-6)  # 0.0620088
    assert bb84_rate_state(werner(0.5)) == 0.0
    assert bb84_rate(KeyRateInputs(0.0, 0.0, 0.5, 0.5, 2, 3)) == pytest.approx(0.25 / 6)
    with pytest.raises(DomainError):
        KeyRateInputs(0.1, 0.1, m=0)


@given(st.floats(0, 0.5), st.floats(0, 0.5), st.floats(0, 1), st.floats(0, 1), st.integers(1, 4), st.integers(1, 4))
def test_bb84_rate_bounds(pb, pp, ped, pad, m, n):
    r = bb84_rate(KeyRateInputs(pb, pp, ped, pad, m, n))
    assert 0.0 <= r <= 1.0 / (m * n) + 1e-15


def test_rate_array_matches_scalar():
    rng = np.random.default_rng(5)
    ps = rng.dirichlet(np.ones(4), size=20)
    arr = bb84_rate_array(ps, 0.5)
    for p, r in zip(ps, arr):
        assert r == pytest.approx(bb84_rate_state(BellDiagonalState.from_array(p), 0.5), abs=1e-14)


def test_ck_condition():
    assert ck_condition(BellDiagonalState(1, 0, 0, 0))
    assert not ck_condition(six_state(0.3))
    assert ck_condition(six_state(0.25))


@pytest.mark.parametrize(
    "family,target,tol",
    [("six_state_ad", SIX_AD, 2e-6), ("bb84_ad", 0.2, 2e-6), ("bb84_permuted", 0.25, 2e-6),
     ("six_state_ed_ad", 0.30, 5e-3)],
)
def test_critical_qber(family, target, tol):
    assert critical_qber(family) == pytest.approx(target, abs=tol)


@pytest.mark.parametrize("family", SECURITY_FAMILIES)
def test_critical_qber_bracket_independent(family):
    a = critical_qber(family, tol=1e-7)
    b = critical_qber(family, tol=1e-7, bracket=(0.05, 0.45))
    assert abs(a - b) <= 2e-7


def test_critical_qber_errors():
    with pytest.raises(ConfigurationError):
        critical_qber("six_state_ad", tol=0.0)
    with pytest.raises(SolverError):
        critical_qber("six_state_ad", bracket=(0.3, 0.4))
    with pytest.raises(ConfigurationError):
        critical_qber("nope")


def test_winning_permutation():
    Q = critical_qber("six_state_ed_ad")
    perm = winning_permutation("six_state_ed_ad", Q - 1e-4)
    assert perm.images[0] == 0 and perm.images != (0, 1, 2, 3)
    assert winning_permutation("bb84_ad", 0.1).images == (0, 1, 2, 3)


def test_mutual_info_examples():
    assert mutual_info_difference(BellDiagonalState(1, 0, 0, 0), 5) == pytest.approx(1.0)
    assert mutual_info_difference(BellDiagonalState(0.25, 0.25, 0.25, 0.25), 1) <= 0.0
    p = mutual_info_params(six_state(0.2), 3)
    eps = 0.2
    assert p.eps_N == pytest.approx(eps**3 / (eps**3 + (1 - eps) ** 3))
    assert p.lambda_eq == pytest.approx((0.7 - 0.1) / 0.8)
    assert p.lambda_diff == 0.0


def test_mutual_info_matches_printed_form():
    s = BellDiagonalState(0.7, 0.12, 0.05, 0.13)
    for N in (1, 2, 5, 9):
        p = mutual_info_params(s, N)
        H = binary_entropy
        naive = (1 - H(p.eps_N) - (1 - p.eps_N) * H((1 - p.lambda_eq**N) / 2)
                 - p.eps_N * H((1 - p.lambda_diff**N) / 2))
        assert mutual_info_difference(s, N) == pytest.approx(naive, abs=1e-12)


def test_mutual_info_at_boundary_vanishes():
    assert abs(mutual_info_difference(six_state(SIX_AD), 200)) <= 1e-3


def _sign_change(f, lo, hi, tol=1e-7):
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        lo, hi = (mid, hi) if f(mid) > 0 else (lo, mid)
    return 0.5 * (lo + hi)


@pytest.mark.parametrize("family,state", [("six_state_ad", six_state), ("bb84_ad", lambda q: bb84(q, 0.0))])
def test_large_n_sign_consistency(family, state):
    # the N-round crossing approaches Q* from below; the finite-N offset
    # comes from the H(eps_N) term and is about 3e-3 at N = 200
    q = critical_qber(family)
    assert mutual_info_difference(state(q + 1e-3), 200) < 0
    cross = [_sign_change(lambda x: mutual_info_difference(state(x), N), 0.1, q + 1e-2) for N in (100, 200, 400)]
    assert cross[0] < cross[1] < cross[2] < q + 1e-6
    assert q - cross[1] < 5e-3
    assert q - cross[2] < 0.6 * (q - cross[0])


def test_mutual_info_monotone():
    for N in (1, 3, 10):
        vals = [mutual_info_difference(six_state(q), N) for q in np.arange(0, 0.33 + 1e-9, 0.002)]
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


def test_finite_envelope():
    for family, configs in ED_CONFIGS.items():
        for cfg in configs:
            assert finite_envelope(family, cfg, 10, 0.0) == pytest.approx((1.0, 1.0))
    lo, hi = finite_envelope("six_state", "edx0", 10, 0.2)
    assert lo <= hi
    with pytest.raises(ConfigurationError):
        finite_envelope("six_state", "edx0_permute", 10, 0.1)
    with pytest.raises(ConfigurationError):
        finite_envelope("bb84", "edx0", 0, 0.1)


def test_preprocessed_edx0_permute():
    s = preprocessed_state("bb84", "edx0_permute", 0.1)
    assert s.as_tuple() == pytest.approx((0.8, 0.1, 0.1, 0.0))
