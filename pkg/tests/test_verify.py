import numpy as np

from edad.f2 import generate_symplectic_group
from edad.protocols import SymplecticProtocol, build_transversal, cache_path, write_transversal
from edad.states import BellDiagonalState
from edad.verify import (
    CLASS_PAIRS,
    check_caches,
    check_closed_forms,
    check_critical_qber,
    check_sp4_classes,
    class_signature,
    closed_form_residuals,
)


def test_sp4_oracle_passes():
    r = check_sp4_classes()
    assert r.passed, r.detail


def test_iid_inputs_merge_classes():
    # with the same state on both pairs, swapping kept and measured pair is
    # invisible, so the 15 classes collapse to 9 signatures
    s = BellDiagonalState(0.55, 0.23, 0.13, 0.09)
    group = generate_symplectic_group(2)
    iid = {class_signature(SymplecticProtocol(2, M), s) for M in group}
    assert len(iid) == 9
    distinct = {class_signature(SymplecticProtocol(2, M), CLASS_PAIRS) for M in group}
    assert len(distinct) == 15


def test_closed_form_residuals_small():
    res = closed_form_residuals()
    assert max(res.values()) <= 1e-12
    assert not check_closed_forms(tol=-1.0).passed


def test_critical_qber_check():
    assert check_critical_qber().passed


def test_cache_check(tmp_path):
    assert check_caches(tmp_path).passed
    write_transversal(cache_path(tmp_path, 2), build_transversal(2))
    assert check_caches(tmp_path).passed
    path = cache_path(tmp_path, 2)
    data = bytearray(path.read_bytes())
    data[16] ^= 0x10
    path.write_bytes(bytes(data))
    r = check_caches(tmp_path)
    assert not r.passed and "corrupt-cache" in r.detail


def test_signature_is_canonical():
    p = build_transversal(2)[3]
    sig = class_signature(p)
    assert len(sig) == 5
    assert list(sig[2:]) == sorted(sig[2:])
    assert np.isclose(sum(sig[1:]), 1.0)
