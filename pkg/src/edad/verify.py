"""Oracle suite behind ``edad verify``.

Each check compares an independent computation against the library: the
counting formulas against enumeration, a brute-force walk of the group
against the transversal, closed forms against label pushforward, and the
security thresholds against their algebraic roots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .distill import (
    bilateral_cnot_protocol,
    dejmps_protocol,
    dejmps_weights,
    pushforward_statistics,
    repetition_weights,
)
from .errors import CacheError
from .f2 import generate_symplectic_group
from .keyrates import critical_qber
from .protocols import (
    MAX_PAIRS,
    SymplecticProtocol,
    build_transversal,
    cache_path,
    counting_formulas,
    read_transversal,
    serialize_transversal,
)
from .states import BellDiagonalState, werner

WERNER_GRID = (0.55, 0.7, 0.85, 1.0)
CLASS_PAIRS = (
    BellDiagonalState(0.55, 0.23, 0.13, 0.09),
    BellDiagonalState(0.61, 0.17, 0.14, 0.08),
)
QBER_TARGETS = {
    "six_state_ad": ((5 - math.sqrt(5)) / 10, 1e-3),
    "bb84_ad": (0.2, 1e-4),
    "bb84_permuted": (0.25, 1e-4),
    "six_state_ed_ad": (0.300, 5e-3),
}


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    residual: Optional[float] = None

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        res = "" if self.residual is None else f" residual={self.residual:.3e}"
        return f"[{tag}] {self.name}: {self.detail}{res}"


def werner_repetition_printed(n: int, F: float) -> np.ndarray:
    """Reduced rational forms of the repetition code output on Werner input."""
    if n == 2:
        den = 8 * F**2 - 4 * F + 5
        pI = (10 * F**2 - 2 * F + 1) / den
        pX = 2 * (F**2 - 2 * F + 1) / den
        pZ = 6 * F * (1 - F) / den
    elif n == 3:
        den = 9 * (4 * F**2 - 2 * F + 1)
        pI = F
        pX = 4 * (-(F**3) + 3 * F**2 - 3 * F + 1) / den
        pZ = (-28 * F**3 + 30 * F**2 - 3 * F + 1) / den
    elif n == 4:
        den = 32 * F**4 - 32 * F**3 + 120 * F**2 - 56 * F + 17
        pI = (136 * F**4 - 112 * F**3 + 60 * F**2 - 4 * F + 1) / den
        pX = 8 * (F**4 - 4 * F**3 + 6 * F**2 - 4 * F + 1) / den
        pZ = 12 * F * (-10 * F**3 + 12 * F**2 - 3 * F + 1) / den
    else:
        raise ValueError("printed forms exist for n = 2, 3, 4")
    return np.array([pI, pX, pX, pZ])


def class_signature(protocol: SymplecticProtocol, pairs=CLASS_PAIRS, digits: int = 12) -> tuple:
    """Success probability, fidelity and the sorted non-identity components."""
    out = pushforward_statistics(protocol, pairs)
    p = out.state.as_array()
    return tuple(np.round([out.success_prob, p[0], *np.sort(p[1:])], digits))


def check_counts(max_m: int = MAX_PAIRS) -> CheckResult:
    got, want = [], []
    for m in range(1, max_m + 1):
        got.append(len(build_transversal(m)))
        want.append(counting_formulas(m)[1])
    orders = [len(generate_symplectic_group(m)) for m in (1, 2)]
    order_want = [counting_formulas(m)[0] for m in (1, 2)]
    ok = got == want and orders == order_want
    return CheckResult(
        "count formulas", ok, f"transversal sizes {got} (formula {want}), |Sp(2m)| m=1,2 {orders}"
    )


def check_sp4_classes() -> CheckResult:
    group = generate_symplectic_group(2)
    signatures = {class_signature(SymplecticProtocol(2, M)) for M in group}
    realized = {class_signature(p) for p in build_transversal(2)}
    ok = len(group) == 720 and len(signatures) == 15 and realized == signatures
    return CheckResult(
        "Sp(4) class brute force",
        ok,
        f"{len(group)} matrices, {len(signatures)} classes, transversal realizes {len(realized)}",
    )


def closed_form_residuals(rng: Optional[np.random.Generator] = None) -> dict[str, float]:
    """Largest absolute deviation of each closed form from pushforward."""
    rng = rng or np.random.default_rng(7)
    res = {"dejmps": 0.0, "repetition": 0.0, "printed": 0.0, "rep3_fidelity": 0.0}
    proto = dejmps_protocol()
    samples = [werner(F) for F in WERNER_GRID] + [
        BellDiagonalState.from_array(x) for x in rng.dirichlet(np.ones(4), size=8)
    ]
    for a in samples:
        for b in samples[:4]:
            w = dejmps_weights(a.as_array(), b.as_array())
            out = pushforward_statistics(proto, [a, b])
            ref = out.state.as_array() * out.success_prob
            res["dejmps"] = max(res["dejmps"], float(np.abs(w - ref).max()))
    for n in (2, 3, 4):
        proto = bilateral_cnot_protocol(n)
        for F in WERNER_GRID:
            out = pushforward_statistics(proto, werner(F))
            ref = out.state.as_array() * out.success_prob
            w = repetition_weights(n, werner(F).as_array())
            res["repetition"] = max(res["repetition"], float(np.abs(w - ref).max()))
            printed = werner_repetition_printed(n, F)
            res["printed"] = max(res["printed"], float(np.abs(printed - out.state.as_array()).max()))
            if n == 3:
                res["rep3_fidelity"] = max(res["rep3_fidelity"], abs(out.state.p_I - F))
    return res


def check_closed_forms(tol: float = 1e-12) -> CheckResult:
    res = closed_form_residuals()
    worst = max(res.values())
    detail = ", ".join(f"{k}={v:.1e}" for k, v in res.items())
    return CheckResult("closed-form equivalence", worst <= tol, detail, worst)


def check_critical_qber() -> CheckResult:
    parts, ok = [], True
    for family, (target, tol) in QBER_TARGETS.items():
        q = critical_qber(family)
        ok &= abs(q - target) <= tol
        parts.append(f"{family}={q:.6f}")
    return CheckResult("critical QBER", ok, ", ".join(parts))


def check_caches(cache_dir) -> CheckResult:
    cache_dir = Path(cache_dir)
    found = []
    for m in range(1, MAX_PAIRS + 1):
        path = cache_path(cache_dir, m)
        if not path.exists():
            continue
        try:
            cached = read_transversal(path, m)
        except CacheError as exc:
            return CheckResult("cache integrity", False, f"corrupt-cache {path.name}: {exc}")
        if serialize_transversal(cached) != serialize_transversal(build_transversal(m)):
            return CheckResult("cache integrity", False, f"corrupt-cache {path.name}: content differs")
        found.append(m)
    detail = f"verified m={found}" if found else f"no cache files in {cache_dir}"
    return CheckResult("cache integrity", True, detail)


def run_checks(tol: float = 1e-12, cache_dir=None, echo: Optional[Callable[[str], None]] = None):
    checks = [check_counts, check_sp4_classes, lambda: check_closed_forms(tol), check_critical_qber]
    if cache_dir is not None:
        checks.append(lambda: check_caches(cache_dir))
    results = []
    for check in checks:
        r = check()
        results.append(r)
        if echo is not None:
            echo(r.line())
    return results
