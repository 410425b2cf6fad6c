"""Parameter sweeps over noise strength for the nine m-n-1 protocol families."""

from __future__ import annotations

import csv
import dataclasses
import functools
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .distill import dejmps_recursive, repetition_weights
from .errors import ConfigurationError, MissingCacheError
from .keyrates import bb84_rate_array
from .protocols import Transversal, build_transversal, cache_path, read_transversal
from .search import FAMILIES, Family, best_protocol
from .states import dephasing, permutation_set, werner

CSV_HEADER = ("family", "m", "n", "perm_id", "F_in", "F_out", "p_ed", "p_ad", "key_rate")
BASELINE_COLUMN = "key_rate_dejmps"

NOISE_MODELS = ("werner", "dephasing")
DEFAULT_GRIDS = {"werner": (0.50, 1.00, 0.002), "dephasing": (0.80, 1.00, 0.001)}

_OBJECTIVE_ALIASES = {"fidelity": "fidelity", "keyrate": "bb84_rate", "bb84_rate": "bb84_rate"}


def parse_grid(text: str) -> tuple[float, float, float]:
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise ConfigurationError(f"grid must be 'start:stop:step', got {text!r}") from None
    if step <= 0:
        raise ConfigurationError("grid step must be positive")
    if stop < start:
        raise ConfigurationError("grid stop must not be below start")
    return start, stop, step


def grid_values(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive grid, rounded so that repeated runs produce identical values."""
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 12)


@dataclass(frozen=True)
class RunConfig:
    noise: str = "werner"
    grid: tuple[float, float, float] = DEFAULT_GRIDS["werner"]
    families: tuple[Family, ...] = FAMILIES
    objective: str = "keyrate"
    perm_set: str = "pauli4"
    workers: int = 1
    cache_dir: Optional[Path] = None
    dejmps_baseline: bool = False

    def __post_init__(self):
        if self.noise not in NOISE_MODELS:
            raise ConfigurationError(f"noise must be one of {NOISE_MODELS}, got {self.noise!r}")
        if self.objective not in _OBJECTIVE_ALIASES:
            raise ConfigurationError(f"unknown objective {self.objective!r}")
        if self.grid[2] <= 0:
            raise ConfigurationError("grid step must be positive")
        if not self.families:
            raise ConfigurationError("no families requested")
        for f in self.families:
            if f not in FAMILIES:
                raise ConfigurationError(f"family {f} is not one of the supported families")
        permutation_set(self.perm_set)
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")

    def values(self) -> np.ndarray:
        return grid_values(*self.grid)


@dataclass(frozen=True)
class SweepRecord:
    family: str
    m: int
    n: int
    perm_id: int
    F_in: float
    F_out: float
    p_ed: float
    p_ad: float
    key_rate: float
    protocol_id: int = -1
    key_rate_dejmps: Optional[float] = None


@functools.lru_cache(maxsize=None)
def _load(cache_dir: Optional[str], m: int) -> Transversal:
    if cache_dir is None:
        return build_transversal(m)
    path = cache_path(cache_dir, m)
    if not path.exists():
        raise MissingCacheError(
            f"no transversal cache for m={m} at {path}; run `edad transversal --m {m}` first"
        )
    return read_transversal(path, m)


def _input_state(noise: str, F: float):
    if noise == "werner":
        return werner(F)
    return dephasing(1.0 - F)


def dejmps_baseline_rate(family: Family, state, perm_set: str) -> float:
    """Key rate when the ED stage is recursive DEJMPS instead of the optimum."""
    ed = dejmps_recursive(family.m, state)
    if ed.degenerate:
        return 0.0
    perms = permutation_set(perm_set)
    mid = ed.state.as_array()[np.array([p.source for p in perms])]
    if family.n == 1:
        p_ad, final = np.ones(len(perms)), mid
    else:
        w = repetition_weights(family.n, mid)
        p_ad = w.sum(axis=-1)
        final = w / np.where(p_ad > 0, p_ad, 1.0)[:, None]
    rates = bb84_rate_array(final, ed.success_prob * p_ad / (family.m * family.n))
    return float(np.max(np.where(p_ad > 0, rates, 0.0)))


def evaluate_point(task) -> tuple[int, int, SweepRecord]:
    fi, gi, family, F, cfg = task
    perms = permutation_set(cfg.perm_set)
    cache = None if cfg.cache_dir is None else str(cfg.cache_dir)
    state = _input_state(cfg.noise, F)
    best = best_protocol(
        family, state, perms, _OBJECTIVE_ALIASES[cfg.objective], _load(cache, family.m)
    )
    f_out = best.outcome.state.p_I if not best.outcome.degenerate else 0.0
    baseline = dejmps_baseline_rate(family, state, cfg.perm_set) if cfg.dejmps_baseline else None
    rec = SweepRecord(
        family.name,
        family.m,
        family.n,
        best.perm_index,
        float(F),
        float(f_out),
        best.p_ed,
        best.p_ad,
        best.key_rate,
        best.protocol_id,
        baseline,
    )
    return fi, gi, rec


def run_sweep(cfg: RunConfig) -> list[SweepRecord]:
    """Optimal record for every (family, grid point), ordered family-major."""
    # fail early on missing caches, before any worker starts
    cache = None if cfg.cache_dir is None else str(cfg.cache_dir)
    for m in sorted({f.m for f in cfg.families}):
        _load(cache, m)
    values = cfg.values()
    tasks = [
        (fi, gi, fam, float(F), cfg)
        for fi, fam in enumerate(cfg.families)
        for gi, F in enumerate(values)
    ]
    if cfg.workers == 1:
        results = [evaluate_point(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(evaluate_point, tasks, chunksize=8))
    results.sort(key=lambda r: (r[0], r[1]))
    return [r[2] for r in results]


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def records_to_csv(records: Sequence[SweepRecord], baseline: bool = False) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = CSV_HEADER + ((BASELINE_COLUMN,) if baseline else ())
    writer.writerow(header)
    for r in records:
        row = [_fmt(getattr(r, h)) for h in header]
        writer.writerow(row)
    return buf.getvalue()


def records_to_jsonl(records: Iterable[SweepRecord]) -> str:
    lines = []
    for r in records:
        d = dataclasses.asdict(r)
        if d["key_rate_dejmps"] is None:
            del d["key_rate_dejmps"]
        lines.append(json.dumps(d, sort_keys=False))
    return "".join(line + "\n" for line in lines)


def read_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))
