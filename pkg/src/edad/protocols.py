"""Equivalence classes of m-1 bi-local Clifford distillation protocols.

A protocol with symplectic image ``M`` maps a Bell label ``a`` to ``M a``.
Pairs ``2..m`` are measured and the run is kept iff their X-parts vanish,
so acceptance depends on rows ``2..m`` of ``M`` and the kept label on rows
``1`` and ``m+1``.  Modulo relabelling of the three error components of the
output, the statistics are fixed by the (m-1)-dimensional isotropic space
spanned by rows ``2..m``.  One representative per such space is a
transversal.
"""

from __future__ import annotations

import functools
import os
import struct
import zlib
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CorruptCacheError, InvalidSubspaceError, UnsupportedSizeError
from .f2 import F2Matrix, is_symplectic, rref_rows, symplectic_group_order, symplectic_product_bits

MAX_PAIRS = 4

MAGIC = b"BLCT"
VERSION = 1
_HEADER = struct.Struct("<4sBHQ")
_CRC = struct.Struct("<I")

CACHE_ENV = "EDAD_CACHE_DIR"


def counting_formulas(m: int) -> tuple[int, int]:
    """(|Sp(2m, Z2)|, number of distillation-equivalence classes)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    index = 2**m - 1
    for j in range(1, m + 1):
        index *= 2**j + 1
    assert index % 3 == 0
    return symplectic_group_order(m), index // 3


def _check_m(m: int) -> None:
    if not 1 <= m <= MAX_PAIRS:
        raise UnsupportedSizeError(f"m={m} outside supported range 1..{MAX_PAIRS}")


def _swap_halves(x: int, m: int) -> int:
    # <c, x> == dot(_swap_halves(c), x)
    mask = (1 << m) - 1
    return (x >> m) | ((x & mask) << m)


def _span(basis: tuple[int, ...]) -> set[int]:
    span = {0}
    for b in basis:
        span |= {s ^ b for s in span}
    return span


def _row_key(basis: tuple[int, ...], ncols: int) -> tuple:
    return tuple(tuple((r >> j) & 1 for j in range(ncols)) for r in basis)


def enumerate_isotropic_subspaces(m: int) -> list[tuple[int, ...]]:
    """All (m-1)-dimensional isotropic subspaces of GF(2)^{2m}.

    Each subspace is returned as its canonical RREF basis; the list is sorted
    lexicographically on the bases read column 0 first.
    """
    _check_m(m)
    n = 2 * m
    level: set[tuple[int, ...]] = {()}
    for _ in range(m - 1):
        nxt: set[tuple[int, ...]] = set()
        for basis in level:
            span = _span(basis)
            for x in range(1, 1 << n):
                if x in span:
                    continue
                if any(symplectic_product_bits(x, b, m) for b in basis):
                    continue
                nxt.add(rref_rows(basis + (x,), n)[0])
        level = nxt
    return sorted(level, key=lambda b: _row_key(b, n))


def _solve(constraints: list[int], targets: list[int], n: int) -> tuple[int | None, list[int]]:
    """Solve ``dot(c_k, x) = t_k`` over GF(2).

    Returns the particular solution with all free variables zero (or None if
    inconsistent) and a nullspace basis ordered by free column.
    """
    rows = [(c, t) for c, t in zip(constraints, targets)]
    pivots: list[tuple[int, int, int]] = []  # (col, row, target)
    for col in range(n):
        bit = 1 << col
        idx = next((i for i, (r, _) in enumerate(rows) if r & bit), None)
        if idx is None:
            continue
        pr, pt = rows.pop(idx)
        rows = [(r ^ pr, t ^ pt) if r & bit else (r, t) for r, t in rows]
        pivots = [(c, r ^ pr, t ^ pt) if r & bit else (c, r, t) for c, r, t in pivots]
        pivots.append((col, pr, pt))
    if any(t for r, t in rows if r == 0):
        return None, []
    pivot_cols = {c for c, _, _ in pivots}
    x = 0
    for c, _, t in pivots:
        if t:
            x |= 1 << c
    null = []
    for j in range(n):
        if j in pivot_cols:
            continue
        vec = 1 << j
        for c, r, _ in pivots:
            if (r >> j) & 1:
                vec |= 1 << c
        null.append(vec)
    return x, null


@dataclass(frozen=True)
class SymplecticProtocol:
    """An m-1 protocol given by the symplectic image of its Clifford."""

    m: int
    matrix: F2Matrix
    id: int = -1
    subspace: tuple[int, ...] = field(default=(), compare=False)

    @property
    def kept_rows(self) -> tuple[int, int]:
        """Rows giving the (v, w) label of the kept pair."""
        return self.matrix.rows[0], self.matrix.rows[self.m]

    @property
    def check_rows(self) -> tuple[int, ...]:
        """Rows whose parity must vanish for the run to be accepted."""
        return self.matrix.rows[1 : self.m]


def complete_to_protocol(subspace, m: int, protocol_id: int = -1) -> SymplecticProtocol:
    """Complete an isotropic (m-1)-basis to a symplectic matrix.

    The basis becomes rows 2..m, rows 1 and m+1 span a hyperbolic pair in its
    symplectic complement and the remaining rows are symplectic partners of
    the basis.  Free choices are made deterministically.
    """
    _check_m(m)
    n = 2 * m
    basis = tuple(int(b) for b in subspace)
    if len(basis) != m - 1:
        raise InvalidSubspaceError(f"expected {m - 1} basis vectors, got {len(basis)}")
    if any(b <= 0 or b >> n for b in basis):
        raise InvalidSubspaceError("basis vectors must be nonzero and fit in 2m bits")
    if len(rref_rows(basis, n)[0]) != len(basis):
        raise InvalidSubspaceError("basis vectors are linearly dependent")
    for i, a in enumerate(basis):
        for b in basis[i + 1 :]:
            if symplectic_product_bits(a, b, m):
                raise InvalidSubspaceError("basis is not isotropic")

    partners: list[int] = []
    for j, _ in enumerate(basis):
        cons = [_swap_halves(b, m) for b in basis] + [_swap_halves(f, m) for f in partners]
        tgts = [int(k == j) for k in range(len(basis))] + [0] * len(partners)
        x, _ = _solve(cons, tgts, n)
        assert x is not None
        partners.append(x)

    cons = [_swap_halves(b, m) for b in basis + tuple(partners)]
    _, null = _solve(cons, [0] * len(cons), n)
    e1 = null[0]
    x, _ = _solve(cons + [_swap_halves(e1, m)], [0] * len(cons) + [1], n)
    assert x is not None
    rows = (e1,) + basis + (x,) + tuple(partners)
    M = F2Matrix(rows, n)
    assert is_symplectic(M)
    return SymplecticProtocol(m, M, protocol_id, rref_rows(basis, n)[0])


@dataclass(frozen=True)
class Transversal:
    m: int
    protocols: tuple[SymplecticProtocol, ...]

    def __len__(self) -> int:
        return len(self.protocols)

    def __iter__(self):
        return iter(self.protocols)

    def __getitem__(self, i: int) -> SymplecticProtocol:
        return self.protocols[i]

    @functools.cached_property
    def checksum(self) -> int:
        """CRC-32 of the serialized body (the value stored in the cache)."""
        return zlib.crc32(_serialize_body(self))


@functools.lru_cache(maxsize=None)
def build_transversal(m: int) -> Transversal:
    """One protocol per equivalence class, ordered by canonical subspace."""
    spaces = enumerate_isotropic_subspaces(m)
    protocols = tuple(complete_to_protocol(s, m, i) for i, s in enumerate(spaces))
    expected = counting_formulas(m)[1]
    if len(protocols) != expected:
        raise AssertionError(f"built {len(protocols)} classes for m={m}, expected {expected}")
    return Transversal(m, protocols)


# cache file: header, records of 2m rows x ceil(2m/8) bytes, CRC-32 trailer

def _row_bytes(m: int) -> int:
    return (2 * m + 7) // 8


def _serialize_body(t: Transversal) -> bytes:
    nb = _row_bytes(t.m)
    parts = [_HEADER.pack(MAGIC, VERSION, t.m, len(t.protocols))]
    for p in t.protocols:
        parts.extend(r.to_bytes(nb, "little") for r in p.matrix.rows)
    return b"".join(parts)


def serialize_transversal(t: Transversal) -> bytes:
    body = _serialize_body(t)
    return body + _CRC.pack(zlib.crc32(body))


def deserialize_transversal(data: bytes, m: int | None = None) -> Transversal:
    if len(data) < _HEADER.size + _CRC.size:
        raise CorruptCacheError("truncated file")
    magic, version, fm, count = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise CorruptCacheError(f"bad magic {magic!r}")
    if version != VERSION:
        raise CorruptCacheError(f"unsupported version {version}")
    nb = _row_bytes(fm) if fm else 0
    expected_len = _HEADER.size + count * 2 * fm * nb + _CRC.size
    if len(data) != expected_len:
        raise CorruptCacheError(f"file length {len(data)} != expected {expected_len}")
    (crc,) = _CRC.unpack_from(data, len(data) - _CRC.size)
    if zlib.crc32(data[: -_CRC.size]) != crc:
        raise CorruptCacheError("checksum mismatch")
    if not 1 <= fm <= MAX_PAIRS:
        raise CorruptCacheError(f"stored m={fm} unsupported")
    if m is not None and fm != m:
        raise CorruptCacheError(f"count mismatch: cache holds m={fm}, requested m={m}")
    if count != counting_formulas(fm)[1]:
        raise CorruptCacheError(f"count mismatch: {count} records for m={fm}")
    protocols = []
    off = _HEADER.size
    for i in range(count):
        rows = []
        for _ in range(2 * fm):
            rows.append(int.from_bytes(data[off : off + nb], "little"))
            off += nb
        try:
            M = F2Matrix(tuple(rows), 2 * fm)
        except ValueError as exc:
            raise CorruptCacheError(f"record {i}: {exc}") from None
        if not is_symplectic(M):
            raise CorruptCacheError(f"record {i} is not symplectic")
        sub = rref_rows(M.rows[1:fm], 2 * fm)[0]
        protocols.append(SymplecticProtocol(fm, M, i, sub))
    return Transversal(fm, tuple(protocols))


def write_transversal(path, t: Transversal) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_bytes(serialize_transversal(t))
    os.replace(tmp, path)


def read_transversal(path, m: int | None = None) -> Transversal:
    return deserialize_transversal(Path(path).read_bytes(), m)


def default_cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "edad"


def cache_path(cache_dir, m: int) -> Path:
    return Path(cache_dir) / f"transversal_m{m}.blct"
