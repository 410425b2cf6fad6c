"""Linear algebra over GF(2) and the binary picture of Pauli strings.

Vectors are Python ints used as bit sets: bit ``j`` is column ``j``.  A
Pauli string on ``m`` qubits (equivalently a tensor product of ``m`` Bell
states) is the ``2m``-bit vector ``a = [v; w]`` where bits ``0..m-1`` hold
the X-part ``v`` and bits ``m..2m-1`` hold the Z-part ``w``.

Matrices act on column vectors, so ``(M @ a)_i = row_i . a``.  The
symplectic form in this layout is ``Omega = [[0, I], [I, 0]]``.
"""

from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, ResourceLimitError, SingularMatrixError

PAULI_CHARS = "IXYZ"
# (v, w) code of each single-qubit Pauli, indexed like PAULI_CHARS
PAULI_CODES = ((0, 0), (1, 0), (1, 1), (0, 1))
_CODE_TO_INDEX = {code: i for i, code in enumerate(PAULI_CODES)}


def parity(x: int) -> int:
    return x.bit_count() & 1


def dot(x: int, y: int) -> int:
    """Standard GF(2) inner product of two bit vectors."""
    return (x & y).bit_count() & 1


def _mask(n: int) -> int:
    return (1 << n) - 1


class BellLabel(enum.Enum):
    """The four Bell states, valued by their (v, w) Pauli label."""

    PhiPlus = (0, 0)
    PsiPlus = (1, 0)
    PsiMinus = (1, 1)
    PhiMinus = (0, 1)

    @property
    def pauli(self) -> str:
        return PAULI_CHARS[_CODE_TO_INDEX[self.value]]

    @property
    def index(self) -> int:
        """Slot of this Bell state in a (p_I, p_X, p_Y, p_Z) vector."""
        return _CODE_TO_INDEX[self.value]

    @classmethod
    def from_bits(cls, v: int, w: int) -> "BellLabel":
        return cls((v, w))


@dataclass(frozen=True)
class PauliVector:
    """Binary label ``[v; w]`` of an ``m``-qubit Pauli string."""

    m: int
    bits: int

    def __post_init__(self):
        if self.m < 1:
            raise DimensionError(f"m must be positive, got {self.m}")
        if self.bits < 0 or self.bits >> (2 * self.m):
            raise DimensionError(f"bits do not fit in 2m = {2 * self.m} columns")

    @classmethod
    def from_vw(cls, v: Sequence[int], w: Sequence[int]) -> "PauliVector":
        if len(v) != len(w):
            raise DimensionError("v and w must have equal length")
        m = len(v)
        bits = 0
        for i, (vi, wi) in enumerate(zip(v, w)):
            bits |= (vi & 1) << i
            bits |= (wi & 1) << (m + i)
        return cls(m, bits)

    @classmethod
    def from_string(cls, s: str) -> "PauliVector":
        try:
            codes = [PAULI_CODES[PAULI_CHARS.index(c)] for c in s.upper()]
        except ValueError:
            raise ValueError(f"not a Pauli string: {s!r}") from None
        return cls.from_vw([c[0] for c in codes], [c[1] for c in codes])

    @classmethod
    def from_bell(cls, labels: Sequence[BellLabel]) -> "PauliVector":
        return cls.from_vw([b.value[0] for b in labels], [b.value[1] for b in labels])

    @property
    def v(self) -> int:
        return self.bits & _mask(self.m)

    @property
    def w(self) -> int:
        return self.bits >> self.m

    def component(self, i: int) -> tuple[int, int]:
        """(v_i, w_i) of pair ``i`` (0-based)."""
        if not 0 <= i < self.m:
            raise IndexError(i)
        return (self.bits >> i) & 1, (self.bits >> (self.m + i)) & 1

    def to_string(self) -> str:
        return "".join(PAULI_CHARS[_CODE_TO_INDEX[self.component(i)]] for i in range(self.m))

    def to_bell(self) -> tuple[BellLabel, ...]:
        return tuple(BellLabel(self.component(i)) for i in range(self.m))

    def to_array(self) -> np.ndarray:
        return np.array([(self.bits >> j) & 1 for j in range(2 * self.m)], dtype=np.uint8)


def symplectic_product(a: PauliVector, b: PauliVector) -> int:
    """``<a, b> = v_a . w_b + w_a . v_b (mod 2)``; 1 iff the Paulis anticommute."""
    if a.m != b.m:
        raise DimensionError(f"length mismatch: {2 * a.m} vs {2 * b.m}")
    return symplectic_product_bits(a.bits, b.bits, a.m)


def symplectic_product_bits(x: int, y: int, m: int) -> int:
    mask = _mask(m)
    return (((x & mask) & (y >> m)) ^ ((x >> m) & (y & mask))).bit_count() & 1


@dataclass(frozen=True)
class F2Matrix:
    """Dense matrix over GF(2), one int per row (bit ``j`` = column ``j``)."""

    rows: tuple[int, ...]
    ncols: int

    def __post_init__(self):
        if self.ncols < 0:
            raise DimensionError("negative column count")
        limit = 1 << self.ncols
        for r in self.rows:
            if r < 0 or r >= limit:
                raise DimensionError(f"row {r:#x} does not fit in {self.ncols} columns")

    # construction

    @classmethod
    def identity(cls, n: int) -> "F2Matrix":
        return cls(tuple(1 << i for i in range(n)), n)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "F2Matrix":
        return cls((0,) * nrows, ncols)

    @classmethod
    def from_array(cls, arr) -> "F2Matrix":
        a = np.asarray(arr, dtype=np.int64) & 1
        if a.ndim != 2:
            raise DimensionError("expected a 2-d array")
        rows = tuple(int(sum(int(b) << j for j, b in enumerate(row))) for row in a)
        return cls(rows, a.shape[1])

    @classmethod
    def omega(cls, m: int) -> "F2Matrix":
        """Symplectic form ``[[0, I_m], [I_m, 0]]``."""
        return cls(tuple(1 << (m + i) for i in range(m)) + tuple(1 << i for i in range(m)), 2 * m)

    # shape and access

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    def __getitem__(self, idx: tuple[int, int]) -> int:
        i, j = idx
        if not 0 <= j < self.ncols:
            raise IndexError(j)
        return (self.rows[i] >> j) & 1

    def to_array(self) -> np.ndarray:
        return np.array(
            [[(r >> j) & 1 for j in range(self.ncols)] for r in self.rows], dtype=np.uint8
        ).reshape(self.nrows, self.ncols)

    def __repr__(self) -> str:
        body = "; ".join("".join(str((r >> j) & 1) for j in range(self.ncols)) for r in self.rows)
        return f"F2Matrix([{body}])"

    # arithmetic

    def transpose(self) -> "F2Matrix":
        cols = []
        for j in range(self.ncols):
            c = 0
            for i, r in enumerate(self.rows):
                c |= ((r >> j) & 1) << i
            cols.append(c)
        return F2Matrix(tuple(cols), self.nrows)

    @property
    def T(self) -> "F2Matrix":
        return self.transpose()

    def __matmul__(self, other):
        if isinstance(other, F2Matrix):
            if self.ncols != other.nrows:
                raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
            out = []
            for r in self.rows:
                acc = 0
                j = 0
                while r:
                    if r & 1:
                        acc ^= other.rows[j]
                    r >>= 1
                    j += 1
                out.append(acc)
            return F2Matrix(tuple(out), other.ncols)
        if isinstance(other, PauliVector):
            if self.nrows != self.ncols or self.ncols != 2 * other.m:
                raise DimensionError(f"cannot apply {self.shape} matrix to a {2 * other.m}-vector")
            return PauliVector(other.m, self.apply(other.bits))
        return NotImplemented

    def apply(self, x: int) -> int:
        """Matrix-vector product on a bit-vector int."""
        out = 0
        for i, r in enumerate(self.rows):
            out |= ((r & x).bit_count() & 1) << i
        return out

    def __add__(self, other: "F2Matrix") -> "F2Matrix":
        if self.shape != other.shape:
            raise DimensionError(f"shape mismatch {self.shape} vs {other.shape}")
        return F2Matrix(tuple(a ^ b for a, b in zip(self.rows, other.rows)), self.ncols)

    def rref(self) -> tuple["F2Matrix", tuple[int, ...]]:
        """Reduced row echelon form and its pivot columns (leftmost first).

        Zero rows are dropped, so the result has ``rank`` rows.
        """
        rows, pivots = rref_rows(self.rows, self.ncols)
        return F2Matrix(rows, self.ncols), pivots

    def rank(self) -> int:
        return len(rref_rows(self.rows, self.ncols)[0])

    def inverse(self) -> "F2Matrix":
        n = self.nrows
        if n != self.ncols:
            raise DimensionError("only square matrices are invertible")
        # augmented [A | I], identity in the high n bits
        aug = [r | (1 << (n + i)) for i, r in enumerate(self.rows)]
        for col in range(n):
            pivot = next((i for i in range(col, n) if (aug[i] >> col) & 1), None)
            if pivot is None:
                raise SingularMatrixError("matrix is singular over GF(2)")
            aug[col], aug[pivot] = aug[pivot], aug[col]
            for i in range(n):
                if i != col and (aug[i] >> col) & 1:
                    aug[i] ^= aug[col]
        return F2Matrix(tuple(r >> n for r in aug), n)

    def is_invertible(self) -> bool:
        return self.nrows == self.ncols and self.rank() == self.nrows


def rref_rows(rows: Iterable[int], ncols: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Canonical RREF of a list of row ints; returns (nonzero rows, pivots)."""
    work = [r for r in rows]
    out: list[int] = []
    pivots: list[int] = []
    for col in range(ncols):
        bit = 1 << col
        idx = next((i for i, r in enumerate(work) if r & bit), None)
        if idx is None:
            continue
        p = work.pop(idx)
        work = [r ^ p if r & bit else r for r in work]
        out = [r ^ p if r & bit else r for r in out]
        out.append(p)
        pivots.append(col)
    return tuple(out), tuple(pivots)


def is_symplectic(M: F2Matrix) -> bool:
    """True iff ``M Omega M^T = Omega``."""
    n, k = M.shape
    if n != k or n % 2:
        raise DimensionError(f"expected a square matrix of even size, got {M.shape}")
    omega = F2Matrix.omega(n // 2)
    return M @ omega @ M.T == omega


# generator images; conjugation of the Pauli label by the named gate

def hadamard_image(m: int, q: int) -> F2Matrix:
    rows = list(F2Matrix.identity(2 * m).rows)
    rows[q], rows[m + q] = rows[m + q], rows[q]
    return F2Matrix(tuple(rows), 2 * m)


def phase_image(m: int, q: int) -> F2Matrix:
    """S gate: X -> Y, i.e. ``w_q += v_q``."""
    rows = list(F2Matrix.identity(2 * m).rows)
    rows[m + q] |= 1 << q
    return F2Matrix(tuple(rows), 2 * m)


def rx_image(m: int, q: int) -> F2Matrix:
    """x-rotation by pi/2: Z -> Y, i.e. ``v_q += w_q``."""
    rows = list(F2Matrix.identity(2 * m).rows)
    rows[q] |= 1 << (m + q)
    return F2Matrix(tuple(rows), 2 * m)


def cnot_image(m: int, control: int, target: int) -> F2Matrix:
    """CNOT: ``v_t += v_c`` and ``w_c += w_t``."""
    if control == target:
        raise ValueError("control and target must differ")
    rows = list(F2Matrix.identity(2 * m).rows)
    rows[target] |= 1 << control
    rows[m + control] |= 1 << (m + target)
    return F2Matrix(tuple(rows), 2 * m)


def generator_images(m: int) -> list[F2Matrix]:
    gens = [hadamard_image(m, q) for q in range(m)]
    gens += [phase_image(m, q) for q in range(m)]
    gens += [cnot_image(m, c, t) for c, t in itertools.permutations(range(m), 2)]
    return gens


def generate_symplectic_group(m: int, limit: int = 2_000_000) -> set[F2Matrix]:
    """Breadth-first closure of Sp(2m, Z2) from H, S and CNOT images."""
    if m < 1:
        raise DimensionError("m must be positive")
    gens = generator_images(m)
    ident = F2Matrix.identity(2 * m)
    seen = {ident}
    queue = deque([ident])
    while queue:
        g = queue.popleft()
        for h in gens:
            x = h @ g
            if x not in seen:
                if len(seen) >= limit:
                    raise ResourceLimitError(f"group closure exceeded limit={limit}")
                seen.add(x)
                queue.append(x)
    return seen


def symplectic_group_order(m: int) -> int:
    order = 2 ** (m * m)
    for j in range(1, m + 1):
        order *= 4**j - 1
    return order
