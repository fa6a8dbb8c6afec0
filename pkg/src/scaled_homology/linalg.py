"""Exact sparse column reduction and small dense rational matrices.

Sparse columns are plain ``dict`` objects mapping a row id to a non-zero
coefficient.  Coefficients are ``int`` whenever they are integral and
``Fraction`` otherwise; both compare and combine exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

Coeff = int | Fraction
Column = dict[int, Coeff]


def normalize(x: Coeff) -> Coeff:
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    return x


def exact_div(a: Coeff, b: Coeff) -> Coeff:
    if isinstance(a, int) and isinstance(b, int) and a % b == 0:
        return a // b
    return normalize(Fraction(a) / Fraction(b))


def axpy(col: Column, factor: Coeff, other: Mapping[int, Coeff]) -> None:
    """In place ``col -= factor * other``, dropping zeros."""
    for k, v in other.items():
        nv = col.get(k, 0) - factor * v
        if nv:
            col[k] = normalize(nv)
        else:
            col.pop(k, None)


class ColumnReduction:
    """Left-to-right reduction of a sparse matrix with pivot memoization.

    Columns are processed in increasing id order; the pivot ("low") of a
    column is its largest row id.  Column ids listed in ``cleared`` are known
    in advance to reduce to zero and are skipped (clearing).  With
    ``track=True`` the reduction matrix V is recorded so that ``R = D V``.
    """

    def __init__(
        self,
        columns: Iterable[tuple[int, Column]],
        *,
        cleared: Iterable[int] = (),
        track: bool = False,
    ) -> None:
        cleared = set(cleared)
        self.pivots: dict[int, int] = {}
        self.reduced: dict[int, Column] = {}
        self.zero: list[int] = []
        self.v: dict[int, Column] = {}
        self.track = track
        for cid, col in sorted(columns, key=lambda item: item[0]):
            if cid in cleared:
                self.zero.append(cid)
                continue
            self._reduce_column(cid, dict(col))

    def _reduce_column(self, cid: int, col: Column) -> None:
        v: Column = {cid: 1} if self.track else {}
        while col:
            low = max(col)
            other = self.pivots.get(low)
            if other is None:
                self.pivots[low] = cid
                self.reduced[cid] = col
                if self.track:
                    self.v[cid] = v
                return
            ocol = self.reduced[other]
            factor = exact_div(col[low], ocol[low])
            axpy(col, factor, ocol)
            if self.track:
                axpy(v, factor, self.v[other])
        self.zero.append(cid)
        if self.track:
            self.v[cid] = v

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce_vector(self, vec: Column) -> Column:
        """Reduce ``vec`` against the pivot columns; returns the remainder."""
        vec = dict(vec)
        while vec:
            low = max(vec)
            other = self.pivots.get(low)
            if other is None:
                return vec
            ocol = self.reduced[other]
            axpy(vec, exact_div(vec[low], ocol[low]), ocol)
        return vec


def sparse_matmul(a_cols: Sequence[Mapping[int, Coeff]], b_cols: Sequence[Mapping[int, Coeff]]) -> list[Column]:
    """Product of two column-sparse matrices (columns of ``a`` indexed by rows of ``b``)."""
    out = []
    for bcol in b_cols:
        acc: Column = {}
        for k, coeff in bcol.items():
            axpy(acc, -coeff, a_cols[k])
        out.append(acc)
    return out


@dataclass(frozen=True)
class RationalMatrix:
    """Dense exact matrix; ``rows`` holds ``Fraction`` entries."""

    rows: tuple[tuple[Fraction, ...], ...]
    ncols: int

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[Coeff]], ncols: int | None = None) -> "RationalMatrix":
        rows = tuple(tuple(Fraction(x) for x in r) for r in rows)
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged matrix")
        return cls(rows, ncols)

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[Coeff]], nrows: int) -> "RationalMatrix":
        return cls.from_rows(([columns[j][i] for j in range(len(columns))] for i in range(nrows)), len(columns))

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls.from_rows(([int(i == j) for j in range(n)] for i in range(n)), n)

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "RationalMatrix":
        return cls.from_rows(([0] * ncols for _ in range(nrows)), ncols)

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), self.ncols

    @property
    def is_square(self) -> bool:
        return len(self.rows) == self.ncols

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.rows[i][j]

    def __iter__(self) -> Iterator[tuple[Fraction, ...]]:
        return iter(self.rows)

    def __matmul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.ncols != len(other.rows):
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        cols = list(zip(*other.rows)) if other.rows else [()] * other.ncols
        return RationalMatrix.from_rows(
            ([sum((a * b for a, b in zip(r, c)), Fraction(0)) for c in cols] for r in self.rows),
            other.ncols,
        )

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix.from_rows(
            ([self.rows[i][j] for i in range(len(self.rows))] for j in range(self.ncols)), len(self.rows)
        )

    def column(self, j: int) -> list[Fraction]:
        return [r[j] for r in self.rows]

    def _echelon(self) -> tuple[list[list[Fraction]], int, Fraction]:
        m = [list(r) for r in self.rows]
        nrows, rank, det = len(m), 0, Fraction(1)
        for c in range(self.ncols):
            piv = next((i for i in range(rank, nrows) if m[i][c] != 0), None)
            if piv is None:
                det = Fraction(0)
                continue
            if piv != rank:
                m[rank], m[piv] = m[piv], m[rank]
                det = -det
            p = m[rank][c]
            det *= p
            for i in range(nrows):
                if i != rank and m[i][c] != 0:
                    f = m[i][c] / p
                    m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
            rank += 1
        return m, rank, det

    def rank(self) -> int:
        return self._echelon()[1]

    def det(self) -> Fraction:
        if not self.is_square:
            raise ValueError("determinant of a non-square matrix")
        if not self.rows:
            return Fraction(1)
        _, rank, det = self._echelon()
        return det if rank == self.ncols else Fraction(0)

    def trace(self) -> Fraction:
        if not self.is_square:
            raise ValueError("trace of a non-square matrix")
        return sum((self.rows[i][i] for i in range(self.ncols)), Fraction(0))

    def is_invertible(self) -> bool:
        return self.is_square and self.rank() == self.ncols

    def inverse(self) -> "RationalMatrix":
        n = self.ncols
        if not self.is_invertible():
            raise ValueError("matrix is not invertible")
        aug = RationalMatrix.from_rows((list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(self.rows)))
        m, _, _ = aug._echelon()
        return RationalMatrix.from_rows(([x / m[i][i] for x in m[i][n:]] for i in range(n)), n)

    def to_json(self) -> list[list[dict[str, int]]]:
        return [[{"numerator": x.numerator, "denominator": x.denominator} for x in r] for r in self.rows]

    def __str__(self) -> str:
        return "[" + ", ".join("[" + ", ".join(str(x) for x in r) + "]" for r in self.rows) + "]"


@dataclass(frozen=True)
class SparseMatrix:
    """Column-sparse exact matrix."""

    nrows: int
    columns: tuple[Mapping[int, Coeff], ...]

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, len(self.columns)

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if len(self.columns) != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        return SparseMatrix(self.nrows, tuple(sparse_matmul(self.columns, other.columns)))

    def is_zero(self) -> bool:
        return not any(self.columns)

    def nnz(self) -> int:
        return sum(len(c) for c in self.columns)

    def to_dense(self) -> RationalMatrix:
        rows = [[0] * len(self.columns) for _ in range(self.nrows)]
        for j, col in enumerate(self.columns):
            for i, v in col.items():
                rows[i][j] = v
        return RationalMatrix.from_rows(rows, len(self.columns))

    def rank(self) -> int:
        return ColumnReduction(enumerate(self.columns)).rank
