"""Exact linear algebra over Z/N.

Conventions used by the whole package: vectors are rows, maps act by
right multiplication (``x * A``), and "span" always means row span.
The canonical form for a row span is the Howell normal form, which is
the correct replacement for reduced row echelon form over Z/N: two
matrices have the same row span iff they have the same Howell form.

All arithmetic is exact; entries are stored as least nonnegative
residues.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd

MAX_MODULUS = 2**31 - 1


class DimensionError(ValueError):
    """Raised on shape or modulus mismatches."""


def _check_modulus(n: int) -> None:
    if not isinstance(n, int) or n < 2 or n > MAX_MODULUS:
        raise ValueError(f"modulus must be an integer in [2, 2^31-1], got {n!r}")


@dataclass(frozen=True)
class MatZN:
    """Immutable dense matrix over Z/n, entries row-major in [0, n)."""

    n: int
    rows: int
    cols: int
    entries: tuple

    def __post_init__(self):
        _check_modulus(self.n)
        if self.rows < 0 or self.cols < 0:
            raise DimensionError("negative dimensions")
        if len(self.entries) != self.rows * self.cols:
            raise DimensionError("entry count does not match dimensions")
        if any(not (0 <= e < self.n) for e in self.entries):
            raise ValueError("entries must be reduced residues in [0, n)")

    # -- constructors ---------------------------------------------------

    @staticmethod
    def from_rows(n: int, rows, cols: int | None = None) -> "MatZN":
        rows = [list(r) for r in rows]
        if cols is None:
            if not rows:
                raise DimensionError("cols required for a matrix with no rows")
            cols = len(rows[0])
        if any(len(r) != cols for r in rows):
            raise DimensionError("ragged rows")
        flat = tuple(x % n for r in rows for x in r)
        return MatZN(n, len(rows), cols, flat)

    @staticmethod
    def zero(n: int, rows: int, cols: int) -> "MatZN":
        return MatZN(n, rows, cols, (0,) * (rows * cols))

    @staticmethod
    def identity(n: int, size: int) -> "MatZN":
        flat = tuple(1 if i == j else 0 for i in range(size) for j in range(size))
        return MatZN(n, size, size, flat)

    # -- access ----------------------------------------------------------

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def row_list(self):
        return [list(self.row(i)) for i in range(self.rows)]

    # -- arithmetic -------------------------------------------------------

    def _same_shape(self, other: "MatZN"):
        if self.n != other.n:
            raise DimensionError("modulus mismatch")
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionError("shape mismatch")

    def __add__(self, other: "MatZN") -> "MatZN":
        self._same_shape(other)
        n = self.n
        return MatZN(n, self.rows, self.cols,
                     tuple((a + b) % n for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "MatZN") -> "MatZN":
        self._same_shape(other)
        n = self.n
        return MatZN(n, self.rows, self.cols,
                     tuple((a - b) % n for a, b in zip(self.entries, other.entries)))

    def __neg__(self) -> "MatZN":
        n = self.n
        return MatZN(n, self.rows, self.cols, tuple((-a) % n for a in self.entries))

    def scale(self, c: int) -> "MatZN":
        n = self.n
        c %= n
        return MatZN(n, self.rows, self.cols, tuple((c * a) % n for a in self.entries))

    def __mul__(self, other: "MatZN") -> "MatZN":
        if self.n != other.n:
            raise DimensionError("modulus mismatch")
        if self.cols != other.rows:
            raise DimensionError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        n = self.n
        out = []
        for i in range(self.rows):
            ri = self.row(i)
            for j in range(other.cols):
                s = 0
                for k in range(other.rows):
                    a = ri[k]
                    if a:
                        s += a * other.entries[k * other.cols + j]
                out.append(s % n)
        return MatZN(n, self.rows, other.cols, tuple(out))

    def is_zero(self) -> bool:
        return not any(self.entries)

    # -- block operations --------------------------------------------------

    def vstack(self, other: "MatZN") -> "MatZN":
        if self.n != other.n or self.cols != other.cols:
            raise DimensionError("vstack mismatch")
        return MatZN(self.n, self.rows + other.rows, self.cols, self.entries + other.entries)

    def hstack(self, other: "MatZN") -> "MatZN":
        if self.n != other.n or self.rows != other.rows:
            raise DimensionError("hstack mismatch")
        flat = []
        for i in range(self.rows):
            flat.extend(self.row(i))
            flat.extend(other.row(i))
        return MatZN(self.n, self.rows, self.cols + other.cols, tuple(flat))

    def submatrix(self, row_lo, row_hi, col_lo, col_hi) -> "MatZN":
        flat = []
        for i in range(row_lo, row_hi):
            flat.extend(self.entries[i * self.cols + col_lo : i * self.cols + col_hi])
        return MatZN(self.n, row_hi - row_lo, col_hi - col_lo, tuple(flat))


def block_diag(mats, n=None, cols_if_empty=0):
    """Block-diagonal stack of matrices over a common modulus."""
    mats = list(mats)
    if not mats:
        raise DimensionError("block_diag of nothing" if n is None else "no blocks")
    n = mats[0].n
    total_rows = sum(m.rows for m in mats)
    total_cols = sum(m.cols for m in mats)
    out = [[0] * total_cols for _ in range(total_rows)]
    r0 = c0 = 0
    for m in mats:
        for i in range(m.rows):
            out[r0 + i][c0 : c0 + m.cols] = list(m.row(i))
        r0 += m.rows
        c0 += m.cols
    return MatZN.from_rows(n, out, total_cols)


def _xgcd(a: int, b: int):
    """Extended gcd: returns (g, s, t) with s*a + t*b == g."""
    r0, r1, s0, s1, t0, t1 = a, b, 1, 0, 0, 1
    while r1:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    return r0, s0, t0


def _unit_for(a: int, n: int) -> int:
    """A unit u mod n with (u * a) % n == gcd(a, n)."""
    a %= n
    if a == 0:
        return 1
    g = gcd(a, n)
    m = n // g
    a1 = a // g
    v = pow(a1, -1, m) if m > 1 else 1
    u = v % n
    # lift the inverse mod n/g to a unit mod n (always possible)
    while gcd(u, n) != 1:
        u = (u + m) % n
        if u == v % n:  # pragma: no cover - cannot happen
            raise ArithmeticError("no unit lift found")
    return u


def _howell_core(rows, n, cols):
    """Howell-reduce augmented rows in place.

    ``rows`` is a list of lists of width >= cols; pivots are sought in the
    first ``cols`` columns only, and row operations act on full rows (so an
    identity augmentation yields the transform, and rows whose matrix part
    vanishes certify kernel elements).

    Returns (result, leftover) where ``result`` is the list of Howell rows
    (nonzero matrix part, strictly increasing pivot columns, normalized and
    reduced) and ``leftover`` collects the rows whose first ``cols`` entries
    are all zero.
    """
    work = [r for r in rows if any(r[:cols])]
    leftover = [r for r in rows if not any(r[:cols])]
    result = []
    for c in range(cols):
        with_piv = [r for r in work if r[c]]
        rest = [r for r in work if not r[c]]
        if with_piv:
            piv = with_piv[0]
            for r in with_piv[1:]:
                a, b = piv[c], r[c]
                g, s, t = _xgcd(a, b)
                new_piv = [(s * x + t * y) % n for x, y in zip(piv, r)]
                new_r = [((a // g) * y - (b // g) * x) % n for x, y in zip(piv, r)]
                piv = new_piv
                if any(new_r[:cols]):
                    rest.append(new_r)
                elif any(new_r):
                    leftover.append(new_r)
            u = _unit_for(piv[c], n)
            if u != 1:
                piv = [(u * x) % n for x in piv]
            ann_mult = n // gcd(piv[c], n)
            ann = [(ann_mult * x) % n for x in piv]
            if any(ann[:cols]):
                rest.append(ann)
            elif any(ann):
                leftover.append(ann)
            result.append(piv)
        work = rest
    # reduce entries above each pivot
    for i, piv in enumerate(result):
        c = next(k for k in range(cols) if piv[k])
        p = piv[c]
        for j in range(i):
            q = result[j][c] // p
            if q:
                result[j] = [(x - q * y) % n for x, y in zip(result[j], piv)]
    return result, leftover


def howell_form(m: MatZN):
    """Howell normal form.

    Returns (H, U) with H = U * m, H the unique Howell normal form of m's
    row span (pivot columns strictly increasing, each pivot the minimal
    positive generator gcd(entry, N) of its column's leading ideal, entries
    above pivots reduced modulo the pivot). Zero rows are trimmed, so U has
    shape (H.rows x m.rows); it extends to an invertible transform on the
    zero-padded matrix.
    """
    n, cols = m.n, m.cols
    aug = [list(m.row(i)) + [1 if j == i else 0 for j in range(m.rows)]
           for i in range(m.rows)]
    result, _ = _howell_core(aug, n, cols)
    h = MatZN.from_rows(n, [r[:cols] for r in result], cols)
    u = MatZN.from_rows(n, [r[cols:] for r in result], m.rows)
    return h, u


def kernel(m: MatZN) -> MatZN:
    """Generators (in Howell form) of { x : x * m == 0 }."""
    n, cols = m.n, m.cols
    aug = [list(m.row(i)) + [1 if j == i else 0 for j in range(m.rows)]
           for i in range(m.rows)]
    _, leftover = _howell_core(aug, n, cols)
    ker_rows = [r[cols:] for r in leftover]
    ker, _ = _howell_core(ker_rows, n, m.rows) if ker_rows else ([], None)
    return MatZN.from_rows(n, ker, m.rows)


def _reduce_against(h_rows, vec, n, cols):
    """Greedy reduction of ``vec`` against Howell rows.

    Returns (residual, coeffs): residual = vec - sum(coeffs[i] * h_rows[i]).
    Coefficients are the canonical (smallest) greedy choices.
    """
    v = list(vec)
    coeffs = [0] * len(h_rows)
    for i, row in enumerate(h_rows):
        c = next((k for k in range(cols) if row[k]), None)
        if c is None:
            continue
        p = row[c]
        if v[c] == 0:
            continue
        g = gcd(p, n)
        if v[c] % g:
            continue  # cannot clear; membership will fail on residual
        # solve y * p == v[c] (mod n); canonical smallest solution
        u = _unit_for(p, n)
        y = ((v[c] // g) * u) % (n // g)
        coeffs[i] = y
        v = [(x - y * r) % n for x, r in zip(v, row)]
    return v, coeffs


def solve(m: MatZN, b) -> list | None:
    """Canonical solution x of x * m == b, or None if no solution exists.

    ``b`` is a row vector of length m.cols; x has length m.rows with free
    coordinates set to 0 (reduction happens through the Howell form of m,
    so the output is deterministic).
    """
    b = [x % m.n for x in b]
    if len(b) != m.cols:
        raise DimensionError(f"rhs length {len(b)} != cols {m.cols}")
    n, cols = m.n, m.cols
    aug = [list(m.row(i)) + [1 if j == i else 0 for j in range(m.rows)]
           for i in range(m.rows)]
    result, _ = _howell_core(aug, n, cols)
    h_rows = [r[:cols] for r in result]
    residual, coeffs = _reduce_against(h_rows, b, n, cols)
    if any(residual):
        return None
    x = [0] * m.rows
    for y, r in zip(coeffs, result):
        if y:
            for j in range(m.rows):
                x[j] = (x[j] + y * r[cols + j]) % n
    return x


def row_span_contains(m: MatZN, v) -> bool:
    """True iff the row vector v lies in the row span of m."""
    return solve(m, v) is not None


def span_equal(a: MatZN, b: MatZN) -> bool:
    """Whether two matrices (same shape family) have equal row spans."""
    if a.n != b.n or a.cols != b.cols:
        raise DimensionError("span comparison mismatch")
    ha, _ = howell_form(a)
    hb, _ = howell_form(b)
    return ha.entries == hb.entries and ha.rows == hb.rows


def span_contains_span(big: MatZN, small: MatZN) -> bool:
    """Whether every row of ``small`` lies in the row span of ``big``."""
    return all(row_span_contains(big, small.row(i)) for i in range(small.rows))
