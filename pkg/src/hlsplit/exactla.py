"""Dense exact linear algebra over the rationals.

Scalars are ``gmpy2.mpq`` (always reduced, positive denominator).  Matrices are
immutable row-major tables; subspaces of ``Q^n`` are stored by a canonical
reduced column-echelon basis so that equality of subspaces is equality of
bases.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from gmpy2 import lcm, mpq, mpz

Rat = type(mpq(0))

ZERO = mpq(0)
ONE = mpq(1)
ZERO_Z = mpz(0)
ONE_Z = mpz(1)


class LinAlgError(ValueError):
    pass


class NoSolution(LinAlgError):
    """The right-hand side is not in the image."""


class NonUnique(LinAlgError):
    """Solvable, but the coefficient matrix has a nontrivial kernel."""

    def __init__(self, solution: "Mat", kernel: "Subspace"):
        super().__init__(f"solution is not unique (kernel dimension {kernel.dim})")
        self.solution = solution
        self.kernel = kernel


class AmbientMismatch(LinAlgError):
    pass


class NotContained(LinAlgError):
    pass


class Singular(LinAlgError):
    pass


def rat(x) -> Rat:
    """Coerce ints, Fractions, mpq and strings like ``"-3/4"`` to mpq."""
    if isinstance(x, Rat):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return mpq(x)
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, str):
        s = x.strip().replace("−", "-")
        if not s or any(c.isspace() for c in s):
            raise ValueError(f"malformed rational {x!r}")
        num, _, den = s.partition("/")
        try:
            n = int(num)
            d = int(den) if den else 1
        except ValueError:
            raise ValueError(f"malformed rational {x!r}") from None
        if d == 0:
            raise ValueError(f"zero denominator in {x!r}")
        return mpq(n, d)
    raise TypeError(f"cannot interpret {type(x).__name__} as a rational")


def rat_str(q) -> str:
    q = rat(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


class Mat:
    """Immutable dense matrix of rationals."""

    __slots__ = ("rows", "cols", "_r", "_hash")

    def __init__(self, data: Iterable[Iterable] = (), cols: int | None = None):
        r = tuple(tuple(rat(x) for x in row) for row in data)
        if cols is None:
            cols = len(r[0]) if r else 0
        for row in r:
            if len(row) != cols:
                raise ValueError("ragged matrix")
        self._r = r
        self.rows = len(r)
        self.cols = cols
        self._hash = None

    @classmethod
    def _raw(cls, r: tuple, cols: int) -> "Mat":
        # trusted constructor: r is a tuple of tuples of mpq
        m = object.__new__(cls)
        m._r = r
        m.rows = len(r)
        m.cols = cols
        m._hash = None
        return m

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "Mat":
        z = (ZERO,) * cols
        return cls._raw((z,) * rows, cols)

    @classmethod
    def identity(cls, n: int) -> "Mat":
        return cls._raw(
            tuple(tuple(ONE if i == j else ZERO for j in range(n)) for i in range(n)), n
        )

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence], rows: int | None = None) -> "Mat":
        columns = [tuple(rat(x) for x in c) for c in columns]
        if rows is None:
            if not columns:
                raise ValueError("row count needed for an empty column list")
            rows = len(columns[0])
        if any(len(c) != rows for c in columns):
            raise ValueError("ragged column list")
        return cls._raw(tuple(tuple(c[i] for c in columns) for i in range(rows)), len(columns))

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence], cols: int | None = None) -> "Mat":
        return cls(rows, cols)

    @classmethod
    def diag_blocks(cls, blocks: Sequence["Mat"]) -> "Mat":
        n_rows = sum(b.rows for b in blocks)
        n_cols = sum(b.cols for b in blocks)
        out = [[ZERO] * n_cols for _ in range(n_rows)]
        r0 = c0 = 0
        for b in blocks:
            for i, row in enumerate(b._r):
                out[r0 + i][c0:c0 + b.cols] = row
            r0 += b.rows
            c0 += b.cols
        return cls._raw(tuple(map(tuple, out)), n_cols)

    # -- access ------------------------------------------------------------
    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, ij):
        i, j = ij
        return self._r[i][j]

    def row(self, i: int) -> tuple:
        return self._r[i]

    def column(self, j: int) -> tuple:
        return tuple(row[j] for row in self._r)

    def columns(self) -> list[tuple]:
        return [self.column(j) for j in range(self.cols)]

    def tolist(self) -> list[list]:
        return [list(row) for row in self._r]

    @property
    def entries(self) -> tuple:
        return tuple(x for row in self._r for x in row)

    def take(self, rows: Sequence[int] | None = None, cols: Sequence[int] | None = None) -> "Mat":
        rr = self._r if rows is None else [self._r[i] for i in rows]
        if cols is None:
            return Mat._raw(tuple(rr), self.cols)
        cols = list(cols)
        return Mat._raw(tuple(tuple(row[j] for j in cols) for row in rr), len(cols))

    def block(self, r0: int, r1: int, c0: int, c1: int) -> "Mat":
        return Mat._raw(tuple(row[c0:c1] for row in self._r[r0:r1]), c1 - c0)

    # -- arithmetic --------------------------------------------------------
    @property
    def T(self) -> "Mat":
        if self.rows == 0:
            return Mat.zeros(self.cols, 0)
        return Mat._raw(tuple(zip(*self._r)), self.rows)

    def __add__(self, other: "Mat") -> "Mat":
        self._same_shape(other)
        return Mat._raw(
            tuple(tuple(a + b for a, b in zip(r, s)) for r, s in zip(self._r, other._r)), self.cols
        )

    def __sub__(self, other: "Mat") -> "Mat":
        self._same_shape(other)
        return Mat._raw(
            tuple(tuple(a - b for a, b in zip(r, s)) for r, s in zip(self._r, other._r)), self.cols
        )

    def __neg__(self) -> "Mat":
        return Mat._raw(tuple(tuple(-a for a in r) for r in self._r), self.cols)

    def scale(self, c) -> "Mat":
        c = rat(c)
        return Mat._raw(tuple(tuple(c * a for a in r) for r in self._r), self.cols)

    def __matmul__(self, other: "Mat") -> "Mat":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        # fraction-free: clear denominators per row of self and per column of
        # other, accumulate integers, divide once per entry
        n = other.cols
        right = []
        right_den = [ONE_Z] * n
        for j in range(n):
            d = ONE_Z
            for row in other._r:
                d = lcm(d, row[j].denominator)
            right_den[j] = d
        for row in other._r:
            right.append([(x.numerator * (right_den[j] // x.denominator)) if x else 0 for j, x in enumerate(row)])
        out = []
        for row in self._r:
            d = ONE_Z
            for x in row:
                if x:
                    d = lcm(d, x.denominator)
            acc = [ZERO_Z] * n
            for k, a in enumerate(row):
                if a:
                    ai = a.numerator * (d // a.denominator)
                    brow = right[k]
                    for j in range(n):
                        b = brow[j]
                        if b:
                            acc[j] += ai * b
            out.append(tuple(mpq(v, d * right_den[j]) if v else ZERO for j, v in enumerate(acc)))
        return Mat._raw(tuple(out), n)

    def apply(self, v: Sequence) -> tuple:
        """Matrix times a column vector given as a sequence."""
        if len(v) != self.cols:
            raise ValueError("vector length mismatch")
        return tuple(sum((a * x for a, x in zip(row, v) if a and x), ZERO) for row in self._r)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mat):
            return NotImplemented
        return self.shape == other.shape and self._r == other._r

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.rows, self.cols, self._r))
        return self._hash

    def is_zero(self) -> bool:
        return not any(any(row) for row in self._r)

    def is_identity(self) -> bool:
        return self.rows == self.cols and self == Mat.identity(self.rows)

    def hstack(self, *others: "Mat") -> "Mat":
        return hstack([self, *others])

    def vstack(self, *others: "Mat") -> "Mat":
        return vstack([self, *others])

    def kron(self, other: "Mat") -> "Mat":
        out = []
        for ra in self._r:
            for rb in other._r:
                out.append(tuple(a * b for a in ra for b in rb))
        return Mat._raw(tuple(out), self.cols * other.cols)

    def inverse(self) -> "Mat":
        if self.rows != self.cols:
            raise Singular("non-square matrix")
        n = self.rows
        aug = Mat._raw(
            tuple(r + tuple(ONE if i == j else ZERO for j in range(n)) for i, r in enumerate(self._r)),
            2 * n,
        )
        red, piv = _rref_rows(aug, limit=n)
        if len(piv) < n:
            raise Singular("matrix is singular")
        return Mat._raw(tuple(tuple(row[n:]) for row in red[:n]), n)

    def rank(self) -> int:
        return len(_rref_rows(self)[1])

    def power(self, k: int) -> "Mat":
        out = Mat.identity(self.rows)
        for _ in range(k):
            out = out @ self
        return out

    def _same_shape(self, other: "Mat") -> None:
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __repr__(self) -> str:
        body = "; ".join(" ".join(rat_str(x) for x in r) for r in self._r)
        return f"Mat<{self.rows}x{self.cols}>[{body}]"


def hstack(mats: Sequence[Mat], rows: int | None = None) -> Mat:
    mats = list(mats)
    if not mats:
        return Mat.zeros(rows or 0, 0)
    n = mats[0].rows
    if any(m.rows != n for m in mats):
        raise ValueError("hstack: row counts differ")
    return Mat._raw(tuple(sum((m._r[i] for m in mats), ()) for i in range(n)), sum(m.cols for m in mats))


def vstack(mats: Sequence[Mat], cols: int | None = None) -> Mat:
    mats = list(mats)
    if not mats:
        return Mat.zeros(0, cols or 0)
    c = mats[0].cols
    if any(m.cols != c for m in mats):
        raise ValueError("vstack: column counts differ")
    return Mat._raw(sum((m._r for m in mats), ()), c)


def _rref_rows(m: Mat, limit: int | None = None) -> tuple[list[list], list[int]]:
    """Gauss-Jordan on a copy; pivots are searched only in the first ``limit`` columns."""
    a = [list(r) for r in m._r]
    n_rows, n_cols = m.rows, m.cols
    limit = n_cols if limit is None else limit
    pivots: list[int] = []
    pr = 0
    for c in range(limit):
        if pr == n_rows:
            break
        sel = None
        for i in range(pr, n_rows):
            if a[i][c]:
                sel = i
                break
        if sel is None:
            continue
        if sel != pr:
            a[pr], a[sel] = a[sel], a[pr]
        prow = a[pr]
        inv = ONE / prow[c]
        if inv != ONE:
            prow = [x * inv if x else x for x in prow]
            a[pr] = prow
        nz = [j for j in range(c, n_cols) if prow[j]]
        for i in range(n_rows):
            if i != pr:
                f = a[i][c]
                if f:
                    row = a[i]
                    for j in nz:
                        row[j] -= f * prow[j]
        pivots.append(c)
        pr += 1
    return a, pivots


def rref(m: Mat) -> tuple[Mat, tuple[int, ...], int]:
    red, piv = _rref_rows(m)
    return Mat._raw(tuple(map(tuple, red)), m.cols), tuple(piv), len(piv)


class Subspace:
    """A subspace of ``Q^n`` held by its reduced column-echelon basis."""

    __slots__ = ("ambient_dim", "basis", "pivots")

    def __init__(self, ambient_dim: int, basis: Mat, pivots: tuple[int, ...]):
        # trusted: use Subspace.span to build from arbitrary generators
        self.ambient_dim = ambient_dim
        self.basis = basis
        self.pivots = pivots

    @classmethod
    def span(cls, gens: Mat | Sequence[Sequence], ambient_dim: int | None = None) -> "Subspace":
        if not isinstance(gens, Mat):
            gens = Mat.from_columns(gens, rows=ambient_dim)
        n = gens.rows if ambient_dim is None else ambient_dim
        if gens.rows != n:
            raise AmbientMismatch("generator length differs from ambient dimension")
        red, piv = _rref_rows(gens.T)
        rows = [tuple(red[i]) for i in range(len(piv))]
        basis = Mat._raw(tuple(tuple(r[i] for r in rows) for i in range(n)), len(rows))
        return cls(n, basis, tuple(piv))

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(n, Mat.zeros(n, 0), ())

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(n, Mat.identity(n), tuple(range(n)))

    @property
    def dim(self) -> int:
        return self.basis.cols

    def canonical(self) -> "Subspace":
        return Subspace.span(self.basis, self.ambient_dim)

    def coordinates(self, vectors: Mat) -> Mat:
        """Coordinates of the columns of ``vectors`` in this basis; raises NotContained."""
        if vectors.rows != self.ambient_dim:
            raise AmbientMismatch("vector length differs from ambient dimension")
        coords = vectors.take(rows=self.pivots)
        if self.basis @ coords != vectors:
            raise NotContained("vectors do not lie in the subspace")
        return coords

    def contains(self, other: "Subspace | Mat") -> bool:
        vecs = other.basis if isinstance(other, Subspace) else other
        if vecs.rows != self.ambient_dim:
            raise AmbientMismatch("ambient dimensions differ")
        return self.basis @ vecs.take(rows=self.pivots) == vecs

    def __le__(self, other: "Subspace") -> bool:
        return other.contains(self)

    def __add__(self, other: "Subspace") -> "Subspace":
        _check_ambient(self, other)
        return Subspace.span(hstack([self.basis, other.basis]), self.ambient_dim)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.basis == other.basis

    def __hash__(self) -> int:
        return hash((self.ambient_dim, self.basis))

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim} in Q^{self.ambient_dim}, pivots={self.pivots})"


def _check_ambient(u: Subspace, w: Subspace) -> None:
    if u.ambient_dim != w.ambient_dim:
        raise AmbientMismatch(f"ambient dimensions differ: {u.ambient_dim} vs {w.ambient_dim}")


def kernel(m: Mat) -> Subspace:
    red, piv = _rref_rows(m)
    n = m.cols
    pivset = set(piv)
    gens = []
    for f in range(n):
        if f in pivset:
            continue
        v = [ZERO] * n
        v[f] = ONE
        for r, pc in enumerate(piv):
            v[pc] = -red[r][f]
        gens.append(v)
    return Subspace.span(Mat.from_columns(gens, rows=n), n)


def image(m: Mat) -> Subspace:
    return Subspace.span(m, m.rows)


def solve_general(a: Mat, b: Mat) -> tuple[Mat, Subspace]:
    """One solution of ``a x = b`` together with ``ker a``; raises NoSolution."""
    if a.rows != b.rows:
        raise ValueError("solve: row counts differ")
    n, k = a.cols, b.cols
    aug = hstack([a, b]) if a.rows else Mat.zeros(0, n + k)
    red, piv = _rref_rows(aug, limit=n)
    rank = len(piv)
    for row in red[rank:]:
        if any(row[n:]):
            raise NoSolution("right-hand side is not in the image")
    x = [[ZERO] * k for _ in range(n)]
    for r, pc in enumerate(piv):
        x[pc] = list(red[r][n:])
    sol = Mat._raw(tuple(map(tuple, x)), k)
    if a @ sol != b:
        raise LinAlgError("internal error: solution failed verification")
    return sol, kernel(a)


def solve(a: Mat, b: Mat) -> Mat:
    """The unique solution of ``a x = b``.

    Raises NoSolution if ``b`` is not in the image, NonUnique (carrying one
    solution and the kernel) if ``a`` is not injective.
    """
    sol, ker = solve_general(a, b)
    if ker.dim:
        raise NonUnique(sol, ker)
    return sol


def intersect(u: Subspace, w: Subspace) -> Subspace:
    _check_ambient(u, w)
    if u.dim == 0 or w.dim == 0:
        return Subspace.zero(u.ambient_dim)
    ker = kernel(hstack([u.basis, -w.basis]))
    return Subspace.span(u.basis @ ker.basis.take(rows=range(u.dim)), u.ambient_dim)


def complement_in(inner: Subspace, outer: Subspace) -> Subspace:
    """Deterministic complement: outer basis columns whose pivots are not inner pivots."""
    _check_ambient(inner, outer)
    if not outer.contains(inner):
        raise NotContained("inner subspace is not contained in outer")
    taken = set(inner.pivots)
    cols = [j for j, p in enumerate(outer.pivots) if p not in taken]
    return Subspace(outer.ambient_dim, outer.basis.take(cols=cols), tuple(outer.pivots[j] for j in cols))


def annihilator(u: Subspace) -> Subspace:
    """Annihilator in the coordinate dual space, as column vectors."""
    if u.dim == 0:
        return Subspace.full(u.ambient_dim)
    return kernel(u.basis.T)


def preimage(m: Mat, w: Subspace) -> Subspace:
    """``{x : m x in w}``."""
    if m.rows != w.ambient_dim:
        raise AmbientMismatch("map target differs from subspace ambient")
    q = annihilator(w).basis.T
    if q.rows == 0:
        return Subspace.full(m.cols)
    return kernel(q @ m)
