"""
Exact integer linear algebra.

Everything is arbitrary precision.  Smith and Hermite forms come from sympy's
``DomainMatrix`` over ``ZZ``; the results are normalized here so that callers can
rely on a fixed shape of the answer.
"""

import typing

from sympy import QQ, ZZ
from sympy.polys.matrices import DomainMatrix
from sympy.polys.matrices.normalforms import hermite_normal_form as _hnf
from sympy.polys.matrices.normalforms import smith_normal_decomp as _snd

from core.models import InvalidSpecError, InvariantViolation, getLogger

logger = getLogger(__name__)

Vector = typing.Tuple[int, ...]


class IntegerMatrix:
    """A dense integer matrix with an explicit shape, so empty matrices keep their dimensions."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries, rows=None, cols=None):
        entries = [list(map(int, row)) for row in entries]
        if rows is None:
            rows = len(entries)
        if cols is None:
            cols = len(entries[0]) if entries else 0
        if len(entries) != rows or any(len(row) != cols for row in entries):
            raise InvalidSpecError(f"Matrix entries do not match the shape {rows}x{cols}.")
        self.rows = rows
        self.cols = cols
        self.entries = entries

    @classmethod
    def zeros(cls, rows, cols):
        return cls([[0] * cols for _ in range(rows)], rows, cols)

    @classmethod
    def identity(cls, n):
        return cls([[int(i == j) for j in range(n)] for i in range(n)], n, n)

    @classmethod
    def from_columns(cls, columns, rows):
        columns = list(columns)
        return cls([[col[i] for col in columns] for i in range(rows)], rows, len(columns))

    @classmethod
    def coerce(cls, value) -> "IntegerMatrix":
        if isinstance(value, cls):
            return value
        if isinstance(value, DomainMatrix):
            return cls.from_domain(value)
        return cls(value)

    @classmethod
    def from_domain(cls, dm: DomainMatrix) -> "IntegerMatrix":
        rows, cols = dm.shape
        return cls([[int(e) for e in row] for row in dm.to_list()], rows, cols)

    def to_domain(self) -> DomainMatrix:
        if not self.rows or not self.cols:
            return DomainMatrix.zeros((self.rows, self.cols), ZZ)
        return DomainMatrix([[ZZ(e) for e in row] for row in self.entries], self.shape, ZZ)

    @property
    def shape(self):
        return self.rows, self.cols

    def __getitem__(self, index):
        i, j = index
        return self.entries[i][j]

    def __eq__(self, other):
        if not isinstance(other, IntegerMatrix):
            return NotImplemented
        return self.shape == other.shape and self.entries == other.entries

    def __repr__(self):
        return f"IntegerMatrix({self.entries!r}, rows={self.rows}, cols={self.cols})"

    def __matmul__(self, other: "IntegerMatrix") -> "IntegerMatrix":
        if self.cols != other.rows:
            raise InvalidSpecError(f"Cannot multiply {self.shape} by {other.shape}.")
        columns = list(zip(*other.entries)) if other.rows else [()] * other.cols
        return IntegerMatrix(
            [[sum(a * b for a, b in zip(row, col)) for col in columns] for row in self.entries],
            self.rows,
            other.cols,
        )

    def apply(self, vector: typing.Sequence[int]) -> Vector:
        if len(vector) != self.cols:
            raise InvalidSpecError(f"Vector of length {len(vector)} does not fit {self.shape}.")
        return tuple(sum(a * b for a, b in zip(row, vector)) for row in self.entries)

    def column(self, j) -> Vector:
        return tuple(row[j] for row in self.entries)

    def transpose(self) -> "IntegerMatrix":
        return IntegerMatrix.from_columns(self.entries, self.cols)

    def is_zero(self) -> bool:
        return all(e == 0 for row in self.entries for e in row)

    def is_diagonal(self) -> bool:
        return all(
            e == 0 for i, row in enumerate(self.entries) for j, e in enumerate(row) if i != j
        )

    def determinant(self) -> int:
        if self.rows != self.cols:
            raise InvalidSpecError("Only square matrices have a determinant.")
        if not self.rows:
            return 1
        return int(self.to_domain().det())

    def inverse(self) -> "IntegerMatrix":
        """Inverse of a unimodular matrix."""
        if not self.rows:
            return self
        inv = self.to_domain().to_field().inv()
        entries = []
        for row in inv.to_list():
            values = [QQ.to_sympy(e) for e in row]
            if any(not v.is_integer for v in values):
                raise InvariantViolation("Matrix is not unimodular.")
            entries.append([int(v) for v in values])
        return IntegerMatrix(entries, self.rows, self.cols)

    def _combine_rows(self, i, j, a, b, c, d):
        ri, rj = self.entries[i], self.entries[j]
        self.entries[i] = [a * x + b * y for x, y in zip(ri, rj)]
        self.entries[j] = [c * x + d * y for x, y in zip(ri, rj)]

    def _combine_columns(self, i, j, a, b, c, d):
        for row in self.entries:
            x, y = row[i], row[j]
            row[i], row[j] = a * x + b * y, c * x + d * y


def _gcdex(a, b):
    """Returns (x, y, g) with a*x + b*y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -x0, -y0, -a
    return x0, y0, a


def smith_normal_form(A) -> typing.Tuple[IntegerMatrix, IntegerMatrix, IntegerMatrix]:
    """
    Returns unimodular ``U``, ``V`` and diagonal ``D`` with ``U*A*V == D``.

    The nonzero diagonal entries come first, are positive and each divides the next.
    """
    A = IntegerMatrix.coerce(A)
    m, n = A.shape
    if not m or not n or A.is_zero():
        return IntegerMatrix.identity(m), IntegerMatrix(A.entries, m, n), IntegerMatrix.identity(n)

    _, s, t = _snd(A.to_domain())
    U, V = IntegerMatrix.from_domain(s), IntegerMatrix.from_domain(t)
    D = U @ A @ V
    if not D.is_diagonal():
        raise InvariantViolation("Smith decomposition did not diagonalize the matrix.")

    k = min(m, n)
    # nonzero entries first, keeping their order
    order = [i for i in range(k) if D[i, i]] + [i for i in range(k) if not D[i, i]]
    if order != list(range(k)):
        diagonal = [D[i, i] for i in range(k)]
        U = IntegerMatrix([U.entries[i] for i in order] + U.entries[k:], m, m)
        V = IntegerMatrix.from_columns([V.column(j) for j in order + list(range(k, n))], n)
        D = IntegerMatrix.zeros(m, n)
        for pos, src in enumerate(order):
            D.entries[pos][pos] = diagonal[src]
    rank = sum(1 for i in range(k) if D[i, i])

    # restore divisibility where the backend left it out of order
    changed = True
    while changed:
        changed = False
        for i in range(rank):
            for j in range(i + 1, rank):
                a, b = D[i, i], D[j, j]
                if b % a == 0:
                    continue
                x, y, g = _gcdex(a, b)
                V._combine_columns(i, j, 1, 1, 0, 1)
                U._combine_rows(i, j, x, y, -b // g, a // g)
                V._combine_columns(j, i, 1, -(y * b // g), 0, 1)
                D.entries[i][i], D.entries[j][j] = g, a * b // g
                changed = True

    for i in range(rank):
        if D[i, i] < 0:
            U.entries[i] = [-e for e in U.entries[i]]
            D.entries[i][i] = -D[i, i]

    return U, D, V


def _axpy(u: typing.Mapping, v: typing.Mapping, s: int) -> dict:
    out = dict(u)
    for k, e in v.items():
        value = out.get(k, 0) + s * e
        if value:
            out[k] = value
        else:
            out.pop(k, None)
    return out


def _combine(u: typing.Mapping, a: int, v: typing.Mapping, b: int) -> dict:
    return _axpy({k: a * e for k, e in u.items()} if a else {}, v, b)


class EchelonLattice:
    """
    The integer span of sparse labelled columns, kept in echelon form as columns arrive.

    Rows are any hashable keys, ordered by first appearance.  Every basis vector has a
    distinct pivot, its first nonzero row, and remembers which combination of the added
    columns it is.  Zero rows never enter, and columns that reduce to zero are dropped.
    """

    def __init__(self):
        self._position = {}
        self._pivots = {}
        self.columns = 0

    def __len__(self):
        return len(self._pivots)

    def add(self, label, column: typing.Mapping[typing.Hashable, int]) -> None:
        vec = {}
        for row, value in column.items():
            if value:
                vec[self._position.setdefault(row, len(self._position))] = value
        self.columns += 1
        if vec:
            self._insert(vec, {label: 1})

    def _insert(self, vec: dict, combo: dict) -> None:
        while vec:
            p = min(vec)
            if p not in self._pivots:
                if vec[p] < 0:
                    vec = {k: -e for k, e in vec.items()}
                    combo = {k: -e for k, e in combo.items()}
                self._pivots[p] = (vec, combo)
                return
            pvec, pcombo = self._pivots[p]
            a, b = pvec[p], vec[p]
            if b % a == 0:
                vec = _axpy(vec, pvec, -(b // a))
                combo = _axpy(combo, pcombo, -(b // a))
                continue
            x, y, g = _gcdex(a, b)
            self._pivots[p] = (_combine(pvec, x, vec, y), _combine(pcombo, x, combo, y))
            vec = _combine(pvec, -b // g, vec, a // g)
            combo = _combine(pcombo, -b // g, combo, a // g)

    def solve(self, target: typing.Mapping[typing.Hashable, int]) -> typing.Optional[dict]:
        """Integer weights on the added labels summing to ``target``, or ``None``."""
        vec = {}
        for row, value in target.items():
            if not value:
                continue
            if row not in self._position:
                return None
            vec[self._position[row]] = value
        weights = {}
        while vec:
            p = min(vec)
            if p not in self._pivots:
                return None
            pvec, pcombo = self._pivots[p]
            q, r = divmod(vec[p], pvec[p])
            if r:
                return None
            vec = _axpy(vec, pvec, -q)
            weights = _axpy(weights, pcombo, q)
        return weights


def solve_integer_linear(A, b: typing.Sequence[int]) -> typing.Optional[Vector]:
    """Some integer ``x`` with ``A*x == b``, or ``None`` when none exists."""
    A = IntegerMatrix.coerce(A)
    if len(b) != A.rows:
        raise InvalidSpecError(f"Right-hand side of length {len(b)} does not fit {A.shape}.")
    lattice = EchelonLattice()
    for j in range(A.cols):
        lattice.add(j, dict(enumerate(A.column(j))))
    weights = lattice.solve(dict(enumerate(b)))
    if weights is None:
        return None
    return tuple(weights.get(j, 0) for j in range(A.cols))


def kernel_basis(A) -> typing.List[Vector]:
    """A Z-basis of the integer kernel of ``A``."""
    A = IntegerMatrix.coerce(A)
    _, D, V = smith_normal_form(A)
    rank = sum(1 for i in range(min(D.shape)) if D[i, i])
    return [V.column(j) for j in range(rank, A.cols)]


def hermite_basis(columns: typing.Iterable[Vector], dim: int) -> typing.List[Vector]:
    """
    A canonical basis of the lattice spanned by ``columns``.

    Each returned vector has a positive pivot in its last nonzero coordinate and the pivot
    rows strictly increase.
    """
    columns = [tuple(c) for c in columns if any(c)]
    if not columns:
        return []
    H = IntegerMatrix.from_domain(_hnf(IntegerMatrix.from_columns(columns, dim).to_domain()))
    basis = []
    for j in range(H.cols):
        col = list(H.column(j))
        nonzero = [i for i, e in enumerate(col) if e]
        if not nonzero:
            continue
        if col[nonzero[-1]] < 0:
            col = [-e for e in col]
        basis.append(tuple(col))
    basis.sort(key=lambda c: max(i for i, e in enumerate(c) if e))
    pivots = [max(i for i, e in enumerate(c) if e) for c in basis]
    if len(set(pivots)) != len(pivots):
        raise InvariantViolation("Hermite basis has repeated pivot rows.")
    return basis


def lattice_reduce(vector: typing.Sequence[int], basis: typing.Sequence[Vector]):
    """
    Canonical representative of ``vector`` modulo the lattice of a Hermite ``basis``.

    Returns ``(rep, coefficients)`` with ``vector == rep + sum(c_i * basis_i)`` and every pivot
    coordinate of ``rep`` in ``[0, pivot)``.
    """
    rep = list(vector)
    coefficients = [0] * len(basis)
    for idx in sorted(range(len(basis)), key=lambda i: -_pivot_row(basis[i])):
        col = basis[idx]
        p = _pivot_row(col)
        q = rep[p] // col[p]
        if q:
            rep = [r - q * c for r, c in zip(rep, col)]
            coefficients[idx] += q
    return tuple(rep), tuple(coefficients)


def _pivot_row(col):
    return max(i for i, e in enumerate(col) if e)


class FGAbelianGroup:
    """
    ``ker(d_out) / im(d_in)`` with representative cycles.

    Coordinates list the free part first, then one entry per invariant factor ``d > 1``
    reduced into ``[0, d)``.
    """

    def __init__(self, dim, free_rank, torsion, basis, kernel_rank, v_inverse, u2):
        self.dim = dim
        self.free_rank = free_rank
        self.torsion = list(torsion)
        self.basis = [tuple(b) for b in basis]
        self._kernel_rank = kernel_rank
        self._v_inverse = v_inverse
        self._u2 = u2

    def __repr__(self):
        parts = [f"Z^{self.free_rank}"] if self.free_rank else []
        parts += [f"Z/{d}" for d in self.torsion]
        return " + ".join(parts) or "0"

    @property
    def rank(self):
        return self.free_rank + len(self.torsion)

    def coordinates(self, chain: typing.Sequence[int]) -> Vector:
        """Like ``reduce`` but linear: torsion entries are left unreduced."""
        if len(chain) != self.dim:
            raise InvalidSpecError(f"Chain of length {len(chain)} in dimension {self.dim}.")
        y = self._v_inverse.apply(chain)[self._kernel_rank :]
        y = self._u2.apply(y)
        s = len(y) - self.free_rank
        offset = s - len(self.torsion)
        return tuple(y[s:]) + tuple(y[offset : offset + len(self.torsion)])

    def reduce(self, chain: typing.Sequence[int]) -> Vector:
        """Coordinates of a chain; zero exactly on boundaries when applied to cycles."""
        return self.normalize(self.coordinates(chain))

    def normalize(self, coords: typing.Sequence[int]) -> Vector:
        coords = list(coords)
        for i, d in enumerate(self.torsion):
            coords[self.free_rank + i] %= d
        return tuple(coords)

    def combine(self, coords: typing.Sequence[int]) -> Vector:
        """The cycle ``sum(coords[i] * basis[i])``."""
        out = [0] * self.dim
        for c, b in zip(coords, self.basis):
            if c:
                out = [o + c * e for o, e in zip(out, b)]
        return tuple(out)


def homology_of_pair(d_in, d_out) -> FGAbelianGroup:
    """Homology at the middle of ``d_out . d_in``."""
    d_in = IntegerMatrix.coerce(d_in)
    d_out = IntegerMatrix.coerce(d_out)
    dim = d_out.cols
    if d_in.rows != dim:
        raise InvalidSpecError(f"Incompatible boundary shapes {d_in.shape} and {d_out.shape}.")
    if d_in.cols and d_out.rows and not (d_out @ d_in).is_zero():
        raise InvalidSpecError("The composite of the boundaries is not zero.")

    _, D, V = smith_normal_form(d_out)
    r = sum(1 for i in range(min(D.shape)) if D[i, i])
    v_inverse = IntegerMatrix.identity(dim) if r == 0 else V.inverse()
    k = dim - r
    kernel = [V.column(j) for j in range(r, dim)]

    columns = [v_inverse.apply(d_in.column(j))[r:] for j in range(d_in.cols)]
    Y = IntegerMatrix(columns, d_in.cols, k)
    Y = Y.transpose()
    U2, D2, _ = smith_normal_form(Y)
    invariants = [D2[i, i] for i in range(min(D2.shape)) if D2[i, i]]
    s = len(invariants)
    W = U2.inverse() if s else U2

    def generator(i):
        coeffs = W.column(i)
        out = [0] * dim
        for c, col in zip(coeffs, kernel):
            if c:
                out = [o + c * e for o, e in zip(out, col)]
        return tuple(out)

    free = [generator(i) for i in range(s, k)]
    torsion_idx = [i for i, d in enumerate(invariants) if d > 1]
    basis = free + [generator(i) for i in torsion_idx]
    torsion = [invariants[i] for i in torsion_idx]
    logger.debug("Homology of rank %d with torsion %s.", k - s, torsion)
    return FGAbelianGroup(dim, k - s, torsion, basis, r, v_inverse, U2)
