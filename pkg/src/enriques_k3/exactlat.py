"""Exact integer lattices.

Every matrix here is a list of lists of Python ints; nothing is ever
converted to floating point.  Root lattices are stored *negative* definite
(the Gram matrix of ``A2`` is ``[[-2, 1], [1, -2]]``).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

Matrix = list[list[int]]


class LatticeError(ValueError):
    pass


class ParseError(LatticeError):
    pass


class DegenerateLatticeError(LatticeError):
    pass


class NonIntegralReflectionError(LatticeError):
    pass


# ---------------------------------------------------------------------------
# small integer linear algebra


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def transpose(a: Sequence[Sequence[int]]) -> Matrix:
    return [list(col) for col in zip(*a)] if a else []


def matmul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> Matrix:
    bt = transpose(b)
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def matvec(a: Sequence[Sequence[int]], v: Sequence[int]) -> list[int]:
    return [sum(x * y for x, y in zip(row, v)) for row in a]


def bilinear(gram: Sequence[Sequence[int]], x: Sequence[int], y: Sequence[int]) -> int:
    return sum(xi * gij * yj for xi, row in zip(x, gram) if xi for gij, yj in zip(row, y) if yj)


def is_symmetric(a: Sequence[Sequence[int]]) -> bool:
    n = len(a)
    return all(len(row) == n for row in a) and all(
        a[i][j] == a[j][i] for i in range(n) for j in range(i + 1, n)
    )


def determinant(a: Sequence[Sequence[int]]) -> int:
    """Bareiss fraction-free elimination."""
    m = [list(row) for row in a]
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def hermite_with_transform(a: Sequence[Sequence[int]]) -> tuple[Matrix, Matrix, Matrix, list[int]]:
    """Row Hermite normal form.

    Returns ``(h, u, uinv, pivots)`` with ``u @ a == h``, ``u`` unimodular and
    ``uinv`` its inverse.  Pivot columns are taken left to right (the
    lexicographically earliest rule), so the output is deterministic.
    """
    h = [list(row) for row in a]
    nrows = len(h)
    ncols = len(h[0]) if nrows else 0
    u = identity(nrows)
    uinv = identity(nrows)

    def swap(i, j):
        h[i], h[j] = h[j], h[i]
        u[i], u[j] = u[j], u[i]
        for row in uinv:
            row[i], row[j] = row[j], row[i]

    def addmul(dst, src, c):
        # row_dst += c * row_src ; inverse: col_src -= c * col_dst
        if c == 0:
            return
        hd, hs = h[dst], h[src]
        for k in range(ncols):
            if hs[k]:
                hd[k] += c * hs[k]
        ud, us = u[dst], u[src]
        for k in range(nrows):
            if us[k]:
                ud[k] += c * us[k]
        for row in uinv:
            if row[dst]:
                row[src] -= c * row[dst]

    def negate(i):
        h[i] = [-x for x in h[i]]
        u[i] = [-x for x in u[i]]
        for row in uinv:
            row[i] = -row[i]

    r = 0
    pivots = []
    for c in range(ncols):
        if r == nrows:
            break
        while True:
            rows = [i for i in range(r, nrows) if h[i][c] != 0]
            if not rows:
                break
            best = min(rows, key=lambda i: (abs(h[i][c]), i))
            if best != r:
                swap(best, r)
            done = True
            for i in range(r + 1, nrows):
                if h[i][c]:
                    addmul(i, r, -(h[i][c] // h[r][c]))
                    if h[i][c]:
                        done = False
            if done:
                break
        if all(h[i][c] == 0 for i in range(r, nrows)):
            continue
        if h[r][c] < 0:
            negate(r)
        for i in range(r):
            addmul(i, r, -(h[i][c] // h[r][c]))
        pivots.append(c)
        r += 1
    return h, u, uinv, pivots


def smith_diagonal(a: Sequence[Sequence[int]]) -> list[int]:
    """Diagonal of the Smith normal form (non-negative, each dividing the next)."""
    m = [list(row) for row in a]
    nr = len(m)
    nc = len(m[0]) if nr else 0
    diag = []
    t = 0
    while t < min(nr, nc):
        nz = [(abs(m[i][j]), i, j) for i in range(t, nr) for j in range(t, nc) if m[i][j]]
        if not nz:
            break
        _, pi, pj = min(nz)
        m[t], m[pi] = m[pi], m[t]
        for row in m:
            row[t], row[pj] = row[pj], row[t]
        while True:
            p = m[t][t]
            clean = True
            for i in range(t + 1, nr):
                q = m[i][t] // p
                if q:
                    m[i] = [x - q * y for x, y in zip(m[i], m[t])]
                if m[i][t]:
                    clean = False
            for j in range(t + 1, nc):
                q = m[t][j] // p
                if q:
                    for row in m:
                        row[j] -= q * row[t]
                if m[t][j]:
                    clean = False
            if clean:
                bad = next(
                    ((i, j) for i in range(t + 1, nr) for j in range(t + 1, nc) if m[i][j] % p),
                    None,
                )
                if bad is None:
                    break
                m[t] = [x + y for x, y in zip(m[t], m[bad[0]])]
                continue
            nz = [(abs(m[i][t]), i, t) for i in range(t, nr) if m[i][t]]
            nz += [(abs(m[t][j]), t, j) for j in range(t, nc) if m[t][j]]
            _, pi, pj = min(nz)
            m[t], m[pi] = m[pi], m[t]
            for row in m:
                row[t], row[pj] = row[pj], row[t]
        diag.append(abs(m[t][t]))
        t += 1
    return diag


def kernel_basis(a: Sequence[Sequence[int]]) -> Matrix:
    """Saturated integer basis (as rows) of ``{x : a x = 0}``."""
    _, u, _, pivots = hermite_with_transform(transpose(a))
    return [u[i] for i in range(len(pivots), len(u))]


# ---------------------------------------------------------------------------
# signature


def diagonalize(a: Sequence[Sequence[int]]) -> list[Fraction]:
    """Diagonal entries of a rational congruence diagonalization of ``a``."""
    m = [[Fraction(x) for x in row] for row in a]
    n = len(m)
    out = []
    active = list(range(n))
    while active:
        piv = next((i for i in active if m[i][i] != 0), None)
        if piv is None:
            pair = next(((i, j) for i in active for j in active if i < j and m[i][j] != 0), None)
            if pair is None:
                out.extend(Fraction(0) for _ in active)
                break
            i, j = pair
            # x_i <- x_i + x_j makes the (i, i) entry 2 m_ij != 0
            for k in range(n):
                m[i][k] += m[j][k]
            for k in range(n):
                m[k][i] += m[k][j]
            piv = i
        d = m[piv][piv]
        active.remove(piv)
        for i in active:
            f = m[i][piv] / d
            if f:
                for k in active:
                    m[i][k] -= f * m[piv][k]
        for i in active:
            m[i][piv] = m[piv][i] = Fraction(0)
        out.append(d)
    return out


def signature(a) -> tuple[int, int, int]:
    """(positive, negative, zero) counts of a symmetric integer matrix or Lattice."""
    gram = a.gram if isinstance(a, Lattice) else a
    if not is_symmetric(gram):
        raise LatticeError("signature needs a symmetric square matrix")
    d = diagonalize(gram)
    return (sum(x > 0 for x in d), sum(x < 0 for x in d), sum(x == 0 for x in d))


# ---------------------------------------------------------------------------
# lattices


@dataclass(frozen=True)
class DiscriminantData:
    elementary_divisors: tuple[int, ...]
    det: int
    two_elementary_a: int | None

    @property
    def group(self) -> tuple[int, ...]:
        """Nontrivial cyclic factors of the discriminant group."""
        return tuple(d for d in self.elementary_divisors if d != 1)

    @property
    def order(self) -> int:
        return abs(self.det)


@dataclass(frozen=True)
class Lattice:
    gram: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        g = tuple(tuple(int(x) for x in row) for row in self.gram)
        object.__setattr__(self, "gram", g)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"e{i}" for i in range(len(g))))
        else:
            object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) != len(g):
            raise LatticeError("labels and Gram matrix disagree in size")
        if not is_symmetric(g):
            raise LatticeError("Gram matrix is not symmetric")
        if any(g[i][i] % 2 for i in range(len(g))):
            raise LatticeError("lattice is not even")

    @property
    def rank(self) -> int:
        return len(self.gram)

    def det(self) -> int:
        return determinant(self.gram)

    def pair(self, x: Sequence[int], y: Sequence[int]) -> int:
        return bilinear(self.gram, x, y)

    def twist(self, m: int) -> "Lattice":
        if m == 0:
            raise LatticeError("twist multiplier must be nonzero")
        return Lattice(tuple(tuple(m * x for x in row) for row in self.gram), self.labels)

    def __add__(self, other: "Lattice") -> "Lattice":
        return direct_sum([self, other])

    def to_json(self) -> str:
        return json.dumps({"labels": list(self.labels), "gram": [list(r) for r in self.gram]})

    @classmethod
    def from_json(cls, text: str) -> "Lattice":
        obj = json.loads(text)
        return cls(tuple(tuple(r) for r in obj["gram"]), tuple(obj["labels"]))


@dataclass(frozen=True)
class LatticeVector:
    lattice: Lattice
    coords: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))
        if len(self.coords) != self.lattice.rank:
            raise LatticeError("vector length differs from lattice rank")

    def __add__(self, other):
        return LatticeVector(self.lattice, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        return LatticeVector(self.lattice, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __mul__(self, k: int):
        return LatticeVector(self.lattice, tuple(k * a for a in self.coords))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1

    def dot(self, other: "LatticeVector") -> int:
        return self.lattice.pair(self.coords, other.coords)

    def norm(self) -> int:
        return self.dot(self)


def direct_sum(parts: Sequence[Lattice]) -> Lattice:
    n = sum(p.rank for p in parts)
    gram = [[0] * n for _ in range(n)]
    labels: list[str] = []
    off = 0
    for p in parts:
        for i in range(p.rank):
            for j in range(p.rank):
                gram[off + i][off + j] = p.gram[i][j]
        labels.extend(p.labels)
        off += p.rank
    return Lattice(tuple(map(tuple, gram)), _dedupe(labels))


def _dedupe(labels: list[str]) -> tuple[str, ...]:
    seen: dict[str, int] = {}
    out = []
    for lab in labels:
        if lab in seen:
            seen[lab] += 1
            out.append(f"{lab}'{seen[lab]}")
        else:
            seen[lab] = 0
            out.append(lab)
    return tuple(out)


def _cartan_edges(family: str, n: int) -> list[tuple[int, int]]:
    if family == "A":
        if n < 1:
            raise LatticeError("A_m needs m >= 1")
        return [(i, i + 1) for i in range(n - 1)]
    if family == "D":
        if n < 4:
            raise LatticeError("D_n needs n >= 4")
        return [(i, i + 1) for i in range(n - 2)] + [(n - 3, n - 1)]
    if family == "E":
        if n not in (6, 7, 8):
            raise LatticeError("E_k needs k in 6, 7, 8")
        # Bourbaki numbering 1-3-4-5-6-7-8 with 2 attached to 4
        edges = [(0, 2), (2, 3), (3, 4), (1, 3)] + [(i, i + 1) for i in range(4, n - 1)]
        return edges
    raise LatticeError(f"unknown root system family {family!r}")


def root_lattice(family: str, n: int) -> Lattice:
    """Negated Cartan matrix of type A_n, D_n or E_n."""
    gram = [[-2 * (i == j) for j in range(n)] for i in range(n)]
    for i, j in _cartan_edges(family, n):
        gram[i][j] = gram[j][i] = 1
    return Lattice(tuple(map(tuple, gram)), tuple(f"{family}{n}.{i + 1}" for i in range(n)))


def hyperbolic_plane() -> Lattice:
    return Lattice(((0, 1), (1, 0)), ("U.e", "U.f"))


# ---------------------------------------------------------------------------
# expression parser:  expr := term ('+' term)* ; term := atom ('^' int | '(' int ')')*
# atom := U | A<m> | D<n> | E<6|7|8> | '(' expr ')'

_TOKEN = re.compile(r"\s*(?:(?P<num>-?\d+)|(?P<name>[ADEU]\d*)|(?P<op>[()+^]))")


def _tokenize(text: str) -> list[str]:
    pos = 0
    toks = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            bad = text[pos:].strip().split()[0] if text[pos:].strip() else text[pos:]
            raise ParseError(f"unexpected token {bad!r} at position {pos}")
        toks.append(m.group(m.lastgroup))
        pos = m.end()
        while pos < len(text) and text[pos].isspace():
            pos += 1
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, expect=None):
        tok = self.peek()
        if tok is None:
            raise ParseError(f"unexpected end of expression, expected {expect or 'a term'}")
        if expect is not None and tok != expect:
            raise ParseError(f"unexpected token {tok!r}, expected {expect!r}")
        self.i += 1
        return tok

    def parse(self) -> Lattice:
        lat = self.expr()
        if self.peek() is not None:
            raise ParseError(f"unexpected token {self.peek()!r}")
        return lat

    def expr(self) -> Lattice:
        parts = [self.term()]
        while self.peek() == "+":
            self.take("+")
            parts.append(self.term())
        return parts[0] if len(parts) == 1 else direct_sum(parts)

    def number(self) -> int:
        if self.peek() is None:
            raise ParseError("unexpected end of expression, expected an integer")
        tok = self.take()
        if not re.fullmatch(r"-?\d+", tok):
            raise ParseError(f"unexpected token {tok!r}, expected an integer")
        return int(tok)

    def term(self) -> Lattice:
        lat = self.atom()
        while self.peek() in ("(", "^"):
            if self.take() == "^":
                k = self.number()
                if k < 1:
                    raise ParseError(f"unexpected token {str(k)!r}, repeat count must be positive")
                lat = direct_sum([lat] * k)
            else:
                m = self.number()
                self.take(")")
                if m == 0:
                    raise ParseError("unexpected token '0', twist multiplier must be nonzero")
                lat = lat.twist(m)
        return lat

    def atom(self) -> Lattice:
        tok = self.take()
        if tok == "(":
            lat = self.expr()
            self.take(")")
            return lat
        if tok == "U":
            return hyperbolic_plane()
        m = re.fullmatch(r"([ADE])(\d+)", tok)
        if not m:
            raise ParseError(f"unexpected token {tok!r}")
        try:
            return root_lattice(m.group(1), int(m.group(2)))
        except LatticeError as exc:
            raise ParseError(f"bad token {tok!r}: {exc}") from None


def build_lattice(expr: str) -> Lattice:
    """Parse e.g. ``"(U + E8)(2)"`` or ``"A1^8 + D4"``."""
    return _Parser(expr).parse()


# ---------------------------------------------------------------------------
# invariants


def smith_invariants(lat) -> DiscriminantData:
    gram = lat.gram if isinstance(lat, Lattice) else lat
    det = determinant(gram)
    if det == 0:
        raise DegenerateLatticeError(
            "Gram matrix is degenerate; use generated_lattice() to pass to the induced lattice"
        )
    divs = tuple(sorted(smith_diagonal(gram)))
    nontrivial = [d for d in divs if d != 1]
    a = len(nontrivial) if all(d == 2 for d in nontrivial) else None
    return DiscriminantData(divs, det, a)


@dataclass(frozen=True)
class GeneratedLattice:
    """Lattice spanned by a (possibly dependent) family of vectors."""

    rank: int
    lattice: Lattice
    basis: tuple[tuple[int, ...], ...]  # basis vectors in generator coordinates
    _inverse: tuple[tuple[int, ...], ...]  # rows of (U^T)^-1 restricted to the first `rank`
    relations: tuple[tuple[int, ...], ...]

    def project(self, x: Sequence[int]) -> tuple[int, ...]:
        """Coordinates, in the induced basis, of the vector sum(x_i * g_i)."""
        return tuple(sum(a * b for a, b in zip(row, x)) for row in self._inverse)


def generated_lattice(gram) -> GeneratedLattice:
    """Induced non-degenerate lattice of a generating family with Gram ``gram``.

    The kernel of the Gram matrix is saturated, hence equals the relation
    module of the generators; a unimodular completion of it gives the basis.
    """
    g = [list(row) for row in (gram.gram if isinstance(gram, Lattice) else gram)]
    if not is_symmetric(g):
        raise LatticeError("Gram matrix is not symmetric")
    n = len(g)
    _, u, uinv, pivots = hermite_with_transform(g)
    r = len(pivots)
    # u g = h, rows r.. of u span the kernel. Columns of u^T form a basis of Z^n.
    basis = [u[i] for i in range(r)]
    induced = [[bilinear(g, basis[i], basis[j]) for j in range(r)] for i in range(r)]
    # x = u^T y  =>  y = (u^T)^-1 x = (uinv)^T x
    inv_rows = [tuple(uinv[k][i] for k in range(n)) for i in range(r)]
    return GeneratedLattice(
        r,
        Lattice(tuple(map(tuple, induced)), tuple(f"b{i}" for i in range(r))),
        tuple(map(tuple, basis)),
        tuple(inv_rows),
        tuple(tuple(u[i]) for i in range(r, n)),
    )


def reflect(x: LatticeVector, delta: LatticeVector, lat: Lattice | None = None) -> LatticeVector:
    """Reflection in a (-2)- or (-4)-vector: x + <x,d> d, resp. x + (<x,d>/2) d."""
    lat = lat or x.lattice
    xd = lat.pair(x.coords, delta.coords)
    dd = lat.pair(delta.coords, delta.coords)
    if dd == -2:
        k = xd
    elif dd == -4:
        if xd % 2:
            raise NonIntegralReflectionError(f"<x, delta> = {xd} is odd for a (-4)-vector")
        k = xd // 2
    else:
        raise LatticeError(f"reflections need norm -2 or -4, got {dd}")
    return LatticeVector(lat, tuple(a + k * b for a, b in zip(x.coords, delta.coords)))
