from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from enriques_k3 import exactlat as L


def frac_det(a):
    """Plain Gaussian elimination over the rationals."""
    m = [[Fraction(x) for x in row] for row in a]
    n = len(m)
    det = Fraction(1)
    for k in range(n):
        piv = next((i for i in range(k, n) if m[i][k]), None)
        if piv is None:
            return 0
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
            det = -det
        det *= m[k][k]
        for i in range(k + 1, n):
            f = m[i][k] / m[k][k]
            for j in range(k, n):
                m[i][j] -= f * m[k][j]
    return int(det)


def eig_signature(g):
    w = np.linalg.eigvalsh(np.array(g, dtype=float))
    return int((w > 1e-9).sum()), int((w < -1e-9).sum()), int((abs(w) <= 1e-9).sum())


small = st.integers(-6, 6)


def square(n):
    return st.lists(st.lists(small, min_size=n, max_size=n), min_size=n, max_size=n)


@st.composite
def symmetric(draw, lo=1, hi=7):
    n = draw(st.integers(lo, hi))
    a = draw(square(n))
    return [[a[i][j] + a[j][i] for j in range(n)] for i in range(n)]


@given(st.integers(1, 7).flatmap(square))
def test_determinant_matches_rational_elimination(a):
    assert L.determinant(a) == frac_det(a)


@given(symmetric())
def test_signature_matches_eigenvalues(g):
    assert L.signature(g) == eig_signature(g)


@given(st.integers(1, 6).flatmap(square))
def test_smith_diagonal_divides_and_multiplies_to_det(a):
    d = L.smith_diagonal(a)
    nz = [x for x in d if x]
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    det = L.determinant(a)
    if det:
        assert abs(det) == np.prod(d, dtype=object)
    else:
        assert len(nz) < len(a)


@given(st.integers(1, 6).flatmap(lambda n: st.lists(st.lists(small, min_size=n, max_size=n), min_size=1, max_size=7)))
def test_hermite_transform(a):
    h, u, uinv, piv = L.hermite_with_transform(a)
    assert L.matmul(u, a) == h
    assert L.matmul(u, uinv) == L.identity(len(a))
    for r, c in enumerate(piv):
        assert h[r][c] > 0
        assert all(h[k][c] == 0 for k in range(r + 1, len(a)))


@pytest.mark.parametrize(
    "expr, rank, det, group",
    [
        ("E8", 8, 1, ()),
        ("U", 2, -1, ()),
        ("A1^8 + D4", 12, 1024, (2,) * 10),
        ("A2", 2, 3, (3,)),
        ("U(2) + E8", 10, -4, (2, 2)),
        ("D4", 4, 4, (2, 2)),
    ],
)
def test_named_lattices(expr, rank, det, group):
    lat = L.build_lattice(expr)
    inv = L.smith_invariants(lat)
    assert lat.rank == rank and inv.det == det and inv.group == group


@pytest.mark.parametrize("bad", ["A0", "D3", "E9", "U + ", "A2(0)", "(A1", "X4"])
def test_parse_errors(bad):
    with pytest.raises(L.LatticeError):
        L.build_lattice(bad)


def test_degenerate_needs_generated_lattice():
    g = [[-2, 2], [2, -2]]
    with pytest.raises(L.DegenerateLatticeError):
        L.smith_invariants(g)
    gen = L.generated_lattice(g)
    assert gen.rank == 1 and gen.lattice.gram == ((-2,),)
    assert gen.relations == ((1, 1),) or gen.relations == ((-1, -1),)


def test_generated_lattice_projection_is_isometric():
    g = L.root_lattice("A", 3).gram
    family = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 0]]
    gram = [[L.bilinear(g, x, y) for y in family] for x in family]
    gen = L.generated_lattice(gram)
    assert gen.rank == 3 and abs(L.determinant(gen.lattice.gram)) == 4
    for i in range(4):
        for j in range(4):
            ei = [int(k == i) for k in range(4)]
            ej = [int(k == j) for k in range(4)]
            assert gen.lattice.pair(gen.project(ei), gen.project(ej)) == gram[i][j]


E8 = L.build_lattice("E8")


@settings(max_examples=300)
@given(st.lists(small, min_size=8, max_size=8), st.lists(small, min_size=8, max_size=8), st.integers(0, 7))
def test_reflection_is_an_involutive_isometry(x, y, k):
    d = L.LatticeVector(E8, [int(i == k) for i in range(8)])
    x, y = L.LatticeVector(E8, x), L.LatticeVector(E8, y)
    rx = L.reflect(x, d)
    assert L.reflect(rx, d) == x
    assert rx.dot(L.reflect(y, d)) == x.dot(y)


def test_minus_four_reflection_needs_even_pairing():
    lat = L.build_lattice("A1 + A2")
    d = L.LatticeVector(lat, (1, 1, 0))
    with pytest.raises(L.NonIntegralReflectionError):
        L.reflect(L.LatticeVector(lat, (0, 0, 1)), d)
    assert L.reflect(L.LatticeVector(lat, (1, 0, 0)), d).coords == (0, -1, 0)


@st.composite
def unimodular(draw, n):
    u = L.identity(n)
    for _ in range(draw(st.integers(0, 12))):
        i, j = draw(st.sampled_from([(a, b) for a in range(n) for b in range(n) if a != b]))
        k = draw(st.integers(-3, 3))
        for r in range(n):
            u[r][i] += k * u[r][j]
    return u


@settings(max_examples=100)
@given(st.data())
def test_signature_invariant_under_unimodular_conjugation(data):
    g = data.draw(symmetric(2, 6))
    u = data.draw(unimodular(len(g)))
    h = L.matmul(L.matmul(L.transpose(u), g), u)
    assert L.signature(h) == L.signature(g)
    assert L.determinant(h) == L.determinant(g)


def test_json_round_trip():
    lat = L.build_lattice("U + A2")
    assert L.Lattice.from_json(lat.to_json()) == lat
