import itertools

import pytest

from enriques_k3 import pg4


@pytest.fixture(scope="module")
def plane():
    return pg4.build_plane()


def line_masks(plane):
    return [sum(1 << p for p in pts) for pts in plane.points_on]


def test_field_tables():
    for a in range(4):
        assert pg4.f4_add(a, a) == 0
        if a:
            assert pg4.f4_mul(a, pg4.f4_inv(a)) == 1
    # w^2 = w + 1 with w = 2
    assert pg4.f4_mul(2, 2) == pg4.f4_add(2, 1)


def test_incidence(plane):
    assert len(plane.points) == len(plane.lines) == 21
    for p, q in itertools.combinations(range(21), 2):
        ell = plane.line_through(p, q)
        assert {p, q} <= plane.points_on[ell]
    for a, b in itertools.combinations(range(21), 2):
        assert plane.meet(a, b) in plane.points_on[a] & plane.points_on[b]
    with pytest.raises(pg4.PlaneError):
        plane.meet(3, 3)


def test_hyperovals_against_exhaustive_search(plane):
    masks = line_masks(plane)
    brute = []
    for s in itertools.combinations(range(21), 6):
        m = sum(1 << p for p in s)
        if all(bin(m & lm).count("1") <= 2 for lm in masks):
            brute.append(s)
    assert [h.points for h in pg4.hyperovals(plane)] == brute
    assert len(brute) == 168


def test_mi_base_configurations_against_exhaustive_search(plane):
    masks = line_masks(plane)
    brute = [
        s for s in itertools.combinations(range(21), 9)
        if all(bin(sum(1 << p for p in s) & lm).count("1") in (1, 3) for lm in masks)
    ]
    got = pg4.mi_base_configurations(plane)
    assert [c.base for c in got] == brute
    assert len(got) == 280


def test_mi_base_structure(plane):
    for c in pg4.mi_base_configurations(plane)[:20]:
        assert len(c.trisecants) == 12 and len(c.tangents) == 9
        base = set(c.base)
        for p in c.base:
            through = plane.lines_through[p]
            assert len(through & set(c.trisecants)) == 4
            assert len(through & set(c.tangents)) == 1
        verts = set(c.vertices)
        assert len(verts) == 12 and not verts & base
        for t in c.tangents:
            assert len(plane.points_on[t] & verts) == 4


def test_mii_flag_and_special_hyperovals(plane):
    flag = pg4.default_mii_flag(plane)
    flag.validate(plane)
    assert flag.diagonal_point(plane, 0) == flag.diagonal_point(plane, 2) == flag.p[4]
    special = pg4.mii_special_hyperovals(plane, flag)
    p1, p2, p3, p4, p5 = flag.p
    brute = []
    for h in pg4.hyperovals(plane):
        s = set(h.points)
        if {p1, p2} <= s and not s & {p3, p4, p5}:
            if all(len(plane.points_on[l] & (s - {p1, p2})) == 1 for row in flag.l for l in row):
                brute.append(h)
    assert list(special) == brute and len(special) == 12


@pytest.mark.parametrize("ell", [0, 7, 20])
def test_special_hyperovals_for_other_lines(plane, ell):
    assert len(pg4.mii_special_hyperovals(plane, pg4.default_mii_flag(plane, ell))) == 12


def test_bad_flag_rejected(plane):
    flag = pg4.default_mii_flag(plane)
    swapped = pg4.MIIFlag(flag.ell, flag.p[:2] + (flag.p[4], flag.p[3], flag.p[2]), flag.l)
    with pytest.raises(pg4.PlaneError):
        swapped.validate(plane)


def test_hyperoval_needs_six_points():
    with pytest.raises(pg4.PlaneError):
        pg4.Hyperoval((1, 2, 3))


def _apply(plane, m, p):
    v = plane.points[p]
    w = tuple(
        pg4.f4_add(pg4.f4_add(pg4.f4_mul(m[i][0], v[0]), pg4.f4_mul(m[i][1], v[1])), pg4.f4_mul(m[i][2], v[2]))
        for i in range(3)
    )
    return plane.points.index(pg4.normalize(w))


def test_mi_base_configurations_form_one_projective_orbit(plane):
    # transvections and a diagonal scaling generate PGL(3,4)
    gens = []
    for i, j in itertools.permutations(range(3), 2):
        m = [[int(r == c) for c in range(3)] for r in range(3)]
        m[i][j] = 1
        gens.append(m)
    gens.append([[pg4.W, 0, 0], [0, 1, 0], [0, 0, 1]])
    perms = [tuple(_apply(plane, m, p) for p in range(21)) for m in gens]
    start = pg4.mi_base_configurations(plane)[0].base
    seen, todo = {start}, [start]
    while todo:
        s = todo.pop()
        for g in perms:
            t = tuple(sorted(g[p] for p in s))
            if t not in seen:
                seen.add(t)
                todo.append(t)
    assert seen == {c.base for c in pg4.mi_base_configurations(plane)}
