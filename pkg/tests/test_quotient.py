import itertools
import json
from collections import Counter

import pytest

from enriques_k3 import dynkin as D
from enriques_k3 import exactlat as L
from enriques_k3 import pg4
from enriques_k3 import quotient as Q


@pytest.fixture(scope="module")
def plane():
    return pg4.build_plane()


@pytest.mark.parametrize("text, parsed, comps", [("I10", (10, False), 10), ("I1*", (1, True), 6), ("I3*", (3, True), 8)])
def test_fiber_parsing(text, parsed, comps):
    assert Q.parse_fiber(text) == parsed
    assert Q.fiber_components(text) == comps


def test_bad_fiber():
    with pytest.raises(Q.ConfigError):
        Q.parse_fiber("IV")


def test_mi_cover_configuration(plane):
    cfg = Q.build_y_config("mi", plane)
    cfg.validate()
    assert [f.type for f in cfg.fibers] == ["I6"] * 4
    assert len(cfg.sections) == 18
    sets = Q.identify_integral_sets(cfg, "mi")
    assert len(sets) == 6 and all(len(s) == 12 for s in sets)


def test_vii_cover_configuration(plane):
    cfg = Q.build_y_config("vii", plane)
    cfg.validate()
    assert [f.type for f in cfg.fibers] == list(Q.VII_FIBERS)
    assert len(cfg.sections) == 10
    for s in Q.identify_integral_sets(cfg, "vii"):
        by_fiber = Counter(cfg.role(c)[1] for c in s.curves)
        assert sorted(by_fiber.values()) == [1, 1, 5, 5]


def test_mii_cover_configuration(plane):
    cfg = Q.build_y_config("mii", plane)
    cfg.validate()
    assert sorted(f.type for f in cfg.fibers) == ["I1*", "I8", "I8"]
    assert len(cfg.sections) == 16
    (s,) = Q.identify_integral_sets(cfg, "mii")
    assert len(s.curves) == 11 and len(s.secondary) == 1


def test_vii_torsion_solution_unique_up_to_symmetry():
    sols = Q.torsion_solutions(Q.VII_FIBERS, Q.VII_TORSION)
    g0 = Q.torsion_section_model(Q.VII_FIBERS, Q.VII_TORSION, 0).graph()
    for k in range(len(sols)):
        assert D.find_isomorphism(g0, Q.torsion_section_model(Q.VII_FIBERS, Q.VII_TORSION, k).graph())


def test_torsion_solver_rejects_oversized_trivial_lattice():
    with pytest.raises(Q.ConfigError):
        Q.torsion_section_model(("I12", "I12"), (2,))


@pytest.mark.parametrize("kind, curves, extras, points", [("mi", 30, 10, {"A1": 12}), ("vii", 20, 0, {"A1": 12}),
                                                         ("mii", 28, 12, {"A1": 8, "D4": 1})])
def test_surface_counts(kind, curves, extras, points):
    xm = Q.build_surface(kind)
    assert len(xm.curves) == curves and len(xm.extras) == extras
    assert Counter(p.type for p in xm.canonical_points) == points


@pytest.mark.parametrize("kind", Q.KINDS)
def test_ledger_and_credits(kind):
    xm = Q.build_surface(kind)
    for i, j in itertools.combinations(range(xm.n), 2):
        a, b = xm.labels[i], xm.labels[j]
        assert sum(m for _, m in xm.contributions(a, b)) == xm.gram[i][j]
    for c in xm.curves:
        assert sum(m for _, m in xm.credits[c]) == 2
    assert all(xm.gram[i][i] == -2 for i in range(xm.n))


@pytest.mark.parametrize("kind", Q.KINDS)
def test_num_lattice(kind):
    xm = Q.build_surface(kind)
    gen = L.generated_lattice(xm.gram)
    assert gen.rank == 10 and L.signature(gen.lattice.gram) == (1, 9, 0)
    num = Q.NumLattice(xm.gram)
    # the overlattice is unimodular and even
    assert abs(L.determinant(num.gram)) in (1, 4)
    if num.glue is not None:
        assert L.bilinear(num.gram, num.glue, num.glue) % 8 == 0


def test_mii_discards_and_d4_point():
    xm = Q.build_surface("mii")
    (d4,) = [p for p in xm.canonical_points if p.type == "D4"]
    assert len(d4.contracted) == 4
    assert len(xm.discarded) == 2


def test_mi_integral_choice_independence():
    g0 = Q.build_surface("mi").graph()
    for k in range(1, 6):
        assert D.find_isomorphism(g0, Q.build_surface("mi", choice=k).graph()) is not None


def test_mi_from_torsion_sections_matches_plane_model():
    cfg = Q.torsion_section_model(Q.MI_TORSION_FIBERS, Q.MI_TORSION)
    x = Q.descend(cfg, Q.identify_integral_sets(cfg, "mi")[0])
    mi = Q.build_surface("mi")
    curves = mi.graph().subgraph([mi.index(c) for c in mi.curves])
    assert D.find_isomorphism(curves, x.graph()) is not None


def test_mii_f_choice(plane):
    flag = pg4.default_mii_flag(plane)
    choices = Q.mii_f_choices(plane, flag)
    assert choices
    g0 = None
    for k in range(len(choices)):
        cfg = Q.mii_config(plane, flag, k)
        s = Q.identify_integral_sets(cfg, "mii", flag)[0]
        g = Q.descend(cfg, s, Q.extra_classes(cfg, s)).graph()
        g0 = g0 or g
        assert D.find_isomorphism(g0, g) is not None


def test_extra_classes_must_be_orthogonal(plane):
    cfg = Q.build_y_config("mi", plane)
    s = Q.identify_integral_sets(cfg, "mi")[0]
    model = cfg.ns
    bad = [v for v in (Q.minus_four_vector(model, h) for h in pg4.hyperovals(plane))
           if v not in Q.extra_classes(cfg, s)][:1]
    with pytest.raises(Q.descent.DescentError):
        Q.descend(cfg, s, bad)


def test_xmodel_json_and_dot():
    xm = Q.build_surface("mii")
    obj = json.loads(xm.to_json())
    assert {"classes", "gram", "points", "ledger"} <= set(obj)
    assert len(obj["classes"]) == 40
    dot = xm.to_dot()
    assert dot.startswith("graph") and "dashed" in dot


def test_fibration_counts():
    # frozen from the parabolic enumeration; every decomposition is one fibration
    counts = {k: {Q.format_type(t): n for t, n in Q.fibration_types(k).items()} for k in Q.KINDS}
    assert counts["vii"] == {"(I8, 2III)": 15, "(I6, I2, 2IV)": 10, "(I5, I5, I1, I1)": 6, "(I9, I1, I1, I1)": 20}
    assert counts["mi"] == {"(I4, I4, 2III)": 45, "(I6, I2, 2IV)": 120, "(I3, I3, I3, I3)": 10, "(I5, I5, I1, I1)": 72}
    assert counts["mii"] == {"(I6, 2III)": 48, "(I6, I2, IV)": 48, "(I4, I4, III)": 18, "(I8, III)": 72,
                             "(2IV, 2IV, IV)": 16}


@pytest.mark.parametrize("kind", Q.KINDS)
def test_fibrations_have_euler_twelve_and_a_half_fiber(kind):
    from enriques_k3.fibrations import KodairaFiber

    for fib in Q.fibration_search(kind).fibrations():
        fibers = [KodairaFiber.parse(f) for f in fib.all_fibers]
        total = sum(f.euler for f in fibers)
        assert total <= 12
        if all(f.multiplicative for f in fibers):
            assert total == 12
        assert fib.bisections


def test_bisection_meets_multiple_fiber_once():
    fs = Q.fibration_search("vii")
    num = fs.num
    for fib in fs.fibrations():
        for s in fib.bisections[:3]:
            sv = num.coords([int(l == s) for l in fs.xm.labels])
            assert num.dot(fib.fiber_class, sv) == 1


def test_partly_hidden_fibers_are_flagged():
    fs = Q.fibration_search("mii")
    hidden = [f for fib in fs.fibrations() for f in fib.fibers if f.inferred]
    assert hidden and all(not f.multiple for f in hidden)
    assert {f.symbol for f in hidden} == {"I2", "III"}
