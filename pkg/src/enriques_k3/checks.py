"""The verification checks, one per acceptance item, shared by the CLI and the test suite.

Every check returns a :class:`CheckResult` whose witness is plain JSON data,
so that reports are reproducible byte for byte.
"""

from __future__ import annotations

import itertools
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

from . import dynkin, exactlat, fibrations, nsmodel, pg4, quotient

ALL_KINDS = ("mi", "vii", "mii")


@dataclass
class CheckResult:
    id: str
    description: str
    anchor: str
    passed: bool
    witness: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "description": self.description,
            "anchor": self.anchor,
            "status": "pass" if self.passed else "fail",
            "witness": self.witness,
        }


@dataclass(frozen=True)
class Check:
    id: str
    criterion: int
    description: str
    anchor: str
    scopes: tuple[str, ...]
    run: Callable[..., CheckResult] = field(compare=False)


# ---------------------------------------------------------------------------
# plane and lattices


def check_plane(fault=None, kinds=ALL_KINDS):
    P = pg4.build_plane()
    npts, nlines = len(P.points), len(P.lines)
    pdeg = Counter(len(s) for s in P.lines_through)
    ldeg = Counter(len(s) for s in P.points_on)
    bad = []
    for p, q in itertools.combinations(range(npts), 2):
        if len(P.lines_through[p] & P.lines_through[q]) != 1:
            bad.append(["points", p, q])
    for a, b in itertools.combinations(range(nlines), 2):
        if len(P.points_on[a] & P.points_on[b]) != 1:
            bad.append(["lines", a, b])
    ok = npts == 21 and nlines == 21 and set(pdeg) == {5} and set(ldeg) == {5} and not bad
    return {"points": npts, "lines": nlines, "point_degrees": sorted(pdeg), "line_degrees": sorted(ldeg),
            "axiom_violations": bad[:5]}, ok


def check_hyperovals(fault=None, kinds=ALL_KINDS):
    P = pg4.build_plane()
    hs = pg4.hyperovals(P)
    profiles = {len(P.points_on[l] & set(h.points)) for h in hs for l in range(len(P.lines))}
    return {"count": len(hs), "secancy": sorted(profiles)}, len(hs) == 168 and profiles == {0, 2}


def _ns_gram(fault):
    m = nsmodel.build_ns_model(pg4.build_plane())
    g = [list(r) for r in m.gram42]
    if fault == "ns-gram":
        g[0][21] += 1
        g[21][0] += 1
    return m, g


def check_ns(fault=None, kinds=ALL_KINDS):
    _, g = _ns_gram(fault)
    gen = exactlat.generated_lattice(g)
    lat = gen.lattice
    disc = exactlat.smith_invariants(lat)
    sig = exactlat.signature(lat.gram)
    w = {"rank": gen.rank, "det": disc.det, "group": list(disc.group), "signature": list(sig[:2])}
    return w, gen.rank == 22 and disc.det == -4 and disc.group == (2, 2) and sig == (1, 21, 0)


def check_minus_four(fault=None, kinds=ALL_KINDS):
    m = nsmodel.build_ns_model(pg4.build_plane())
    vecs = [nsmodel.minus_four_vector(m, h) for h in pg4.hyperovals(m.plane)]
    norms = Counter(v.norm() for v in vecs)
    odd = [v.name for v in vecs if any(v.dot(m.generator(l)) % 2 for l in m.labels)]
    bad_refl = []
    for v in vecs:
        for l in m.labels:
            x = m.generator(l)
            y = nsmodel.reflect_class(x, v)
            if y.norm() != x.norm() or nsmodel.reflect_class(y, v) != x:
                bad_refl.append([v.name, l])
    w = {"count": len(vecs), "norms": {str(k): c for k, c in norms.items()}, "odd_pairings": odd[:5],
         "bad_reflections": bad_refl[:5]}
    return w, len(vecs) == 168 and set(norms) == {-4} and not odd and not bad_refl


# ---------------------------------------------------------------------------
# surface models


def check_filters(fault=None, kinds=ALL_KINDS):
    w, ok = {}, True
    P = pg4.build_plane()
    if "mi" in kinds:
        cfg = quotient.build_y_config("mi", P)
        counts = [len(quotient.extra_classes(cfg, s)) for s in quotient.identify_integral_sets(cfg, "mi")]
        w["mi"] = counts
        ok &= set(counts) == {10}
    if "mii" in kinds:
        cfg = quotient.build_y_config("mii", P)
        (s,) = quotient.identify_integral_sets(cfg, "mii")
        ex = quotient.extra_classes(cfg, s)
        special = pg4.mii_special_hyperovals(P, pg4.default_mii_flag(P))
        got = sorted(tuple(int(x) for x in c.name[1:].split("-")) for c in ex)
        want = sorted(h.points for h in special)
        w["mii"] = {"orthogonal": len(ex), "special_hyperovals": len(special), "equal": got == want}
        ok &= len(ex) == 12 and len(special) == 12 and got == want
    return w, ok


def _tangency_split(xm):
    cur = xm.curves
    tan = {a: set() for a in cur}
    for a, b in itertools.combinations(cur, 2):
        c = xm.contributions(a, b)
        if len(c) == 1 and c[0][1] == 2:
            tan[a].add(b)
            tan[b].add(a)
    color = {}
    bipartite = True
    for s in cur:
        if s in color:
            continue
        color[s] = 0
        stack = [s]
        while stack:
            u = stack.pop()
            for v in tan[u]:
                if v not in color:
                    color[v] = 1 - color[u]
                    stack.append(v)
                elif color[v] == color[u]:
                    bipartite = False
    sides = Counter(color.values())
    # meetings inside a side should only happen at canonical points
    inside = all(
        all(xm.point(p).canonical for p, _ in xm.contributions(a, b))
        for a, b in itertools.combinations(cur, 2)
        if color[a] == color[b]
    )
    kinds = sorted({xm.point(xm.contributions(a, b)[0][0]).type for a in cur for b in tan[a]})
    return {
        "bipartite": bipartite,
        "sides": sorted(sides.values()),
        "tangent_degrees": sorted(Counter(len(t) for t in tan.values()).items()),
        "same_side_meet_at_canonical_points": inside,
        "tangency_point_types": kinds,
    }


def check_models(fault=None, kinds=ALL_KINDS):
    w, ok = {}, True
    if "mi" in kinds:
        xm = quotient.build_surface("mi")
        t = _tangency_split(xm)
        d = {"curves": len(xm.curves), "extras": len(xm.extras), "canonical_points": len(xm.canonical_points),
             "tangency": t}
        w["mi"] = d
        ok &= (len(xm.curves), len(xm.extras), len(xm.canonical_points)) == (30, 10, 12)
        ok &= t["bipartite"] and t["sides"] == [15, 15] and t["tangent_degrees"] == [(3, 30)]
        ok &= t["same_side_meet_at_canonical_points"]
    if "vii" in kinds:
        xm = quotient.build_surface("vii")
        w["vii"] = {"curves": len(xm.curves), "canonical_points": len(xm.canonical_points)}
        ok &= len(xm.curves) == 20 and len(xm.canonical_points) == 12
    if "mii" in kinds:
        xm = quotient.build_surface("mii")
        types = Counter(p.type for p in xm.canonical_points)
        pattern = Counter(
            tuple(sorted(Counter(xm.pair(a, b) for b in xm.extras if b != a).items())) for a in xm.extras
        )
        w["mii"] = {
            "curves": len(xm.curves),
            "extras": len(xm.extras),
            "point_types": dict(sorted(types.items())),
            "extra_pairing_pattern": [[list(map(list, k)), v] for k, v in sorted(pattern.items())],
            "expected_pattern": [[[1, 7], [2, 4]], 12],
        }
        ok &= (len(xm.curves), len(xm.extras)) == (28, 12) and types == Counter({"A1": 8, "D4": 1})
        ok &= pattern == Counter({((1, 7), (2, 4)): 12})
    return w, ok


def _mii_flavors(xm, decs):
    out = Counter()
    for d in decs:
        parts = []
        for c in sorted(d.components, key=lambda c: (-len(c.vertices), str(c.type))):
            eff = sum(xm.effective[v] for v in c.vertices)
            parts.append(f"{c.type}[{eff}/{len(c.vertices)}]")
        out[" + ".join(parts)] += 1
    return out


MII_DECOMPOSITION_TYPES = {
    ("~A3", "~A3", "~A1", "~A1"),
    ("~A5", "~A2", "~A1"),
    ("~A7", "~A1"),
    ("~A2", "~A2", "~A2", "~A2"),
}


def check_vinberg(fault=None, kinds=ALL_KINDS):
    w, ok = {}, True
    for kind in kinds:
        fs = quotient.fibration_search(kind)
        rep = dynkin.vinberg_check(fs.graph, 9, fs.parabolics)
        ranks = sorted({d.rank for d in fs.decompositions})
        types = sorted({d.types for d in fs.decompositions})
        w[kind] = {"verdict": rep.verdict, "failures": len(rep.failures), "parabolics": len(fs.parabolics),
                   "decomposition_ranks": ranks, "types": [list(t) for t in types]}
        ok &= rep.verdict and ranks == [8]
        if kind == "mii":
            xm = fs.xm
            a521 = [d for d in fs.decompositions if d.types == ("~A5", "~A2", "~A1")]
            tri = Counter(
                sum(xm.effective[v] for v in next(c for c in d.components if str(c.type) == "~A2").vertices)
                for d in a521
            )
            w[kind]["A5+A2+A1_triangle_effective_counts"] = sorted(tri)
            ok &= set(types) == MII_DECOMPOSITION_TYPES and set(tri) == {0, 3}
    return w, ok


# ---------------------------------------------------------------------------
# fibrations and bisections

EXPECTED_FIBRATIONS = {
    "mi": {("I5", "I5", "I1", "I1"), ("I6", "2IV", "I2"), ("I4", "I4", "2III"), ("I3", "I3", "I3", "I3")},
    "vii": {("I5", "I5", "I1", "I1"), ("I6", "2IV", "I2"), ("I9", "I1", "I1", "I1"), ("I8", "2III")},
    "mii": {("I4", "I4", "III"), ("I6", "IV", "I2"), ("I8", "III"), ("I6", "2III"), ("2IV", "2IV", "IV")},
}


def _key(types):
    return tuple(sorted(types, key=quotient._fiber_sort_key))


def check_fibrations(fault=None, kinds=ALL_KINDS):
    w, ok = {}, True
    for kind in kinds:
        got = {_key(t) for t in quotient.fibration_types(kind)}
        want = {_key(t) for t in EXPECTED_FIBRATIONS[kind]}
        w[kind] = sorted(quotient.format_type(t) for t in got)
        ok &= got == want
    return w, ok


def _profile(*hits):
    return tuple(sorted(hits, key=lambda h: (quotient._fiber_sort_key(h.split()[0]), h)))


S, T = "singular canonical", "tangent"

EXPECTED_PROFILES = {
    "mi": {
        ("I5", "I5", "I1", "I1"): {_profile(f"I5 {S}", f"I5 {T}", f"I1 {S}", f"I1 {T}")},
        ("I6", "2IV", "I2"): {_profile(f"I6 {T}", "2IV simple canonical", f"I2 {S}")},
        ("I4", "I4", "2III"): {_profile(f"I4 {S}", f"I4 {T}", "2III simple canonical")},
        ("I3", "I3", "I3", "I3"): {_profile(f"I3 {S}", f"I3 {S}", f"I3 {T}", f"I3 {T}")},
    },
    "vii": {
        ("I5", "I5", "I1", "I1"): {
            _profile(f"I5 {S}", f"I5 {S}", f"I1 {T}", f"I1 {T}"),
            _profile(f"I5 {T}", f"I5 {T}", f"I1 {S}", f"I1 {S}"),
        },
        ("I6", "2IV", "I2"): {_profile(f"I6 {S}", "2IV simple canonical", f"I2 {T}")},
        ("I9", "I1", "I1", "I1"): {
            _profile(f"I9 {S}", f"I1 {S}", f"I1 {T}", f"I1 {T}"),
            _profile(f"I9 {T}", f"I1 {S}", f"I1 {S}", f"I1 {T}"),
        },
        ("I8", "2III"): {_profile(f"I8 {S}", "2III simple canonical")},
    },
    "mii": {
        ("I4", "I4", "III"): {
            _profile(f"I4 {T}", f"I4 {T}", "III singular p0"),
            _profile(f"I4 {S}", f"I4 {S}", f"III {T}"),
        },
        ("I6", "IV", "I2"): {_profile(f"I6 {S}", f"I2 {S}", f"IV {T}")},
        ("I8", "III"): {_profile(f"I8 {T}", "III singular p0")},
        ("I6", "2III"): {
            _profile(f"I6 {T}", "2III simple p0"),
            _profile(f"I6 {S}", "2III simple canonical"),
        },
        ("2IV", "2IV", "IV"): {_profile("2IV simple canonical", "2IV simple canonical", f"IV {T}")},
    },
}

# fiber -> (number of canonical points on it, tags of its singular points); only the
# fibers whose canonical-point layout is described explicitly are listed
EXPECTED_FIBER_LAYOUT = {
    "mi": {
        ("I6", "2IV", "I2"): {"2IV": (4, ("canonical",))},
        ("I4", "I4", "2III"): {"2III": (4, ("generic",))},
    },
    "vii": {
        ("I6", "2IV", "I2"): {"2IV": (4, ("canonical",))},
        ("I8", "2III"): {"2III": (4, ("generic",))},
    },
    "mii": {
        ("I4", "I4", "III"): {"III": (1, ("p0",))},
        ("I6", "IV", "I2"): {"IV": (1, ("p0",))},
        ("I8", "III"): {"III": (1, ("p0",))},
        ("I6", "2III"): {"2III": (3, ("generic",))},
        ("2IV", "2IV", "IV"): {"IV": (1, ("p0",)), "2IV": (4, ("canonical",))},
    },
}


def _layout_ok(kind):
    fs = quotient.fibration_search(kind)
    xm = fs.xm
    bad = []
    for fib in fs.fibrations():
        want = EXPECTED_FIBER_LAYOUT[kind].get(_key(fib.all_fibers), {})
        for f in fib.fibers:
            if str(f) not in want:
                continue
            n, sing = want[str(f)]
            got = (len(f.canonical_points), tuple(sorted({quotient._point_tag(xm, p) for p in f.singular_points})))
            if got != (n, sing):
                bad.append([str(fib), str(f), got[0], list(got[1])])
        if kind == "mii" and _key(fib.all_fibers) == _key(("I6", "2III")):
            f = next(f for f in fib.fibers if str(f) == "2III")
            d4 = [p for p in f.canonical_points if xm.point(p).type == "D4"]
            on = [sum(p in {q for q, _ in xm.credits.get(c, ())} for p in f.canonical_points) for c in f.visible]
            if len(d4) != 1 or sorted(on) != [1, 2]:
                bad.append([str(fib), "2III", "p0 layout", sorted(on)])
    return bad


def check_bisections(fault=None, kinds=ALL_KINDS):
    w, ok = {}, True
    for kind in kinds:
        got = {_key(t): v for t, v in quotient.bisection_profiles(kind).items()}
        want = {_key(t): v for t, v in EXPECTED_PROFILES[kind].items()}
        diff = {
            quotient.format_type(t): {"got": sorted(map(list, got.get(t, set()))), "want": sorted(map(list, want.get(t, set())))}
            for t in sorted(set(got) | set(want))
            if got.get(t) != want.get(t)
        }
        layout = _layout_ok(kind)
        w[kind] = {"fibration_types": len(got), "mismatches": diff, "layout_mismatches": layout[:5]}
        ok &= not diff and not layout
    return w, ok


# ---------------------------------------------------------------------------
# arithmetic


EXPECTED_TORSION = (18, 8, 10, None, 6, None, 4, 6)


def check_catalog(fault=None, kinds=ALL_KINDS):
    try:
        audits = fibrations.y_catalog_audit()
    except fibrations.FibrationError as exc:
        return {"error": str(exc)}, False
    torsion = fibrations.torsion_orders()
    P = pg4.build_plane()
    mi_sections = len(quotient.build_y_config("mi", P).sections)
    vii_sections = len(quotient.build_y_config("vii", P).sections)
    w = {
        "audits": [
            {"config": a.config, "euler": a.euler_sum, "delta": a.wild_deficiency, "mw_rank": a.mw_rank,
             "torsion": list(a.torsion_order_candidates)}
            for a in audits
        ],
        "torsion_orders": list(torsion),
        "expected_torsion_orders": list(EXPECTED_TORSION),
        "sections": {"I6,I6,I6,I6": mi_sections, "I10,I10,I2,I2": vii_sections},
    }
    ok = len(audits) == 8 and mi_sections == 18 and vii_sections == 10 and torsion == EXPECTED_TORSION
    return w, ok


def check_ehs(fault=None, kinds=ALL_KINDS):
    got = sorted(str(c) for c in fibrations.ehs_root_candidates())
    want = sorted(["A1^12", "A1^8+D4", "A1^4+D4^2", "A1^6+D6"])
    return {"candidates": got}, got == want


def check_automorphisms(fault=None, kinds=ALL_KINDS):
    g = quotient.build_surface("mii").graph()
    with_flags, _ = dynkin.automorphism_count(g, True)
    without, _ = dynkin.automorphism_count(g, False)
    return {"with_flags": with_flags, "without_flags": without, "expected_with_flags": 1152}, with_flags == 1152


# ---------------------------------------------------------------------------
# property suites (seeded, so the report stays reproducible)


def _random_unimodular(rng, n, steps=3 * 10):
    u = exactlat.identity(n)
    for _ in range(steps):
        i, j = rng.sample(range(n), 2)
        k = rng.choice((-2, -1, 1, 2))
        for r in range(n):
            u[r][i] += k * u[r][j]
    return u


def check_properties(fault=None, kinds=ALL_KINDS, reflections=10_000, conjugations=100):
    rng = random.Random(20240601)
    m = nsmodel.build_ns_model(pg4.build_plane())
    lat = m.induced
    n = lat.rank
    deltas = [exactlat.LatticeVector(lat, m.generated.project(v.coords))
              for v in [nsmodel.minus_four_vector(m, h) for h in pg4.hyperovals(m.plane)]]
    deltas += [exactlat.LatticeVector(lat, m.generated.project(m.generator(l).coords)) for l in m.labels]
    refl_bad = 0
    for _ in range(reflections):
        x = exactlat.LatticeVector(lat, [rng.randint(-5, 5) for _ in range(n)])
        y = exactlat.LatticeVector(lat, [rng.randint(-5, 5) for _ in range(n)])
        d = rng.choice(deltas)
        rx, ry = exactlat.reflect(x, d), exactlat.reflect(y, d)
        if exactlat.reflect(rx, d) != x or rx.dot(ry) != x.dot(y):
            refl_bad += 1
    grams = [lat.gram] + [quotient.NumLattice(quotient.build_surface(k).gram).gram for k in kinds]
    conj_bad = 0
    for i in range(conjugations):
        g = grams[i % len(grams)]
        u = _random_unimodular(rng, len(g))
        h = exactlat.matmul(exactlat.matmul(exactlat.transpose(u), g), u)
        if exactlat.signature(h) != exactlat.signature(g):
            conj_bad += 1
    ledger_bad = []
    for k in kinds:
        xm = quotient.build_surface(k)
        for i, j in itertools.combinations(range(xm.n), 2):
            a, b = xm.labels[i], xm.labels[j]
            if sum(mult for _, mult in xm.contributions(a, b)) != xm.gram[i][j]:
                ledger_bad.append([k, a, b])
    iso = None
    if "mi" in kinds:
        ms = [quotient.build_surface("mi", choice=c) for c in range(len(_mi_sets()))]
        g0 = ms[0].graph()
        iso = [dynkin.find_isomorphism(g0, x.graph()) is not None for x in ms]
    w = {
        "reflection_cases": reflections,
        "reflection_failures": refl_bad,
        "conjugation_cases": conjugations,
        "conjugation_failures": conj_bad,
        "ledger_failures": ledger_bad[:5],
        "mi_choice_isomorphic": iso,
    }
    ok = not refl_bad and not conj_bad and not ledger_bad and (iso is None or all(iso))
    return w, ok


def _mi_sets():
    cfg = quotient.build_y_config("mi", pg4.build_plane())
    return quotient.identify_integral_sets(cfg, "mi")


# ---------------------------------------------------------------------------
# registry


CHECKS = (
    Check("plane-axioms", 1, "plane of order 4: 21 points, 21 lines, every point and line of degree 5",
          "projective plane over F4", ("plane",), check_plane),
    Check("hyperoval-count", 2, "168 hyperovals, each line meets one in 0 or 2 points",
          "hyperovals of the plane of order 4", ("plane",), check_hyperovals),
    Check("ns-lattice", 3, "42 curves span a lattice of rank 22, det -4, group (Z/2)^2, signature (1,21)",
          "Neron-Severi lattice of the cover", ("lattices",), check_ns),
    Check("minus-four-classes", 4, "168 classes 2h - sum E have norm -4, even pairings, integral reflections",
          "(-4)-classes of hyperovals", ("lattices",), check_minus_four),
    Check("orthogonality-filters", 5, "10 extra classes for MI; 12 for MII, equal to the special hyperovals",
          "special-hyperovals-count = 12", ("mi", "mii"), check_filters),
    Check("surface-models", 6, "curve, extra class and canonical point counts with their incidence patterns",
          "nodal curves and non-effective classes", ("mi", "vii", "mii"), check_models),
    Check("vinberg", 7, "Vinberg condition at n = 9 with all maximal parabolic decompositions of rank 8",
          "finite index reflection subgroup", ("mi", "vii", "mii"), check_vinberg),
    Check("fibration-lists", 8, "elliptic fibration types read off the models, with multiple fibers",
          "types of elliptic fibrations", ("mi", "vii", "mii", "fibrations"), check_fibrations),
    Check("bisection-profiles", 9, "how every bisection of every fibration meets the singular fibers",
          "bisections and canonical points", ("mi", "vii", "mii", "fibrations"), check_bisections),
    Check("catalog-audit", 10, "Euler and Shioda-Tate audit of the eight cover fibrations",
          "fibrations of the supersingular K3 surface", ("fibrations",), check_catalog),
    Check("ehs-roots", 11, "root lattices of rank 12 with a >= 8",
          "singularities of the canonical cover", ("fibrations", "lattices"), check_ehs),
    Check("mii-automorphisms", 12, "automorphism group of the MII graph with flags respected has order 1152",
          "symmetry group of the 40 vectors", ("mii",), check_automorphisms),
    Check("property-suites", 13, "reflections, unimodular conjugation, ledger sums, MI choice independence",
          "randomized invariants", ("lattices", "mi", "vii", "mii"), check_properties),
)

SCOPES = ("all", "mi", "vii", "mii", "lattices", "plane", "fibrations")


def checks_for(scope: str) -> list[Check]:
    if scope not in SCOPES:
        raise ValueError(f"unknown scope {scope!r}")
    return [c for c in CHECKS if scope == "all" or scope in c.scopes]


def kinds_for(scope: str) -> tuple[str, ...]:
    return (scope,) if scope in ALL_KINDS else ALL_KINDS


def run_check(check: Check, scope: str = "all", fault: str | None = None) -> CheckResult:
    try:
        witness, ok = check.run(fault=fault, kinds=kinds_for(scope))
    except Exception as exc:  # a crashing check is a failing check, with the error as witness
        witness, ok = {"error": f"{type(exc).__name__}: {exc}"}, False
    return CheckResult(check.id, check.description, check.anchor, bool(ok), witness)
