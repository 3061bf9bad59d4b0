"""Curve configurations on the K3 cover and their descent to the Enriques side.

Three constructions are supported: ``mi`` and ``mii`` live on the 42-curve
model over the plane of order 4, ``vii`` is rebuilt from torsion sections of
an elliptic fibration.  ``build_surface`` runs the whole pipeline and returns
an immutable :class:`XModel`.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd, prod
from typing import Sequence

from . import descent, dynkin, exactlat
from .nsmodel import NSClass, build_ns_model, e_label, l_label, minus_four_vector, orthogonal_filter
from .pg4 import MIIFlag, Plane, build_plane, default_mii_flag, hyperovals, mi_base_configurations


class ConfigError(ValueError):
    pass


class InfeasibleError(ConfigError):
    pass


KINDS = ("mi", "vii", "mii")


# ---------------------------------------------------------------------------
# fibers


_FIBER_RE = re.compile(r"^I(\d+)(\*?)$")


def parse_fiber(text: str) -> tuple[int, bool]:
    """'I10' -> (10, False), 'I1*' -> (1, True)."""
    m = _FIBER_RE.match(text.strip())
    if not m:
        raise ConfigError(f"unsupported fiber type {text!r}")
    n, star = int(m.group(1)), bool(m.group(2))
    if n < 1 and not star:
        raise ConfigError("I0 has no reducible structure")
    return n, star


def fiber_components(text: str) -> int:
    n, star = parse_fiber(text)
    return n + 5 if star else n


def fiber_discriminant(text: str) -> int:
    n, star = parse_fiber(text)
    return 4 if star else n


@dataclass(frozen=True)
class FiberData:
    type: str
    components: tuple[str, ...]  # cyclic order for I_n; t0..t3 then chain for I_n*
    multiplicities: tuple[int, ...]


@dataclass(frozen=True)
class CurveConfigY:
    kind: str
    labels: tuple[str, ...]
    gram: tuple[tuple[int, ...], ...]
    fibers: tuple[FiberData, ...]
    sections: tuple[str, ...]
    ns: object = field(default=None, repr=False, compare=False)  # NSModel when labels are NS generators

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def pair(self, a: str, b: str) -> int:
        return self.gram[self.index(a)][self.index(b)]

    def role(self, label: str):
        for v, f in enumerate(self.fibers):
            if label in f.components:
                return ("fiber", v, f.components.index(label))
        if label in self.sections:
            return ("section", self.sections.index(label))
        return ("other",)

    def fiber_class(self, v: int = 0) -> list[int]:
        """Coefficient vector (over labels) of fiber ``v``."""
        vec = [0] * len(self.labels)
        f = self.fibers[v]
        for c, k in zip(f.components, f.multiplicities):
            vec[self.index(c)] += k
        return vec

    def validate(self) -> None:
        n = len(self.labels)
        for i in range(n):
            if self.gram[i][i] != -2:
                raise ConfigError(f"{self.labels[i]} has norm {self.gram[i][i]}")
        for v, f in enumerate(self.fibers):
            idx = [self.index(c) for c in f.components]
            sub = [[self.gram[i][j] for j in idx] for i in idx]
            if not _is_kodaira_graph(f.type, sub):
                raise ConfigError(f"fiber {v} ({f.type}) has the wrong dual graph")
            fv = self.fiber_class(v)
            for i in idx:
                if exactlat.matvec([self.gram[i]], fv)[0] != 0:
                    raise ConfigError(f"fiber {v} is not orthogonal to its component {self.labels[i]}")
            for w in range(v + 1, len(self.fibers)):
                for a in f.components:
                    for b in self.fibers[w].components:
                        if self.pair(a, b):
                            raise ConfigError(f"fibers {v} and {w} meet")
        for s in self.sections:
            row = self.gram[self.index(s)]
            for v in range(len(self.fibers)):
                if sum(a * b for a, b in zip(row, self.fiber_class(v))) != 1:
                    raise ConfigError(f"section {s} does not meet fiber {v} once")

    def graph(self) -> dynkin.WeightedGraph:
        return dynkin.graph_from_gram(self.labels, [True] * len(self.labels), self.gram)


def _is_kodaira_graph(text: str, sub) -> bool:
    n, star = parse_fiber(text)
    k = len(sub)
    if not star:
        if n == 1:
            return k == 1
        if n == 2:
            return k == 2 and sub[0][1] == 2
        return all(sub[i][(i + 1) % k] == 1 for i in range(k)) and sum(
            1 for i in range(k) for j in range(k) if sub[i][j] > 0 and i != j
        ) == 2 * k
    # I_n*: t0, t1 on chain start, t2, t3 on chain end
    g = dynkin.WeightedGraph(
        tuple(map(str, range(k))), (True,) * k, tuple(tuple(0 if i == j else sub[i][j] for j in range(k)) for i in range(k))
    )
    t = dynkin.shape_type(g, range(k)) if g.is_connected(range(k)) else None
    return t == dynkin.AffineType("D", n + 4)


# ---------------------------------------------------------------------------
# torsion sections


class _ComponentGroup:
    """Component group of one fiber with the local height corrections."""

    def __init__(self, text: str):
        self.text = text
        self.n, self.star = parse_fiber(text)
        self.order = 4 if self.star else self.n
        self.elements = list(range(self.order))

    def add(self, a: int, b: int) -> int:
        if not self.star:
            return (a + b) % self.n
        if self.n % 2:
            return (a + b) % 4
        return a ^ b

    def mul(self, k: int, a: int) -> int:
        x = 0
        for _ in range(k % self.order if not self.star or self.n % 2 else k % 2):
            x = self.add(x, a)
        return x

    def theta(self, a: int) -> int:
        """Index of the simple component hit by group element ``a`` (I_n: the element itself)."""
        if not self.star:
            return a
        if self.n % 2:
            return (0, 2, 1, 3)[a]  # 2 is the element of order two: near component t1
        return a

    def contr(self, a: int, b: int) -> Fraction:
        if a == 0 or b == 0:
            return Fraction(0)
        if not self.star:
            i, j = sorted((a, b))
            return Fraction(i * (self.n - j), self.n)
        ta, tb = self.theta(a), self.theta(b)
        far = Fraction(self.n, 4)
        if ta == tb:
            return Fraction(1) if ta == 1 else 1 + far
        if 1 in (ta, tb):
            return Fraction(1, 2)
        return Fraction(1, 2) + far


def _group_elements(torsion: Sequence[int]):
    return list(itertools.product(*(range(t) for t in torsion)))


def _section_label(g) -> str:
    if not any(g):
        return "O"
    return "S" + ".".join(map(str, g))


def torsion_solutions(fibers: Sequence[str], torsion: Sequence[int], chi: int = 2, first_only: bool = False):
    """Injective homomorphisms T -> prod(component groups) with all heights zero.

    Returns a list of ``(images, po, pq)``: ``images[g]`` is the tuple of
    component-group elements of section g, ``po[g]`` its intersection with
    the zero section and ``pq[(g, h)]`` the section-section numbers.
    """
    groups = [_ComponentGroup(f) for f in fibers]
    torsion = tuple(torsion)
    elems = _group_elements(torsion)
    k = len(torsion)
    product = list(itertools.product(*(cg.elements for cg in groups)))

    def comb(coeffs, imgs):
        x = [0] * len(groups)
        for c, img in zip(coeffs, imgs):
            for v, cg in enumerate(groups):
                x[v] = cg.add(x[v], cg.mul(c, img[v]))
        return tuple(x)

    def height_ok(x):
        s = sum(cg.contr(a, a) for cg, a in zip(groups, x))
        po = s / 2 - chi
        return po.denominator == 1 and po >= 0

    cands = []
    for t in torsion:
        cands.append([x for x in product if any(x) and all(cg.mul(t, a) == 0 for cg, a in zip(groups, x)) and height_ok(x)])

    sols = []

    def rec(imgs):
        if len(imgs) == k:
            res = _check_images(groups, elems, imgs, comb, chi)
            if res is not None:
                sols.append(res)
                return first_only
            return False
        for x in cands[len(imgs)]:
            if rec(imgs + [x]):
                return True
        return False

    rec([])
    return sols


def _check_images(groups, elems, imgs, comb, chi):
    images = {g: comb(g, imgs) for g in elems}
    if len(set(images.values())) != len(elems):
        return None
    po = {}
    for g, x in images.items():
        if not any(g):
            continue
        s = sum(cg.contr(a, a) for cg, a in zip(groups, x))
        v = s / 2 - chi
        if v.denominator != 1 or v < 0:
            return None
        po[g] = int(v)
    pq = {}
    nz = [g for g in elems if any(g)]
    for g, h in itertools.combinations(nz, 2):
        s = sum(cg.contr(a, b) for cg, a, b in zip(groups, images[g], images[h]))
        v = chi + po[g] + po[h] - s
        if v.denominator != 1 or v < 0:
            return None
        pq[(g, h)] = int(v)
    return images, po, pq


def torsion_section_model(fibers: Sequence[str], torsion: Sequence[int], solution: int = 0) -> CurveConfigY:
    """Components and torsion sections of an elliptic K3 with the given singular fibers."""
    fibers = list(fibers)
    torsion = tuple(int(t) for t in torsion)
    rank_triv = sum(fiber_components(f) - 1 for f in fibers)
    if rank_triv > 20:
        raise ConfigError(f"fibers have {rank_triv} > 20 non-identity components")
    order = prod(torsion)
    if rank_triv == 20 and order**2 * 4 != prod(fiber_discriminant(f) for f in fibers):
        raise ConfigError("torsion order does not match the discriminant count")
    sols = torsion_solutions(fibers, torsion, first_only=solution == 0)
    if len(sols) <= solution:
        raise InfeasibleError(f"no torsion section configuration for {fibers} with group {torsion}")
    images, po, pq = sols[solution]
    groups = [_ComponentGroup(f) for f in fibers]

    labels: list[str] = []
    fdata = []
    for v, cg in enumerate(groups):
        if cg.star:
            comps = [f"F{v}_t{i}" for i in range(4)] + [f"F{v}_c{i}" for i in range(cg.n + 1)]
            mults = [1, 1, 1, 1] + [2] * (cg.n + 1)
        else:
            comps = [f"F{v}_{i}" for i in range(cg.n)]
            mults = [1] * cg.n
        labels += comps
        fdata.append(FiberData(fibers[v], tuple(comps), tuple(mults)))
    elems = _group_elements(torsion)
    sections = [_section_label(g) for g in elems]
    labels += sections
    idx = {l: i for i, l in enumerate(labels)}
    n = len(labels)
    gram = [[0] * n for _ in range(n)]
    for i in range(n):
        gram[i][i] = -2
    for v, cg in enumerate(groups):
        comps = fdata[v].components
        if cg.star:
            chain = [f"F{v}_c{i}" for i in range(cg.n + 1)]
            edges = [(comps[0], chain[0]), (comps[1], chain[0]), (comps[2], chain[-1]), (comps[3], chain[-1])]
            edges += list(zip(chain, chain[1:]))
        elif cg.n == 2:
            edges = [(comps[0], comps[1]), (comps[0], comps[1])]
        elif cg.n > 2:
            edges = [(comps[i], comps[(i + 1) % cg.n]) for i in range(cg.n)]
        else:
            edges = []
        for a, b in edges:
            gram[idx[a]][idx[b]] += 1
            gram[idx[b]][idx[a]] += 1
        for g in elems:
            t = cg.theta(images[g][v])
            comp = comps[t]
            s = idx[_section_label(g)]
            gram[s][idx[comp]] = gram[idx[comp]][s] = 1
    zero = tuple(0 for _ in torsion)
    for g, val in po.items():
        a, b = idx[_section_label(g)], idx[_section_label(zero)]
        gram[a][b] = gram[b][a] = val
    for (g, h), val in pq.items():
        a, b = idx[_section_label(g)], idx[_section_label(h)]
        gram[a][b] = gram[b][a] = val
    cfg = CurveConfigY("torsion", tuple(labels), tuple(map(tuple, gram)), tuple(fdata), tuple(sections))
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# configurations on the 42-curve model


def _ns_config(kind, plane, fibers, sections) -> CurveConfigY:
    model = build_ns_model(plane)
    labels = model.labels
    cfg = CurveConfigY(kind, labels, model.gram42, tuple(fibers), tuple(sections), ns=model)
    cfg.validate()
    return cfg


def mi_config(plane: Plane, base_index: int = 0) -> CurveConfigY:
    configs = mi_base_configurations(plane)
    if not configs:
        raise InfeasibleError("no nine-point base configuration")
    conf = configs[base_index]
    fibers = []
    for k, (a, b, c) in enumerate(conf.triangles):
        vab, vbc, vac = conf.triangle_vertices(plane, k)
        comps = (l_label(a), e_label(vab), l_label(b), e_label(vbc), l_label(c), e_label(vac))
        fibers.append(FiberData("I6", comps, (1,) * 6))
    sections = [e_label(p) for p in conf.base] + [l_label(l) for l in conf.tangents]
    return _ns_config("mi", plane, fibers, sections)


def mii_labels(flag: MIIFlag) -> dict[str, str]:
    """Names used in the MII construction mapped to NS generator labels."""
    names = {"L": l_label(flag.ell)}
    for i, p in enumerate(flag.p, start=1):
        names[f"E{i}"] = e_label(_ := p)
    for i in (0, 1):
        for j in range(4):
            names[f"L{i + 1}{j + 1}"] = l_label(flag.l[i][j])
    return names


def _mii_point(plane: Plane, flag: MIIFlag, i: int, j: int) -> int:
    return plane.meet(flag.l[0][i - 1], flag.l[1][j - 1])


def mii_f_choices(plane: Plane, flag: MIIFlag) -> list[tuple[int, int]]:
    """Pairs of lines through p5 that complete the I1* fiber to the fiber class."""
    model = build_ns_model(plane)
    first = _mii_i8(plane, flag, 1)
    target = model.generated.project(_class_vector(model, first))
    p5 = flag.p[4]
    lines = sorted(plane.lines_through[p5] - {flag.ell})
    out = []
    for f1, f2 in itertools.combinations(lines, 2):
        comps = _mii_star(flag, f1, f2)
        if model.generated.project(_class_vector(model, comps)) == target:
            out.append((f1, f2))
    return out


def _class_vector(model, comps: FiberData) -> list[int]:
    v = [0] * len(model.labels)
    for c, k in zip(comps.components, comps.multiplicities):
        v[model.index(c)] += k
    return v


def _mii_i8(plane: Plane, flag: MIIFlag, which: int) -> FiberData:
    a, b = (1, 2) if which == 1 else (3, 4)
    L = lambda i, j: l_label(flag.l[i - 1][j - 1])
    E = lambda i, j: e_label(_mii_point(plane, flag, i, j))
    comps = (L(1, a), E(a, a), L(2, a), E(b, a), L(1, b), E(b, b), L(2, b), E(a, b))
    return FiberData("I8", comps, (1,) * 8)


def _mii_star(flag: MIIFlag, f1: int, f2: int) -> FiberData:
    comps = (e_label(flag.p[2]), e_label(flag.p[3]), l_label(f1), l_label(f2), l_label(flag.ell), e_label(flag.p[4]))
    return FiberData("I1*", comps, (1, 1, 1, 1, 2, 2))


def mii_config(plane: Plane, flag: MIIFlag | None = None, f_choice: int = 0) -> CurveConfigY:
    flag = flag or default_mii_flag(plane)
    choices = mii_f_choices(plane, flag)
    if len(choices) <= f_choice:
        raise InfeasibleError("no pair of lines through p5 completes the I1* fiber")
    fibers = [_mii_i8(plane, flag, 1), _mii_i8(plane, flag, 2), _mii_star(flag, *choices[f_choice])]
    model = build_ns_model(plane)
    fv = _class_vector(model, fibers[0])
    used = {c for f in fibers for c in f.components}
    sections = [
        lab for lab in model.labels
        if lab not in used and sum(a * b for a, b in zip(model.gram42[model.index(lab)], fv)) == 1
    ]
    return _ns_config("mii", plane, fibers, sections)


VII_FIBERS = ("I10", "I10", "I2", "I2")
VII_TORSION = (10,)
MI_TORSION_FIBERS = ("I6", "I6", "I6", "I6")
MI_TORSION = (6, 3)


def build_y_config(kind: str, plane: Plane | None = None) -> CurveConfigY:
    kind = kind.lower()
    plane = plane or build_plane()
    if kind == "mi":
        return mi_config(plane)
    if kind == "mii":
        return mii_config(plane)
    if kind == "vii":
        return _vii_config()
    raise ConfigError(f"unknown kind {kind!r}; expected one of {KINDS}")


@lru_cache(maxsize=None)
def _vii_config():
    cfg = torsion_section_model(VII_FIBERS, VII_TORSION)
    return CurveConfigY("vii", cfg.labels, cfg.gram, cfg.fibers, cfg.sections)


# ---------------------------------------------------------------------------
# integral curves


@dataclass(frozen=True)
class IntegralSet:
    curves: frozenset[str]
    secondary: tuple[str, ...] = ()  # contracted once they reach -1

    def __len__(self):
        return len(self.curves)


def alternating_integral_sets(cfg: CurveConfigY) -> list[IntegralSet]:
    """Alternating choices on even I_n fibers with every section meeting two of them."""
    options = []
    for f in cfg.fibers:
        n, star = parse_fiber(f.type)
        if star or n % 2:
            raise ConfigError(f"alternating choice needs even I_n fibers, got {f.type}")
        options.append([frozenset(f.components[i::2]) for i in (0, 1)])
    sec_rows = [cfg.gram[cfg.index(s)] for s in cfg.sections]
    out = []
    for pick in itertools.product(*options):
        chosen = frozenset().union(*pick)
        idx = [cfg.index(c) for c in chosen]
        if any(cfg.gram[a][b] for a in idx for b in idx if a != b):
            continue
        if all(sum(row[i] for i in idx) == 2 for row in sec_rows):
            out.append(IntegralSet(chosen))
    return out


def identify_integral_sets(cfg: CurveConfigY, kind: str | None = None, flag: MIIFlag | None = None) -> list[IntegralSet]:
    kind = (kind or cfg.kind).lower()
    if kind == "mii":
        plane = cfg.ns.plane
        flag = flag or default_mii_flag(plane)
        names = mii_labels(flag)
        fixed = [names[k] for k in ("L11", "L12", "L21", "L22", "L13", "L14", "L23", "L24", "E3", "E4", "E5")]
        return [IntegralSet(frozenset(fixed), (names["L"],))]
    sets = alternating_integral_sets(cfg)
    if not sets:
        raise InfeasibleError("no admissible integral set")
    return sets


# ---------------------------------------------------------------------------
# descent


@dataclass(frozen=True)
class XModel:
    kind: str
    labels: tuple[str, ...]
    effective: tuple[bool, ...]
    weights: tuple[int, ...]
    gram: tuple[tuple[int, ...], ...]
    points: tuple[descent.Point, ...]
    ledger: dict = field(compare=False)  # (label, label) -> tuple of (point id, multiplicity)
    credits: dict = field(compare=False)  # label -> tuple of (point id, multiplicity)
    discarded: tuple[tuple[str, int], ...] = ()
    contracted: tuple[str, ...] = ()
    integral: tuple[str, ...] = ()

    @property
    def n(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def pair(self, a: str, b: str) -> int:
        return self.gram[self.index(a)][self.index(b)]

    @property
    def curves(self) -> tuple[str, ...]:
        return tuple(l for l, e in zip(self.labels, self.effective) if e)

    @property
    def extras(self) -> tuple[str, ...]:
        return tuple(l for l, e in zip(self.labels, self.effective) if not e)

    @property
    def canonical_points(self) -> tuple[descent.Point, ...]:
        return tuple(p for p in self.points if p.canonical)

    def point(self, pid: str) -> descent.Point:
        return next(p for p in self.points if p.id == pid)

    def contributions(self, a: str, b: str) -> tuple:
        key = (a, b) if self.index(a) < self.index(b) else (b, a)
        return self.ledger.get(key, ())

    def graph(self) -> dynkin.WeightedGraph:
        return dynkin.graph_from_gram(self.labels, self.effective, self.gram)

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": self.kind,
                "classes": [
                    {"label": l, "effective": e, "weight": w} for l, e, w in zip(self.labels, self.effective, self.weights)
                ],
                "gram": [list(r) for r in self.gram],
                "points": [
                    {"id": p.id, "type": p.type, "members": list(p.members), "contracted": list(p.contracted)}
                    for p in self.points
                ],
                "ledger": [
                    {"pair": list(k), "contributions": [list(c) for c in v]} for k, v in sorted(self.ledger.items())
                ],
            },
            sort_keys=True,
        )

    def to_dot(self) -> str:
        lines = ["graph X {"]
        for i, (l, e) in enumerate(zip(self.labels, self.effective)):
            lines.append(f'  {i} [label="{l}"{"" if e else ", style=dashed"}];')
        tangent = {}
        for (a, b), contribs in self.ledger.items():
            if any(m == 2 for _, m in contribs):
                tangent[(a, b)] = True
        for i in range(self.n):
            for j in range(i + 1, self.n):
                k = self.gram[i][j]
                if k <= 0:
                    continue
                style = ", style=bold" if tangent.get((self.labels[i], self.labels[j])) else ""
                for _ in range(k):
                    lines.append(f"  {i} -- {j} [color=black{style}];")
        lines.append("}")
        return "\n".join(lines)


def _extra_pairings(cfg: CurveConfigY, extras: Sequence[NSClass]):
    model = cfg.ns
    cols = []
    for r in extras:
        cols.append([r.dot(model.generator(l).coords) for l in cfg.labels])
    ee = [[a.dot(b) for b in extras] for a in extras]
    return cols, ee


def descend(cfg: CurveConfigY, integral: IntegralSet, extras: Sequence[NSClass] = ()) -> XModel:
    """Descend curves and extra classes of ``cfg`` through the weight rule and blowdowns."""
    labels = list(cfg.labels)
    ncur = len(labels)
    idx_int = {cfg.index(c) for c in integral.curves}
    secondary = [cfg.index(c) for c in integral.secondary]
    extras = list(extras)
    if extras and cfg.ns is None:
        raise ConfigError("extra classes need a configuration on the 42-curve model")
    cols, ee = _extra_pairings(cfg, extras) if extras else ([], [])
    for k, col in enumerate(cols):
        bad = [labels[i] for i in idx_int if col[i]]
        if bad:
            raise descent.DescentError(f"extra class {k} is not orthogonal to integral curves {bad}")
    ext_labels = [f"r{k + 1}" for k in range(len(extras))]
    all_labels = labels + ext_labels
    n = len(all_labels)
    up = [[0] * n for _ in range(n)]
    for i in range(ncur):
        for j in range(ncur):
            up[i][j] = cfg.gram[i][j]
    for k, col in enumerate(cols):
        for i in range(ncur):
            up[ncur + k][i] = up[i][ncur + k] = col[i]
        for m in range(len(extras)):
            up[ncur + k][ncur + m] = ee[k][m]
    weights = [1 if i in idx_int else 2 for i in range(ncur)] + [1] * len(extras)
    down = descent.weighted_gram(up, weights)
    for i in idx_int:
        if down[i][i] != -1:
            raise descent.DescentError(f"integral curve {labels[i]} descends to {down[i][i]}, expected -1")
    c = descent.contract(down, up, sorted(idx_int), secondary)

    # canonical points
    comp_ids = []
    for k, comp in enumerate(c.components):
        sub = dynkin.graph_from_gram([all_labels[i] for i in comp], [True] * len(comp), [[up[i][j] for j in comp] for i in comp])
        etype = dynkin.elliptic_type(sub, range(len(comp))) or f"X{len(comp)}"
        comp_ids.append((f"p{k}", etype, tuple(all_labels[i] for i in comp)))

    survivors = c.survivors
    pos = {old: new for new, old in enumerate(survivors)}
    keep = []
    discarded = []
    for old in survivors:
        norm = c.gram[pos[old]][pos[old]]
        is_extra = old >= ncur
        if norm == -2:
            keep.append(old)
        elif is_extra:
            raise descent.DescentError(f"extra class {all_labels[old]} lands at {norm}")
        else:
            discarded.append((all_labels[old], norm))

    effective = [old < ncur for old in keep]
    gram = tuple(tuple(c.gram[pos[a]][pos[b]] for b in keep) for a in keep)
    members = {k: [] for k in range(len(c.components))}
    credits = {}
    for old in keep:
        lst = []
        for k, amt in sorted(c.self_credit.get(old, {}).items()):
            lst.append((comp_ids[k][0], amt))
            members[k].append(all_labels[old])
        credits[all_labels[old]] = tuple(lst)

    points = [
        descent.Point(pid, etype, tuple(members[k]), contracted)
        for k, (pid, etype, contracted) in enumerate(comp_ids)
    ]
    ledger = {}
    gcount = 0
    vcount = 0
    for a_pos, a in enumerate(keep):
        for b in keep[a_pos + 1 :]:
            contribs = []
            direct = down[a][b]
            if direct:
                if effective[keep.index(a)] and effective[keep.index(b)]:
                    per = weights[a] * weights[b] // 2
                    for _ in range(up[a][b]):
                        pid = f"g{gcount}"
                        gcount += 1
                        points.append(descent.Point(pid, "generic", (all_labels[a], all_labels[b])))
                        contribs.append((pid, per))
                else:
                    pid = f"v{vcount}"
                    vcount += 1
                    points.append(descent.Point(pid, "virtual", (all_labels[a], all_labels[b])))
                    contribs.append((pid, direct))
            for k, amt in sorted(c.pair_credit.get((a, b), {}).items()):
                if amt:
                    contribs.append((comp_ids[k][0], amt))
            if contribs:
                ledger[(all_labels[a], all_labels[b])] = tuple(contribs)

    return XModel(
        kind=cfg.kind,
        labels=tuple(all_labels[i] for i in keep),
        effective=tuple(effective),
        weights=tuple(weights[i] for i in keep),
        gram=gram,
        points=tuple(points),
        ledger=ledger,
        credits=credits,
        discarded=tuple(discarded),
        contracted=tuple(all_labels[i] for i in c.order),
        integral=tuple(sorted(integral.curves)),
    )


def extra_classes(cfg: CurveConfigY, integral: IntegralSet) -> list[NSClass]:
    """(-4)-classes of hyperovals orthogonal to every integral curve."""
    if cfg.ns is None:
        return []
    model = cfg.ns
    vecs = [minus_four_vector(model, h) for h in hyperovals(model.plane)]
    return orthogonal_filter(model, vecs, sorted(integral.curves))


@lru_cache(maxsize=None)
def build_surface(kind: str, plane: Plane | None = None, choice: int = 0) -> XModel:
    kind = kind.lower()
    plane = plane or build_plane()
    cfg = build_y_config(kind, plane)
    sets = identify_integral_sets(cfg, kind)
    integral = sets[choice]
    return descend(cfg, integral, extra_classes(cfg, integral))


# ---------------------------------------------------------------------------
# elliptic fibrations on the quotient


class NumLattice:
    """Numerical lattice spanned by an XModel, extended to its even unimodular overlattice.

    When the classes only span an index-2 sublattice, the glue vector ``b``
    (with ``b/2`` in the dual and ``b.b = 0 mod 8``) is unique and recovers the
    full lattice.  Vectors are handled in coordinates of the spanned lattice;
    elements of the overlattice may have half-integral coordinates.
    """

    def __init__(self, gram):
        self.span = exactlat.generated_lattice(gram)
        g = self.span.lattice.gram
        self.gram = g
        det = exactlat.determinant(g)
        self.glue: tuple[int, ...] | None = None
        if abs(det) == 1:
            return
        if abs(det) != 4:
            raise ConfigError(f"classes span a lattice of determinant {det}")
        n = len(g)
        found = []
        for b in itertools.product((0, 1), repeat=n):
            if any(b) and all(sum(g[i][j] * b[j] for j in range(n)) % 2 == 0 for i in range(n)):
                if exactlat.bilinear(g, b, b) % 8 == 0:
                    found.append(b)
        if len(found) != 1:
            raise ConfigError(f"{len(found)} even overlattices, expected exactly one")
        self.glue = found[0]

    def coords(self, x: Sequence[int]) -> tuple[int, ...]:
        return self.span.project(x)

    def dot(self, u, v) -> Fraction:
        return sum((Fraction(u[i]) * self.gram[i][j] * v[j] for i in range(len(u)) for j in range(len(v))), Fraction(0))

    def halvable(self, v: Sequence[int]) -> bool:
        """Whether ``v/2`` lies in the overlattice."""
        r = tuple(c % 2 for c in v)
        return not any(r) or (self.glue is not None and r == self.glue)


@dataclass(frozen=True)
class XFiber:
    symbol: str  # Kodaira symbol without multiplicity
    multiple: bool
    components: tuple[str, ...]  # all classes of the parabolic component
    visible: tuple[str, ...]  # the effective ones
    singular_points: tuple[str, ...]
    canonical_points: tuple[str, ...]
    inferred: bool = False  # singular points inferred for a partly hidden fiber

    def __str__(self):
        return ("2" if self.multiple else "") + self.symbol


@dataclass(frozen=True)
class XFibration:
    kind: str
    decomposition: tuple[str, ...]
    fiber_class: tuple[Fraction, ...]  # half-fiber in span coordinates
    fibers: tuple[XFiber, ...]  # reducible fibers
    nodal: int  # number of I1 fibers
    nodal_points: tuple[str, ...]  # canonical points carried by the I1 fibers
    bisections: tuple[str, ...]

    @property
    def all_fibers(self) -> tuple[str, ...]:
        return tuple(str(f) for f in self.fibers) + ("I1",) * self.nodal

    @property
    def type_key(self) -> tuple[str, ...]:
        return tuple(sorted(self.all_fibers, key=_fiber_sort_key))

    def __str__(self):
        return "(" + ", ".join(self.type_key) + ")"


def _fiber_sort_key(s: str):
    mult = s.startswith("2")
    core = s[1:] if mult else s
    m = re.fullmatch(r"I(\d+)", core)
    if m:
        return (0, -int(m.group(1)), mult)
    return (1, core, not mult)


def format_type(key: Sequence[str]) -> str:
    return "(" + ", ".join(sorted(key, key=_fiber_sort_key)) + ")"


def _null_vector(graph: dynkin.WeightedGraph, vertices: Sequence[int]) -> list[int]:
    """Positive primitive kernel vector of a parabolic component."""
    g = graph.gram(vertices)
    ker = exactlat.kernel_basis(g)
    if len(ker) != 1:
        raise ConfigError("parabolic component has kernel of rank != 1")
    v = list(ker[0])
    if v[0] < 0:
        v = [-c for c in v]
    d = gcd(*v)
    return [c // d for c in v]


# Kodaira candidates for an affine A-type component when some classes are not curves.
def _a_candidates(size: int) -> tuple[str, ...]:
    if size == 2:
        return ("I2", "III")
    if size == 3:
        return ("I3", "IV")
    return (f"I{size}",)


def _image_types() -> set[tuple[str, ...]]:
    from .fibrations import x_table

    return {tuple(sorted(v)) for v in x_table().values()}


def _fill(types: Sequence[str]) -> tuple[tuple[str, ...], int]:
    """Add I1 fibers up to Euler number 12 when every fiber is multiplicative."""
    from .fibrations import KodairaFiber

    fibers = [KodairaFiber.parse(t) for t in types]
    if all(f.multiplicative for f in fibers):
        k = 12 - sum(f.euler for f in fibers)
        if k < 0:
            raise ConfigError(f"Euler sum of {types} exceeds 12")
        return tuple(types) + ("I1",) * k, k
    return tuple(types), 0


class FibrationSearch:
    """All elliptic fibrations of an XModel visible through its parabolic subdiagrams."""

    def __init__(self, xm: XModel):
        self.xm = xm
        self.graph = xm.graph()
        self.num = NumLattice(xm.gram)
        self.parabolics = dynkin.enumerate_parabolics(self.graph)
        self.decompositions = dynkin.maximal_decompositions(self.graph, self.parabolics)
        self._fibrations: list[XFibration] | None = None

    def _credit_points(self, label):
        return {p for p, _ in self.xm.credits.get(label, ())}

    def _component_type(self, labels: Sequence[str]) -> str | None:
        """Kodaira symbol of a fully visible A-type component, read from the ledger."""
        xm = self.xm
        k = len(labels)
        if k >= 4:
            return f"I{k}"
        pairs = [xm.contributions(a, b) for a, b in itertools.combinations(labels, 2)]
        if k == 2:
            c = pairs[0]
            return "III" if len(c) == 1 and c[0][1] == 2 else "I2"
        common = set.intersection(*({p for p, _ in c} for c in pairs))
        return "IV" if common else "I3"

    def realize(self, dec: dynkin.ParabolicDecomposition) -> XFibration:
        xm, graph, num = self.xm, self.graph, self.num
        comps = []
        classes = set()
        for comp in dec.components:
            vs = sorted(comp.vertices)
            if str(comp.type)[1] != "A":
                raise UnsupportedFibrationError(f"component of type {comp.type}")
            coeff = _null_vector(graph, vs)
            x = [0] * xm.n
            for v, c in zip(vs, coeff):
                x[v] = c
            vec = num.coords(x)
            half = num.halvable(vec)
            e = tuple(Fraction(c, 2) if half else Fraction(c) for c in vec)
            classes.add(e)
            comps.append((comp, vs, vec))
        if len(classes) != 1:
            raise ConfigError("decomposition components have different fiber classes")
        e = classes.pop()

        fiber_set = set().union(*(set(vs) for _, vs, _ in comps))
        bis = [
            xm.labels[i]
            for i in range(xm.n)
            if xm.effective[i] and i not in fiber_set and num.dot(e, num.coords(_unit(xm.n, i))) == 1
        ]
        if not bis:
            raise ConfigError("no bisection among the curves")
        s = num.coords(_unit(xm.n, xm.index(bis[0])))

        pending = []
        for comp, vs, vec in comps:
            labels = tuple(xm.labels[v] for v in vs)
            visible = tuple(l for l in labels if xm.effective[xm.index(l)])
            if not visible:
                continue
            # A component sum containing a non-effective class is not the
            # support of a fiber, so a partly hidden fiber is supported on 2e.
            support = vec if len(visible) == len(labels) else tuple(2 * c for c in e)
            meet = num.dot(s, support)
            if meet not in (1, 2):
                raise ConfigError(f"bisection meets a fiber {meet} times")
            multiple = meet == 1
            if len(visible) == len(labels):
                cands = (self._component_type(labels),)
            else:
                cands = _a_candidates(len(labels))
            pending.append((labels, visible, multiple, cands))

        targets = _image_types()
        choices = []
        for combo in itertools.product(*(p[3] for p in pending)):
            filled, _ = _fill(combo)
            if tuple(sorted(filled)) in targets:
                choices.append(combo)
        if len(choices) != 1:
            raise ConfigError(f"{len(choices)} fiber type assignments for {dec.types}")
        combo = choices[0]
        filled, nodal = _fill(combo)

        fibers = []
        used_points = set()
        for (labels, visible, multiple, _), sym in zip(pending, combo):
            canon = set().union(*(self._credit_points(l) for l in visible))
            canon = {p for p in canon if xm.point(p).canonical}
            inferred = len(visible) != len(labels)
            if not inferred:
                sing = set()
                for a, b in itertools.combinations(labels, 2):
                    sing |= {p for p, _ in xm.contributions(a, b)}
            elif sym.startswith("I"):
                sing = set(canon)
            else:
                sing = {p for p in canon if xm.point(p).type != "A1"}
            used_points |= canon
            fibers.append(XFiber(sym, multiple, labels, visible, tuple(sorted(sing)), tuple(sorted(canon)), inferred))
        reducible_curves = {l for f in fibers for l in f.visible}
        nodal_points = tuple(
            p.id for p in xm.canonical_points
            if not any(p.id in self._credit_points(l) for l in reducible_curves)
        ) if nodal else ()
        if nodal and len(nodal_points) != nodal:
            raise ConfigError(f"{len(nodal_points)} free canonical points for {nodal} nodal fibers")
        fibers.sort(key=lambda f: _fiber_sort_key(str(f)))
        return XFibration(xm.kind, dec.types, e, tuple(fibers), nodal, nodal_points, tuple(bis))

    def fibrations(self) -> list[XFibration]:
        if self._fibrations is None:
            self._fibrations = [self.realize(d) for d in self.decompositions]
        return list(self._fibrations)


class UnsupportedFibrationError(ConfigError):
    pass


def _unit(n, i):
    x = [0] * n
    x[i] = 1
    return x


@lru_cache(maxsize=None)
def fibration_search(kind: str) -> FibrationSearch:
    return FibrationSearch(build_surface(kind))


def fibration_types(kind: str) -> dict[tuple[str, ...], int]:
    """Fibration type -> number of fibrations of that type."""
    out: dict[tuple[str, ...], int] = {}
    for f in fibration_search(kind).fibrations():
        out[f.type_key] = out.get(f.type_key, 0) + 1
    return out


# ---------------------------------------------------------------------------
# how a bisection meets the fibers


def _point_tag(xm: XModel, pid: str) -> str:
    t = xm.point(pid).type
    if t == "D4":
        return "p0"
    return "canonical" if xm.point(pid).canonical else "generic"


def bisection_hits(fs: FibrationSearch, fib: XFibration, s: str) -> tuple[str, ...]:
    """One entry per fiber, like ``'I5 singular canonical'`` or ``'2III simple p0'``.

    A bisection meets every fiber in a single point; for fully visible fibers
    this is checked, for fibers with hidden components it is assumed and the
    missing multiplicity is put at the visible contact point.
    """
    xm = fs.xm
    hits = []
    for f in fib.fibers:
        contacts = [(pid, m) for c in f.visible for pid, m in xm.contributions(s, c)]
        pts = {pid for pid, _ in contacts}
        if len(pts) > 1:
            raise ConfigError(f"{s} meets fiber {f} in {len(pts)} points")
        total = sum(m for _, m in contacts)
        expected = 1 if f.multiple else 2
        if not pts:
            hits.append(f"{f} hidden")
            continue
        pid = pts.pop()
        if not f.inferred and total != expected:
            raise ConfigError(f"{s} meets fiber {f} with multiplicity {total}")
        tag = _point_tag(xm, pid)
        if pid in f.singular_points:
            kind = "singular"
        elif total == 2:
            kind = "tangent"
        elif f.multiple:
            kind = "simple"
        else:
            kind = "other"
        hits.append(f"{f} {kind} {tag}" if kind != "tangent" else f"{f} tangent")
    credits = {p for p, _ in xm.credits.get(s, ())}
    for q in fib.nodal_points:
        hits.append("I1 singular canonical" if q in credits else "I1 tangent")
    return tuple(sorted(hits, key=lambda h: (_fiber_sort_key(h.split()[0]), h)))


def bisection_profiles(kind: str) -> dict[tuple[str, ...], set[tuple[str, ...]]]:
    """Fibration type -> every hit profile realized by some bisection of some fibration of that type."""
    fs = fibration_search(kind)
    out: dict[tuple[str, ...], set[tuple[str, ...]]] = {}
    for fib in fs.fibrations():
        prof = out.setdefault(fib.type_key, set())
        for s in fib.bisections:
            prof.add(bisection_hits(fs, fib, s))
    return out


def fiber_structures(kind: str) -> dict[tuple[str, ...], set[tuple[str, ...]]]:
    """Fibration type -> per-fiber summaries ``'IV 4 canonical, singular A1'``."""
    fs = fibration_search(kind)
    xm = fs.xm
    out: dict[tuple[str, ...], set[tuple[str, ...]]] = {}
    for fib in fs.fibrations():
        rows = []
        for f in fib.fibers:
            sing = ",".join(sorted(_point_tag(xm, p) for p in f.singular_points)) or "-"
            rows.append(f"{f} {len(f.canonical_points)} canonical, singular {sing}")
        out.setdefault(fib.type_key, set()).add(tuple(sorted(rows)))
    return out
