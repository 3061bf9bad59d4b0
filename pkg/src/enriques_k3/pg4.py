"""The projective plane over F4.

Field elements are ints 0..3 with bit 1 standing for w, so ``2 == w`` and
``3 == w + 1``.  Addition is xor.  Points and lines are normalized
homogeneous triples (first nonzero coordinate 1), numbered 0..20 in
lexicographic order.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache

W = 2  # the element w, w^2 = w + 1

# log table over the cyclic group <w> of order 3
_EXP = (1, 2, 3)
_LOG = {1: 0, 2: 1, 3: 2}


def f4_add(a: int, b: int) -> int:
    return a ^ b


def f4_mul(a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    return _EXP[(_LOG[a] + _LOG[b]) % 3]


def f4_inv(a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("0 has no inverse in F4")
    return _EXP[(-_LOG[a]) % 3]


def normalize(v) -> tuple[int, int, int]:
    lead = next(x for x in v if x)
    inv = f4_inv(lead)
    return tuple(f4_mul(inv, x) for x in v)


def _dot(u, v) -> int:
    s = 0
    for a, b in zip(u, v):
        s ^= f4_mul(a, b)
    return s


class PlaneError(ValueError):
    pass


@dataclass(frozen=True)
class Plane:
    points: tuple[tuple[int, int, int], ...]
    lines: tuple[tuple[int, int, int], ...]
    incidence: tuple[tuple[bool, ...], ...]  # incidence[line][point]

    @property
    def points_on(self) -> tuple[frozenset[int], ...]:
        return _points_on(self)

    @property
    def lines_through(self) -> tuple[frozenset[int], ...]:
        return _lines_through(self)

    def line_through(self, p: int, q: int) -> int:
        if p == q:
            raise PlaneError("need two distinct points")
        (ell,) = self.lines_through[p] & self.lines_through[q]
        return ell

    def meet(self, l1: int, l2: int) -> int:
        if l1 == l2:
            raise PlaneError("need two distinct lines")
        (p,) = self.points_on[l1] & self.points_on[l2]
        return p

    def collinear(self, p: int, q: int, r: int) -> bool:
        return r in self.points_on[self.line_through(p, q)]

    def to_json(self) -> str:
        return json.dumps(
            {
                "points": [list(p) for p in self.points],
                "lines": [list(l) for l in self.lines],
                "points_on_line": [sorted(s) for s in self.points_on],
            }
        )


@lru_cache(maxsize=None)
def _points_on(plane: Plane):
    return tuple(frozenset(p for p, on in enumerate(row) if on) for row in plane.incidence)


@lru_cache(maxsize=None)
def _lines_through(plane: Plane):
    n = len(plane.points)
    return tuple(
        frozenset(l for l in range(len(plane.lines)) if plane.incidence[l][p]) for p in range(n)
    )


@lru_cache(maxsize=None)
def build_plane() -> Plane:
    triples = sorted({normalize(v) for v in itertools.product(range(4), repeat=3) if any(v)})
    inc = tuple(tuple(_dot(l, p) == 0 for p in triples) for l in triples)
    return Plane(tuple(triples), tuple(triples), inc)


# ---------------------------------------------------------------------------
# hyperovals


@dataclass(frozen=True, order=True)
class Hyperoval:
    points: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(sorted(self.points)))
        if len(self.points) != 6 or len(set(self.points)) != 6:
            raise PlaneError("a hyperoval has six distinct points")


def in_general_position(plane: Plane, pts) -> bool:
    return not any(plane.collinear(a, b, c) for a, b, c in itertools.combinations(pts, 3))


@lru_cache(maxsize=None)
def hyperovals(plane: Plane) -> tuple[Hyperoval, ...]:
    """All 6-sets with no three points collinear, by backtracking."""
    out = []
    n = len(plane.points)

    def extend(chosen: list[int], blocked: frozenset[int], start: int):
        if len(chosen) == 6:
            out.append(Hyperoval(tuple(chosen)))
            return
        for p in range(start, n):
            if p in blocked:
                continue
            # every point on a secant through p and an earlier point is now blocked
            new = set(blocked)
            for q in chosen:
                new |= plane.points_on[plane.line_through(p, q)]
            extend(chosen + [p], frozenset(new), p + 1)

    extend([], frozenset(), 0)
    return tuple(sorted(out))


# ---------------------------------------------------------------------------
# the flag used for the MII construction


@dataclass(frozen=True)
class MIIFlag:
    ell: int
    p: tuple[int, int, int, int, int]
    # l[i][j]: the four lines other than ell through p[i], i = 0, 1
    l: tuple[tuple[int, int, int, int], tuple[int, int, int, int]]

    def validate(self, plane: Plane) -> None:
        if sorted(self.p) != sorted(plane.points_on[self.ell]):
            raise PlaneError("p1..p5 must be the points of ell")
        for i in (0, 1):
            expected = plane.lines_through[self.p[i]] - {self.ell}
            if set(self.l[i]) != expected or len(self.l[i]) != 4:
                raise PlaneError(f"l[{i}] must be the four lines through p{i + 1} other than ell")
            for ln in self.l[i]:
                others = [self.p[k] for k in range(5) if k != i]
                if any(q in plane.points_on[ln] for q in others):
                    raise PlaneError("l[i][j] meets ell in a second point")
        for half in (0, 2):
            if self.diagonal_point(plane, half) != self.p[4]:
                raise PlaneError("p5 must be the diagonal point of the quadrangles cut out by the l[i][j]")

    def diagonal_point(self, plane: Plane, half: int = 0) -> int:
        """Third diagonal point of the quadrangle l[0][h], l[0][h+1] x l[1][h], l[1][h+1]."""
        a, b = self.l[0][half : half + 2]
        c, d = self.l[1][half : half + 2]
        q = [plane.meet(x, y) for x in (a, b) for y in (c, d)]
        return plane.meet(plane.line_through(q[0], q[3]), plane.line_through(q[1], q[2]))


def default_mii_flag(plane: Plane, ell: int = 0, order=None) -> MIIFlag:
    """Flag with sorted lines; p3, p4 sorted and p5 the forced diagonal point."""
    pts = tuple(sorted(plane.points_on[ell])) if order is None else tuple(order)
    ls = tuple(tuple(sorted(plane.lines_through[pts[i]] - {ell})) for i in (0, 1))
    if order is None:
        probe = MIIFlag(ell, pts, ls)
        d = probe.diagonal_point(plane)
        rest = sorted(set(pts[2:]) - {d})
        pts = (pts[0], pts[1], rest[0], rest[1], d)
    flag = MIIFlag(ell, pts, ls)
    flag.validate(plane)
    return flag


def mii_special_hyperovals(plane: Plane, flag: MIIFlag) -> tuple[Hyperoval, ...]:
    """Hyperovals through p1, p2 avoiding p3, p4, p5, one more point on each l[i][j]."""
    flag.validate(plane)
    p1, p2, p3, p4, p5 = flag.p
    out = []
    for h in hyperovals(plane):
        s = set(h.points)
        if not {p1, p2} <= s or s & {p3, p4, p5}:
            continue
        rest = s - {p1, p2}
        if all(len(plane.points_on[ln] & rest) == 1 for row in flag.l for ln in row):
            out.append(h)
    return tuple(out)


# ---------------------------------------------------------------------------
# base configurations for MI: nine points meeting every line in 1 or 3 points


@dataclass(frozen=True)
class MIBaseConfig:
    base: tuple[int, ...]
    trisecants: tuple[int, ...]
    tangents: tuple[int, ...]
    triangles: tuple[tuple[int, int, int], ...]
    vertices: tuple[int, ...]

    def triangle_vertices(self, plane: Plane, k: int) -> tuple[int, int, int]:
        a, b, c = self.triangles[k]
        return (plane.meet(a, b), plane.meet(b, c), plane.meet(a, c))


@lru_cache(maxsize=None)
def mi_base_configurations(plane: Plane) -> tuple[MIBaseConfig, ...]:
    """All 9-point sets met by every line in 1 or 3 points, with derived data.

    Search adds points in increasing order and prunes as soon as some line
    holds 4 chosen points or a line with 0 or 2 chosen points can no longer be
    completed from the remaining candidates.
    """
    n = len(plane.points)
    pts_on = plane.points_on
    lines_thru = plane.lines_through
    nlines = len(plane.lines)
    results = []

    def feasible(count, start, chosen_n):
        need = 9 - chosen_n
        for ln in range(nlines):
            c = count[ln]
            if c > 3:
                return False
            if c in (0, 2):
                if not any(q >= start for q in pts_on[ln]):
                    return False
        return n - start >= need

    def extend(chosen, count, start):
        if len(chosen) == 9:
            if all(c in (1, 3) for c in count):
                results.append(tuple(chosen))
            return
        for p in range(start, n):
            for ln in lines_thru[p]:
                count[ln] += 1
            if feasible(count, p + 1, len(chosen) + 1):
                extend(chosen + [p], count, p + 1)
            for ln in lines_thru[p]:
                count[ln] -= 1

    extend([], [0] * nlines, 0)

    configs = []
    for base in results:
        bset = set(base)
        tri = tuple(l for l in range(nlines) if len(pts_on[l] & bset) == 3)
        tan = tuple(l for l in range(nlines) if len(pts_on[l] & bset) == 1)
        triangles = []
        for a, b, c in itertools.combinations(tri, 3):
            cover = (pts_on[a] | pts_on[b] | pts_on[c]) & bset
            if len(cover) != 9:
                continue
            vs = {plane.meet(a, b), plane.meet(b, c), plane.meet(a, c)}
            if len(vs) == 3 and not vs & bset:
                triangles.append((a, b, c))
        verts = sorted({v for t in triangles for v in (plane.meet(t[0], t[1]), plane.meet(t[1], t[2]), plane.meet(t[0], t[2]))})
        configs.append(MIBaseConfig(base, tri, tan, tuple(triangles), tuple(verts)))
    return tuple(configs)
