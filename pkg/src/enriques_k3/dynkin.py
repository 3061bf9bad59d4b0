"""Dual graphs of (-2)-vectors: affine Dynkin subdiagrams, Vinberg's test, symmetries.

A vertex set is *elliptic* when its Gram matrix (``-2`` on the diagonal,
edge multiplicities off it) is negative definite and *parabolic* when it is
negative semidefinite with a one-dimensional kernel.  Recognition is
spectral; the Dynkin shape is only read off afterwards as a label.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

from . import exactlat


class GraphError(ValueError):
    pass


class UnsupportedGraphError(GraphError):
    pass


@dataclass(frozen=True)
class AffineType:
    family: str  # "A", "D" or "E"
    parameter: int

    @property
    def rank(self) -> int:
        return self.parameter

    def __str__(self):
        return f"~{self.family}{self.parameter}"


@dataclass(frozen=True)
class WeightedGraph:
    labels: tuple[str, ...]
    effective: tuple[bool, ...]
    m: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.labels)
        if len(self.effective) != n or len(self.m) != n:
            raise GraphError("labels, flags and multiplicities disagree in size")
        for i in range(n):
            if self.m[i][i] != 0:
                raise GraphError("multiplicity matrix must have zero diagonal")
            for j in range(n):
                if self.m[i][j] != self.m[j][i] or self.m[i][j] < 0:
                    raise GraphError("multiplicities must be symmetric and non-negative")

    @property
    def n(self) -> int:
        return len(self.labels)

    @cached_property
    def neighbors(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(j for j in range(self.n) if self.m[i][j]) for i in range(self.n))

    def gram(self, vertices: Sequence[int] | None = None) -> list[list[int]]:
        vs = range(self.n) if vertices is None else vertices
        return [[-2 if i == j else self.m[i][j] for j in vs] for i in vs]

    @property
    def triple_edge_free(self) -> bool:
        return all(x < 3 for row in self.m for x in row)

    def is_connected(self, vertices: Iterable[int]) -> bool:
        vs = set(vertices)
        if not vs:
            return False
        start = next(iter(vs))
        seen = {start}
        stack = [start]
        while stack:
            v = stack.pop()
            for w in self.neighbors[v] & vs:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen == vs

    def subgraph(self, vertices: Sequence[int]) -> "WeightedGraph":
        return WeightedGraph(
            tuple(self.labels[v] for v in vertices),
            tuple(self.effective[v] for v in vertices),
            tuple(tuple(self.m[i][j] for j in vertices) for i in vertices),
        )

    # -- serialization -----------------------------------------------------

    def to_json(self) -> str:
        edges = [[i, j, self.m[i][j]] for i in range(self.n) for j in range(i + 1, self.n) if self.m[i][j]]
        verts = [{"label": l, "effective": e} for l, e in zip(self.labels, self.effective)]
        return json.dumps({"vertices": verts, "edges": edges})

    @classmethod
    def from_json(cls, text: str) -> "WeightedGraph":
        obj = json.loads(text)
        n = len(obj["vertices"])
        m = [[0] * n for _ in range(n)]
        for i, j, k in obj["edges"]:
            if i == j:
                raise GraphError("loops are not allowed")
            m[i][j] = m[j][i] = int(k)
        return cls(
            tuple(v["label"] for v in obj["vertices"]),
            tuple(bool(v.get("effective", True)) for v in obj["vertices"]),
            tuple(map(tuple, m)),
        )

    def to_dot(self) -> str:
        lines = ["graph G {"]
        for i, (lab, eff) in enumerate(zip(self.labels, self.effective)):
            style = "" if eff else ", style=dashed"
            lines.append(f'  {i} [label="{lab}"{style}];')
        for i in range(self.n):
            for j in range(i + 1, self.n):
                for _ in range(self.m[i][j]):
                    lines.append(f"  {i} -- {j};")
        lines.append("}")
        return "\n".join(lines)


def graph_from_gram(labels, effective, gram) -> WeightedGraph:
    n = len(labels)
    for i in range(n):
        if gram[i][i] != -2:
            raise GraphError(f"vertex {labels[i]} has norm {gram[i][i]}, expected -2")
    m = tuple(tuple(0 if i == j else int(gram[i][j]) for j in range(n)) for i in range(n))
    return WeightedGraph(tuple(labels), tuple(bool(e) for e in effective), m)


# ---------------------------------------------------------------------------
# recognition


def _definiteness(gram: list[list[int]]) -> tuple[int, int, int]:
    return exactlat.signature(gram)


def shape_type(graph: WeightedGraph, vertices: Sequence[int]) -> AffineType | None:
    """Structural affine label of a connected vertex set (no spectral test)."""
    vs = list(vertices)
    k = len(vs)
    sub = [[graph.m[i][j] for j in vs] for i in vs]
    if k == 2:
        return AffineType("A", 1) if sub[0][1] == 2 else None
    if any(x > 1 for row in sub for x in row):
        return None
    deg = [sum(row) for row in sub]
    edges = sum(deg) // 2
    if edges == k and all(d == 2 for d in deg):
        return AffineType("A", k - 1)
    if edges != k - 1:
        return None
    branch = [i for i in range(k) if deg[i] >= 3]
    if any(d > 4 for d in deg):
        return None
    if len(branch) == 1 and deg[branch[0]] == 4:
        return AffineType("D", 4) if k == 5 else None
    if len(branch) == 2 and all(deg[b] == 3 for b in branch):
        # both branch points must carry two leaves
        for b in branch:
            leaves = [j for j in range(k) if sub[b][j] and deg[j] == 1]
            if len(leaves) != 2:
                return None
        return AffineType("D", k - 1)
    if len(branch) == 1 and deg[branch[0]] == 3:
        arms = sorted(_arm_lengths(sub, deg, branch[0]))
        return {(2, 2, 2): AffineType("E", 6), (1, 3, 3): AffineType("E", 7), (1, 2, 5): AffineType("E", 8)}.get(
            tuple(arms)
        )
    return None


def _arm_lengths(sub, deg, center):
    k = len(sub)
    arms = []
    for start in (j for j in range(k) if sub[center][j]):
        length, prev, cur = 1, center, start
        while deg[cur] == 2:
            nxt = next(j for j in range(k) if sub[cur][j] and j != prev)
            prev, cur = cur, nxt
            length += 1
        arms.append(length)
    return arms


def elliptic_type(graph: WeightedGraph, vertices: Sequence[int]) -> str | None:
    """Finite Dynkin label (e.g. 'A3', 'D4') of a connected simply-laced tree."""
    vs = list(vertices)
    k = len(vs)
    sub = [[graph.m[i][j] for j in vs] for i in vs]
    if any(x > 1 for row in sub for x in row):
        return None
    deg = [sum(row) for row in sub]
    if sum(deg) // 2 != k - 1:
        return None
    branch = [i for i in range(k) if deg[i] >= 3]
    if not branch:
        return f"A{k}"
    if len(branch) > 1 or deg[branch[0]] > 3:
        return None
    arms = sorted(_arm_lengths(sub, deg, branch[0]))
    if arms[0] == 1 and arms[1] == 1:
        return f"D{k}"
    if arms[0] == 1 and arms[1] == 2 and arms[2] in (2, 3, 4):
        return f"E{k}"
    return None


def parabolic_type(graph: WeightedGraph, vertices: Iterable[int]) -> AffineType | None:
    vs = sorted(set(vertices))
    if not graph.is_connected(vs):
        raise GraphError("parabolic_type needs a connected vertex set")
    pos, neg, zero = _definiteness(graph.gram(vs))
    if pos or zero != 1:
        return None
    t = shape_type(graph, vs)
    if t is None:
        raise GraphError(f"semidefinite corank-1 set {vs} has no affine Dynkin shape")
    return t


# ---------------------------------------------------------------------------
# enumeration of connected parabolic subdiagrams


@dataclass(frozen=True)
class Parabolic:
    vertices: frozenset[int]
    type: AffineType

    @property
    def rank(self) -> int:
        return self.type.rank


def _connected_search(graph: WeightedGraph, max_size: int):
    """ESU enumeration of connected vertex sets whose Gram is negative semidefinite.

    Each set is reached through a chain of connected subsets; an incremental
    LDL^T factorization of ``-gram`` classifies the newest vertex: positive
    pivot keeps the set elliptic, zero pivot closes a parabolic set, negative
    pivot makes it indefinite.  Non-elliptic sets are never extended.
    Yields ``(vertices, kind)`` with kind ``"elliptic"`` or ``"parabolic"``.
    """
    n = graph.n
    nbrs = graph.neighbors
    m = graph.m

    def pivot(order, lrows, d, v):
        # solve L D l = a, where a_j = -m[order_j][v]
        l = []
        for j, u in enumerate(order):
            s = Fraction(-m[u][v])
            row = lrows[j]
            for k in range(j):
                if row[k]:
                    s -= row[k] * d[k] * l[k]
            l.append(s / d[j])
        dv = 2 - sum(lk * lk * dk for lk, dk in zip(l, d))
        return l, dv

    out = []

    def extend(order, sset, lrows, d, ext, root, excl):
        for idx in range(len(ext)):
            w = ext[idx]
            l, dw = pivot(order, lrows, d, w)
            newset = sset | {w}
            if dw > 0:
                out.append((newset, "elliptic"))
                if len(newset) < max_size:
                    blocked = excl | nbrs[w]
                    new_ext = list(ext[idx + 1 :]) + sorted(
                        u for u in nbrs[w] if u > root and u not in excl and u not in newset
                    )
                    extend(order + [w], newset, lrows + [l], d + [dw], new_ext, root, blocked | newset)
            elif dw == 0:
                out.append((newset, "parabolic"))

    for v in range(n):
        s = frozenset([v])
        out.append((s, "elliptic"))
        excl = frozenset(nbrs[v] | {v} | set(range(v)))
        ext = sorted(u for u in nbrs[v] if u > v)
        extend([v], s, [[]], [Fraction(2)], ext, v, excl)
    return out


def enumerate_parabolics(graph: WeightedGraph, max_size: int | None = None) -> list[Parabolic]:
    if not graph.triple_edge_free:
        raise UnsupportedGraphError("graph has an edge of multiplicity >= 3")
    cap = max_size or graph.n
    found = []
    for vs, kind in _connected_search(graph, cap):
        if kind == "parabolic":
            t = shape_type(graph, sorted(vs))
            if t is None:
                raise GraphError(f"semidefinite corank-1 set {sorted(vs)} has no affine shape")
            found.append(Parabolic(frozenset(vs), t))
    found.sort(key=lambda p: (p.rank, sorted(p.vertices)))
    return found


def enumerate_elliptic(graph: WeightedGraph, max_size: int | None = None) -> list[frozenset[int]]:
    cap = max_size or graph.n
    return [vs for vs, kind in _connected_search(graph, cap) if kind == "elliptic"]


# ---------------------------------------------------------------------------
# decompositions


@dataclass(frozen=True)
class ParabolicDecomposition:
    components: tuple[Parabolic, ...]

    @property
    def rank(self) -> int:
        return sum(c.rank for c in self.components)

    @property
    def types(self) -> tuple[str, ...]:
        return tuple(sorted((str(c.type) for c in self.components), key=_type_sort_key))

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset().union(*(c.vertices for c in self.components))


def _type_sort_key(s: str):
    return (-int(s[2:]), s)


def _compatible(graph: WeightedGraph, a: frozenset[int], b: frozenset[int]) -> bool:
    if a & b:
        return False
    return not any(graph.m[i][j] for i in a for j in b)


def _max_rank_completions(graph, parabolics, target, seed=None, first_only=False):
    """Sets of pairwise compatible parabolics of total rank ``target``."""
    idx = list(range(len(parabolics)))
    results = []
    closed = {}
    for i in idx:
        closed[i] = parabolics[i].vertices | frozenset().union(
            *(graph.neighbors[v] for v in parabolics[i].vertices)
        )

    def rec(chosen, blocked, rank, start):
        if rank == target:
            results.append(tuple(chosen))
            return first_only
        for i in range(start, len(parabolics)):
            p = parabolics[i]
            if rank + p.rank > target or p.vertices & blocked:
                continue
            if rec(chosen + [i], blocked | closed[i], rank + p.rank, i + 1):
                return True
        return False

    if seed is None:
        rec([], frozenset(), 0, 0)
    else:
        rec([seed], closed[seed], parabolics[seed].rank, 0)
    return results


def maximal_decompositions(graph: WeightedGraph, parabolics: Sequence[Parabolic] | None = None):
    """All parabolic subdiagrams of maximal total rank."""
    pars = list(parabolics) if parabolics is not None else enumerate_parabolics(graph)
    if not pars:
        return []
    # the maximal rank: grow target until no completion exists
    best = 0
    target = max(p.rank for p in pars)
    upper = sum(sorted((p.rank for p in pars), reverse=True)[: graph.n])
    while target <= upper:
        if _max_rank_completions(graph, pars, target, first_only=True):
            best = target
            target += 1
        else:
            break
    combos = _max_rank_completions(graph, pars, best)
    decs = [ParabolicDecomposition(tuple(pars[i] for i in c)) for c in combos]
    return decs


def group_by_types(decompositions: Sequence[ParabolicDecomposition]) -> dict[tuple[str, ...], list]:
    groups: dict[tuple[str, ...], list] = {}
    for d in decompositions:
        groups.setdefault(d.types, []).append(d)
    return groups


# ---------------------------------------------------------------------------
# Vinberg


@dataclass
class VinbergReport:
    nondegenerate: bool
    span_rank: int
    span_signature: tuple[int, int, int]
    triple_edge_free: bool
    verdict: bool
    max_rank: int
    witnesses: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)


class DegenerateGraphError(GraphError):
    pass


def vinberg_check(graph: WeightedGraph, n: int, parabolics: Sequence[Parabolic] | None = None,
                  strict: bool = False) -> VinbergReport:
    """Finite-index test for the reflection group of a graph in a lattice of signature (1, n)."""
    tef = graph.triple_edge_free
    sig = exactlat.signature(graph.gram())
    span_rank = sig[0] + sig[1]
    nondeg = span_rank == n + 1 and sig[0] == 1
    if not nondeg:
        if strict:
            raise DegenerateGraphError(f"span has rank {span_rank}, expected {n + 1}")
        return VinbergReport(False, span_rank, sig, tef, False, 0)
    if not tef:
        return VinbergReport(True, span_rank, sig, False, False, 0)
    pars = list(parabolics) if parabolics is not None else enumerate_parabolics(graph)
    target = n - 1
    witnesses = {}
    failures = []
    for i, p in enumerate(pars):
        found = _max_rank_completions(graph, pars, target, seed=i, first_only=True)
        if found:
            witnesses[tuple(sorted(p.vertices))] = [sorted(pars[j].vertices) for j in found[0]]
        else:
            failures.append(tuple(sorted(p.vertices)))
    return VinbergReport(True, span_rank, sig, True, not failures, target, witnesses, failures)


# ---------------------------------------------------------------------------
# automorphisms


def _refine(graph: WeightedGraph, colors: list[int]) -> list[int]:
    """Equitable refinement: split by (color, multiset of (neighbor color, multiplicity))."""
    n = graph.n
    m = graph.m
    while True:
        sigs = []
        for v in range(n):
            cnt = Counter((colors[u], m[v][u]) for u in graph.neighbors[v])
            sigs.append((colors[v], tuple(sorted(cnt.items()))))
        ranking = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [ranking[s] for s in sigs]
        if len(set(new)) == len(set(colors)):
            return new
        colors = new


def automorphisms(graph: WeightedGraph, respect_flags: bool = True) -> list[tuple[int, ...]]:
    """All multiplicity-preserving vertex permutations, by individualization/refinement."""
    n = graph.n
    m = graph.m
    init = [int(graph.effective[v]) if respect_flags else 0 for v in range(n)]
    base = _refine(graph, init)
    found = []

    def search(cd, ci):
        # cd: coloring with individualized domain vertices; ci: image coloring
        if sorted(Counter(cd).values()) != sorted(Counter(ci).values()):
            return
        cells_d = Counter(cd)
        if all(c == 1 for c in cells_d.values()):
            where = {c: v for v, c in enumerate(ci)}
            perm = tuple(where.get(cd[v]) for v in range(n))
            if None in perm:
                return
            if all(m[i][j] == m[perm[i]][perm[j]] for i in range(n) for j in range(i + 1, n)):
                if all(graph.effective[v] == graph.effective[perm[v]] for v in range(n)) or not respect_flags:
                    found.append(perm)
            return
        # first smallest non-singleton cell
        target = min((c for c, k in cells_d.items() if k > 1), key=lambda c: (cells_d[c], c))
        v = next(x for x in range(n) if cd[x] == target)
        fresh = max(max(cd), max(ci)) + 1
        cd2 = list(cd)
        cd2[v] = fresh
        rd = _refine(graph, cd2)
        for w in (x for x in range(n) if ci[x] == target):
            ci2 = list(ci)
            ci2[w] = fresh
            ri = _refine(graph, ci2)
            if Counter(rd) == Counter(ri):
                search(rd, ri)

    search(base, list(base))
    return sorted(found)


def _compose(p, q):
    return tuple(p[q[i]] for i in range(len(p)))


def generating_set(perms: Sequence[tuple[int, ...]]) -> list[tuple[int, ...]]:
    """A small subset of ``perms`` generating the same group (perms must form a group)."""
    if not perms:
        return []
    n = len(perms[0])
    ident = tuple(range(n))
    group = {ident}
    gens = []
    for p in perms:
        if p in group:
            continue
        gens.append(p)
        frontier = list(group)
        group = set(group)
        while frontier:
            nxt = []
            for g in frontier:
                for s in gens:
                    h = _compose(s, g)
                    if h not in group:
                        group.add(h)
                        nxt.append(h)
            frontier = nxt
    return gens


def automorphism_count(graph: WeightedGraph, respect_flags: bool = True):
    perms = automorphisms(graph, respect_flags)
    return len(perms), generating_set(perms)


def find_isomorphism(g: WeightedGraph, h: WeightedGraph, respect_flags: bool = True) -> tuple[int, ...] | None:
    """A multiplicity-preserving bijection from ``g`` onto ``h``, or None."""
    n = g.n
    if n != h.n:
        return None

    def start(graph):
        return _refine(graph, [int(graph.effective[v]) if respect_flags else 0 for v in range(n)])

    def search(cd, ci):
        if Counter(cd) != Counter(ci):
            return None
        cells = Counter(cd)
        if all(c == 1 for c in cells.values()):
            where = {c: v for v, c in enumerate(ci)}
            perm = tuple(where[cd[v]] for v in range(n))
            if any(g.m[i][j] != h.m[perm[i]][perm[j]] for i in range(n) for j in range(i + 1, n)):
                return None
            if respect_flags and any(g.effective[v] != h.effective[perm[v]] for v in range(n)):
                return None
            return perm
        target = min((c for c, k in cells.items() if k > 1), key=lambda c: (cells[c], c))
        v = next(x for x in range(n) if cd[x] == target)
        fresh = max(max(cd), max(ci)) + 1
        cd2 = list(cd)
        cd2[v] = fresh
        rd = _refine(g, cd2)
        for w in (x for x in range(n) if ci[x] == target):
            ci2 = list(ci)
            ci2[w] = fresh
            found = search(rd, _refine(h, ci2))
            if found:
                return found
        return None

    return search(start(g), start(h))
