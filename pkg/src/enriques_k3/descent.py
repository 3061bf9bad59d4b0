"""Pairing rule for an inseparable double cover and the blowdown bookkeeping.

Classes upstairs carry a weight: 1 for integral curves and for extra
(non-effective) classes, 2 for the other curves.  Downstairs the pairing is
``w_u * w_v * <u, v> / 2``.  Classes at ``-1`` are then blown down one at a
time; every correction term is credited to the point the contracted
component collapses to, so that each Gram entry can be read back as a sum
of local intersection numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


class DescentError(ValueError):
    pass


@dataclass(frozen=True)
class Point:
    id: str
    type: str  # 'A1', 'D4', ... for canonical points; 'generic'; 'virtual'
    members: tuple[str, ...]
    contracted: tuple[str, ...] = ()

    @property
    def canonical(self) -> bool:
        return self.type not in ("generic", "virtual")


def weighted_gram(gram: Sequence[Sequence[int]], weights: Sequence[int]) -> list[list[int]]:
    n = len(gram)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            x = Fraction(weights[i] * weights[j] * gram[i][j], 2)
            if x.denominator != 1:
                raise DescentError(f"half-integral pairing between classes {i} and {j}")
            row.append(int(x))
        out.append(row)
    return out


def _components(indices: Sequence[int], gram) -> list[list[int]]:
    idx = list(indices)
    parent = {i: i for i in idx}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a in idx:
        for b in idx:
            if a < b and gram[a][b]:
                parent[find(a)] = find(b)
    groups: dict[int, list[int]] = {}
    for i in idx:
        groups.setdefault(find(i), []).append(i)
    return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])


@dataclass
class Contraction:
    """Outcome of blowing down a schedule of classes."""

    gram: list[list[int]]  # over surviving classes, in their original order
    survivors: list[int]
    order: list[int]  # contracted indices in contraction order
    point_of: dict[int, int]  # contracted index -> component number
    components: list[list[int]]
    pair_credit: dict[tuple[int, int], dict[int, int]]  # (u, v) with u < v -> component -> credit
    self_credit: dict[int, dict[int, int]]


def contract(gram: Sequence[Sequence[int]], upstairs: Sequence[Sequence[int]], first: Sequence[int],
             secondary: Sequence[int] = ()) -> Contraction:
    """Blow down ``first`` (all must sit at -1), then ``secondary`` as each reaches -1.

    ``upstairs`` is the original cover Gram, used only to decide which
    contracted classes collapse to the same point.
    """
    n = len(gram)
    g = [list(map(int, row)) for row in gram]
    scheduled = list(first) + list(secondary)
    if len(set(scheduled)) != len(scheduled):
        raise DescentError("a class is scheduled twice")
    comps = _components(scheduled, upstairs)
    point_of = {i: k for k, comp in enumerate(comps) for i in comp}
    alive = set(range(n))
    pair_credit: dict[tuple[int, int], dict[int, int]] = {}
    self_credit: dict[int, dict[int, int]] = {}
    order = []

    def blow_down(e):
        if g[e][e] != -1:
            raise DescentError(f"class {e} has self-intersection {g[e][e]} when contracted, expected -1")
        alive.discard(e)
        col = {u: g[u][e] for u in alive if g[u][e]}
        pt = point_of[e]
        for u, a in col.items():
            for v, b in col.items():
                g[u][v] += a * b
                if u < v:
                    d = pair_credit.setdefault((u, v), {})
                    d[pt] = d.get(pt, 0) + a * b
                elif u == v:
                    d = self_credit.setdefault(u, {})
                    d[pt] = d.get(pt, 0) + a * b
        order.append(e)

    for e in first:
        blow_down(e)
    pending = list(secondary)
    while pending:
        ready = [e for e in pending if g[e][e] == -1]
        if not ready:
            e = pending[0]
            raise DescentError(f"class {e} is stuck at self-intersection {g[e][e]}")
        for e in ready:
            blow_down(e)
            pending.remove(e)
    survivors = sorted(alive)
    sub = [[g[u][v] for v in survivors] for u in survivors]
    return Contraction(sub, survivors, order, point_of, comps, pair_credit, self_credit)
