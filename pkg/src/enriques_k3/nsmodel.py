"""Neron-Severi lattice of the supersingular K3 surface with Artin invariant 1.

The 42 generators are the exceptional curves ``E<p>`` over the 21 points of
the plane and the transforms ``L<l>`` of the 21 lines.  Classes are kept as
integer vectors over these generators and compared after projecting to a
basis of the rank-22 lattice they span.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

from . import exactlat
from .pg4 import Hyperoval, Plane, PlaneError, in_general_position


class NSModelError(ValueError):
    pass


def e_label(p: int) -> str:
    return f"E{p}"


def l_label(ell: int) -> str:
    return f"L{ell}"


@dataclass(frozen=True, eq=False)
class NSClass:
    model: "NSModel" = field(repr=False)
    coords: tuple[int, ...]
    name: str = ""

    @property
    def reduced(self) -> tuple[int, ...]:
        return self.model.generated.project(self.coords)

    def __eq__(self, other):
        return isinstance(other, NSClass) and self.reduced == other.reduced

    def __hash__(self):
        return hash(self.reduced)

    def dot(self, other: "NSClass | Sequence[int]") -> int:
        y = other.coords if isinstance(other, NSClass) else other
        return exactlat.bilinear(self.model.gram42, self.coords, y)

    def norm(self) -> int:
        return self.dot(self)

    def __add__(self, other):
        return NSClass(self.model, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        return NSClass(self.model, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __rmul__(self, k: int):
        return NSClass(self.model, tuple(k * a for a in self.coords))


@dataclass(frozen=True, eq=False)
class NSModel:
    plane: Plane
    labels: tuple[str, ...]
    gram42: tuple[tuple[int, ...], ...]
    generated: exactlat.GeneratedLattice

    @property
    def induced(self) -> exactlat.Lattice:
        return self.generated.lattice

    def index(self, label: str) -> int:
        return _label_index(self)[label]

    def generator(self, label: str) -> NSClass:
        v = [0] * len(self.labels)
        v[self.index(label)] = 1
        return NSClass(self, tuple(v), label)

    def pairing_with(self, cls: NSClass, label: str) -> int:
        i = self.index(label)
        return sum(c * g for c, g in zip(cls.coords, self.gram42[i]))

    def to_json(self) -> str:
        return json.dumps({"labels": list(self.labels), "gram": [list(r) for r in self.gram42]})


@lru_cache(maxsize=None)
def _label_index(model: NSModel) -> dict[str, int]:
    return {lab: i for i, lab in enumerate(model.labels)}


@lru_cache(maxsize=None)
def build_ns_model(plane: Plane) -> NSModel:
    n = len(plane.points)
    labels = tuple(e_label(p) for p in range(n)) + tuple(l_label(l) for l in range(n))
    size = len(labels)
    gram = [[0] * size for _ in range(size)]
    for i in range(size):
        gram[i][i] = -2
    for ell, pts in enumerate(plane.points_on):
        for p in pts:
            gram[p][n + ell] = gram[n + ell][p] = 1
    gen = exactlat.generated_lattice(gram)
    model = NSModel(plane, labels, tuple(map(tuple, gram)), gen)
    _check_model(model)
    return model


def _check_model(model: NSModel) -> None:
    ind = model.induced
    if ind.rank != 22:
        raise NSModelError(f"induced rank {ind.rank} != 22")
    disc = exactlat.smith_invariants(ind)
    if disc.det != -4 or disc.group != (2, 2):
        raise NSModelError(f"unexpected discriminant data {disc}")
    if exactlat.signature(ind) != (1, 21, 0):
        raise NSModelError("induced lattice does not have signature (1, 21)")


def class_h(model: NSModel, ell: int) -> NSClass:
    """Pullback of a line class: 2 L_ell + sum of E_p over p on ell."""
    v = [0] * len(model.labels)
    v[model.index(l_label(ell))] = 2
    for p in model.plane.points_on[ell]:
        v[model.index(e_label(p))] += 1
    return NSClass(model, tuple(v), "h")


def minus_four_vector(model: NSModel, s: Hyperoval | Iterable[int]) -> NSClass:
    """The (-4)-class 2h - (E_1 + ... + E_6) of a hyperoval."""
    pts = s.points if isinstance(s, Hyperoval) else tuple(sorted(s))
    if len(set(pts)) != 6 or not in_general_position(model.plane, pts):
        raise PlaneError(f"{pts} is not six points in general position")
    h = class_h(model, 0)
    v = [2 * x for x in h.coords]
    for p in pts:
        v[model.index(e_label(p))] -= 1
    return NSClass(model, tuple(v), "r" + "-".join(map(str, pts)))


def orthogonal_filter(model: NSModel, vectors: Sequence[NSClass], curves: Sequence[str]) -> list[NSClass]:
    idx = [model.index(c) for c in curves]
    rows = [model.gram42[i] for i in idx]
    out = []
    for v in vectors:
        if all(sum(a * b for a, b in zip(v.coords, row)) == 0 for row in rows):
            out.append(v)
    return out


def reflect_class(x: NSClass, delta: NSClass) -> NSClass:
    """Reflection of x in a (-2)- or (-4)-class, computed in generator coordinates."""
    xd = x.dot(delta)
    dd = delta.norm()
    if dd == -2:
        k = xd
    elif dd == -4:
        if xd % 2:
            raise exactlat.NonIntegralReflectionError(f"<x, r> = {xd} is odd")
        k = xd // 2
    else:
        raise exactlat.LatticeError(f"reflections need norm -2 or -4, got {dd}")
    return NSClass(x.model, tuple(a + k * b for a, b in zip(x.coords, delta.coords)))
