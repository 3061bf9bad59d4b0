"""Kodaira fibers: Euler budgets, Shioda-Tate audits and descent through the double cover.

Fiber symbols are written the usual way: ``I6``, ``I1*``, ``IV*``, with an
optional leading ``2`` for a double fiber (``2III``).
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from math import isqrt, prod
from . import descent


class FibrationError(ValueError):
    pass


class InconsistentConfigurationError(FibrationError):
    pass


class UnsupportedFiberError(FibrationError):
    pass


# symbol -> (components, discriminant order, Euler number)
_ADDITIVE = {
    "II": (1, 1, 2),
    "III": (2, 2, 3),
    "IV": (3, 3, 4),
    "IV*": (7, 3, 8),
    "III*": (8, 2, 9),
    "II*": (9, 1, 10),
}


@dataclass(frozen=True)
class KodairaFiber:
    symbol: str
    multiple: bool = False

    def __post_init__(self):
        s = self.symbol
        if not re.fullmatch(r"I\d+\*?|II\*?|III\*?|IV\*?", s):
            raise FibrationError(f"unknown Kodaira symbol {s!r}")
        if re.fullmatch(r"I\d+", s) and int(s[1:]) < 1:
            raise FibrationError("I_n needs n >= 1")

    @classmethod
    def parse(cls, text: str) -> "KodairaFiber":
        t = text.strip().replace("_", "")
        multiple = t.startswith("2") and len(t) > 1
        sym = t[1:] if multiple else t
        return cls(sym, multiple)

    @property
    def _istar(self):
        m = re.fullmatch(r"I(\d+)(\*?)", self.symbol)
        return (int(m.group(1)), bool(m.group(2))) if m else None

    @property
    def multiplicative(self) -> bool:
        t = self._istar
        return t is not None and not t[1]

    @property
    def components(self) -> int:
        t = self._istar
        if t:
            n, star = t
            return n + 5 if star else n
        return _ADDITIVE[self.symbol][0]

    @property
    def discriminant(self) -> int:
        t = self._istar
        if t:
            n, star = t
            return 4 if star else n
        return _ADDITIVE[self.symbol][1]

    @property
    def euler(self) -> int:
        t = self._istar
        if t:
            n, star = t
            return n + 6 if star else n
        return _ADDITIVE[self.symbol][2]

    def __str__(self):
        return ("2" if self.multiple else "") + self.symbol


AMBIENTS = {"k3": 24, "enriques-classical": 12, "enriques-singular": 12, "enriques-supersingular": 12, "enriques": 12}


@dataclass(frozen=True)
class FibrationConfig:
    fibers: tuple[KodairaFiber, ...]
    ambient: str = "k3"

    def __post_init__(self):
        if self.ambient not in AMBIENTS:
            raise FibrationError(f"unknown ambient {self.ambient!r}")

    @classmethod
    def parse(cls, text: str, ambient: str = "k3") -> "FibrationConfig":
        parts = [p for p in re.split(r"[,\s()]+", text) if p]
        return cls(tuple(KodairaFiber.parse(p) for p in parts), ambient.lower())

    @property
    def c2(self) -> int:
        return AMBIENTS[self.ambient]

    def __str__(self):
        return "(" + ", ".join(map(str, self.fibers)) + ")"


@dataclass(frozen=True)
class AuditReport:
    config: str
    euler_sum: int
    wild_deficiency: int
    trivial_rank: int | None
    mw_rank: int | None
    torsion_order_candidates: tuple[int, ...]

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True)


def audit_fibration(config: FibrationConfig) -> AuditReport:
    euler = sum(f.euler for f in config.fibers)
    delta = config.c2 - euler
    if delta < 0:
        raise InconsistentConfigurationError(f"{config}: Euler sum {euler} exceeds {config.c2}")
    if delta and all(f.multiplicative for f in config.fibers):
        raise InconsistentConfigurationError(f"{config}: multiplicative fibers must fill c2 exactly")
    if config.ambient != "k3":
        return AuditReport(str(config), euler, delta, None, None, ())
    excess = sum(f.components - 1 for f in config.fibers)
    mw = 20 - excess
    if mw < 0:
        raise InconsistentConfigurationError(f"{config}: trivial lattice too large")
    torsion: tuple[int, ...] = ()
    if mw == 0:
        disc = prod(f.discriminant for f in config.fibers)
        if disc % 4:
            raise InconsistentConfigurationError(f"{config}: no integer torsion order")
        t = isqrt(disc // 4)
        if t * t * 4 != disc:
            raise InconsistentConfigurationError(f"{config}: {disc}/4 is not a square")
        torsion = (t,)
    return AuditReport(str(config), euler, delta, 2 + excess, mw, torsion)


Y_CATALOG = (
    "I6,I6,I6,I6",
    "I8,I8,I1*",
    "I10,I10,I2,I2",
    "I12,I3*",
    "I12,I4,IV*",
    "IV*,IV*,IV*",
    "I16,I1*",
    "I18,I2,I2,I2",
)


def y_catalog() -> list[FibrationConfig]:
    return [FibrationConfig.parse(c) for c in Y_CATALOG]


def y_catalog_audit() -> list[AuditReport]:
    return [audit_fibration(c) for c in y_catalog()]


def torsion_orders() -> tuple[int | None, ...]:
    """Torsion order per catalog entry, ``None`` where the Mordell-Weil rank is positive."""
    return tuple(r.torsion_order_candidates[0] if r.mw_rank == 0 else None for r in y_catalog_audit())


# ---------------------------------------------------------------------------
# descent of single fibers


@dataclass(frozen=True)
class RDPOption:
    pattern: tuple[str, ...]  # e.g. ('A1', 'A1', 'A1', 'A1') or ('D4',)
    integral: tuple[str, ...]  # integral components of the fiber
    section_credits: tuple[int, ...]  # possible contracted points met by a section on this fiber

    @property
    def label(self) -> str:
        c = {}
        for p in self.pattern:
            c[p] = c.get(p, 0) + 1
        return "+".join(f"{v}{k}" if v > 1 else k for k, v in sorted(c.items()))


def _fiber_graph(fiber: KodairaFiber):
    """Component names, Gram matrix and names of simple components."""
    t = fiber._istar
    if t and not t[1]:
        n = t[0]
        names = [f"t{i}" for i in range(n)]
        g = [[-2 if i == j else 0 for j in range(n)] for i in range(n)]
        if n == 2:
            g[0][1] = g[1][0] = 2
        elif n > 2:
            for i in range(n):
                g[i][(i + 1) % n] += 1
                g[(i + 1) % n][i] += 1
        return names, g, names
    if t and t[1]:
        n = t[0]
        names = ["t0", "t1", "t2", "t3"] + [f"c{i}" for i in range(n + 1)]
        idx = {x: i for i, x in enumerate(names)}
        g = [[-2 if i == j else 0 for j in range(len(names))] for i in range(len(names))]
        edges = [("t0", "c0"), ("t1", "c0"), ("t2", f"c{n}"), ("t3", f"c{n}")] + [
            (f"c{i}", f"c{i + 1}") for i in range(n)
        ]
        for a, b in edges:
            g[idx[a]][idx[b]] = g[idx[b]][idx[a]] = 1
        return names, g, ["t0", "t1", "t2", "t3"]
    if fiber.symbol == "IV*":
        names = ["c", "a1", "a2", "a3", "b1", "b2", "b3"]
        idx = {x: i for i, x in enumerate(names)}
        g = [[-2 if i == j else 0 for j in range(7)] for i in range(7)]
        for k in "123":
            for a, b in (("c", "a" + k), ("a" + k, "b" + k)):
                g[idx[a]][idx[b]] = g[idx[b]][idx[a]] = 1
        return names, g, ["b1", "b2", "b3"]
    raise UnsupportedFiberError(f"no descent data for {fiber}")


def _integral_choices(fiber: KodairaFiber) -> list[tuple[str, ...]]:
    t = fiber._istar
    if t and not t[1]:
        n = t[0]
        if n % 2:
            raise UnsupportedFiberError(f"{fiber} has odd length")
        return [tuple(f"t{i}" for i in range(0, n, 2))]
    if t and t[1]:
        n = t[0]
        if n == 1:
            return [("t0", "t1", "t2", "t3"), ("t0", "t1", "c1")]
        if n == 3:
            return [("t0", "t1", "t2", "t3", "c1"), ("t0", "t1", "c1", "c3")]
    if fiber.symbol == "IV*":
        return [("b1", "b2", "b3", "c"), ("a1", "a2", "a3")]
    raise UnsupportedFiberError(f"{fiber} does not occur on the cover")


def _cascade(names, gram, integral, extra_rows=()):
    """Contract integral components, then any other component reaching -1.

    ``extra_rows`` are further non-integral curves (pairings with the fiber
    components); they are carried along but never contracted.
    """
    n = len(names)
    k = len(extra_rows)
    rows = [list(gram[i]) + [r[i] for r in extra_rows] for i in range(n)]
    for a, r in enumerate(extra_rows):
        rows.append(list(r) + [-2 if b == a else 0 for b in range(k)])
    weights = [1 if names[i] in integral else 2 for i in range(n)] + [2] * k
    down = descent.weighted_gram(rows, weights)
    first = [i for i in range(n) if names[i] in integral]
    g = [row[:] for row in down]
    alive = set(range(n + k))
    for e in first:
        _blow(g, alive, e)
    secondary = []
    changed = True
    while changed:
        changed = False
        for i in range(n):
            if i in alive and g[i][i] == -1:
                secondary.append(i)
                _blow(g, alive, i)
                changed = True
    return descent.contract(down, rows, first, secondary)


def _blow(g, alive, e):
    alive.discard(e)
    col = {u: g[u][e] for u in alive if g[u][e]}
    for u, a in col.items():
        for v, b in col.items():
            g[u][v] += a * b


def image_symbol(fiber: KodairaFiber) -> str:
    """Fiber type below a cover fiber: cycles halve, the additive ones become III or IV."""
    t = fiber._istar
    if t and not t[1]:
        if t[0] % 2:
            raise UnsupportedFiberError(f"{fiber} has odd length")
        return f"I{t[0] // 2}"
    if t and t[1] and t[0] in (1, 3):
        return "III"
    if fiber.symbol == "IV*":
        return "IV"
    raise UnsupportedFiberError(f"{fiber} does not occur on the cover")


def descend_fiber_type(fiber: KodairaFiber | str) -> tuple[KodairaFiber, list[RDPOption]]:
    """Image fiber on the quotient and the rational double point patterns it can carry.

    Each option is checked by contracting the integral components (and any
    component that drops to -1 on the way); the survivors must number as
    many as the image fiber has components, and the section credits record
    how many contracted points a section through each simple component meets.
    """
    from .dynkin import elliptic_type, graph_from_gram

    if isinstance(fiber, str):
        fiber = KodairaFiber.parse(fiber)
    image = KodairaFiber(image_symbol(fiber))
    names, gram, simple = _fiber_graph(fiber)
    options = []
    for integral in _integral_choices(fiber):
        res = _cascade(names, gram, set(integral))
        if len(res.survivors) != image.components:
            raise FibrationError(f"{fiber}: {len(res.survivors)} surviving components, expected {image.components}")
        pattern = []
        for comp in res.components:
            sub = graph_from_gram([names[i] for i in comp], [True] * len(comp),
                                  [[gram[i][j] for j in comp] for i in comp])
            pattern.append(elliptic_type(sub, range(len(comp))))
        credits = set()
        for comp_name in simple:
            row = [0] * len(names)
            row[names.index(comp_name)] = 1
            r2 = _cascade(names, gram, set(integral), extra_rows=[row])
            credits.add(sum(r2.self_credit.get(len(names), {}).values()))
        options.append(RDPOption(tuple(sorted(pattern)), tuple(integral), tuple(sorted(credits))))
    return image, options


def descend_configuration(config: FibrationConfig) -> tuple[str, ...]:
    return tuple(image_symbol(f) for f in config.fibers)


def x_table() -> dict[str, tuple[str, ...]]:
    """Cover fibration -> fiber types of the induced fibration on the quotient."""
    return {c: descend_configuration(FibrationConfig.parse(c)) for c in Y_CATALOG}


# ---------------------------------------------------------------------------
# singularity patterns


@dataclass(frozen=True)
class RootCandidate:
    parts: tuple[str, ...]

    @property
    def rank(self) -> int:
        return sum(_ROOT[p][0] for p in self.parts)

    @property
    def a(self) -> int:
        return sum(_ROOT[p][1] for p in self.parts)

    def __str__(self):
        c = {}
        for p in self.parts:
            c[p] = c.get(p, 0) + 1
        return "+".join(f"{k}^{v}" if v > 1 else k for k, v in sorted(c.items(), key=lambda kv: _ROOT_ORDER.index(kv[0])))


_ROOT = {"A1": (1, 1), "D4": (4, 2), "D6": (6, 2), "D8": (8, 2), "D10": (10, 2), "D12": (12, 2), "E7": (7, 1), "E8": (8, 0)}
_ROOT_ORDER = list(_ROOT)


def root_candidates(total_rank: int = 12) -> list[RootCandidate]:
    out = []

    def rec(i, left, acc):
        if left == 0:
            out.append(RootCandidate(tuple(acc)))
            return
        if i == len(_ROOT_ORDER):
            return
        name = _ROOT_ORDER[i]
        r = _ROOT[name][0]
        for k in range(left // r, -1, -1):
            rec(i + 1, left - k * r, acc + [name] * k)

    rec(0, total_rank, [])
    return out


def ehs_root_candidates() -> list[RootCandidate]:
    return [c for c in root_candidates(12) if c.a >= 8]


def rs_identity_check(c2: int, deg_isolated: int, k_dot_d: int, d_squared: int) -> bool:
    return c2 == deg_isolated - k_dot_d - d_squared


# ---------------------------------------------------------------------------
# which descents survive a section


@dataclass(frozen=True)
class DescentCase:
    cover: str
    options: tuple[RDPOption, ...]
    singularities: tuple[str, ...]
    section_totals: tuple[int, ...]

    @property
    def admissible(self) -> bool:
        return 2 in self.section_totals

    @property
    def ehs_allowed(self) -> bool:
        return tuple(sorted(self.singularities)) in {tuple(sorted(c.parts)) for c in ehs_root_candidates()}


def descent_cases(config: FibrationConfig | str) -> list[DescentCase]:
    """Every RDP choice per fiber with the possible totals of points met by one section.

    A nodal curve downstairs passes through exactly two contracted points,
    so a choice is admissible only when some section total equals 2.
    """
    if isinstance(config, str):
        config = FibrationConfig.parse(config)
    per_fiber = [descend_fiber_type(f)[1] for f in config.fibers]
    out = []
    for combo in itertools.product(*per_fiber):
        sing = tuple(sorted(p for o in combo for p in o.pattern))
        totals = sorted({sum(c) for c in itertools.product(*(o.section_credits for o in combo))})
        out.append(DescentCase(str(config), tuple(combo), sing, tuple(totals)))
    return out


def surviving_descents() -> dict[str, list[DescentCase]]:
    """Catalog entries with the RDP choices allowed by both the EHS list and the section count."""
    res = {}
    for c in Y_CATALOG:
        res[c] = [d for d in descent_cases(c) if d.ehs_allowed and d.admissible]
    return res
