"""Finite quotients G(Z_m^2, C mod m) and their exact independence numbers.

The quotients validate the spectral machinery: the ratio bound computed
from the circulant eigenvalues must dominate alpha/m^2 on every instance.
They say nothing directly about the infinite graph.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from moddist.generators import WeightedGeneratorSet
from moddist.spectral import DegenerateQuotient, circulant_eigenvalues, check_quotient

Cell = tuple[int, int]

DEFAULT_VERTEX_CAP = 100
DOMINANCE_TOL = 1e-9


class InstanceTooLarge(ValueError):
    pass


class CollisionWarning(UserWarning):
    pass


@dataclass
class QuotientCayleyGraph:
    m: int
    connection_set: frozenset[Cell]
    collisions: list[tuple[Cell, int]] = field(default_factory=list)

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("modulus must be at least 2")
        if (0, 0) in self.connection_set:
            raise DegenerateQuotient("(0, 0) in connection set")
        for a, b in self.connection_set:
            if ((-a) % self.m, (-b) % self.m) not in self.connection_set:
                raise ValueError("connection set is not closed under negation")

    @property
    def num_vertices(self) -> int:
        return self.m * self.m

    @property
    def degree(self) -> int:
        return len(self.connection_set)

    def vertices(self) -> list[Cell]:
        return [(i, j) for i in range(self.m) for j in range(self.m)]

    def index(self, v: Cell) -> int:
        return v[0] * self.m + v[1]

    def adjacent(self, u: Cell, v: Cell) -> bool:
        d = ((u[0] - v[0]) % self.m, (u[1] - v[1]) % self.m)
        return d in self.connection_set

    def neighbour_masks(self) -> list[int]:
        """Adjacency as bitmasks over lexicographic vertex indices."""
        m = self.m
        masks = []
        for i, j in self.vertices():
            mask = 0
            for a, b in self.connection_set:
                mask |= 1 << (((i + a) % m) * m + (j + b) % m)
            masks.append(mask)
        return masks

    def component(self, start: Cell) -> list[Cell]:
        """Vertices reachable from ``start``, sorted."""
        m = self.m
        seen = {start}
        stack = [start]
        while stack:
            i, j = stack.pop()
            for a, b in self.connection_set:
                v = ((i + a) % m, (j + b) % m)
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return sorted(seen)

    def has_triangle(self) -> Optional[tuple[Cell, Cell, Cell]]:
        conn = self.connection_set
        m = self.m
        for a in sorted(conn):
            for b in sorted(conn):
                s = ((a[0] + b[0]) % m, (a[1] + b[1]) % m)
                if s in conn:
                    return ((0, 0), a, s)
        return None


def build_quotient(w: WeightedGeneratorSet, m: int) -> QuotientCayleyGraph:
    """Reduce the support of ``w`` mod m.

    Distinct generators landing on the same residue are recorded as
    collisions (with multiplicity) and a CollisionWarning is issued.
    """
    check_quotient(w, m)
    counts: dict[Cell, int] = {}
    for x, y in w.entries:
        cell = (x % m, y % m)
        counts[cell] = counts.get(cell, 0) + 1
    collisions = sorted((c, k) for c, k in counts.items() if k > 1)
    if collisions:
        warnings.warn(
            f"{len(collisions)} residues mod {m} are hit by several generators",
            CollisionWarning,
            stacklevel=2,
        )
    return QuotientCayleyGraph(m, frozenset(counts), collisions)


def _clique_partition(cand: int, masks: list[int]) -> tuple[list[int], list[int]]:
    """Greedy partition of the candidate set into cliques.

    Returns the vertices in order of their clique together with the 1-based
    clique index of each. An independent set meets each clique at most
    once, so the vertices up to position i carry at most bound[i] of it.
    """
    order: list[int] = []
    bound: list[int] = []
    rest = cand
    cliques = 0
    while rest:
        cliques += 1
        common = rest
        while common:
            v = (common & -common).bit_length() - 1
            order.append(v)
            bound.append(cliques)
            rest &= ~(1 << v)
            common &= masks[v] & ~(1 << v)
    return order, bound


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def max_independent_set(masks: list[int], fixed: int = 0) -> list[int]:
    """Exact maximum independent set by branch and bound.

    Candidates are partitioned greedily into cliques and branched from the
    last clique backwards; once the current size plus the clique count of
    what remains cannot beat the incumbent, the whole tail is pruned. Ties
    never replace the incumbent, so the result is deterministic. ``fixed``
    is a bitmask of vertices forced into the set.
    """
    cand = (1 << len(masks)) - 1
    chosen = []
    for v in _bits(fixed):
        if not cand >> v & 1:
            raise ValueError("fixed vertices are not independent")
        chosen.append(v)
        cand &= ~(1 << v) & ~masks[v]

    best: list[int] = list(chosen)

    def expand(cand: int, current: list[int]):
        nonlocal best
        order, bound = _clique_partition(cand, masks)
        for i in range(len(order) - 1, -1, -1):
            if len(current) + bound[i] <= len(best):
                return
            v = order[i]
            current.append(v)
            sub = cand & ~masks[v] & ~(1 << v)
            if sub:
                expand(sub, current)
            elif len(current) > len(best):
                best = current[:]
            current.pop()
            cand &= ~(1 << v)

    if cand:
        expand(cand, chosen)
    return sorted(best)


def max_independent_set_exhaustive(masks: list[int]) -> list[int]:
    """Enumerate every independent set; only for small graphs."""
    n = len(masks)
    best: list[int] = []

    def walk(start: int, forbidden: int, current: list[int]):
        nonlocal best
        if len(current) > len(best):
            best = current[:]
        for v in range(start, n):
            if not forbidden >> v & 1:
                current.append(v)
                walk(v + 1, forbidden | masks[v] | (1 << v), current)
                current.pop()

    walk(0, 0, [])
    return best


@dataclass
class IndependenceReport:
    m: int
    connection_set: list[Cell]
    alpha: int
    witness: list[Cell]
    spectral_ratio: Optional[float] = None
    lambda_max: Optional[float] = None
    lambda_min: Optional[float] = None
    collisions: list = field(default_factory=list)

    @property
    def density(self) -> Fraction:
        return Fraction(self.alpha, self.m * self.m)

    @property
    def dominance_ok(self) -> Optional[bool]:
        if self.spectral_ratio is None:
            return None
        return float(self.density) <= self.spectral_ratio + DOMINANCE_TOL

    def to_dict(self) -> dict:
        d = self.density
        doc = {
            "m": self.m,
            "connection_set": [list(c) for c in self.connection_set],
            "collisions": [[list(c), k] for c, k in self.collisions],
            "alpha": self.alpha,
            "density": f"{d.numerator}/{d.denominator}",
            "witness": [list(c) for c in self.witness],
        }
        if self.spectral_ratio is not None:
            doc.update(
                spectral_ratio=format(self.spectral_ratio, ".17g"),
                lambda_max=format(self.lambda_max, ".17g"),
                lambda_min=format(self.lambda_min, ".17g"),
                dominance_ok=self.dominance_ok,
            )
        return doc

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def independence_number_exact(
    g: QuotientCayleyGraph, cap: int = DEFAULT_VERTEX_CAP
) -> IndependenceReport:
    """alpha of a quotient by branch and bound.

    The component of (0, 0) is the subgroup H generated by the connection
    set and every other component is a translate of it, so alpha is
    [Z_m^2 : H] * alpha(H). Translations of H act transitively on H, so
    some maximum independent set of H contains (0, 0) and the search fixes
    it. The witness is the union of the translates of the H-witness by the
    lexicographically smallest coset representatives.
    """
    if g.num_vertices > cap:
        raise InstanceTooLarge(f"{g.num_vertices} vertices exceeds the cap of {cap}")
    m = g.m
    sub = g.component((0, 0))
    index = {v: i for i, v in enumerate(sub)}
    masks = []
    for i, j in sub:
        mask = 0
        for a, b in g.connection_set:
            mask |= 1 << index[((i + a) % m, (j + b) % m)]
        masks.append(mask)
    local = [sub[i] for i in max_independent_set(masks, fixed=1)]

    reps, seen = [], set()
    for v in g.vertices():
        if v not in seen:
            reps.append(v)
            seen.update(((v[0] + a) % m, (v[1] + b) % m) for a, b in sub)
    witness = sorted(((r[0] + a) % m, (r[1] + b) % m) for r in reps for a, b in local)

    for a in range(len(witness)):
        for b in range(a + 1, len(witness)):
            assert not g.adjacent(witness[a], witness[b])
    assert len(witness) * (g.degree + 1) >= g.num_vertices
    return IndependenceReport(
        g.m, sorted(g.connection_set), len(witness), witness, collisions=g.collisions
    )


def spectral_ratio_of(w: WeightedGeneratorSet, m: int) -> tuple[float, float, float]:
    """(ratio, lambda_max, lambda_min) of the weighted circulant on Z_m^2."""
    eig = circulant_eigenvalues(w, m)
    lmax, lmin = float(eig.max()), float(eig.min())
    return -lmin / (lmax - lmin), lmax, lmin


def spectral_dominance_check(
    w: WeightedGeneratorSet, m: int, cap: int = DEFAULT_VERTEX_CAP
) -> IndependenceReport:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", CollisionWarning)
        g = build_quotient(w, m)
    report = independence_number_exact(g, cap)
    report.spectral_ratio, report.lambda_max, report.lambda_min = spectral_ratio_of(w, m)
    if not report.dominance_ok:
        raise AssertionError(
            f"alpha/m^2 = {report.density} exceeds ratio bound {report.spectral_ratio}"
        )
    return report
