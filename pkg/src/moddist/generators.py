"""Generating sets for the modular-distance Cayley graphs on Z^2.

For coprime ``p < q`` and ``k >= 1`` the base set D holds the 4k vectors

    +-(q^(2k+t) - q^(2k-t), -p q^t - 2 q^(2k)),   t = 0, ..., 2k-1

and the full generating set C is the union of the dilates (jq+1) D, j >= 0.
Everything here is exact: coordinates are Python ints, weights Fractions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

Vector = tuple[int, int]


class InvalidParams(ValueError):
    pass


@dataclass(frozen=True)
class ModularDistanceParams:
    p: int
    q: int
    k: int

    def __post_init__(self):
        for name in ("p", "q", "k"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise InvalidParams(f"{name} must be an integer, got {value!r}")
        if self.p < 1 or self.q < 1:
            raise InvalidParams("p and q must be positive")
        if math.gcd(self.p, self.q) != 1:
            raise InvalidParams("p and q must be coprime")
        if not self.p < self.q:
            raise InvalidParams("p must be smaller than q")
        if self.k < 1:
            raise InvalidParams("k must be at least 1")

    @property
    def num_atoms(self) -> int:
        return 4 * self.k


def q_valuation(value: int, q: int) -> int:
    """Largest e with q^e dividing ``value`` (value must be nonzero)."""
    if value == 0:
        raise ValueError("valuation of zero is undefined")
    e = 0
    while value % q == 0:
        value //= q
        e += 1
    return e


@dataclass(frozen=True)
class GeneratorAtom:
    t: int
    sign: int
    vector: Vector

    @property
    def positive(self) -> Vector:
        return (self.sign * self.vector[0], self.sign * self.vector[1])


def atom_vector(params: ModularDistanceParams, t: int) -> Vector:
    p, q, k = params.p, params.q, params.k
    if not 0 <= t < 2 * k:
        raise ValueError(f"t must lie in [0, {2 * k - 1}], got {t}")
    return (q ** (2 * k + t) - q ** (2 * k - t), -p * q**t - 2 * q ** (2 * k))


def base_generators(params: ModularDistanceParams) -> list[GeneratorAtom]:
    """The 4k atoms of D, ordered by t ascending with the + sign first."""
    atoms = []
    for t in range(2 * params.k):
        x, y = atom_vector(params, t)
        # engine of triangle-freeness and of distinctness across t
        assert y < 0 and q_valuation(y, params.q) == t
        assert t != 0 or x == 0
        atoms.append(GeneratorAtom(t, 1, (x, y)))
        atoms.append(GeneratorAtom(t, -1, (-x, -y)))
    assert len({a.vector for a in atoms}) == len(atoms)
    return atoms


@dataclass(frozen=True)
class ScaledGenerator:
    atom: GeneratorAtom
    scale: int
    multiplier: int  # scale * q + 1

    @property
    def vector(self) -> Vector:
        m = self.multiplier
        return (m * self.atom.vector[0], m * self.atom.vector[1])


def truncated_generators(params: ModularDistanceParams, n: int) -> list[ScaledGenerator]:
    """The 4kn vectors of the union of (jq+1) D over j < n, scale-major order."""
    if n < 1:
        raise ValueError("n must be at least 1")
    atoms = base_generators(params)
    out = [ScaledGenerator(a, j, j * params.q + 1) for j in range(n) for a in atoms]
    assert len({g.vector for g in out}) == len(out)
    return out


@dataclass
class WeightedGeneratorSet:
    """A finite centrally symmetric weight function on Z^2.

    ``entries`` maps each support vector to its exact weight; insertion
    order is the canonical (scale, t, sign) order.
    """

    params: Optional[ModularDistanceParams]
    n: int
    entries: dict[Vector, Fraction]

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def total_weight(self) -> Fraction:
        return sum(self.entries.values(), Fraction(0))

    def is_centrally_symmetric(self) -> bool:
        return all(
            self.entries.get((-x, -y)) == w for (x, y), w in self.entries.items()
        )

    def vectors(self) -> list[Vector]:
        return list(self.entries)

    def to_dict(self) -> dict:
        params = self.params
        return {
            "p": params.p if params else None,
            "q": params.q if params else None,
            "k": params.k if params else None,
            "n": self.n,
            "entries": [
                {"x": [str(x), str(y)], "w": f"{w.numerator}/{w.denominator}"}
                for (x, y), w in self.entries.items()
            ],
        }

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, doc: dict) -> "WeightedGeneratorSet":
        params = None
        if doc.get("p") is not None:
            params = ModularDistanceParams(doc["p"], doc["q"], doc["k"])
        entries = {}
        for entry in doc["entries"]:
            x, y = (int(c) for c in entry["x"])
            entries[(x, y)] = Fraction(entry["w"])
        return cls(params, doc["n"], entries)

    @classmethod
    def from_json(cls, text: str) -> "WeightedGeneratorSet":
        return cls.from_dict(json.loads(text))


def layer_weight(n: int, j: int) -> Fraction:
    return Fraction(n - j, n * (n + 1))


def weight_function(params: ModularDistanceParams, n: int) -> WeightedGeneratorSet:
    """Weights (n-j)/(n(n+1)) on the scale-j layer; they sum to 2k exactly."""
    entries = {g.vector: layer_weight(n, g.scale) for g in truncated_generators(params, n)}
    ws = WeightedGeneratorSet(params, n, entries)
    assert ws.total_weight == 2 * params.k
    assert ws.is_centrally_symmetric()
    return ws


def membership(params: ModularDistanceParams, v: Vector) -> Optional[tuple[GeneratorAtom, int]]:
    """Decide exactly whether ``v`` lies in the infinite set C.

    Returns ``(atom, j)`` with v = (jq+1) * atom, or None.
    """
    q = params.q
    for atom in base_generators(params):
        ax, ay = atom.vector
        # ay is never 0, so the quotient is fixed by the second coordinate
        if v[1] % ay:
            continue
        mult = v[1] // ay
        if mult < 1 or mult % q != 1 % q or mult * ax != v[0]:
            continue
        return atom, (mult - 1) // q
    return None


def in_generating_set(params: ModularDistanceParams, v: Vector) -> bool:
    return membership(params, v) is not None


@dataclass
class TriangleFreenessCertificate:
    params: Optional[ModularDistanceParams]
    max_scale: int
    atom_range: tuple[int, int]
    method: str
    verdict: str
    witness: Optional[tuple[Vector, Vector, Vector]] = None
    pairs_checked: int = 0

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        params = self.params
        return {
            "p": params.p if params else None,
            "q": params.q if params else None,
            "k": params.k if params else None,
            "truncation": {"max_scale": self.max_scale, "atom_range": list(self.atom_range)},
            "method": self.method,
            "verdict": self.verdict,
            "pairs_checked": self.pairs_checked,
            "witness": None
            if self.witness is None
            else [[str(c) for c in v] for v in self.witness],
        }


def _add(a: Vector, b: Vector) -> Vector:
    return (a[0] + b[0], a[1] + b[1])


def find_sum_collision(
    vectors: Iterable[Vector], contains
) -> tuple[Optional[tuple[Vector, Vector, Vector]], int]:
    """Search for c1, c2 in ``vectors`` with ``contains(c1 + c2)``.

    A triangle 0, c1, c1+c2 exists in a Cayley graph exactly when such a
    pair exists. Returns the first witness in iteration order and the
    number of pairs scanned.
    """
    vecs = list(vectors)
    checked = 0
    for i, c1 in enumerate(vecs):
        for c2 in vecs[i:]:
            checked += 1
            s = _add(c1, c2)
            if contains(s):
                return (c1, c2, s), checked
    return None, checked


def triangle_free_check_bruteforce(
    params: ModularDistanceParams, max_scale: int
) -> TriangleFreenessCertificate:
    """Scan all pairs from scales j < max_scale; the third edge is tested
    against the whole of C, not just the truncation."""
    if max_scale < 1:
        raise ValueError("max_scale must be at least 1")
    vecs = [g.vector for g in truncated_generators(params, max_scale)]
    witness, checked = find_sum_collision(vecs, lambda v: in_generating_set(params, v))
    return TriangleFreenessCertificate(
        params,
        max_scale,
        (0, 2 * params.k - 1),
        "brute-force",
        "pass" if witness is None else "fail",
        witness,
        checked,
    )


def triangle_free_check_valuation(params: ModularDistanceParams) -> TriangleFreenessCertificate:
    """Check the valuation argument behind triangle-freeness, for all scales.

    A triangle needs (s1 q + 1) T1 = (s2 q + 1) T2 + (s3 q + 1) T3 up to signs.
    Multipliers are units mod q, so the q-adic valuation of each second
    coordinate is exactly t. Equal t on all three would force p = 2p mod q;
    otherwise the valuations of the two sides differ. Both facts are checked
    exactly for every atom.
    """
    p, q = params.p, params.q
    atoms = [a for a in base_generators(params) if a.sign == 1]
    ok = (2 * p - p) % q != 0
    for a in atoms:
        ok = ok and q_valuation(a.vector[1], q) == a.t
    return TriangleFreenessCertificate(
        params, 0, (0, 2 * params.k - 1), "valuation-argument", "pass" if ok else "fail"
    )


def integer_relation(atoms: list[GeneratorAtom]) -> tuple[int, int, int]:
    """Primitive integer relation s1 T1 + s2 T2 + s3 T3 = 0 among three atoms.

    The kernel of the 2x3 matrix [T1 T2 T3] is spanned by the vector of
    2x2 minors; dividing out the gcd makes it primitive. Sign is normalised
    so that the first nonzero entry is positive.
    """
    if len(atoms) != 3:
        raise ValueError("need exactly three atoms")
    (x1, y1), (x2, y2), (x3, y3) = (a.positive for a in atoms)

    def cross(ax, ay, bx, by):
        return ax * by - ay * bx

    for a, b in ((0, 1), (0, 2), (1, 2)):
        u, v = atoms[a].positive, atoms[b].positive
        if cross(*u, *v) == 0:
            raise ValueError(f"atoms t={atoms[a].t} and t={atoms[b].t} are collinear")
    s = [cross(x2, y2, x3, y3), cross(x3, y3, x1, y1), cross(x1, y1, x2, y2)]
    g = math.gcd(*s)
    s = [c // g for c in s]
    if next(c for c in s if c) < 0:
        s = [-c for c in s]
    assert s[0] * x1 + s[1] * x2 + s[2] * x3 == 0
    assert s[0] * y1 + s[1] * y2 + s[2] * y3 == 0
    return s[0], s[1], s[2]


def integer_relation_divisibility(
    params: ModularDistanceParams, atoms: list[GeneratorAtom]
) -> tuple[int, int, int]:
    """Relation for three atoms with t1 < t2 < t3, asserting q | s1, q | s3
    and gcd(q, s2) = 1."""
    ts = [a.t for a in atoms]
    if len(set(ts)) != 3:
        raise ValueError("atoms must have distinct t")
    atoms = sorted(atoms, key=lambda a: a.t)
    s1, s2, s3 = integer_relation(atoms)
    q = params.q
    if s1 % q or s3 % q or math.gcd(q, s2) != 1:
        raise AssertionError(f"divisibility fails for t={sorted(ts)}: s={(s1, s2, s3)}")
    return s1, s2, s3
