"""Plane realisation of G(Z^2, C) as a distance graph.

The lattice map h(x, y) = x e1 + y e2 with e1 = (1, 0) and
e2 = (p / (2 q^(2k)), sqrt(1 - p^2 / (4 q^(4k)))) has Gram form

    |h(d)|^2 = dx^2 + dy^2 + (p / q^(2k)) dx dy,

which is rational even though e2 is not. Every check below goes through
that form in exact arithmetic; the float map is for export only.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from moddist.generators import (
    GeneratorAtom,
    ModularDistanceParams,
    ScaledGenerator,
    Vector,
    truncated_generators,
)


class VerificationFailure(AssertionError):
    def __init__(self, generator, squared: Fraction, expected: Optional[int]):
        self.generator = generator
        self.squared = squared
        self.expected = expected
        super().__init__(
            f"generator {generator}: squared distance {squared} "
            f"does not equal expected {expected}^2"
        )


@dataclass(frozen=True)
class EmbeddingForm:
    params: ModularDistanceParams

    @property
    def cross(self) -> Fraction:
        return Fraction(self.params.p, self.params.q ** (2 * self.params.k))

    def __call__(self, delta: Vector) -> Fraction:
        dx, dy = delta
        return dx * dx + dy * dy + self.cross * dx * dy

    def is_positive_definite(self) -> bool:
        # dx^2 + dy^2 + c dx dy is definite iff |c| < 2
        return abs(self.cross) < 2


def squared_distance(params: ModularDistanceParams, delta: Vector) -> Fraction:
    return EmbeddingForm(params)(delta)


def expected_distance(params: ModularDistanceParams, atom: GeneratorAtom, scale: int) -> int:
    p, q, k = params.p, params.q, params.k
    ell = atom.t
    return (scale * q + 1) * (q ** (2 * k + ell) + q ** (2 * k - ell) + p)


def exact_sqrt(value: Fraction) -> Optional[Fraction]:
    """Exact square root of a nonnegative rational, or None."""
    if value < 0:
        return None
    num, den = value.numerator, value.denominator
    a, b = math.isqrt(num), math.isqrt(den)
    if a * a != num or b * b != den:
        return None
    return Fraction(a, b)


@dataclass
class EdgeDistanceReport:
    generator: ScaledGenerator
    squared_distance: Fraction
    distance: int
    residue: int
    passed: bool = True

    def row(self) -> dict:
        x, y = self.generator.vector
        return {
            "t": self.generator.atom.t,
            "sign": self.generator.atom.sign,
            "j": self.generator.scale,
            "x": str(x),
            "y": str(y),
            "distance": str(self.distance),
            "residue": self.residue,
            "pass": str(self.passed).lower(),
        }


CSV_COLUMNS = ["t", "sign", "j", "x", "y", "distance", "residue", "pass"]


def check_generator(params: ModularDistanceParams, g: ScaledGenerator) -> EdgeDistanceReport:
    sq = squared_distance(params, g.vector)
    expected = expected_distance(params, g.atom, g.scale)
    root = exact_sqrt(sq)
    if root is None or root != expected:
        raise VerificationFailure(g, sq, expected)
    residue = expected % params.q
    if residue != params.p % params.q:
        raise VerificationFailure(g, sq, expected)
    return EdgeDistanceReport(g, sq, expected, residue)


def verify_vector(params: ModularDistanceParams, delta: Vector) -> int:
    """Distance of an arbitrary lattice vector, which must be an integer = p mod q.

    Raises VerificationFailure otherwise; used for vectors outside the
    constructed family.
    """
    sq = squared_distance(params, delta)
    root = exact_sqrt(sq)
    if root is None or root.denominator != 1 or root.numerator % params.q != params.p:
        raise VerificationFailure(delta, sq, None)
    return root.numerator


def verify_embedding(params: ModularDistanceParams, n: int) -> list[EdgeDistanceReport]:
    """One report per generator of the n-layer truncation; fails on the first mismatch."""
    return [check_generator(params, g) for g in truncated_generators(params, n)]


def embed_point(params: ModularDistanceParams, lattice_point: Vector) -> tuple[float, float]:
    p, q, k = params.p, params.q, params.k
    e2x = p / (2 * q ** (2 * k))
    e2y = math.sqrt(1 - p * p / (4 * q ** (4 * k)))
    x, y = lattice_point
    return (x + y * e2x, y * e2y)


def reports_to_csv(reports: Iterable[EdgeDistanceReport]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in reports:
        writer.writerow(r.row())
    return buf.getvalue()
