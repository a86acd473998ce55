"""Fourier transforms of weighted generating sets and the ratio bound.

All torus points are exact rationals z/N. Phases z.x are reduced mod N in
integer arithmetic before any trigonometric call: generator coordinates grow
like q^(4k) and a float product u.x would carry no phase information.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np

from moddist.generators import (
    ModularDistanceParams,
    Vector,
    WeightedGeneratorSet,
    base_generators,
    weight_function,
)

TWO_PI = 2.0 * math.pi
# z.x mod D is formed in int64 from residues below D
MAX_DENOMINATOR = 1 << 31

Real = Union[Fraction, float]


class DegenerateQuotient(ValueError):
    """A support vector vanishes modulo the quotient modulus."""


class CertificationInfeasible(UserWarning):
    """The Lipschitz slack of a grid is too large to certify anything."""


@dataclass(frozen=True, order=True)
class TorusPoint:
    """The point (z1/N, z2/N) of (R/Z)^2, stored in canonical form."""

    z1: int
    z2: int
    N: int

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("denominator must be positive")
        object.__setattr__(self, "z1", self.z1 % self.N)
        object.__setattr__(self, "z2", self.z2 % self.N)

    @classmethod
    def from_fractions(cls, a: Fraction, b: Fraction) -> "TorusPoint":
        a, b = Fraction(a), Fraction(b)
        N = a.denominator * b.denominator // math.gcd(a.denominator, b.denominator)
        return cls(int(a * N), int(b * N), N)

    def reduced(self) -> "TorusPoint":
        return TorusPoint.from_fractions(*self.coords)

    @property
    def coords(self) -> tuple[Fraction, Fraction]:
        return Fraction(self.z1, self.N), Fraction(self.z2, self.N)

    def sort_key(self) -> tuple[Fraction, Fraction]:
        return self.coords

    def as_floats(self) -> tuple[float, float]:
        return self.z1 / self.N, self.z2 / self.N

    def to_dict(self) -> dict:
        a, b = self.coords
        return {"u": [_frac_str(a), _frac_str(b)]}


def _frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def _float_str(x: float) -> str:
    return format(float(x), ".17g")


def fourier_at(w: WeightedGeneratorSet, u: TorusPoint) -> float:
    """Evaluate the real Fourier transform sum_x w(x) cos(2 pi u.x)."""
    N = u.N
    terms = []
    for (x, y), wt in w.entries.items():
        phase = (u.z1 * x + u.z2 * y) % N
        terms.append(float(wt) * math.cos(TWO_PI * phase / N))
    return math.fsum(terms)


class FourierEvaluator:
    """Batch evaluation of the transform on points sharing a denominator."""

    def __init__(self, w: WeightedGeneratorSet):
        self.vectors: list[Vector] = list(w.entries)
        self.weights = np.array([float(v) for v in w.entries.values()], dtype=float)
        self._residues: dict[int, np.ndarray] = {}

    def residues(self, D: int) -> np.ndarray:
        res = self._residues.get(D)
        if res is None:
            if D > MAX_DENOMINATOR:
                raise ValueError(f"denominator {D} too large for int64 phase reduction")
            res = np.array([(x % D, y % D) for x, y in self.vectors], dtype=np.int64)
            res = res.reshape(-1, 2)
            if len(self._residues) > 256:
                self._residues.clear()
            self._residues[D] = res
        return res

    def __call__(self, Z: np.ndarray, D: int, chunk: int = 4096) -> np.ndarray:
        Z = np.asarray(Z, dtype=np.int64).reshape(-1, 2) % D
        if not self.vectors:
            return np.zeros(len(Z))
        res = self.residues(D)
        out = np.empty(len(Z))
        for i in range(0, len(Z), chunk):
            block = Z[i : i + chunk]
            ph = (block[:, 0:1] * res[None, :, 0] + block[:, 1:2] * res[None, :, 1]) % D
            out[i : i + chunk] = np.cos(ph * (TWO_PI / D)) @ self.weights
        return out

    def grid(self, N: int) -> np.ndarray:
        """Values at all z/N, shape (N, N), indexed by (z1, z2)."""
        z = np.arange(N, dtype=np.int64)
        Z = np.stack(np.meshgrid(z, z, indexing="ij"), axis=-1).reshape(-1, 2)
        return self(Z, N).reshape(N, N)


def check_quotient(w: WeightedGeneratorSet, m: int) -> None:
    if m < 2:
        raise ValueError("modulus must be at least 2")
    for x, y in w.entries:
        if x % m == 0 and y % m == 0:
            raise DegenerateQuotient(f"generator ({x}, {y}) vanishes modulo {m}")


def circulant_eigenvalues(w: WeightedGeneratorSet, m: int) -> np.ndarray:
    """Eigenvalues of B_{u,v} = w(u - v) on Z_m^2 as an (m, m) array.

    Entry [z1, z2] is the eigenvalue for the character z. Support vectors
    that collide mod m add their weights, which the character sum does
    automatically.
    """
    check_quotient(w, m)
    return FourierEvaluator(w).grid(m)


def circulant_spectrum(w: WeightedGeneratorSet, m: int) -> dict[tuple[int, int], float]:
    vals = circulant_eigenvalues(w, m)
    return {(i, j): float(vals[i, j]) for i in range(m) for j in range(m)}


def lipschitz_constant(w: WeightedGeneratorSet) -> float:
    """Bound on |w^(u) - w^(v)| / |u - v|_inf, namely 2 pi sum |w(x)| |x|_1."""
    total = sum(abs(wt) * (abs(x) + abs(y)) for (x, y), wt in w.entries.items())
    return TWO_PI * float(total)


@dataclass
class RefinementConfig:
    starts: int = 32
    levels: int = 16
    factor: int = 2
    resonance_seeds: bool = True
    max_seeds: int = 200_000
    certify: bool = False
    target_separation: float = 0.05
    infeasible_threshold: float = 1.0


@dataclass
class InfimumEstimate:
    value: float
    argmin: TorusPoint
    grid_min: float
    grid_argmin: TorusPoint
    certified: bool = False
    lipschitz_bound: Optional[float] = None
    lower_bound: Optional[float] = None
    slack: Optional[float] = None


def resonance_seeds(
    params: ModularDistanceParams, max_seeds: int
) -> list[tuple[int, np.ndarray]]:
    """Points where two atoms T_a, T_b both have phase i/q with cos(2 pi i/q) < 0.

    These are the torus points at which q(u.T) = 0 mod 1 for two atoms at
    once; the kernel sum over every layer of such an atom equals
    cos(2 pi i/q)/2, so deep minima of the transform sit near them. For
    each pair the solutions of [T_a; T_b] u = (i/q, i'/q) mod 1 form a coset
    of a subgroup of order |det| in (1/(q|det|)) Z^2 / Z^2. Pairs are taken
    in order of increasing |det| until ``max_seeds`` is reached.

    Returns (denominator, int array of numerators) groups.
    """
    q = params.q
    atoms = [a.vector for a in base_generators(params) if a.sign == 1]
    targets = [i for i in range(1, q) if math.cos(TWO_PI * i / q) < 0]
    pairs = []
    for a in range(len(atoms)):
        for b in range(a + 1, len(atoms)):
            (x1, y1), (x2, y2) = atoms[a], atoms[b]
            pairs.append((abs(x1 * y2 - y1 * x2), a, b))
    pairs.sort()
    groups = []
    budget = max_seeds
    for det, a, b in pairs:
        count = det * len(targets) ** 2
        if count > budget:
            break
        budget -= count
        (x1, y1), (x2, y2) = atoms[a], atoms[b]
        sgn = 1 if x1 * y2 - y1 * x2 > 0 else -1
        D = det * q
        # u * D = sgn * adj(M) (i + q m) for the row matrix M = [T_a; T_b]
        g1 = np.array([sgn * y2 * q % D, -sgn * x2 * q % D], dtype=np.int64)
        g2 = np.array([-sgn * y1 * q % D, sgn * x1 * q % D], dtype=np.int64)
        sub = _subgroup(g1, g2, D)
        for i1 in targets:
            for i2 in targets:
                base = np.array(
                    [sgn * (y2 * i1 - y1 * i2) % D, sgn * (-x2 * i1 + x1 * i2) % D],
                    dtype=np.int64,
                )
                groups.append((D, (sub + base) % D))
    return groups


def _subgroup(g1: np.ndarray, g2: np.ndarray, D: int) -> np.ndarray:
    """All elements of the subgroup of (Z_D)^2 generated by g1 and g2."""

    def cyclic(g):
        pts = [np.zeros(2, dtype=np.int64)]
        cur = g % D
        while cur.any():
            pts.append(cur)
            cur = (cur + g) % D
        return np.array(pts)

    c1 = cyclic(g1)
    seen = {tuple(p) for p in c1}
    layers = [c1]
    shift = g2 % D
    while tuple(shift) not in seen:
        layer = (c1 + shift) % D
        seen.update(tuple(p) for p in layer)
        layers.append(layer)
        shift = (shift + g2) % D
    return np.concatenate(layers)


_STEPS = np.array(
    [(dx, dy) for dx in (-1, 0, 1) for dy in (-1, 0, 1) if dx or dy], dtype=np.int64
)


def _pattern_search(
    f: FourierEvaluator, Z: np.ndarray, D: int, values: np.ndarray, levels: int, factor: int
) -> tuple[np.ndarray, int, np.ndarray]:
    """Descend over the 8-neighbourhood at denominator D, then D*factor, ..."""
    Z = Z.copy()
    values = values.copy()
    rows = np.arange(len(Z))
    for level in range(levels + 1):
        if level:
            if D * factor > MAX_DENOMINATOR:
                break
            Z *= factor
            D *= factor
        while True:
            cand = (Z[:, None, :] + _STEPS[None]) % D
            cv = f(cand.reshape(-1, 2), D).reshape(len(Z), -1)
            best = cv.argmin(axis=1)
            bv = cv[rows, best]
            better = bv < values
            if not better.any():
                break
            Z[better] = cand[rows, best][better]
            values[better] = bv[better]
    return Z, D, values


def estimate_infimum(
    w: WeightedGeneratorSet, grid_N: int, refine: Optional[RefinementConfig] = None
) -> InfimumEstimate:
    """Estimate inf of the transform over the torus.

    Evaluates the grid {z/grid_N}, then refines from the best grid points
    (and, for the modular-distance weight functions, from resonance seeds) by
    pattern search over successively finer rational denominators. The
    returned value is attained at the returned rational point, so it is an
    upper bound on the true infimum. With ``refine.certify`` a sound lower
    bound grid_min - L/(2 grid_N) is attached, L the Lipschitz constant.
    """
    if grid_N < 2:
        raise ValueError("grid_N must be at least 2")
    refine = refine or RefinementConfig()
    origin = TorusPoint(0, 0, 1)
    if not w.entries:
        return InfimumEstimate(0.0, origin, 0.0, origin)

    f = FourierEvaluator(w)
    grid = f.grid(grid_N).ravel()
    # ravel order is lexicographic in (z1, z2), so argmin breaks ties correctly
    order = np.argsort(grid, kind="stable")
    gi = int(order[0])
    grid_min = float(grid[gi])
    grid_argmin = TorusPoint(gi // grid_N, gi % grid_N, grid_N)

    groups: list[tuple[int, np.ndarray, np.ndarray]] = []
    top = order[: refine.starts]
    groups.append((grid_N, np.stack([top // grid_N, top % grid_N], axis=1), grid[top]))
    if refine.resonance_seeds and w.params is not None:
        seeded = []
        for D, Z in resonance_seeds(w.params, refine.max_seeds):
            vals = f(Z, D)
            keep = np.argsort(vals, kind="stable")[: refine.starts]
            seeded.extend((float(vals[i]), D, tuple(int(c) for c in Z[i])) for i in keep)
        seeded.sort(key=lambda s: (s[0], Fraction(s[2][0], s[1]), Fraction(s[2][1], s[1])))
        by_den: dict[int, list] = {}
        for v, D, z in seeded[: refine.starts]:
            by_den.setdefault(D, []).append((v, z))
        for D in sorted(by_den):
            vs = by_den[D]
            groups.append(
                (D, np.array([z for _, z in vs], dtype=np.int64), np.array([v for v, _ in vs]))
            )

    best_value, best_point = grid_min, grid_argmin
    for D, Z, vals in groups:
        Zr, Dr, vr = _pattern_search(f, Z, D, vals, refine.levels, refine.factor)
        for i in range(len(Zr)):
            point = TorusPoint(int(Zr[i, 0]), int(Zr[i, 1]), Dr).reduced()
            v = float(vr[i])
            if (v, point.sort_key()) < (best_value, best_point.sort_key()):
                best_value, best_point = v, point

    # recompute at the winner with the scalar exact-phase path
    best_value = min(best_value, fourier_at(w, best_point))
    est = InfimumEstimate(best_value, best_point, grid_min, grid_argmin)
    if refine.certify:
        L = lipschitz_constant(w)
        slack = L / (2 * grid_N)
        est.lipschitz_bound = L
        est.slack = slack
        est.lower_bound = grid_min - slack
        est.certified = slack < refine.target_separation
        if slack > refine.infeasible_threshold:
            warnings.warn(
                f"Lipschitz slack {slack:.3g} at grid {grid_N} exceeds "
                f"{refine.infeasible_threshold}; estimate is heuristic",
                CertificationInfeasible,
                stacklevel=2,
            )
    return est


def ratio_bound(sup: Real, inf: Real) -> Real:
    """-inf / (sup - inf); exact when both arguments are Fractions."""
    if inf >= 0:
        raise ValueError(f"ratio bound needs a negative infimum, got {inf}")
    if sup <= 0:
        raise ValueError(f"ratio bound needs a positive supremum, got {sup}")
    return -inf / (sup - inf)


def chi_lower_bound(alpha: Real, margin: float = 0.0) -> int:
    """Smallest integer at least 1/alpha.

    Exact Fractions are used as given. Float ratios come from estimates
    that can be optimistic, so ``margin`` is added before the reciprocal.
    """
    if not 0 < alpha <= 1:
        raise ValueError(f"independence ratio bound must lie in (0, 1], got {alpha}")
    if isinstance(alpha, Fraction):
        return math.ceil(1 / alpha)
    return math.ceil(1.0 / min(1.0, float(alpha) + margin))


DEFAULT_MARGIN = 0.01


@dataclass
class SpectralCertificate:
    params: Optional[ModularDistanceParams]
    n: int
    sup_value: Fraction
    inf_estimate: float
    inf_argmin: TorusPoint
    certified: bool
    alpha_ratio_bound: float
    chi_lower_bound: int
    label: str
    margin: float
    grid_N: int
    lipschitz_bound: Optional[float] = None
    certified_lower_bound: Optional[float] = None

    def to_dict(self) -> dict:
        params = self.params
        doc = {
            "p": params.p if params else None,
            "q": params.q if params else None,
            "k": params.k if params else None,
            "n": self.n,
            "grid_N": self.grid_N,
            "sup_value": _frac_str(self.sup_value),
            "inf_estimate": _float_str(self.inf_estimate),
            "inf_argmin": self.inf_argmin.to_dict()["u"],
            "alpha_ratio_bound": _float_str(self.alpha_ratio_bound),
            "chi_lower_bound": self.chi_lower_bound,
            "label": self.label,
            "margin": _float_str(self.margin),
            "certified": self.certified,
        }
        if self.lipschitz_bound is not None:
            doc["lipschitz_bound"] = _float_str(self.lipschitz_bound)
            doc["certified_lower_bound"] = _float_str(self.certified_lower_bound)
        return doc

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def spectral_certificate(
    w: WeightedGeneratorSet,
    grid_N: int,
    refine: Optional[RefinementConfig] = None,
    margin: float = DEFAULT_MARGIN,
) -> SpectralCertificate:
    """Estimate the infimum and turn it into ratio and chromatic bounds.

    When certification succeeds the ratio uses the sound lower bound on the
    infimum; otherwise it uses the (optimistic) estimate and is labelled
    heuristic. The supremum is always the exact total weight, attained at 0.
    """
    refine = refine or RefinementConfig()
    est = estimate_infimum(w, grid_N, refine)
    sup = w.total_weight
    if est.certified:
        inf_used, label = est.lower_bound, "certified"
    else:
        inf_used, label = est.value, "heuristic"
    alpha = ratio_bound(float(sup), inf_used)
    return SpectralCertificate(
        params=w.params,
        n=w.n,
        sup_value=sup,
        inf_estimate=est.value,
        inf_argmin=est.argmin,
        certified=est.certified,
        alpha_ratio_bound=alpha,
        chi_lower_bound=chi_lower_bound(alpha, margin),
        label=label,
        margin=margin,
        grid_N=grid_N,
        lipschitz_bound=est.lipschitz_bound,
        certified_lower_bound=est.lower_bound,
    )


def fejer_kernel(n: int, q: int, theta: float) -> float:
    """(1/(n+1)) sum_{j<n} ((n-j)/n) cos(2 pi (jq+1) theta).

    Summing the transform of the scale layers of one atom d gives exactly
    this kernel at theta = u.d.
    """
    if n < 1 or q < 1:
        raise ValueError("n and q must be positive")
    return math.fsum(
        (n - j) / n * math.cos(TWO_PI * (j * q + 1) * theta) for j in range(n)
    ) / (n + 1)


def fejer_kernel_exact_at_zero(n: int) -> Fraction:
    """Kernel value at theta = 0 in exact arithmetic."""
    return sum((Fraction(n - j, n) for j in range(n)), Fraction(0)) / (n + 1)


def integral_comparison(ell: float, limit: bool = False) -> float:
    """(1 - cos l)/l^2, the integral the kernel tends to; 1/2 at l = 0 if ``limit``."""
    if ell == 0:
        if limit:
            return 0.5
        raise ValueError("ell must be nonzero (pass limit=True for the value at 0)")
    # 1 - cos l = 2 sin^2(l/2) avoids cancellation for small l
    s = math.sin(ell / 2)
    r = s / ell
    return 2.0 * r * r


def weight_function_certificate(
    params: ModularDistanceParams,
    n: int,
    grid_N: int,
    refine: Optional[RefinementConfig] = None,
    margin: float = DEFAULT_MARGIN,
) -> SpectralCertificate:
    return spectral_certificate(weight_function(params, n), grid_N, refine, margin)
