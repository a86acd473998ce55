"""Spectral chromatic bounds for modular-distance Cayley graphs on Z^2."""

from moddist.generators import (
    ModularDistanceParams,
    WeightedGeneratorSet,
    base_generators,
    truncated_generators,
    weight_function,
)

__all__ = [
    "ModularDistanceParams",
    "WeightedGeneratorSet",
    "base_generators",
    "truncated_generators",
    "weight_function",
]
