"""Indicator variables and the twelve-dimensional claim feature vector.

Indicators use non-strict comparisons, so exact ties activate more than one
of (cs, cr, cu).  All features are sums, maxima, or ratios over a claim's
scored candidates; the empty candidate list maps to the all-zero vector.
"""

from dataclasses import dataclass

import numpy as np

from .entailment import EntailmentTriple

FEATURE_NAMES = tuple(f"f{i}" for i in range(1, 13))


@dataclass(frozen=True)
class IndicatorTriple:
    cs: int
    cr: int
    cu: int


def indicators(triple: EntailmentTriple) -> IndicatorTriple:
    s, r, u = triple.support, triple.refute, triple.uninformative
    return IndicatorTriple(
        cs=1 if (s >= r and s >= u) else 0,
        cr=1 if (r >= s and r >= u) else 0,
        cu=1 if (u >= s and u >= r) else 0,
    )


@dataclass(frozen=True)
class FeatureVector:
    f1: float
    f2: float
    f3: float
    f4: float
    f5: float
    f6: float
    f7: float
    f8: float
    f9: float
    f10: float
    f11: float
    f12: float
    n: int

    def as_array(self) -> np.ndarray:
        return np.array([getattr(self, name) for name in FEATURE_NAMES], dtype=np.float64)


def features(candidates) -> FeatureVector:
    """Twelve features over scored candidates (or bare triples)."""
    triples = [getattr(c, "triple", c) for c in candidates]
    f = [0.0] * 12
    for triple in triples:
        s, r, u = triple.support, triple.refute, triple.uninformative
        ind = indicators(triple)
        f[0] += ind.cs
        f[1] += ind.cr
        f[2] += ind.cu
        f[3] += s * ind.cs
        f[4] += r * ind.cr
        f[5] += u * ind.cu
        f[6] = max(f[6], s)
        f[7] = max(f[7], r)
        f[8] = max(f[8], u)
    f[9] = f[3] / f[0] if f[0] != 0 else 0.0
    f[10] = f[4] / f[1] if f[1] != 0 else 0.0
    f[11] = f[5] / f[2] if f[2] != 0 else 0.0
    return FeatureVector(*f, n=len(triples))
