import math

import numpy as np
import pytest

from mapbayes.density import UscDensity1D, affine_piece, constant_piece, sqrt_piece


def random_piecewise(rng, *, max_pieces: int = 6, span: tuple[float, float] = (-2.0, 2.0),
                     gap_prob: float = 0.2) -> UscDensity1D:
    """A random normalized piecewise density mixing all three piece kinds.

    Partition points are drawn in span, occasional sub-intervals are left as
    gaps (density zero there), endpoint values stay strictly positive so
    pieces are nonnegative by monotonicity, and the whole thing is scaled to
    unit mass at the end.
    """
    lo, hi = span
    n = int(rng.integers(2, max_pieces + 1))
    cuts = np.sort(rng.uniform(lo, hi, size=n + 1))
    # enforce a minimum width so sqrt anchors stay numerically comfortable
    while np.min(np.diff(cuts)) < 1e-3:
        cuts = np.sort(rng.uniform(lo, hi, size=n + 1))
    pieces = []
    for a, b in zip(cuts, cuts[1:]):
        if rng.uniform() < gap_prob and len(pieces) > 0:
            continue
        kind = rng.choice(["constant", "affine", "sqrt"])
        v0, v1 = rng.uniform(0.05, 1.5, size=2)
        if kind == "constant":
            pieces.append(constant_piece(a, b, v0))
        elif kind == "affine":
            slope = (v1 - v0) / (b - a)
            pieces.append(affine_piece(a, b, v0, slope, t0=a))
        else:
            s = 1 if rng.uniform() < 0.5 else -1
            t0 = a if s == 1 else b
            w = math.sqrt(b - a)
            if s == 1:
                pieces.append(sqrt_piece(a, b, v0, (v1 - v0) / w, 1, t0))
            else:
                pieces.append(sqrt_piece(a, b, v1, (v0 - v1) / w, -1, t0))
    if not pieces:
        pieces = [constant_piece(lo, hi, 1.0)]
    mass = math.fsum(p.integral(p.lo, p.hi) for p in pieces)
    scaled = []
    for p in pieces:
        params = dict(p.params)
        for key in ("k", "a", "b"):
            if key in params:
                params[key] = params[key] / mass
        scaled.append(type(p)(p.lo, p.hi, p.kind, params))
    return UscDensity1D(tuple(scaled), mass_tol=1e-6)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
