"""Piecewise and gridded densities with upper-semicontinuous pointwise semantics.

A density here is an ordinary nonnegative function, but pointwise values at
piece boundaries are taken as the larger of the one-sided limits (with the
constant 0 outside the support counting as a limit).  That convention makes
the pointwise supremum a max wherever the function is bounded, which is what
the mode-seeking code in :mod:`mapbayes.estimators` relies on.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DivergentEvidence, ZeroEvidence

__all__ = [
    "Piece",
    "UscDensity1D",
    "GridDensity",
    "BayesModel",
    "posterior",
    "evidence",
    "density_from_json",
    "density_to_json",
]

_KINDS = ("constant", "affine", "sqrt")


@dataclass(frozen=True)
class Piece:
    """One analytic piece of a 1D density on the half-open interval [lo, hi).

    kind selects the formula on the interval:

    * ``constant``: k
    * ``affine``: a + b*(t - t0), with the reference point t0 defaulting to 0
      (the plain a + b*t form)
    * ``sqrt``: a + b*sqrt(s*(t - t0)) with orientation s in {+1, -1}

    All three have closed-form antiderivatives, so window integrals of the
    density are exact up to float rounding.  The affine reference point
    exists for numerical reasons: a steep short ramp far from the origin
    (slopes of 1e14 and widths of 1e-14 occur in the bundled escaping-bump
    density) would cancel catastrophically in the global a + b*t form.
    """

    lo: float
    hi: float
    kind: str
    params: dict

    def __post_init__(self):
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        object.__setattr__(self, "params", {
            k: (int(v) if k == "s" else float(v)) for k, v in self.params.items()})
        if not self.lo < self.hi:
            raise ValueError(f"piece needs lo < hi, got [{self.lo}, {self.hi})")
        if self.kind not in _KINDS:
            raise ValueError(f"unknown piece kind {self.kind!r}")
        if self.kind == "sqrt":
            s = self.params["s"]
            if s not in (-1, 1):
                raise ValueError("sqrt piece orientation s must be +1 or -1")
            t0 = self.params["t0"]
            # the radicand s*(t - t0) must be >= 0 on the whole interval
            if s == 1 and t0 > self.lo + 1e-15 * max(1.0, abs(self.lo)):
                raise ValueError("sqrt piece with s=+1 needs t0 <= lo")
            if s == -1 and t0 < self.hi - 1e-15 * max(1.0, abs(self.hi)):
                raise ValueError("sqrt piece with s=-1 needs t0 >= hi")
        lo_v, hi_v = self.endpoint_values()
        if min(lo_v, hi_v) < -1e-12:
            raise ValueError(f"piece is negative on [{self.lo}, {self.hi})")

    # -- pointwise -----------------------------------------------------------

    def value(self, t: float) -> float:
        """Continuous extension of the piece formula to the closed interval."""
        if self.kind == "constant":
            return self.params["k"]
        if self.kind == "affine":
            p = self.params
            return p["a"] + p["b"] * (t - p.get("t0", 0.0))
        p = self.params
        u = p["s"] * (t - p["t0"])
        return p["a"] + p["b"] * math.sqrt(max(u, 0.0))

    def endpoint_values(self) -> tuple[float, float]:
        """Values of the continuous extension at lo and hi.

        Pieces are monotone (constant, affine, or a monotone sqrt arc), so
        these are also the extreme values on the piece.
        """
        return self.value(self.lo), self.value(self.hi)

    def direction(self) -> int:
        """+1 strictly increasing, -1 strictly decreasing, 0 constant."""
        if self.kind == "constant":
            return 0
        if self.kind == "affine":
            b = self.params["b"]
            return 0 if b == 0 else (1 if b > 0 else -1)
        b = self.params["b"]
        if b == 0:
            return 0
        # d/dt sqrt(s*(t-t0)) has the sign of s
        return int(math.copysign(1, b * self.params["s"]))

    # -- integration ---------------------------------------------------------

    def antiderivative(self, t: float) -> float:
        if self.kind == "constant":
            return self.params["k"] * t
        if self.kind == "affine":
            p = self.params
            dt = t - p.get("t0", 0.0)
            return p["a"] * t + 0.5 * p["b"] * dt * dt
        p = self.params
        u = p["s"] * (t - p["t0"])
        return p["a"] * t + p["s"] * (2.0 * p["b"] / 3.0) * max(u, 0.0) ** 1.5

    def integral(self, a: float, b: float) -> float:
        """Integral of the piece formula over [a, b] (caller clips to the piece)."""
        if b <= a:
            return 0.0
        return self.antiderivative(b) - self.antiderivative(a)

    def lipschitz_bound(self, a: float, b: float) -> float:
        """Upper bound on |f'| over [a, b] intersected with the piece; may be inf."""
        a = max(a, self.lo)
        b = min(b, self.hi)
        if b < a:
            return 0.0
        if self.kind == "constant":
            return 0.0
        if self.kind == "affine":
            return abs(self.params["b"])
        p = self.params
        bq = abs(p["b"])
        if bq == 0:
            return 0.0
        # |f'| = |b| / (2 sqrt(u)), largest where the radicand u is smallest
        u_min = (a - p["t0"]) if p["s"] == 1 else (p["t0"] - b)
        if u_min <= 0.0:
            return math.inf
        return bq / (2.0 * math.sqrt(u_min))

    def solve_ge(self, alpha: float) -> list[tuple[float, float]]:
        """Closed subintervals of [lo, hi] where the piece value is >= alpha.

        Pieces are monotone, so the endpoint values bracket the range; they
        are checked first, which keeps float rounding in the interior cut
        (noticeable at very steep slopes) from conjuring slivers where the
        value never actually reaches alpha.
        """
        lo, hi = self.lo, self.hi
        if self.kind == "constant":
            return [(lo, hi)] if self.params["k"] >= alpha else []
        v_lo, v_hi = self.endpoint_values()
        if max(v_lo, v_hi) < alpha:
            return []
        if min(v_lo, v_hi) >= alpha:
            return [(lo, hi)]
        if self.kind == "affine":
            a, b = self.params["a"], self.params["b"]
            if b == 0:
                return [(lo, hi)] if a >= alpha else []
            t_star = self.params.get("t0", 0.0) + (alpha - a) / b
            if b > 0:
                seg = (max(lo, t_star), hi)
            else:
                seg = (lo, min(hi, t_star))
            return [seg] if seg[0] <= seg[1] else []
        p = self.params
        a, b, s, t0 = p["a"], p["b"], p["s"], p["t0"]
        if b == 0:
            return [(lo, hi)] if a >= alpha else []
        # solve b*sqrt(u) >= alpha - a for the radicand u >= 0
        rhs = (alpha - a) / b
        if b > 0:
            u_lo, u_hi = (max(rhs, 0.0) ** 2 if rhs > 0 else 0.0), math.inf
        else:
            if rhs < 0:
                return []
            u_lo, u_hi = 0.0, rhs * rhs
        if s == 1:
            seg = (max(lo, t0 + u_lo), hi if u_hi == math.inf else min(hi, t0 + u_hi))
        else:
            seg = (lo if u_hi == math.inf else max(lo, t0 - u_hi), min(hi, t0 - u_lo))
        return [seg] if seg[0] <= seg[1] else []

    def to_json(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "kind": self.kind, "params": dict(self.params)}

    @staticmethod
    def from_json(obj: dict) -> "Piece":
        return Piece(float(obj["lo"]), float(obj["hi"]), str(obj["kind"]),
                     {k: (int(v) if k == "s" else float(v)) for k, v in obj["params"].items()})


def constant_piece(lo: float, hi: float, k: float) -> Piece:
    return Piece(lo, hi, "constant", {"k": k})


def affine_piece(lo: float, hi: float, a: float, b: float, t0: float = 0.0) -> Piece:
    params = {"a": a, "b": b} if t0 == 0.0 else {"a": a, "b": b, "t0": t0}
    return Piece(lo, hi, "affine", params)


def sqrt_piece(lo: float, hi: float, a: float, b: float, s: int, t0: float) -> Piece:
    return Piece(lo, hi, "sqrt", {"a": a, "b": b, "s": s, "t0": t0})


@dataclass(frozen=True)
class UscDensity1D:
    """A 1D density given by non-overlapping analytic pieces.

    ``evaluate`` applies the boundary convention described in the module
    docstring.  ``mass_tol`` is how far the total mass may sit from 1; the
    default suits exactly normalized constructions, while truncated ones
    (see :mod:`mapbayes.counterexample`) pass a looser value covering the
    mass they deliberately omit.

    ``infinite_points`` marks isolated points where the density is +inf
    (the pointwise sup is then infinite and mode searches report a witness).
    ``tail_height_sup`` declares that the construction continues beyond the
    materialized pieces with plateaus whose heights approach the given value;
    level sets below it are treated as unbounded.
    """

    pieces: tuple[Piece, ...]
    mass_tol: float = 1e-9
    infinite_points: tuple[float, ...] = ()
    tail_height_sup: float | None = None
    _starts: tuple[float, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pieces = tuple(sorted(self.pieces, key=lambda p: p.lo))
        if not pieces:
            raise ValueError("a density needs at least one piece")
        for prev, cur in zip(pieces, pieces[1:]):
            if cur.lo < prev.hi - 1e-15 * max(1.0, abs(prev.hi)):
                raise ValueError(f"pieces overlap near t={cur.lo}")
        object.__setattr__(self, "pieces", pieces)
        object.__setattr__(self, "_starts", tuple(p.lo for p in pieces))
        mass = self.total_mass
        if not math.isfinite(mass) or abs(mass - 1.0) > self.mass_tol:
            raise ValueError(f"total mass {mass} is not within {self.mass_tol} of 1")

    @property
    def total_mass(self) -> float:
        return math.fsum(p.integral(p.lo, p.hi) for p in self.pieces)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Sorted distinct piece endpoints (the only discontinuity/kink candidates)."""
        pts = sorted({p.lo for p in self.pieces} | {p.hi for p in self.pieces})
        return tuple(pts)

    @property
    def support(self) -> tuple[float, float]:
        """Smallest interval containing all pieces."""
        return self.pieces[0].lo, max(p.hi for p in self.pieces)

    def _containing(self, t: float) -> list[Piece]:
        i = bisect_right(self._starts, t)
        out = []
        for j in (i - 1, i):
            if 0 <= j < len(self.pieces):
                p = self.pieces[j]
                if p.lo <= t <= p.hi:
                    out.append(p)
        return out

    def evaluate(self, t: float) -> float:
        """Pointwise value: the max of one-sided limits at t (0 off support).

        Never negative: the density is nonnegative by construction, and any
        sub-zero float dust a piece formula produces at its edge loses to
        the off-support zero limit anyway.
        """
        if t in self.infinite_points:
            return math.inf
        vals = [p.value(t) for p in self._containing(t)]
        return max(vals) if vals and max(vals) > 0.0 else 0.0

    def __call__(self, t: float) -> float:
        return self.evaluate(t)

    def integrate(self, lo: float, hi: float) -> float:
        """Exact integral over [lo, hi] via per-piece antiderivatives."""
        if hi < lo:
            raise ValueError("integrate needs lo <= hi")
        terms = []
        i = max(bisect_right(self._starts, lo) - 1, 0)
        for p in self.pieces[i:]:
            if p.lo >= hi:
                break
            a, b = max(lo, p.lo), min(hi, p.hi)
            if b > a:
                terms.append(p.integral(a, b))
        return math.fsum(terms)

    def lipschitz_bound(self, lo: float, hi: float) -> float:
        """Bound on |f'| over [lo, hi] ignoring jumps between pieces."""
        return max((p.lipschitz_bound(lo, hi) for p in self.pieces), default=0.0)

    def to_json(self) -> dict:
        return {"pieces": [p.to_json() for p in self.pieces]}

    @staticmethod
    def from_json(obj: dict, **kwargs) -> "UscDensity1D":
        return UscDensity1D(tuple(Piece.from_json(p) for p in obj["pieces"]), **kwargs)


@dataclass(frozen=True, eq=False)
class GridDensity:
    """Cell-constant density on a regular 1D or 2D grid.

    Values live on cells; a point on a cell boundary evaluates to the max of
    the adjacent cell values (0 outside the grid), matching the boundary
    convention of the piecewise class.
    """

    dim: int
    origin: tuple[float, ...]
    spacing: tuple[float, ...]
    values: np.ndarray
    mass_tol: float = 1e-6

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "origin", tuple(float(x) for x in self.origin))
        object.__setattr__(self, "spacing", tuple(float(x) for x in self.spacing))
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        if values.ndim != self.dim:
            raise ValueError(f"values must be {self.dim}-dimensional")
        if len(self.origin) != self.dim or len(self.spacing) != self.dim:
            raise ValueError("origin/spacing length must match dim")
        if any(h <= 0 for h in self.spacing):
            raise ValueError("spacing must be positive")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("cell values must be finite and nonnegative")
        mass = self.total_mass
        if abs(mass - 1.0) > self.mass_tol:
            raise ValueError(f"grid mass {mass} is not within {self.mass_tol} of 1")

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def total_mass(self) -> float:
        return float(self.values.sum() * self.cell_volume)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    @property
    def support(self) -> tuple[tuple[float, float], ...]:
        """Bounding box of the grid, one (lo, hi) pair per axis."""
        return tuple(
            (self.origin[k], self.origin[k] + self.spacing[k] * self.shape[k])
            for k in range(self.dim)
        )

    @staticmethod
    def normalized(dim, origin, spacing, values, **kwargs) -> "GridDensity":
        """Build a grid density rescaled so its Riemann mass is exactly 1."""
        values = np.asarray(values, dtype=float)
        vol = float(np.prod([float(h) for h in np.atleast_1d(spacing)]))
        mass = float(values.sum() * vol)
        if mass <= 0:
            raise ValueError("cannot normalize a grid with zero mass")
        return GridDensity(dim, tuple(np.atleast_1d(origin)), tuple(np.atleast_1d(spacing)),
                           values / mass, **kwargs)

    def _axis_cells(self, k: int, x: float) -> list[int]:
        """Cell indices along axis k whose closed extent contains coordinate x."""
        o, h, n = self.origin[k], self.spacing[k], self.shape[k]
        pos = (x - o) / h
        i = math.floor(pos)
        out = []
        for j in (i - 1, i):
            if 0 <= j < n and o + j * h <= x <= o + (j + 1) * h:
                out.append(j)
        return out

    def evaluate(self, point) -> float:
        coords = (point,) if self.dim == 1 else tuple(point)
        per_axis = [self._axis_cells(k, coords[k]) for k in range(self.dim)]
        if any(not cells for cells in per_axis):
            return 0.0
        if self.dim == 1:
            return float(max(self.values[i] for i in per_axis[0]))
        return float(max(self.values[i, j] for i in per_axis[0] for j in per_axis[1]))

    def __call__(self, point) -> float:
        return self.evaluate(point)

    def to_pieces(self) -> UscDensity1D:
        """Exact piecewise view of a 1D grid (each cell becomes a constant piece)."""
        if self.dim != 1:
            raise ValueError("to_pieces applies to 1D grids only")
        o, h = self.origin[0], self.spacing[0]
        pieces = tuple(
            constant_piece(o + i * h, o + (i + 1) * h, float(v))
            for i, v in enumerate(self.values)
        )
        return UscDensity1D(pieces, mass_tol=max(self.mass_tol, 1e-6))

    def to_json(self) -> dict:
        if self.dim == 1:
            return {"dim": 1, "origin": self.origin[0], "spacing": self.spacing[0],
                    "values": [float(v) for v in self.values]}
        return {"dim": 2, "origin": list(self.origin), "spacing": list(self.spacing),
                "values": [[float(v) for v in row] for row in self.values]}

    @staticmethod
    def from_json(obj: dict, **kwargs) -> "GridDensity":
        dim = int(obj["dim"])
        origin = obj["origin"]
        spacing = obj["spacing"]
        if dim == 1:
            origin = (float(origin),) if np.isscalar(origin) else tuple(origin)
            spacing = (float(spacing),) if np.isscalar(spacing) else tuple(spacing)
        else:
            origin, spacing = tuple(origin), tuple(spacing)
        return GridDensity(dim, origin, spacing, np.asarray(obj["values"], dtype=float), **kwargs)


Density = UscDensity1D | GridDensity


def density_to_json(d: Density) -> dict:
    return d.to_json()


def density_from_json(obj: dict, **kwargs) -> Density:
    """Dispatch on the JSON shape: piece lists vs grids."""
    if "pieces" in obj:
        return UscDensity1D.from_json(obj, **kwargs)
    if "values" in obj:
        return GridDensity.from_json(obj, **kwargs)
    raise ValueError("density JSON needs either a 'pieces' or a 'values' field")


# ---------------------------------------------------------------------------
# Bayes models and posteriors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BayesModel:
    """Prior + likelihood + one observation.

    ``likelihood(x, theta)`` must be nonnegative.  ``likelihood_constant``
    declares whether it is constant in theta; leave it None to let
    :func:`posterior` probe for constancy numerically.
    """

    prior: Density
    likelihood: Callable[[object, object], float]
    observation: object
    likelihood_constant: bool | None = None


def _support_hull(prior: Density) -> tuple[float, float]:
    if isinstance(prior, UscDensity1D):
        return prior.support
    if prior.dim != 1:
        raise ValueError("expected a 1D prior")
    (lo, hi), = prior.support
    return lo, hi


def _probe_constant(m: BayesModel, n: int) -> bool:
    """Heuristic constancy probe: equal likelihood at n+7 spread-out thetas."""
    if isinstance(m.prior, GridDensity) and m.prior.dim == 2:
        (x0, x1), (y0, y1) = m.prior.support
        xs = np.linspace(x0, x1, max(4, int(math.isqrt(n)) + 3))
        ys = np.linspace(y0, y1, max(4, int(math.isqrt(n)) + 3))
        vals = [m.likelihood(m.observation, (x, y)) for x in xs for y in ys]
    else:
        lo, hi = _support_hull(m.prior)
        thetas = np.linspace(lo, hi, n + 7)
        vals = [m.likelihood(m.observation, t) for t in thetas]
    return all(v == vals[0] for v in vals)


def evidence(m: BayesModel, grid_resolution: int = 1024) -> tuple[float, float]:
    """Marginal likelihood by composite midpoint rule, with a doubled-grid check.

    Returns (estimate, error_indicator) where the estimate is Richardson
    extrapolated from the two grids and the indicator is |E_2n - E_n|.
    """
    if isinstance(m.prior, GridDensity) and m.prior.dim == 2:
        # cell-constant prior: the midpoint sum over cells is exact in the prior
        cells = m.prior
        (x0, _), (y0, _) = cells.support
        hx, hy = cells.spacing
        total = 0.0
        for i in range(cells.shape[0]):
            for j in range(cells.shape[1]):
                mid = (x0 + (i + 0.5) * hx, y0 + (j + 0.5) * hy)
                total += cells.values[i, j] * m.likelihood(m.observation, mid) * hx * hy
        return _check_evidence(total, total)

    lo, hi = _support_hull(m.prior)

    def midpoint(n: int) -> float:
        h = (hi - lo) / n
        mids = lo + h * (np.arange(n) + 0.5)
        return h * math.fsum(
            m.prior.evaluate(t) * m.likelihood(m.observation, t) for t in mids
        )

    e1 = midpoint(grid_resolution)
    e2 = midpoint(2 * grid_resolution)
    # midpoint rule is O(h^2); Richardson combination cancels the leading term
    est = e2 + (e2 - e1) / 3.0
    return _check_evidence(est, abs(e2 - e1))


def _check_evidence(est: float, err: float) -> tuple[float, float]:
    if not math.isfinite(est):
        raise DivergentEvidence(f"evidence quadrature returned {est}")
    if est <= 0.0:
        raise ZeroEvidence("evidence quadrature returned zero")
    return est, err


def posterior(m: BayesModel, grid_resolution: int = 1024) -> Density:
    """Posterior density of the model.

    If the likelihood does not depend on theta the prior is returned as-is
    (same pieces / cells).  Otherwise the result is a cell-constant grid over
    the prior's support with exactly unit Riemann mass; the evidence
    quadrature is still run so that zero or non-finite evidence raises.
    """
    constant = m.likelihood_constant
    if constant is None:
        constant = _probe_constant(m, min(grid_resolution, 256))
    if constant:
        lo_like = m.likelihood(m.observation, _constancy_probe_point(m.prior))
        if not math.isfinite(lo_like):
            raise DivergentEvidence("constant likelihood is non-finite")
        if lo_like <= 0.0:
            raise ZeroEvidence("constant likelihood is zero")
        return m.prior

    evidence(m, grid_resolution)  # raises on zero / divergent mass

    if isinstance(m.prior, GridDensity):
        g = m.prior
        if g.dim == 1:
            (lo, hi), = g.support
            h = g.spacing[0]
            mids = lo + h * (np.arange(g.shape[0]) + 0.5)
            w = np.array([g.values[i] * m.likelihood(m.observation, t)
                          for i, t in enumerate(mids)])
            return GridDensity.normalized(1, g.origin, g.spacing, w)
        (x0, _), (y0, _) = g.support
        hx, hy = g.spacing
        w = np.array([[g.values[i, j] * m.likelihood(m.observation,
                                                     (x0 + (i + 0.5) * hx, y0 + (j + 0.5) * hy))
                       for j in range(g.shape[1])] for i in range(g.shape[0])])
        return GridDensity.normalized(2, g.origin, g.spacing, w)

    lo, hi = _support_hull(m.prior)
    h = (hi - lo) / grid_resolution
    mids = lo + h * (np.arange(grid_resolution) + 0.5)
    w = np.array([m.prior.evaluate(t) * m.likelihood(m.observation, t) for t in mids])
    return GridDensity.normalized(1, (lo,), (h,), w)


def _constancy_probe_point(prior: Density):
    if isinstance(prior, GridDensity) and prior.dim == 2:
        (x0, x1), (y0, y1) = prior.support
        return (0.5 * (x0 + x1), 0.5 * (y0 + y1))
    lo, hi = _support_hull(prior)
    return 0.5 * (lo + hi)
