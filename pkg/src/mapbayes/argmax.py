"""Argmax machinery shared by the mode and window-objective estimators.

Both searches report the *set* of maximizers (points and closed intervals in
1D, axis-aligned rectangles in 2D) rather than an arbitrary single point,
because plateaus are common for piecewise-constant densities.  A canonical
representative — the smallest-norm point of the set, ties broken toward the
smaller coordinate — is attached for callers that need one number.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Callable, Sequence

from scipy.optimize import brentq

from .density import GridDensity, Piece, UscDensity1D
from .errors import EmptySearchBox

__all__ = ["ArgmaxResult", "maximize_density", "maximize_window"]

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

#: default absolute value tolerance for grouping near-optimal candidates (exact 1D)
TOL_VALUE_EXACT = 1e-10
#: looser grouping tolerance for grid-backed searches
TOL_VALUE_GRID = 1e-6


def _golden_max(f: Callable[[float], float], a: float, b: float,
                xtol: float) -> tuple[float, float]:
    """Golden-section maximization of f on [a, b] down to width xtol."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while d - c > xtol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


@dataclass(frozen=True)
class ArgmaxResult:
    """Outcome of an argmax search over a box.

    ``maximizers`` holds closed intervals ``(lo, hi)`` in 1D (``lo == hi``
    for isolated points) and rectangles ``((x0, x1), (y0, y1))`` in 2D.
    Every element attains ``sup_value`` up to ``tol_value``.  When
    ``sup_infinite`` is set the density is unbounded on the box,
    ``sup_value`` is ``inf`` and the maximizers are the witness points.
    """

    dim: int
    sup_value: float
    maximizers: tuple
    canonical: object
    tol_value: float
    sup_infinite: bool = False

    def distance_to(self, point) -> float:
        """Euclidean distance from a point to the maximizer set."""
        return distance_to_maximizers(self.dim, self.maximizers, point)

    def hull(self) -> tuple[float, float]:
        """Smallest interval containing the (1D) maximizer set."""
        if self.dim != 1:
            raise ValueError("hull is defined for 1D results")
        return (min(lo for lo, _ in self.maximizers),
                max(hi for _, hi in self.maximizers))

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "sup_value": self.sup_value,
            "maximizers": [list(map(list, m)) if self.dim == 2 else list(m)
                           for m in self.maximizers],
            "canonical": list(self.canonical) if self.dim == 2 else self.canonical,
            "tol_value": self.tol_value,
            "sup_infinite": self.sup_infinite,
        }


def _interval_nearest_zero(lo: float, hi: float) -> float:
    if lo <= 0.0 <= hi:
        return 0.0
    return lo if lo > 0.0 else hi

def _rect_nearest_zero(rect) -> tuple[float, float]:
    return tuple(_interval_nearest_zero(lo, hi) for lo, hi in rect)


def _canonical_1d(maximizers: Sequence[tuple[float, float]]) -> float:
    best = None
    for lo, hi in maximizers:
        x = _interval_nearest_zero(lo, hi)
        key = (abs(x), x)
        if best is None or key < best[0]:
            best = (key, x)
    return best[1]


def _canonical_2d(maximizers) -> tuple[float, float]:
    best = None
    for rect in maximizers:
        p = _rect_nearest_zero(rect)
        key = (math.hypot(*p), p)
        if best is None or key < best[0]:
            best = (key, p)
    return best[1]


def distance_to_maximizers(dim: int, maximizers, point) -> float:
    if dim == 1:
        x = float(point)
        return min(max(lo - x, x - hi, 0.0) for lo, hi in maximizers)
    px, py = point
    best = math.inf
    for (x0, x1), (y0, y1) in maximizers:
        dx = max(x0 - px, px - x1, 0.0)
        dy = max(y0 - py, py - y1, 0.0)
        best = min(best, math.hypot(dx, dy))
    return best


def _merge_elements(elements: list[tuple[float, float]],
                    join_eps: float) -> tuple[tuple[float, float], ...]:
    """Sort 1D intervals/points and merge the ones that touch (within join_eps)."""
    elements = sorted(elements)
    merged: list[list[float]] = []
    for lo, hi in elements:
        if merged and lo <= merged[-1][1] + join_eps:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return tuple((lo, hi) for lo, hi in merged)


# ---------------------------------------------------------------------------
# Mode search (argmax of the density itself)
# ---------------------------------------------------------------------------


def maximize_density(d, box=None, tol_value: float | None = None) -> ArgmaxResult:
    """Argmax of the pointwise density over a closed box.

    Pieces are monotone, so the exact candidates are the piece endpoints
    (with the boundary-max convention) plus whole constant pieces, which
    enter as plateau intervals.  Grid densities contribute their maximizing
    closed cells.
    """
    if isinstance(d, UscDensity1D):
        return _maximize_density_pieces(d, box, TOL_VALUE_EXACT if tol_value is None else tol_value)
    if isinstance(d, GridDensity):
        return _maximize_density_grid(d, box, TOL_VALUE_GRID if tol_value is None else tol_value)
    raise TypeError(f"unsupported density type {type(d).__name__}")


def _check_box1d(box) -> tuple[float, float]:
    lo, hi = float(box[0]), float(box[1])
    if lo > hi:
        raise EmptySearchBox(f"box [{lo}, {hi}] is empty")
    return lo, hi


def _maximize_density_pieces(d: UscDensity1D, box, tol_value: float) -> ArgmaxResult:
    if box is None:
        box = d.support
    lo, hi = _check_box1d(box)

    witnesses = [t for t in d.infinite_points if lo <= t <= hi]
    if witnesses:
        maxi = tuple((t, t) for t in sorted(witnesses))
        return ArgmaxResult(1, math.inf, maxi, _canonical_1d(maxi), tol_value,
                            sup_infinite=True)

    candidates = {lo, hi}
    candidates.update(b for b in d.breakpoints if lo <= b <= hi)
    plateaus = []
    for p in d.pieces:
        if p.kind == "constant" and p.hi > lo and p.lo < hi:
            plateaus.append((max(p.lo, lo), min(p.hi, hi), p.params["k"]))

    scored = [(d.evaluate(t), t) for t in sorted(candidates)]
    sup = max(v for v, _ in scored)
    if plateaus:
        sup = max(sup, max(v for _, _, v in plateaus))

    elements = [(t, t) for v, t in scored if v >= sup - tol_value]
    elements += [(a, b) for a, b, v in plateaus if v >= sup - tol_value]
    maxi = _merge_elements(elements, 0.0)
    return ArgmaxResult(1, sup, maxi, _canonical_1d(maxi), tol_value)


def _maximize_density_grid(d: GridDensity, box, tol_value: float) -> ArgmaxResult:
    if box is None:
        box = d.support if d.dim == 2 else d.support[0]
    if d.dim == 1:
        lo, hi = _check_box1d(box)
        o, h = d.origin[0], d.spacing[0]
        cells = [(max(o + i * h, lo), min(o + (i + 1) * h, hi), float(v))
                 for i, v in enumerate(d.values)]
        cells = [(a, b, v) for a, b, v in cells if a <= b]
        if not cells:
            # the box misses the grid, where the density is identically zero
            maxi = ((lo, hi),)
            return ArgmaxResult(1, 0.0, maxi, _canonical_1d(maxi), tol_value)
        sup = max(v for _, _, v in cells)
        elements = [(a, b) for a, b, v in cells if v >= sup - tol_value]
        maxi = _merge_elements(elements, 0.0)
        return ArgmaxResult(1, sup, maxi, _canonical_1d(maxi), tol_value)

    (bx0, bx1), (by0, by1) = box
    if bx0 > bx1 or by0 > by1:
        raise EmptySearchBox("2D box is empty")
    (ox, _), (oy, _) = d.support
    hx, hy = d.spacing
    rects = []
    for i in range(d.shape[0]):
        x0, x1 = max(ox + i * hx, bx0), min(ox + (i + 1) * hx, bx1)
        if x0 > x1:
            continue
        for j in range(d.shape[1]):
            y0, y1 = max(oy + j * hy, by0), min(oy + (j + 1) * hy, by1)
            if y0 > y1:
                continue
            rects.append(((x0, x1), (y0, y1), float(d.values[i, j])))
    if not rects:
        raise EmptySearchBox("box misses the grid entirely")
    sup = max(v for _, _, v in rects)
    maxi = tuple((rx, ry) for rx, ry, v in rects if v >= sup - tol_value)
    return ArgmaxResult(2, sup, maxi, _canonical_2d(maxi), tol_value)


# ---------------------------------------------------------------------------
# Window-objective search: argmax over theta of integral of f on [theta-r, theta+r]
# ---------------------------------------------------------------------------


_GAP = Piece(0.0, 1.0, "constant", {"k": 0.0})  # stand-in for off-support stretches


def _piece_covering(d: UscDensity1D, x: float) -> Piece:
    """Piece whose half-open interval contains x, or the zero stand-in."""
    i = bisect_right(d._starts, x) - 1
    if 0 <= i < len(d.pieces):
        p = d.pieces[i]
        if p.lo <= x < p.hi:
            return p
    return _GAP


def _affine_coeffs(p: Piece) -> tuple[float, float, float] | None:
    """(a, b, t0) for pieces of the form a + b*(t - t0); None for sqrt arcs."""
    if p.kind == "constant":
        return p.params["k"], 0.0, 0.0
    if p.kind == "affine":
        return p.params["a"], p.params["b"], p.params.get("t0", 0.0)
    return None


def maximize_window(
    d: UscDensity1D,
    radius: float,
    box: tuple[float, float],
    *,
    scale: float = 1.0,
    tol_value: float = TOL_VALUE_EXACT,
    fallback_step_frac: float = 1e-4,
    refine_xtol: float = 1e-10,
    n_probe: int = 17,
) -> ArgmaxResult:
    """Maximize F(theta) = scale * integral of d over [theta-r, theta+r].

    The search is exact on the piecewise structure: F is smooth between
    breakpoints of d shifted by +-r, and on each stretch its derivative is
    f(theta+r) - f(theta-r) for two fixed pieces.  Affine/constant pairs are
    solved in closed form (including genuine plateaus of F); pairs involving
    sqrt arcs are bracketed by sign probing and polished with brentq.  A
    uniform fallback grid with golden-section refinement backs up the
    analytic pass.
    """
    if radius <= 0.0:
        raise ValueError("window radius must be positive")
    lo, hi = _check_box1d(box)
    r = float(radius)

    def F(theta: float) -> float:
        return scale * d.integrate(theta - r, theta + r)

    cuts = {lo, hi}
    for b in d.breakpoints:
        for t in (b - r, b + r):
            if lo < t < hi:
                cuts.add(t)
    cuts = sorted(cuts)

    candidates: set[float] = set(cuts)
    heuristic: set[float] = set()
    plateaus: list[tuple[float, float]] = []

    for u, v in zip(cuts, cuts[1:]):
        if v - u <= 0.0:
            continue
        mid = 0.5 * (u + v)
        p_hi = _piece_covering(d, mid + r)
        p_lo = _piece_covering(d, mid - r)
        hi_aff = _affine_coeffs(p_hi)
        lo_aff = _affine_coeffs(p_lo)
        if hi_aff is not None and lo_aff is not None:
            a_p, b_p, t_p = hi_aff
            a_m, b_m, t_m = lo_aff
            # solve F'(m + psi) = 0 in coordinates shifted to the stretch
            # midpoint m, so products stay small even for steep distant pieces
            c1 = b_p - b_m
            c0 = (a_p - a_m) + b_p * ((mid - t_p) + r) - b_m * ((mid - t_m) - r)
            if c1 == 0.0:
                if c0 == 0.0:
                    plateaus.append((u, v))
                continue
            t_star = mid - c0 / c1
            if u < t_star < v:
                candidates.add(t_star)
            continue

        # at least one sqrt arc: probe the derivative for sign changes
        def dF(theta: float, _ph=p_hi, _pl=p_lo) -> float:
            return _ph.value(theta + r) - _pl.value(theta - r)

        inset = 1e-12 * max(1.0, abs(u), abs(v))
        a, b = u + inset, v - inset
        if b <= a:
            continue
        ts = [a + (b - a) * k / (n_probe - 1) for k in range(n_probe)]
        gs = [dF(t) for t in ts]
        for (t1, g1), (t2, g2) in zip(zip(ts, gs), zip(ts[1:], gs[1:])):
            if g1 == 0.0:
                candidates.add(t1)
            if g1 * g2 < 0.0:
                candidates.add(brentq(dF, t1, t2, xtol=1e-14))
        if gs[-1] == 0.0:
            candidates.add(ts[-1])
        # insurance against derivative sign patterns the probe missed
        x_g, _ = _golden_max(F, u, v, refine_xtol)
        heuristic.add(x_g)

    # fallback: uniform grid + golden refinement of its local maxima
    if hi > lo and fallback_step_frac:
        n = max(2, int(round(1.0 / fallback_step_frac)))
        step = (hi - lo) / n
        grid_vals = [F(lo + k * step) for k in range(n + 1)]
        top = max(grid_vals)
        span = top - min(grid_vals)
        if span > 0.0:
            order = sorted(
                (k for k in range(1, n) if grid_vals[k] >= grid_vals[k - 1]
                 and grid_vals[k] >= grid_vals[k + 1]),
                key=lambda k: grid_vals[k], reverse=True)
            keep = set(order[:8])
            keep.update(k for k in order if top - grid_vals[k] <= 1e-3 * span)
            for k in sorted(keep)[:40]:
                x_g, _ = _golden_max(F, lo + (k - 1) * step, lo + (k + 1) * step, refine_xtol)
                heuristic.add(x_g)

    value_at = {t: F(t) for t in sorted(candidates)}
    plat_scored = [(F(0.5 * (a + b)), a, b) for a, b in plateaus]
    best_structured = max(value_at.values())
    if plat_scored:
        best_structured = max(best_structured, max(v for v, _, _ in plat_scored))
    # golden/fallback points only carry information when they strictly beat
    # the analytic candidates; ties within float dust are duplicate noise
    admit = max(1e-12, 1e-9 * abs(best_structured))
    for t in sorted(heuristic - candidates):
        v = F(t)
        if v > best_structured + admit:
            value_at[t] = v
    sup = max(value_at.values())
    if plat_scored:
        sup = max(sup, max(v for v, _, _ in plat_scored))

    elements = [(a, b) for v, a, b in plat_scored if v >= sup - tol_value]
    # cluster near-duplicate maximizing points (brentq/golden residue) and
    # keep the best representative of each cluster
    pts = sorted(t for t, v in value_at.items() if v >= sup - tol_value)
    cluster_eps = max(1e-9, 10.0 * refine_xtol)
    clusters: list[list[float]] = []
    for t in pts:
        if clusters and t - clusters[-1][-1] <= cluster_eps:
            clusters[-1].append(t)
        else:
            clusters.append([t])
    for cluster in clusters:
        rep = max(cluster, key=lambda t: value_at[t])
        if not any(a - cluster_eps <= rep <= b + cluster_eps for a, b in elements):
            elements.append((rep, rep))
    maxi = _merge_elements(elements, 1e-12)
    return ArgmaxResult(1, sup, maxi, _canonical_1d(maxi), tol_value)


def maximize_objective_2d(
    objective: Callable[[tuple[float, float]], float],
    box: tuple[tuple[float, float], tuple[float, float]],
    *,
    coarse_step: float,
    xtol: float = 1e-6,
    tol_value: float = TOL_VALUE_GRID,
) -> ArgmaxResult:
    """Coarse scan + compass refinement for smooth 2D objectives.

    Used for window objectives on 2D grids, where no closed-form candidate
    structure is available.  Reports a single maximizing point.
    """
    (x0, x1), (y0, y1) = box
    if x0 > x1 or y0 > y1:
        raise EmptySearchBox("2D box is empty")
    nx = max(1, min(64, int(math.ceil((x1 - x0) / coarse_step)) or 1))
    ny = max(1, min(64, int(math.ceil((y1 - y0) / coarse_step)) or 1))
    best = (-math.inf, (x0, y0))
    for i in range(nx + 1):
        x = x0 + (x1 - x0) * i / nx if nx else x0
        for j in range(ny + 1):
            y = y0 + (y1 - y0) * j / ny if ny else y0
            v = objective((x, y))
            if v > best[0]:
                best = (v, (x, y))
    v, (px, py) = best
    step = max((x1 - x0) / max(nx, 1), (y1 - y0) / max(ny, 1), xtol)
    while step > xtol:
        moved = True
        while moved:
            moved = False
            for dx, dy in ((step, 0), (-step, 0), (0, step), (0, -step)):
                qx = min(max(px + dx, x0), x1)
                qy = min(max(py + dy, y0), y1)
                w = objective((qx, qy))
                if w > v:
                    v, px, py, moved = w, qx, qy, True
        step *= 0.5
    maxi = (((px, px), (py, py)),)
    return ArgmaxResult(2, v, maxi, (px, py), tol_value)
