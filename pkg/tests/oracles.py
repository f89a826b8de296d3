"""Independent numerical oracles for cross-checking closed-form code paths.

Everything here works from pointwise evaluation only — no piece
antiderivatives, no package integrators — so agreement between these
routines and the library is genuine evidence, not circular.
"""

from __future__ import annotations

import math


def adaptive_simpson(f, lo: float, hi: float, *, breaks=(), tol: float = 1e-12,
                     max_depth: int = 48) -> float:
    """Adaptive Simpson quadrature with Richardson extrapolation.

    The interval is pre-split at ``breaks`` so each panel is smooth inside;
    the recursion then handles sqrt-type edges by depth alone.
    """
    if hi <= lo:
        return 0.0
    knots = [lo] + sorted(b for b in breaks if lo < b < hi) + [hi]
    total = 0.0
    for a, b in zip(knots, knots[1:]):
        if b <= a:
            continue
        m = 0.5 * (a + b)
        fa, fm, fb = f(a), f(m), f(b)
        whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
        total += _simpson_rec(f, a, b, fa, fm, fb, whole,
                              tol * (b - a) / (hi - lo), max_depth)
    return total


def _simpson_rec(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    return (_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + _simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1))


def brute_argmax(f, lo: float, hi: float, n: int = 200_000):
    """Dense-scan argmax with a local three-point golden polish.

    Deliberately dumb: resolution is (hi-lo)/n plus the polish, which is
    plenty to confirm closed-form argmax locations to ~1e-8.
    """
    if hi < lo:
        raise ValueError("empty interval")
    if hi == lo:
        return lo, f(lo)
    step = (hi - lo) / n
    best_k, best_v = 0, -math.inf
    for k in range(n + 1):
        v = f(lo + k * step)
        if v > best_v:
            best_k, best_v = k, v
    a = max(lo, lo + (best_k - 1) * step)
    b = min(hi, lo + (best_k + 1) * step)
    x, v = _golden(f, a, b)
    if v >= best_v:
        return x, v
    return lo + best_k * step, best_v


def _golden(f, a, b, iters: int = 120):
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def window_mass(d, theta: float, r: float, *, tol: float = 1e-12) -> float:
    """Oracle for the ball-mass objective: Simpson over [theta-r, theta+r]."""
    lo, hi = theta - r, theta + r
    breaks = [b for b in getattr(d, "breakpoints", ()) if lo < b < hi]
    return adaptive_simpson(d.evaluate, lo, hi, breaks=breaks, tol=tol)


def disc_area_subdivision(center, R: float, rect, n: int = 2000) -> float:
    """Riemann estimate of disc/rectangle overlap area on an n-by-n grid.

    Midpoint rule over the rectangle; error is O(perimeter * cell), good to
    ~1e-3 relative at n=2000 — enough to catch sign or zone errors in the
    closed form, which is then tested against exact special cases.
    """
    (x0, x1), (y0, y1) = rect
    cx, cy = center
    hx, hy = (x1 - x0) / n, (y1 - y0) / n
    R2 = R * R
    inside = 0
    for i in range(n):
        x = x0 + (i + 0.5) * hx
        dx2 = (x - cx) ** 2
        if dx2 > R2:
            continue
        # count j-cells whose midpoint lies in the disc: |y-cy| <= sqrt(R2-dx2)
        half = math.sqrt(R2 - dx2)
        j_lo = math.ceil((cy - half - y0) / hy - 0.5)
        j_hi = math.floor((cy + half - y0) / hy - 0.5)
        j_lo, j_hi = max(j_lo, 0), min(j_hi, n - 1)
        if j_hi >= j_lo:
            inside += j_hi - j_lo + 1
    return inside * hx * hy
