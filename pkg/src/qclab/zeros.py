"""Real zeros of exponential sums, certified by the argument principle.

The scan step 1/(16*B), with B the largest |frequency|, comes from the
Bernstein bound |f'| <= 2*pi*B*||f||_W: simple zeros separated by more
than one step cannot hide between grid points.  Whatever the scan finds
is audited against a certified winding-number count over the window
strip; on a mismatch the step is halved and the scan repeated.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    BoundaryError,
    ContourError,
    ConvergenceError,
    InvalidInputError,
)
from .wiener import ExpSum, derivative, evaluate, is_hermitian

_EDGE_POINT_CAP = 4_000_000
_NUDGE = (1.0, 0.8311, 1.2137, 0.6473, 1.4159)


@dataclass(frozen=True)
class ZeroSet:
    """Sorted real zero multiset over a stated window."""

    window: tuple[float, float]
    points: np.ndarray
    mults: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "points", np.ascontiguousarray(self.points, dtype=float))
        object.__setattr__(self, "mults", np.ascontiguousarray(self.mults, dtype=np.int64))

    def __len__(self) -> int:
        return self.points.size

    @property
    def count(self) -> int:
        """Number of points counted with multiplicity."""
        return int(np.sum(self.mults))

    def expand(self) -> np.ndarray:
        """Sorted array with each point repeated by its multiplicity."""
        return np.repeat(self.points, self.mults)


@dataclass(frozen=True)
class RealnessReport:
    real_count: int
    total_count: int
    all_real: bool


def _empty_zeroset(window) -> ZeroSet:
    return ZeroSet(tuple(map(float, window)), np.empty(0), np.empty(0, np.int64))


def _deriv_bound(f: ExpSum, y0: float, y1: float) -> float:
    # sup of |f'| over any segment whose imaginary part stays in [y0, y1]
    w = f.freqs
    with np.errstate(over="ignore"):
        decay = np.maximum(np.exp(-2 * np.pi * w * y0), np.exp(-2 * np.pi * w * y1))
        bound = float(np.sum(2 * np.pi * np.abs(w) * np.abs(f.coeffs) * decay))
    if not np.isfinite(bound):
        raise ContourError("derivative bound overflowed on a contour edge")
    return bound


def _walk_edge(f: ExpSum, z0: complex, z1: complex, margin: float,
               max_points: int = _EDGE_POINT_CAP) -> float:
    """Total argument increment of f along the segment z0 -> z1.

    Subdivides until each sub-segment is certified zero-free and its
    phase step is provably below pi/6; the principal-value phase sum is
    then the exact argument variation.
    """
    lbound = _deriv_bound(f, min(z0.imag, z1.imag), max(z0.imag, z1.imag))
    length = abs(z1 - z0)
    n0 = int(min(max(16, lbound * length / max(margin, 1e-300) / 8), 1024))
    ts = np.linspace(0.0, 1.0, n0)
    vals = evaluate(f, z0 + ts * (z1 - z0))
    for _ in range(64):
        absv = np.abs(vals)
        seg = np.diff(ts) * length
        lo = np.minimum(absv[:-1], absv[1:])
        m_seg = 0.5 * (absv[:-1] + absv[1:] - lbound * seg)
        bad = (m_seg <= margin) | (lbound * seg > 0.5 * lo)
        if not bad.any():
            break
        hopeless = bad & (lbound * seg <= 0.2 * margin)
        if hopeless.any():
            raise ContourError(
                "contour passes within the edge margin of a zero; perturb the rectangle"
            )
        if ts.size > max_points:
            raise ContourError("edge refinement exceeded its sample budget")
        mids = (0.5 * (ts[:-1] + ts[1:]))[bad]
        vals = np.concatenate([vals, evaluate(f, z0 + mids * (z1 - z0))])
        ts = np.concatenate([ts, mids])
        order = np.argsort(ts, kind="stable")
        ts = ts[order]
        vals = vals[order]
    else:
        raise ContourError("contour refinement did not certify after 64 rounds")
    return float(np.sum(np.angle(vals[1:] / vals[:-1])))


def count_zeros_rectangle(f: ExpSum, rect, *, edge_margin: float | None = None) -> int:
    """Zeros of f inside an axis-aligned rectangle, counted with multiplicity.

    ``rect`` is (x0, x1, y0, y1).  Precondition |f| > edge_margin on the
    boundary is verified while integrating; the winding number is exact
    once every phase step is certified.
    """
    if len(f) == 0:
        raise InvalidInputError("cannot count zeros of the empty (identically zero) sum")
    x0, x1, y0, y1 = map(float, rect)
    if not (x0 < x1 and y0 < y1):
        raise InvalidInputError("rectangle must satisfy x0 < x1 and y0 < y1")
    margin = 1e-6 * f.wiener_norm if edge_margin is None else float(edge_margin)
    c0, c1, c2, c3 = complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)
    total = 0.0
    for a, b in ((c0, c1), (c1, c2), (c2, c3), (c3, c0)):
        total += _walk_edge(f, a, b, margin)
    winding = total / (2 * np.pi)
    n = int(round(winding))
    if abs(winding - n) > 0.25 or n < 0:
        raise ContourError(f"winding number {winding:.3f} not certified as an integer")
    return n


def _count_with_retries(f, rect, attempts=_NUDGE):
    x0, x1, y0, y1 = rect
    err = None
    for k in attempts:
        try:
            return count_zeros_rectangle(f, (x0, x1, y0 * k, y1 * k))
        except ContourError as exc:
            err = exc
    raise err


def _real_values(f, x):
    return np.real(evaluate(f, np.asarray(x, dtype=float) + 0j))


def _bisect_real(f, lo, hi, iters=48):
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    flo = _real_values(f, lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = _real_values(f, mid)
        go_right = flo * fm > 0
        lo = np.where(go_right, mid, lo)
        flo = np.where(go_right, fm, flo)
        hi = np.where(go_right, hi, mid)
    return 0.5 * (lo + hi)


def _newton_real(f, x, lo, hi, iters=10):
    df = derivative(f)
    x = np.array(x, dtype=float)
    for _ in range(iters):
        fx = _real_values(f, x)
        dfx = _real_values(df, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(dfx != 0, fx / np.where(dfx == 0, 1.0, dfx), 0.0)
        xn = x - step
        x = np.where((xn >= lo) & (xn <= hi), xn, x)
    return x


def _newton_complex(f, z0, iters=30, tol=1e-13):
    df = derivative(f)
    z = complex(z0)
    for _ in range(iters):
        fz = evaluate(f, z)
        dfz = evaluate(df, z)
        if dfz == 0:
            break
        zn = z - fz / dfz
        if abs(zn - z) < tol * max(1.0, abs(zn)):
            z = zn
            break
        z = zn
    return z


def _refine_multiple(f, a, mult, halfwidth):
    # a zero of order m is a simple zero of the (m-1)-th derivative
    g = f
    for _ in range(mult - 1):
        g = derivative(g)
    if is_hermitian(g):
        va, vb = _real_values(g, a - halfwidth), _real_values(g, a + halfwidth)
        if va * vb < 0:
            root = _bisect_real(g, np.array([a - halfwidth]), np.array([a + halfwidth]))
            root = _newton_real(g, root, a - halfwidth, a + halfwidth)
            return float(root[0])
    z = _newton_complex(g, a)
    if abs(z.imag) < 1e-8 and abs(z.real - a) <= halfwidth:
        return float(z.real)
    return float(a)


def find_real_zeros(
    f: ExpSum,
    window,
    *,
    scan_step: float | None = None,
    strip_height: float | None = None,
    resid_tol: float = 1e-9,
    boundary_tol: float = 1e-6,
    max_halvings: int = 6,
) -> ZeroSet:
    """Real zero multiset of f over the window.

    Sign changes are bracketed and polished by Newton; zeros of even
    multiplicity are detected as deep minima of |f| and confirmed by a
    winding count on a small box, which also supplies multiplicities.
    The sum of multiplicities is checked against the winding count over
    the whole window strip; mismatches trigger scan-step halving.
    """
    if len(f) == 0:
        raise InvalidInputError("the empty sum is identically zero")
    lo, hi = map(float, window)
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise InvalidInputError("window must be a finite interval")
    if len(f) == 1:
        warnings.warn("a single exponential has no zeros; returning an empty set")
        return _empty_zeroset((lo, hi))
    B = f.max_abs_freq
    step0 = scan_step if scan_step is not None else 1.0 / (16.0 * B)
    h = strip_height if strip_height is not None else step0

    try:
        expected = _count_with_retries(f, (lo, hi, -h, h))
    except ContourError:
        edge_vals = np.abs(evaluate(f, np.array([lo, hi], dtype=complex)))
        if np.min(edge_vals) < 1e-3 * f.wiener_norm:
            raise BoundaryError(
                "a zero lies too close to the window boundary; shift the window"
            ) from None
        raise

    for attempt in range(max_halvings):
        step = step0 / (2 ** attempt)
        points, mults = _scan_window(f, lo, hi, step, resid_tol, boundary_tol)
        if int(np.sum(mults)) == expected:
            return ZeroSet((lo, hi), points, mults)
    raise ConvergenceError(
        f"scan found {int(np.sum(mults))} zeros but the contour count is {expected}; "
        "zeros may be non-real or closer than the refined scan step"
    )


def _resolve_cluster(f, lo, hi, m, resid_tol, depth):
    # several distinct zeros shared one detection box; rescan the box at
    # geometrically finer steps until they separate
    width = hi - lo
    for k in range(2, 22):
        pts, mults = _scan_window(f, lo, hi, width / 2 ** k, resid_tol, 0.0, depth)
        if int(np.sum(mults)) == m:
            return pts, mults
    return None


def _scan_window(f, lo, hi, step, resid_tol, boundary_tol, depth=0):
    n = int(np.ceil((hi - lo) / step)) + 1
    xs = np.linspace(lo, hi, n)
    B = f.max_abs_freq
    norm = f.wiener_norm
    min_thresh = (2 * np.pi * B) ** 2 * norm * step ** 2
    herm = is_hermitian(f)

    roots = []
    if herm:
        vals = _real_values(f, xs)
        cells = np.flatnonzero(vals[:-1] * vals[1:] < 0)
        if cells.size:
            b = _bisect_real(f, xs[cells], xs[cells + 1])
            b = _newton_real(f, b, xs[cells], xs[cells + 1])
            roots.extend(b.tolist())
        absv = np.abs(vals)
    else:
        absv = np.abs(evaluate(f, xs.astype(complex)))

    # minima of |f| below the grid-resolution threshold (plus grid-exact
    # hits): candidates for zeros without a strict sign change
    interior = np.arange(1, n - 1)
    is_min = (absv[interior] <= absv[interior - 1]) & (absv[interior] <= absv[interior + 1])
    cand = xs[interior[is_min & (absv[interior] < min_thresh)]]
    exact = xs[absv == 0.0]
    if exact.size:
        cand = np.unique(np.concatenate([cand, exact]))
    df = derivative(f) if cand.size else None

    def u(t):
        # sign of the derivative of f^2 / 2, for locating |f| minima
        return _real_values(f, t) * _real_values(df, t)

    for x0 in cand:
        if roots and np.min(np.abs(np.asarray(roots) - x0)) < 2 * step:
            continue
        if herm:
            ua, ub = u(np.array([x0 - step])), u(np.array([x0 + step]))
            if ua[0] * ub[0] < 0:
                lo_b, hi_b = np.array([x0 - step]), np.array([x0 + step])
                fu = ua
                for _ in range(48):
                    mid = 0.5 * (lo_b + hi_b)
                    fm = u(mid)
                    go_right = fu * fm > 0
                    lo_b = np.where(go_right, mid, lo_b)
                    fu = np.where(go_right, fm, fu)
                    hi_b = np.where(go_right, hi_b, mid)
                roots.append(float(0.5 * (lo_b + hi_b)[0]))
            else:
                roots.append(float(x0))
        else:
            z = _newton_complex(f, complex(x0))
            if abs(z.imag) <= 1e-8 * max(1.0, abs(z.real)) and lo <= z.real <= hi:
                roots.append(float(z.real))

    if not roots:
        return np.empty(0), np.empty(0, np.int64)

    # refinement noise around even-order zeros can split one root into
    # twins a few 1e-9 apart; merge below a radius well under the step
    merge_radius = max(1e-9, min(1e-7, 1e-3 * step))
    roots = np.unique(np.asarray(roots, dtype=float))
    keep = np.ones(roots.size, dtype=bool)
    last = -np.inf
    for i in range(roots.size):
        if roots[i] - last < merge_radius:
            keep[i] = False
        else:
            last = roots[i]
    roots = roots[keep]

    if boundary_tol > 0 and roots.size and (
            roots[0] - lo < boundary_tol or hi - roots[-1] < boundary_tol):
        raise BoundaryError("a zero lies within boundary_tol of the window edge; shift the window")

    # multiplicities from winding counts on boxes sized by the local gap;
    # boxes are clipped to the window only at the top level (a recursive
    # cluster window is surrounded by a known zero-free margin instead)
    gaps = np.full(roots.size, np.inf)
    if roots.size > 1:
        d = np.diff(roots)
        gaps[:-1] = np.minimum(gaps[:-1], d)
        gaps[1:] = np.minimum(gaps[1:], d)
    out_pts, out_mults = [], []
    for a, gap in zip(roots, gaps):
        hw = min(step, 0.45 * gap)
        if depth == 0:
            hw = min(hw, a - lo, hi - a)
        m = _count_with_retries(f, (a - hw, a + hw, -hw, hw))
        if m == 0:
            continue
        if m > 1:
            a = _refine_multiple(f, a, m, hw)
        if abs(evaluate(f, complex(a))) < resid_tol * max(1.0, norm):
            out_pts.append(a)
            out_mults.append(m)
        elif m >= 2 and depth < 4:
            # the box holds m zeros but no point of that order: a cluster
            # of distinct zeros tighter than the scan step
            got = _resolve_cluster(f, a - hw, a + hw, m, resid_tol, depth + 1)
            if got is not None:
                out_pts.extend(got[0].tolist())
                out_mults.extend(got[1].tolist())
    pts = np.asarray(out_pts, dtype=float)
    order = np.argsort(pts)
    return pts[order], np.asarray(out_mults, dtype=np.int64)[order]


def realness_check(
    f: ExpSum,
    window,
    strip_height: float,
    *,
    zeros: ZeroSet | None = None,
) -> RealnessReport:
    """Compare the real-zero count with the winding count over a strip.

    ``zeros`` may pass a precomputed ZeroSet for the same window to skip
    the rescan.
    """
    lo, hi = map(float, window)
    if zeros is None:
        zeros = find_real_zeros(f, (lo, hi))
    total = _count_with_retries(f, (lo, hi, -float(strip_height), float(strip_height)))
    real = zeros.count
    return RealnessReport(real_count=real, total_count=total, all_real=real == total)
