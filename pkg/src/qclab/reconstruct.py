"""The inverse direction: canonical products from zeros, Dirichlet-series
reconstruction from the diffraction measure, and the bounded-g criterion.

Reconstruction path: the atoms define the log of the target at height 1,
``log f(x+1j) + 1j*d*pi*x = -sum (b/gamma) exp(-2*pi*gamma) e^{2pi i gamma x}``
up to a constant; exponentiating in the algebra and mapping
``omega -> omega - d/2``, ``p -> p*exp(2*pi*omega - d*pi)`` lands back on
the real axis.  The unknown constant is fixed by normalizing f(0) = 1,
which the canonical product forces anyway.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .diffraction import PointMeasure
from .errors import DomainError
from .wiener import ExpSum, canonicalize, evaluate, exp_series, scale
from .zeros import ZeroSet

VERDICT_BOUNDED = "bounded"
VERDICT_GROWING = "growing"
VERDICT_INCONCLUSIVE = "inconclusive"
_SLOPE_BOUNDED = 0.02
_SLOPE_GROWING = 0.1


@dataclass(frozen=True)
class ProductValue:
    """Canonical product value with its truncation estimate.

    ``hit_multiplicity`` is nonzero when z landed on a zero of the set;
    ``shift`` records the translation applied when 0 was in the set.
    """

    value: complex
    error_bound: float
    hit_multiplicity: int = 0
    shift: float = 0.0


@dataclass(frozen=True)
class GReport:
    windows: list[tuple[float, float]]  # (half-width X, sup |g| over [-X, X])
    slope_fit: float
    bounded_verdict: str


def _translated_points(A: ZeroSet):
    e = A.expand()
    if e.size == 0:
        raise DomainError("empty zero set")
    near = np.abs(e) < 1e-12
    if not near.any():
        return e, 0.0
    gaps = np.diff(np.unique(e))
    delta = 0.5 * float(np.min(gaps)) if gaps.size else 0.5
    return e - delta, delta


def _pairing(e: np.ndarray):
    # symmetric core around the smallest nonnegative point; points beyond
    # the shorter side stay unpaired and are dropped (a stray factor
    # 1 - z/a would bias the symmetric limit by O(z/a))
    i0 = int(np.searchsorted(e, 0.0, side="left"))
    i0 = min(i0, e.size - 1)
    n_pairs = min(i0, e.size - 1 - i0)
    a0 = e[i0]
    right = e[i0 + 1:i0 + 1 + n_pairs]
    left = e[i0 - n_pairs:i0][::-1]
    dropped = e.size - 1 - 2 * n_pairs
    return a0, right, left, dropped, n_pairs


def _tail_s(n: int) -> float:
    # sum_{k>n} 1/k^2 by Euler-Maclaurin
    if n < 1:
        return 2.0
    return 1.0 / n - 1.0 / (2.0 * n * n) + 1.0 / (6.0 * n ** 3)


def _product_log(e: np.ndarray, z: complex):
    """(log of the paired canonical product, tail corrections, bound)."""
    a0, right, left, dropped, n_pairs = _pairing(e)
    if dropped > max(16, 0.05 * e.size):
        warnings.warn(
            f"{dropped} unpaired points beyond the symmetric core were dropped; "
            "the window is strongly one-sided"
        )
    terms = [complex(np.log(1.0 - z / a0))] if a0 != 0 else [0j]
    if n_pairs:
        pair_vals = (1.0 - z / right) * (1.0 - z / left)
        logs = np.log(pair_vals.astype(complex))
        terms.extend(logs.tolist())
    total = complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))

    # tail of the pairing beyond the window, extrapolated from the last
    # in-window decade: sum(1/a_n + 1/a_-n) ~ cbar * S, sum 1/(a_n a_-n) ~ t2bar * S
    correction = 0j
    bound = 0.0
    if n_pairs >= 20:
        nn = np.arange(1, n_pairs + 1, dtype=float)
        lo_idx = max(int(0.8 * n_pairs), 10)
        seg = slice(lo_idx, n_pairs)
        csum = 1.0 / right + 1.0 / left
        cbar = float(np.mean(csum[seg] * nn[seg] ** 2))
        t2bar = float(np.mean((nn[seg] ** 2) / (right[seg] * left[seg])))
        S = _tail_s(n_pairs)
        correction = (-z * cbar + z * z * t2bar) * S
        d_rough = 2.0 * n_pairs / (right[-1] - left[-1])
        sup_phi = float(max(np.max(np.abs(right - nn / d_rough)),
                            np.max(np.abs(left + nn / d_rough))))
        C = d_rough ** 2 * (2.0 * abs(z) * sup_phi + abs(z) ** 2) * 1.5
        bound = abs(np.exp(total + correction)) * math.expm1(min(C * S, 50.0))
    return total, correction, bound


def canonical_product(A: ZeroSet, z: complex) -> ProductValue:
    """Hadamard-style product over the windowed zero set, symmetric
    pairing, normalized to 1 at the origin.

    Values are assembled in the log domain with compensated summation,
    tail-corrected by extrapolating the pairing sums past the window.
    """
    e, shift = _translated_points(A)
    z = complex(z)
    dist = np.abs(e - z.real) + abs(z.imag)
    hit = int(np.argmin(dist))
    if dist[hit] < 1e-12 * max(1.0, abs(e[hit])):
        mult = int(np.sum(np.abs(e - e[hit]) < 1e-12))
        _, _, bound = _product_log(e, z + 1e-6)
        return ProductValue(value=0j, error_bound=bound, hit_multiplicity=mult, shift=shift)
    total, correction, bound = _product_log(e, z)
    if z == 0:
        return ProductValue(value=1.0 + 0j, error_bound=0.0, shift=shift)
    return ProductValue(value=complex(np.exp(total + correction)),
                        error_bound=bound, shift=shift)


def log_series_at_height_one(
    mu_hat: PointMeasure,
    d: float,
    *,
    t3_budget: float = math.inf,
) -> ExpSum:
    """Exponential sum with coefficient -(b/gamma)*exp(-2*pi*gamma) at each
    positive atom frequency; represents log f(x+1j) + 1j*d*pi*x up to a
    constant."""
    if d <= 0:
        raise DomainError("density must be positive")
    g, b = mu_hat.positive()
    if g.size == 0:
        return canonicalize([])
    ratios = np.abs(b) / g
    below_one = g < 1.0
    t3 = float(np.sum(ratios[below_one])) if below_one.any() else 0.0
    if np.any(ratios > 100.0):
        gg = float(g[int(np.argmax(ratios))])
        warnings.warn(
            f"atom at gamma = {gg:.3g} contributes |b|/gamma = {np.max(ratios):.3g} "
            "to the low-frequency mass budget"
        )
    if t3 > t3_budget:
        raise DomainError(
            f"low-frequency mass sum |b|/gamma = {t3:.3g} exceeds the budget {t3_budget:.3g}"
        )
    coeffs = -(b / g) * np.exp(-2.0 * math.pi * g)
    return canonicalize(list(zip(g.tolist(), coeffs.tolist())))


def rebuild_dirichlet(
    mu_hat: PointMeasure,
    d: float | None = None,
    *,
    t3_budget: float = math.inf,
) -> ExpSum:
    """Dirichlet series with the measure's zero set, normalized to 1 at 0.

    The exponential of the log series is taken pruning-free: structural
    cancellations between power-series terms must not be disturbed, since
    frequency-omega coefficients are rescaled by exp(2*pi*omega)
    afterwards.
    """
    if d is None:
        d = mu_hat.d
    L = log_series_at_height_one(mu_hat, d, t3_budget=t3_budget)
    if len(L) == 0:
        warnings.warn("no positive atoms: reconstruction degenerates to a single exponential")
        F = exp_series(L)
        gmax = 0.0
    else:
        gmax = float(L.freqs[-1])
        F = exp_series(L, prune_tol=0.0, keep_freqs_up_to=gmax)
    # frequencies above the largest atom depend on atoms the measure does
    # not carry; their power-series cancellations cannot complete, and the
    # exponential rescale below would blow the leftovers up
    keep = F.freqs <= gmax + 1e-9
    freqs = F.freqs[keep] - d / 2.0
    with np.errstate(over="ignore"):
        coeffs = F.coeffs[keep] * np.exp(2.0 * math.pi * F.freqs[keep] - d * math.pi)
    if not np.all(np.isfinite(coeffs)):
        raise OverflowError("reconstruction overflowed; lower the atom cutoff")
    g = canonicalize(list(zip(freqs.tolist(), coeffs.tolist())))
    v0 = evaluate(g, 0.0)
    if v0 == 0:
        raise DomainError("reconstructed sum vanishes at 0; cannot normalize")
    return scale(g, 1.0 / v0)


def g_function(mu_hat: PointMeasure, z: complex) -> complex:
    """g(z) = sum over atoms with 0 < gamma < 1 of b*(exp(2j*pi*gamma*z)-1)/gamma."""
    g, b = mu_hat.positive()
    sel = g < 1.0
    g, b = g[sel], b[sel]
    if g.size == 0:
        return 0j
    z = complex(z)
    return complex(np.sum(b * (np.exp(2j * np.pi * g * z) - 1.0) / g))


def _sup_abs_g(mu_hat: PointMeasure, X: float, samples_per_unit: float = 64.0) -> float:
    g, b = mu_hat.positive()
    sel = g < 1.0
    g, b = g[sel], b[sel]
    if g.size == 0:
        return 0.0

    def many(xs):
        return np.abs(np.exp(2j * np.pi * np.outer(xs, g)) @ (b / g) - np.sum(b / g))

    n = max(512, int(2 * X * samples_per_unit) + 1)
    xs = np.linspace(-X, X, n)
    vals = many(xs)
    best = int(np.argmax(vals))
    lo = xs[max(best - 1, 0)]
    hi = xs[min(best + 1, n - 1)]
    for _ in range(4):
        xs = np.linspace(lo, hi, 65)
        vals = many(xs)
        best = int(np.argmax(vals))
        lo = xs[max(best - 1, 0)]
        hi = xs[min(best + 1, 64)]
    return float(np.max(vals))


def g_boundedness(mu_hat: PointMeasure, X_grid) -> GReport:
    """sup |g| over nested real windows with a log-log growth fit.

    Verdict margins: bounded below slope 0.02, growing above 0.1; a
    finite sample can only sample the dichotomy, hence the inconclusive
    band between.
    """
    Xs = sorted(float(x) for x in X_grid)
    sups = []
    running = 0.0
    for X in Xs:
        running = max(running, _sup_abs_g(mu_hat, X))
        sups.append(running)
    windows = list(zip(Xs, sups))
    scale_mass = max(sups) if sups else 0.0
    if scale_mass < 1e-12:
        return GReport(windows=windows, slope_fit=0.0, bounded_verdict=VERDICT_BOUNDED)
    xs = np.log(np.asarray(Xs))
    ys = np.log(np.maximum(np.asarray(sups), 1e-300))
    slope = float(np.polyfit(xs, ys, 1)[0]) if len(Xs) >= 2 else 0.0
    if slope < _SLOPE_BOUNDED:
        verdict = VERDICT_BOUNDED
    elif slope > _SLOPE_GROWING:
        verdict = VERDICT_GROWING
    else:
        verdict = VERDICT_INCONCLUSIVE
    return GReport(windows=windows, slope_fit=slope, bounded_verdict=verdict)


def _logabs_expsum(f: ExpSum, y: float) -> float:
    # log |f(1j*y)| via log-sum-exp over the term magnitudes
    a = np.log(np.abs(f.coeffs)) - 2.0 * np.pi * f.freqs * y
    amax = float(np.max(a))
    phases = f.coeffs / np.abs(f.coeffs)
    r = complex(np.sum(phases * np.exp(a - amax)))
    return amax + math.log(abs(r))


def _logabs_zeroset(A: ZeroSet, y: float) -> float:
    e, _ = _translated_points(A)
    return 0.5 * float(np.sum(np.log1p((y / e) ** 2)))


def exponential_type(obj, y_grid) -> float:
    """Estimate of lim y^{-1} log |f(1j*y)| from the top of the grid.

    Uses the difference quotient of the two largest heights when
    available (the constant term cancels), otherwise the plain ratio;
    evaluation is log-domain throughout, so large heights cannot
    overflow.
    """
    ys = sorted(float(y) for y in y_grid)
    if not ys:
        raise DomainError("y_grid must be nonempty")
    if isinstance(obj, ExpSum):
        logs = [_logabs_expsum(obj, y) for y in ys]
    elif isinstance(obj, ZeroSet):
        logs = [_logabs_zeroset(obj, y) for y in ys]
    else:
        raise DomainError("exponential_type expects an ExpSum or a ZeroSet")
    if len(ys) >= 2:
        return (logs[-1] - logs[-2]) / (ys[-1] - ys[-2])
    return logs[-1] / ys[-1]
