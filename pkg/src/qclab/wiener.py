"""Arithmetic in the algebra of absolutely convergent exponential sums.

An exponential sum is a finite list of terms ``q * exp(2j*pi*omega*z)``
stored as parallel arrays of frequencies (cycles per unit length) and
complex coefficients.  The Wiener norm ``sum(|q|)`` turns these sums into
a normed algebra: sums, products, Neumann inverses and exponentials stay
inside the class, which is what the zero-counting and reconstruction
modules rely on.

All operations return canonical sums: frequencies strictly increasing,
frequencies closer than ``FREQ_TOL`` merged, coefficients below
``PRUNE_TOL`` times the Wiener norm dropped.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .errors import (
    CapacityError,
    ConvergenceError,
    DivergenceError,
    InvalidInputError,
)

FREQ_TOL = 1e-9           # frequencies closer than this are one spectral point
PRUNE_TOL = 1e-14         # relative to the Wiener norm
DEFAULT_MAX_TERMS = 200_000
NEUMANN_TOL = 1e-10
_WORK_CAP = 40_000_000    # pairwise-product workspace limit (complex entries)
_EVAL_CHUNK = 4_000_000   # evaluate() workspace limit (complex entries)


def max_terms() -> int:
    """Algebra capacity; the QCLAB_MAX_TERMS environment variable overrides it."""
    raw = os.environ.get("QCLAB_MAX_TERMS")
    if raw:
        try:
            n = int(raw)
        except ValueError as exc:
            raise InvalidInputError(f"QCLAB_MAX_TERMS must be an integer, got {raw!r}") from exc
        if n < 1:
            raise InvalidInputError("QCLAB_MAX_TERMS must be positive")
        return n
    return DEFAULT_MAX_TERMS


@dataclass(frozen=True)
class ExpSum:
    """Canonical exponential sum: sorted frequencies, pruned coefficients."""

    freqs: np.ndarray
    coeffs: np.ndarray

    def __len__(self) -> int:
        return self.freqs.size

    @property
    def wiener_norm(self) -> float:
        return float(np.sum(np.abs(self.coeffs)))

    @property
    def max_abs_freq(self) -> float:
        return float(np.max(np.abs(self.freqs))) if len(self) else 0.0

    def terms(self) -> list[tuple[float, complex]]:
        return [(float(w), complex(q)) for w, q in zip(self.freqs, self.coeffs)]


def _make(freqs: np.ndarray, coeffs: np.ndarray) -> ExpSum:
    """Wrap arrays that are already canonical without re-sorting."""
    freqs = np.ascontiguousarray(freqs, dtype=float)
    coeffs = np.ascontiguousarray(coeffs, dtype=complex)
    freqs.setflags(write=False)
    coeffs.setflags(write=False)
    return ExpSum(freqs, coeffs)


def empty_sum() -> ExpSum:
    return _make(np.empty(0), np.empty(0, complex))


def _canonical_arrays(freqs, coeffs, freq_tol, prune_tol):
    if freqs.size == 0:
        return freqs.astype(float), coeffs.astype(complex)
    order = np.argsort(freqs, kind="stable")
    freqs = freqs[order]
    coeffs = coeffs[order]
    # chain-merge: consecutive gaps <= freq_tol belong to one spectral point
    new_group = np.empty(freqs.size, dtype=bool)
    new_group[0] = True
    np.greater(np.diff(freqs), freq_tol, out=new_group[1:])
    starts = np.flatnonzero(new_group)
    merged = np.add.reduceat(coeffs, starts)
    # representative frequency: the member with the largest |coefficient|,
    # ties resolved toward the lowest frequency (lexsort is stable)
    group = np.cumsum(new_group) - 1
    by_group_then_mag = np.lexsort((-np.abs(coeffs), group))
    rep_freqs = freqs[by_group_then_mag[starts]]
    norm = float(np.sum(np.abs(merged)))
    keep = np.abs(merged) > prune_tol * norm
    return rep_freqs[keep], merged[keep]


def canonicalize(terms, freq_tol: float = FREQ_TOL, prune_tol: float = PRUNE_TOL) -> ExpSum:
    """Build a canonical ExpSum from (frequency, coefficient) pairs.

    Frequencies within ``freq_tol`` of each other are merged by adding
    coefficients; coefficients smaller than ``prune_tol`` times the Wiener
    norm are dropped.  Idempotent.
    """
    if isinstance(terms, ExpSum):
        freqs, coeffs = np.asarray(terms.freqs, float), np.asarray(terms.coeffs, complex)
    else:
        pairs = list(terms)
        if not pairs:
            return empty_sum()
        freqs = np.array([p[0] for p in pairs], dtype=float)
        coeffs = np.array([p[1] for p in pairs], dtype=complex)
    if not (np.all(np.isfinite(freqs)) and np.all(np.isfinite(coeffs))):
        raise InvalidInputError("frequencies and coefficients must be finite")
    f, c = _canonical_arrays(freqs, coeffs, freq_tol, prune_tol)
    return _make(f, c)


def _canonical_from_arrays(freqs, coeffs, prune_tol=PRUNE_TOL) -> ExpSum:
    f, c = _canonical_arrays(np.asarray(freqs, float), np.asarray(coeffs, complex),
                             FREQ_TOL, prune_tol)
    return _make(f, c)


def constant(c) -> ExpSum:
    return canonicalize([(0.0, c)])


def evaluate(f: ExpSum, z):
    """Evaluate ``sum(q * exp(2j*pi*omega*z))`` at a scalar or array ``z``."""
    zarr = np.asarray(z, dtype=complex)
    scalar = zarr.ndim == 0
    zs = np.atleast_1d(zarr).ravel()
    out = np.zeros(zs.shape, dtype=complex)
    if len(f):
        chunk = max(1, _EVAL_CHUNK // len(f))
        two_pi_i = 2j * np.pi
        with np.errstate(over="ignore", invalid="ignore", under="ignore"):
            for i in range(0, zs.size, chunk):
                blk = zs[i:i + chunk]
                out[i:i + chunk] = np.exp(two_pi_i * np.outer(blk, f.freqs)) @ f.coeffs
        if not np.all(np.isfinite(out)):
            raise OverflowError("exponential sum overflowed; reduce |Im z|")
    if scalar:
        return complex(out[0])
    return out.reshape(np.atleast_1d(zarr).shape)


def add(f: ExpSum, g: ExpSum, prune_tol: float | None = None) -> ExpSum:
    pt = PRUNE_TOL if prune_tol is None else prune_tol
    return _canonical_from_arrays(
        np.concatenate([f.freqs, g.freqs]),
        np.concatenate([f.coeffs, g.coeffs]),
        prune_tol=pt,
    )


def scale(f: ExpSum, c) -> ExpSum:
    if c == 0 or len(f) == 0:
        return empty_sum()
    return _make(f.freqs, f.coeffs * complex(c))


def multiply(f: ExpSum, g: ExpSum, prune_tol: float | None = None) -> ExpSum:
    """Product in the algebra: all pairwise frequency sums, then canonicalize.

    The Wiener norm is submultiplicative, so the result's norm never
    exceeds the product of the inputs' norms.
    """
    pt = PRUNE_TOL if prune_tol is None else prune_tol
    n, m = len(f), len(g)
    if n == 0 or m == 0:
        return empty_sum()
    if n * m > _WORK_CAP:
        raise CapacityError(
            f"product would create {n * m} raw terms (workspace cap {_WORK_CAP}); "
            "raise prune_tol on the factors"
        )
    freqs = (f.freqs[:, None] + g.freqs[None, :]).ravel()
    coeffs = (f.coeffs[:, None] * g.coeffs[None, :]).ravel()
    out = _canonical_from_arrays(freqs, coeffs, prune_tol=pt)
    if len(out) > max_terms():
        raise CapacityError(
            f"product has {len(out)} terms, above the capacity {max_terms()}; "
            "raise prune_tol or QCLAB_MAX_TERMS"
        )
    return out


def derivative(f: ExpSum) -> ExpSum:
    """Term-wise derivative ``q -> 2j*pi*omega*q``."""
    if len(f) == 0:
        return empty_sum()
    return _canonical_from_arrays(f.freqs, f.coeffs * (2j * np.pi * f.freqs))


def at_height(f: ExpSum, s: float) -> ExpSum:
    """The sum representing ``x -> f(x + 1j*s)``: ``q -> q * exp(-2*pi*omega*s)``.

    Exact term map, no pruning, so heights compose exactly.
    """
    if len(f) == 0:
        return empty_sum()
    with np.errstate(over="ignore", under="ignore"):
        coeffs = f.coeffs * np.exp(-2.0 * np.pi * f.freqs * float(s))
    if not np.all(np.isfinite(coeffs)):
        raise OverflowError("at_height overflowed; height times frequency too large")
    return _make(f.freqs, coeffs)


def is_hermitian(f: ExpSum, tol: float = 1e-12) -> bool:
    """True if terms pair omega <-> -omega with conjugate coefficients."""
    if len(f) == 0:
        return True
    if np.max(np.abs(f.freqs + f.freqs[::-1])) > FREQ_TOL:
        return False
    defect = np.max(np.abs(f.coeffs - np.conj(f.coeffs[::-1])))
    return bool(defect <= tol * max(1.0, f.wiener_norm))


def choose_height(f: ExpSum) -> tuple[float, int]:
    """Height selection for the Neumann inverse.

    Sorts terms by frequency, picks the smallest M with
    ``sum_{n>M} |q_n/q_1| < 1/3``, then the smallest height making
    ``exp(-2*pi*(w2-w1)*s) * sum_{n>=2} |q_n/q_1| < 1/3``.
    Together these force ``||H||_W < 2/3``.
    """
    if len(f) == 0:
        raise InvalidInputError("cannot choose a height for the empty sum")
    if len(f) == 1:
        return 0.0, 1
    q1 = abs(f.coeffs[0])
    ratios = np.abs(f.coeffs[1:]) / q1
    tail = np.cumsum(ratios[::-1])[::-1]  # tail[k] = sum of ratios from k on
    # smallest M (1-based index into the term list) with the high tail < 1/3
    m_idx = int(np.argmax(tail < 1.0 / 3.0)) if np.any(tail < 1.0 / 3.0) else ratios.size
    M = m_idx + 1  # tail beyond term M is tail[m_idx]
    R = float(np.sum(ratios))
    if R < 1.0 / 3.0:
        return 0.0, M
    delta = float(f.freqs[1] - f.freqs[0])
    s = math.log(3.0 * R) / (2.0 * math.pi * delta)
    return s * (1.0 + 1e-9) + 1e-12, M


def neumann_inverse(
    f: ExpSum,
    s: float | str = "auto",
    *,
    neumann_tol: float = NEUMANN_TOL,
    prune_tol: float | None = None,
    keep_freqs_up_to: float | None = None,
    max_iter: int = 500,
) -> ExpSum:
    """Inverse of ``x -> f(x + 1j*s)`` as an exponential sum in x.

    Writes ``f(x+1j*s) = q1 * exp(2j*pi*w1*x) * e1 * (1 + H(x))`` with
    ``w1 = inf`` of the spectrum and expands ``(1+H)^{-1}`` as the Neumann
    series ``sum (-H)^j``, truncated when ``||H^j||_W < neumann_tol * (1-||H||_W)``.

    ``keep_freqs_up_to`` forces the recursion deep enough that every
    term of the inverse with frequency (relative to -w1) below the given
    bound is fully resolved, regardless of its size; the diffraction
    extraction needs this because small high-frequency coefficients get
    rescaled by large exponentials afterwards.
    """
    if len(f) == 0:
        raise InvalidInputError("cannot invert the empty sum")
    if s == "auto":
        s, _ = choose_height(f)
    s = float(s)
    fs = at_height(f, s)
    w1 = float(fs.freqs[0])
    q1 = complex(fs.coeffs[0])
    if len(fs) == 1:
        return canonicalize([(-w1, 1.0 / q1)])
    H = _make(fs.freqs[1:] - w1, fs.coeffs[1:] / q1)
    hnorm = H.wiener_norm
    if hnorm >= 1.0:
        raise DivergenceError(
            f"||H||_W = {hnorm:.6g} >= 1 at height s = {s:.6g}; use a larger height"
        )
    delta = float(H.freqs[0])
    cap = max_iter
    if keep_freqs_up_to is not None:
        need = int(math.ceil(keep_freqs_up_to / delta)) + 1
        if need > 5000:
            raise ConvergenceError(
                "spectral gap too small to resolve the requested frequency range"
            )
        cap = max(cap, need + 10)
    slack = neumann_tol * (1.0 - hnorm)
    series = constant(1.0)
    power = constant(1.0)
    j = 0
    while True:
        j += 1
        if j > cap:
            raise ConvergenceError(f"Neumann series not converged after {cap} terms")
        power = scale(multiply(power, H, prune_tol=prune_tol), -1.0)
        series = add(series, power, prune_tol=prune_tol)
        if len(power) == 0:
            break
        deep_done = keep_freqs_up_to is None or (j + 1) * delta > keep_freqs_up_to
        if power.wiener_norm < slack and deep_done:
            break
    shift = canonicalize([(-w1, 1.0 / q1)])
    return multiply(series, shift, prune_tol=prune_tol)


def exp_series(
    g: ExpSum,
    *,
    tol: float = 1e-13,
    prune_tol: float | None = None,
    keep_freqs_up_to: float | None = None,
    max_iter: int = 400,
) -> ExpSum:
    """Exponential via the power series ``sum g^k / k!`` in the algebra.

    The tail after the k-th term is bounded by
    ``||g^k/k!|| * r / (1-r)`` with ``r = ||g||/(k+1)``, which is the
    stopping rule; the result's norm never exceeds ``exp(||g||_W)``.

    When ``keep_freqs_up_to`` is set (requires strictly positive
    frequencies in g) the series runs deep enough that every coefficient
    at a frequency below the bound receives all of its power-series
    contributions, however small; callers that rescale coefficients by
    growing exponentials need the cancellations below the bound to be
    complete.
    """
    gn = g.wiener_norm
    cap = max_iter
    gmin = None
    if keep_freqs_up_to is not None and len(g):
        gmin = float(g.freqs[0])
        if gmin <= 0:
            raise InvalidInputError(
                "keep_freqs_up_to needs strictly positive frequencies"
            )
        need = int(math.ceil(keep_freqs_up_to / gmin)) + 1
        if need > 5000:
            raise CapacityError(
                "smallest frequency too small to resolve the requested range"
            )
        cap = max(cap, need + 10)
    series = constant(1.0)
    power = constant(1.0)
    k = 0
    while True:
        k += 1
        if k > cap:
            raise CapacityError(f"exp series not converged after {cap} terms")
        power = scale(multiply(power, g, prune_tol=prune_tol), 1.0 / k)
        series = add(series, power, prune_tol=prune_tol)
        if len(power) == 0:
            break
        deep_done = gmin is None or (k + 1) * gmin > keep_freqs_up_to
        r = gn / (k + 1.0)
        if deep_done and r < 1.0 and power.wiener_norm * r / (1.0 - r) < tol:
            break
    return series
