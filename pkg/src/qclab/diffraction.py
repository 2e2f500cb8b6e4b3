"""Pure point diffraction of a zero counting measure, by two routes.

Route one averages exp(-2j*pi*gamma*a_n) over the window (Bohr means).
Route two computes f'/f at a height s in the exponential-sum algebra and
reads the atom masses off its coefficients: with
``f'/f (x+1j*s) = sum p_gamma exp(2j*pi*gamma*x)`` the mass at zero is
``d = 1j*p_0/pi`` and ``b_gamma = 1j*p_gamma*exp(2*pi*gamma*s)/(2*pi)``
for gamma > 0, negative atoms following by conjugate symmetry.

The two routes are independent, which is what the cross-validation
tests lean on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .apset import unit_window_max
from .errors import DomainError, InsufficientDataError, InvalidInputError
from .wiener import (
    ExpSum,
    NEUMANN_TOL,
    at_height,
    choose_height,
    derivative,
    multiply,
    neumann_inverse,
)
from .zeros import ZeroSet, realness_check

_GAMMA_TOL = 1e-9


@dataclass(frozen=True)
class PointMeasure:
    """Finite pure point measure: mass d at zero plus atoms (gamma, b)."""

    d: float
    gammas: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        g = np.ascontiguousarray(self.gammas, dtype=float)
        b = np.ascontiguousarray(self.masses, dtype=complex)
        order = np.argsort(g)
        object.__setattr__(self, "gammas", g[order])
        object.__setattr__(self, "masses", b[order])

    def __len__(self) -> int:
        return self.gammas.size

    def atoms(self) -> list[tuple[float, complex]]:
        return [(float(g), complex(b)) for g, b in zip(self.gammas, self.masses)]

    def positive(self) -> tuple[np.ndarray, np.ndarray]:
        mask = self.gammas > _GAMMA_TOL
        return self.gammas[mask], self.masses[mask]

    def mass_at(self, gamma: float, tol: float = _GAMMA_TOL) -> complex:
        if abs(gamma) <= tol:
            return complex(self.d)
        i = np.searchsorted(self.gammas, gamma)
        for j in (i - 1, i):
            if 0 <= j < len(self) and abs(self.gammas[j] - gamma) <= tol:
                return complex(self.masses[j])
        return 0j

    def conjugate_defect(self) -> float:
        """max |b(-gamma) - conj(b(gamma))| over the positive atoms."""
        g, b = self.positive()
        if g.size == 0:
            return 0.0
        return float(max(abs(self.mass_at(-gg) - np.conj(bb)) for gg, bb in zip(g, b)))

    def drop_atom(self, gamma: float) -> "PointMeasure":
        keep = np.abs(self.gammas - gamma) > _GAMMA_TOL
        return PointMeasure(self.d, self.gammas[keep], self.masses[keep])


@dataclass(frozen=True)
class GrowthProfile:
    m_of_s: list[tuple[float, float]]
    t3_value: float
    kappa_fit: float


@dataclass(frozen=True)
class GaussianSpec:
    """Test Gaussian g(x) = exp(-pi*x^2/sigma^2); its transform is
    sigma*exp(-pi*sigma^2*t^2) under the phi_hat(t) = int phi e^{-2pi i xt}
    convention."""

    sigma: float = 1.0


@dataclass(frozen=True)
class PoissonReport:
    residual: float
    zero_side: float
    atom_side: complex
    zero_tail: float
    atom_tail: float


def bohr_coefficient(A: ZeroSet, gamma: float, T: float) -> complex:
    """Bohr mean (1/2T) * sum_{|a_n|<T} mult * exp(-2j*pi*gamma*a_n).

    The finite-T error heuristic for these means is
    ``bohr_error_heuristic(A, T)``.
    """
    lo, hi = A.window
    if T <= 0:
        raise DomainError("T must be positive")
    if -T < lo or T > hi:
        raise DomainError(f"T = {T} exceeds the window {A.window}")
    e = A.expand()
    sel = e[np.abs(e) < T]
    return complex(np.sum(np.exp(-2j * np.pi * gamma * sel)) / (2.0 * T))


def bohr_error_heuristic(A: ZeroSet, T: float) -> float:
    """O(k1/T) edge-effect estimate for a Bohr mean at half-length T."""
    return unit_window_max(A.expand()) / float(T)


def _bohr_many(e: np.ndarray, gammas: np.ndarray, T: float) -> np.ndarray:
    sel = e[np.abs(e) < T]
    if sel.size == 0:
        return np.zeros(gammas.size, complex)
    out = np.empty(gammas.size, complex)
    chunk = max(1, 4_000_000 // max(sel.size, 1))
    for i in range(0, gammas.size, chunk):
        out[i:i + chunk] = np.exp(-2j * np.pi * np.outer(gammas[i:i + chunk], sel)).sum(axis=1)
    return out / (2.0 * T)


def bohr_scan(A: ZeroSet, grid, T: float, threshold: float) -> PointMeasure:
    """Bohr means on a frequency grid, kept where large and stable.

    An atom survives when |estimate at T| exceeds the threshold and the
    drift against the half-window estimate stays below threshold/4; the
    mass at zero becomes d.
    """
    lo, hi = A.window
    if -T < lo or T > hi:
        raise DomainError(f"T = {T} exceeds the window {A.window}")
    e = A.expand()
    err = bohr_error_heuristic(A, T)
    if threshold <= 2.0 * err:
        raise InvalidInputError(
            f"threshold {threshold} must exceed twice the error heuristic {err:.3g}"
        )
    gammas = np.unique(np.asarray(list(grid), dtype=float))
    est_full = _bohr_many(e, gammas, T)
    est_half = _bohr_many(e, gammas, T / 2.0)
    stable = (np.abs(est_full) > threshold) & (np.abs(est_full - est_half) < threshold / 4.0)
    nonzero = np.abs(gammas) > _GAMMA_TOL
    keep = stable & nonzero
    d = float(np.real(_bohr_many(e, np.array([0.0]), T)[0]))
    return PointMeasure(d=d, gammas=gammas[keep], masses=est_full[keep])


def logderiv_measure(
    f: ExpSum,
    s: float | str = "auto",
    cutoff: float = 10.0,
    *,
    atom_tol: float = 1e-9,
    neumann_tol: float = NEUMANN_TOL,
    realness_window=None,
) -> PointMeasure:
    """Diffraction atoms from the coefficients of f'/f at height s.

    The Neumann recursion is run pruning-free and deep enough to resolve
    every product frequency below the cutoff, because coefficients at
    frequency gamma get rescaled by exp(2*pi*gamma*s) afterwards and
    may not be dropped however small they look at height s.
    """
    if len(f) < 2:
        raise DomainError(
            "a constant or single exponential has no zeros; the log-derivative "
            "expansion does not apply"
        )
    if cutoff <= 0:
        raise DomainError("cutoff must be positive")
    if realness_window is not None:
        report = realness_check(f, realness_window, strip_height=0.5)
        if not report.all_real:
            raise DomainError(
                f"zero set is not real over {tuple(realness_window)}: "
                f"{report.real_count} real of {report.total_count} total"
            )
    if s == "auto":
        s, _ = choose_height(f)
    s = float(s)
    inv = neumann_inverse(f, s, neumann_tol=neumann_tol, prune_tol=0.0,
                          keep_freqs_up_to=cutoff)
    dfs = at_height(derivative(f), s)
    ld = multiply(dfs, inv, prune_tol=0.0)

    i0 = np.flatnonzero(np.abs(ld.freqs) <= _GAMMA_TOL)
    p0 = complex(ld.coeffs[i0[0]]) if i0.size else 0j
    d_complex = 1j * p0 / math.pi
    d = float(d_complex.real)
    sel = (ld.freqs > _GAMMA_TOL) & (ld.freqs < cutoff)
    g = ld.freqs[sel]
    b = 1j * ld.coeffs[sel] * np.exp(2.0 * math.pi * g * s) / (2.0 * math.pi)
    keep = np.abs(b) > atom_tol
    g, b = g[keep], b[keep]
    gammas = np.concatenate([-g[::-1], g])
    masses = np.concatenate([np.conj(b[::-1]), b])
    return PointMeasure(d=d, gammas=gammas, masses=masses)


def _gaussian_comb_tail(x0: float, alpha: float) -> float:
    # bound for sum_{m>=0} exp(-alpha*(x0+m)^2), alpha*x0 not tiny
    if x0 <= 0:
        x0 = 0.0
    ratio = math.exp(-alpha * (2.0 * x0 + 1.0))
    lead = math.exp(-alpha * x0 * x0)
    if ratio >= 1.0:
        return math.inf
    return lead / (1.0 - ratio)


def poisson_residual(
    A: ZeroSet,
    mu_hat: PointMeasure,
    test: GaussianSpec,
    *,
    T: float | None = None,
    tail_tol: float = 1e-8,
) -> PoissonReport:
    """Residual of the summation identity
    sum mult * g_hat(a_n) = d * g(0) + sum b_gamma * g(gamma)
    for the Gaussian test function, with certified window tails.
    """
    sigma = float(test.sigma)
    if sigma <= 0:
        raise InvalidInputError("sigma must be positive")
    lo, hi = A.window
    half = min(-lo, hi)
    T = half if T is None else min(float(T), half)
    e = A.expand()
    sel = e[np.abs(e) <= T]

    alpha_hat = math.pi * sigma * sigma
    zero_side = float(sigma * np.sum(np.exp(-alpha_hat * sel ** 2)))
    k1 = max(unit_window_max(e), 1)
    zero_tail = 2.0 * k1 * sigma * _gaussian_comb_tail(T, alpha_hat)

    alpha = math.pi / (sigma * sigma)
    atom_side = complex(mu_hat.d)
    if len(mu_hat):
        atom_side += complex(np.sum(mu_hat.masses * np.exp(-alpha * mu_hat.gammas ** 2)))
        gmax = float(np.max(np.abs(mu_hat.gammas)))
        rho = (float(np.sum(np.abs(mu_hat.masses))) + mu_hat.d) / max(gmax, 1.0)
    else:
        gmax = 0.0
        rho = max(mu_hat.d, 1.0)
    atom_tail = 2.0 * rho * _gaussian_comb_tail(gmax, alpha)

    if max(zero_tail, atom_tail) > tail_tol:
        need = math.sqrt(max(math.log(max(2 * k1 * sigma, 2 * rho) / tail_tol), 1.0)
                         / min(alpha_hat, alpha))
        raise InsufficientDataError(
            f"truncation tails exceed {tail_tol:.1g}; extend the window and the "
            f"atom list past {need:.1f}",
            required_window=need,
        )
    residual = abs(zero_side - atom_side)
    return PoissonReport(residual=float(residual), zero_side=zero_side,
                         atom_side=atom_side, zero_tail=zero_tail, atom_tail=atom_tail)


def growth_profile(mu_hat: PointMeasure, s_grid) -> GrowthProfile:
    """Cumulative mass m(s) over 0 < gamma <= s, the sum |b|/gamma below 1,
    and a log-log slope over the top decade of the grid."""
    g, b = mu_hat.positive()
    mass = np.abs(b)
    table = []
    for s in sorted(float(x) for x in s_grid):
        table.append((s, float(np.sum(mass[g <= s]))))
    below_one = g < 1.0
    t3 = float(np.sum(mass[below_one] / g[below_one])) if np.any(below_one) else 0.0
    ss = np.array([s for s, _ in table])
    ms = np.array([m for _, m in table])
    top = (ss >= ss[-1] / 10.0) & (ms > 0) if ss.size else np.zeros(0, bool)
    if int(np.sum(top)) >= 2 and np.ptp(np.log(ss[top])) > 0:
        kappa = float(np.polyfit(np.log(ss[top]), np.log(ms[top]), 1)[0])
    else:
        kappa = 0.0
    return GrowthProfile(m_of_s=table, t3_value=t3, kappa_fit=kappa)
