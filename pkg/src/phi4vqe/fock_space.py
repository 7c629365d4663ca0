"""Truncated-Fock operator algebra and the exact-diagonalization oracle.

Each momentum mode keeps its lowest n_max oscillator levels. Ladder operators
are truncated first; every composite operator (phi^2, phi^4, ...) is then a
product of truncated matrices, so the full Hamiltonian acts on the
n_max^L-dimensional product space with mode 0 as the slowest tensor index.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .lattice_model import ModelParams, momentum_grid

__all__ = [
    "Spectrum",
    "CriticalFit",
    "ladder_ops",
    "number_op",
    "quadrature",
    "embed",
    "build_H0",
    "build_field",
    "build_HI",
    "build_H",
    "exact_spectrum",
    "mass_gap",
    "solve_counterterm",
    "critical_curve",
    "critical_exponent_fit",
]

# Eigenvalue splittings below this are reported as a vanishing (degenerate) gap.
DEGENERACY_TOL = 1e-12


@dataclass(frozen=True)
class Spectrum:
    """Ascending eigenvalues and the mass gap E1 - E0."""

    eigenvalues: np.ndarray
    gap: float
    degenerate: bool = False


@dataclass(frozen=True)
class CriticalFit:
    """Power-law fit gap = A |lambda - lambda_c|^nu over a near-critical window.

    ``slopes`` holds the finite-difference series d(gap)/d(lambda) between
    consecutive window points, ascending in lambda.
    """

    lambda_c: float
    nu: float
    amplitude: float
    residual: float
    window: tuple[float, float]
    slopes: tuple[float, ...]


def ladder_ops(n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Truncated annihilation and creation matrices (a, a_dag).

    a_dag[i+1, i] = sqrt(i+1); the truncated commutator [a, a_dag] equals the
    identity on occupancies up to n_max - 2.
    """
    if n_max < 2:
        raise ValueError(f"n_max must be at least 2, got {n_max}")
    a_dag = np.zeros((n_max, n_max), dtype=complex)
    for i in range(n_max - 1):
        a_dag[i + 1, i] = math.sqrt(i + 1.0)
    return a_dag.conj().T, a_dag


def number_op(n_max: int) -> np.ndarray:
    return np.diag(np.arange(n_max, dtype=float)).astype(complex)


def quadrature(n_max: int) -> np.ndarray:
    """q = (a + a_dag) / sqrt(2), the dimensionless mode coordinate."""
    a, a_dag = ladder_ops(n_max)
    return (a + a_dag) / math.sqrt(2.0)


def embed(mode_op: np.ndarray, mode_index: int, params: ModelParams) -> np.ndarray:
    """Tensor mode_op into the L-mode product space, identities elsewhere."""
    if not 0 <= mode_index < params.L:
        raise ValueError(f"mode_index {mode_index} out of range for L={params.L}")
    eye = np.eye(params.n_max, dtype=complex)
    out = np.ones((1, 1), dtype=complex)
    for j in range(params.L):
        out = np.kron(out, mode_op if j == mode_index else eye)
    return out


def build_H0(params: ModelParams) -> np.ndarray:
    """Free Hamiltonian sum_k omega(k) n(k), diagonal, zero-point energy discarded."""
    grid = momentum_grid(params)
    n = number_op(params.n_max)
    dim = params.n_max**params.L
    H0 = np.zeros((dim, dim), dtype=complex)
    for j in range(params.L):
        H0 += grid.frequencies[j] * embed(n, j, params)
    return H0


def build_field(x: int, params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Field and conjugate momentum at site x from the mode expansion.

    phi(x) = L^{-1/2} sum_k (2 omega_k)^{-1/2} (a_dag(k) e^{-ikx} + a(k) e^{ikx})
    pi(x)  = i L^{-1/2} sum_k (omega_k / 2)^{1/2} (a_dag(k) e^{-ikx} - a(k) e^{ikx})
    """
    if not 0 <= x < params.L:
        raise ValueError(f"site {x} out of range for L={params.L}")
    grid = momentum_grid(params)
    a, a_dag = ladder_ops(params.n_max)
    dim = params.n_max**params.L
    phi = np.zeros((dim, dim), dtype=complex)
    pi = np.zeros((dim, dim), dtype=complex)
    for j in range(params.L):
        w = grid.frequencies[j]
        phase = np.exp(1j * grid.momenta[j] * x)
        A = embed(a, j, params)
        A_dag = embed(a_dag, j, params)
        phi += (A_dag * phase.conjugate() + A * phase) / math.sqrt(2.0 * w)
        pi += 1j * math.sqrt(w / 2.0) * (A_dag * phase.conjugate() - A * phase)
    norm = 1.0 / math.sqrt(params.L)
    return phi * norm, pi * norm


def build_HI(params: ModelParams) -> np.ndarray:
    """Interaction sum_x [ (delta_m / 2) phi(x)^2 + (lambda / 4!) phi(x)^4 ]."""
    dim = params.n_max**params.L
    HI = np.zeros((dim, dim), dtype=complex)
    for x in range(params.L):
        phi, _ = build_field(x, params)
        phi2 = phi @ phi
        HI += (params.delta_m / 2.0) * phi2 + (params.lam / 24.0) * (phi2 @ phi2)
    return HI


def build_H(params: ModelParams) -> np.ndarray:
    return build_H0(params) + build_HI(params)


def exact_spectrum(H: np.ndarray) -> Spectrum:
    """All eigenvalues of a Hermitian operator, ascending, with the gap."""
    if np.max(np.abs(H - H.conj().T)) > 1e-10:
        raise ValueError("exact_spectrum requires a Hermitian matrix")
    eigenvalues = np.linalg.eigvalsh(H)
    gap = float(eigenvalues[1] - eigenvalues[0])
    if gap < DEGENERACY_TOL:
        return Spectrum(eigenvalues=eigenvalues, gap=0.0, degenerate=True)
    return Spectrum(eigenvalues=eigenvalues, gap=gap)


def mass_gap(params: ModelParams) -> float:
    return exact_spectrum(build_H(params)).gap


def solve_counterterm(
    params: ModelParams,
    target_m_sq: float,
    tol: float = 1e-8,
    max_iter: int = 200,
) -> float:
    """Counter term delta_m at which the squared mass gap equals target_m_sq.

    Bisection on delta_m over [-|m0_sq| - m_sq - lambda, m_sq + lambda]; the gap
    is continuous and monotone increasing in delta_m on the physical branch.
    Raises ValueError when the bracket shows no sign change.
    """
    if not target_m_sq > 0:
        raise ValueError(f"target_m_sq must be > 0, got {target_m_sq}")
    lo = -abs(params.m0_sq) - params.m_sq - params.lam
    hi = params.m_sq + params.lam

    def excess(delta: float) -> float:
        return mass_gap(params.with_delta(delta)) ** 2 - target_m_sq

    f_lo, f_hi = excess(lo), excess(hi)
    if f_lo * f_hi > 0:
        raise ValueError(
            f"no sign change on delta_m bracket [{lo}, {hi}] "
            f"(f(lo)={f_lo:.6g}, f(hi)={f_hi:.6g})"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if hi - lo < tol:
            break
        f_mid = excess(mid)
        if f_lo * f_mid <= 0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def critical_curve(
    lambda_grid: list[float],
    target_gap_sq: float,
    base: ModelParams,
) -> list[tuple[float, float]]:
    """Bare mass m0^2 at which the squared gap equals target_gap_sq, per lambda.

    Bracket failures are reported as NaN entries (with a warning), not raised.
    """
    points = []
    for lam in lambda_grid:
        try:
            delta = solve_counterterm(base.with_lam(lam), target_gap_sq)
            points.append((lam, base.m_sq + delta))
        except ValueError as err:
            warnings.warn(f"critical_curve failed at lambda={lam}: {err}", stacklevel=2)
            points.append((lam, math.nan))
    return points


def critical_exponent_fit(
    points: list[tuple[float, float]],
    window: int = 6,
) -> CriticalFit:
    """Least-squares power-law fit over the `window` smallest-gap points.

    The window points are the ones nearest the critical coupling when the gap
    data approaches lambda_c from above. Seeds (A, lambda_c, nu) from a linear
    pre-fit with nu = 1; lambda_c is constrained below the window.
    """
    usable = [(lam, gap) for lam, gap in points if gap > 0]
    if len(usable) < 4:
        raise ValueError(f"need at least 4 points with gap > 0, got {len(usable)}")
    usable.sort(key=lambda p: p[1])
    selected = sorted(usable[: max(window, 4)])
    lams = np.array([p[0] for p in selected])
    gaps = np.array([p[1] for p in selected])
    if np.ptp(gaps) < 1e-14:
        raise ValueError("degenerate fit input: all gaps equal")

    slope, intercept = np.polyfit(lams, gaps, 1)
    if slope > 0:
        lc0 = min(-intercept / slope, lams[0] - 1e-3)
    else:
        lc0 = lams[0] - 1.0

    def residuals(p: np.ndarray) -> np.ndarray:
        amp, lc, nu = p
        return amp * np.abs(lams - lc) ** nu - gaps

    fit = least_squares(
        residuals,
        x0=[max(slope, 1e-3), lc0, 1.0],
        bounds=([1e-8, lams[0] - 20.0, 0.05], [np.inf, lams[0] - 1e-9, 5.0]),
    )
    amp, lc, nu = fit.x
    slopes = tuple(np.diff(gaps) / np.diff(lams))
    residual = float(np.sqrt(np.mean(fit.fun**2)))
    return CriticalFit(
        lambda_c=float(lc),
        nu=float(nu),
        amplitude=float(amp),
        residual=residual,
        window=(float(lams[0]), float(lams[-1])),
        slopes=slopes,
    )
