"""Coherent-state (mean-field) energy surface of the Lipkin model.

The expectation value of H in a spin coherent state parametrised by a radial
amplitude rho (0 <= rho^2 <= N) and an azimuthal phase phi is

    E(rho, phi) = eps*(rho^2 - N/2)
                + (gx + gy)/4 * (1 - rho^2/N) * (1 + 2*rho^2)
                + (gx - gy)/2 * (1 - rho^2/N) * rho^2 * cos(2*phi).

Minimising E gives the variational ground state: rho_c = 0 in the normal
region, and rho_c^2 = (N/2)*(1 - gamma_c/gamma_x) with phi in {0, pi} in the
x-deformed region.  The per-atom minimum E(rho_c, phi_c)/N reproduces the
two-branch closed forms returned by `mf_observables`, 1/N terms included.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, PhaseRegion, RegionError, classify_phase


class ConvergenceError(RuntimeError):
    """Raised when the numeric surface minimiser exhausts its refinement budget."""


@dataclass(frozen=True)
class CriticalPoint:
    """Minimising point(s) of the energy surface.

    `phi_c` is None when the phase is undetermined (rho_c = 0); otherwise it
    holds the degenerate pair of minimising phases.
    """

    rho_c: float
    phi_c: tuple[float, ...] | None
    degenerate: bool


@dataclass(frozen=True)
class MeanFieldObservables:
    """Per-atom ground-state energy and excited-atom fraction."""

    e_gs: float
    n_e: float


def energy_surface(p: ModelParams, rho: float, phi: float) -> float:
    """Coherent-state energy at (rho, phi); requires rho^2 <= N."""
    n = p.n_atoms
    rho2 = rho * rho
    if rho2 > n * (1 + 1e-12):
        raise ValueError(f"rho^2 = {rho2} exceeds n_atoms = {n}")
    shell = 1.0 - rho2 / n
    return (
        p.epsilon * (rho2 - n / 2.0)
        + 0.25 * (p.gamma_x + p.gamma_y) * shell * (1.0 + 2.0 * rho2)
        + 0.5 * (p.gamma_x - p.gamma_y) * shell * rho2 * math.cos(2.0 * phi)
    )


def _deformed(p: ModelParams) -> bool:
    region = classify_phase(p)
    if region is PhaseRegion.DEFORMED_III:
        raise RegionError("y-deformed parameters: canonicalize(p) first")
    return region is PhaseRegion.DEFORMED_II


def critical_point(p: ModelParams) -> CriticalPoint:
    """Analytic minimiser of the energy surface (normal or x-deformed branch)."""
    if not _deformed(p):
        return CriticalPoint(rho_c=0.0, phi_c=None, degenerate=False)
    rho_c = math.sqrt(0.5 * p.n_atoms * (1.0 - p.gamma_c / p.gamma_x))
    return CriticalPoint(rho_c=rho_c, phi_c=(0.0, math.pi), degenerate=True)


def mf_observables(p: ModelParams) -> MeanFieldObservables:
    """Closed-form per-atom energy and excited fraction at the surface minimum."""
    gx, gy, gc, n = p.gamma_x, p.gamma_y, p.gamma_c, p.n_atoms
    if not _deformed(p):
        return MeanFieldObservables(
            e_gs=0.5 * gc + (gx + gy) / (4.0 * n),
            n_e=0.0,
        )
    return MeanFieldObservables(
        e_gs=(gc * gc + gx * gx) / (4.0 * gx)
        + (gx + gc) * (gy + gx) / (8.0 * n * gx),
        n_e=1.0 - gc / gx,
    )


def minimize_surface_numeric(
    p: ModelParams,
    rho_steps: int = 200,
    phi_steps: int = 64,
    tol: float = 1e-8,
    max_rounds: int = 200,
    surface: str = "intensive",
) -> CriticalPoint:
    """Locate the surface minimum by coarse grid search plus local refinement.

    Deterministic; ties are broken toward smaller rho (then smaller phi).
    Refines until the local box size drops below `tol` in both directions and
    raises ConvergenceError if `max_rounds` is exhausted first.

    `surface` selects what is minimised.  "intensive" (default) is the
    per-atom limit N*e(rho/sqrt(N), phi), whose minimiser is exactly the
    closed-form rho_c for every N -- the right oracle for `critical_point`.
    "finite_n" is the full coherent-state expectation value, whose deformed
    minimiser sits at rho_c^2 - (gamma_x + gamma_y)/(8*gamma_x): the constant
    piece of the (1 + 2*rho^2) factor shifts the stationary point by an O(1)
    amount that the closed form drops.
    """
    if surface not in ("intensive", "finite_n"):
        raise ValueError(f"surface must be 'intensive' or 'finite_n', got {surface!r}")
    intensive = surface == "intensive"
    rho_max = math.sqrt(p.n_atoms)
    rhos = np.linspace(0.0, rho_max, rho_steps + 1)
    phis = np.linspace(0.0, 2.0 * math.pi, phi_steps, endpoint=False)
    energy = _surface_grid(p, rhos, phis, intensive)
    k = int(np.argmin(energy))  # row-major: first minimum = smallest rho, phi
    best_rho = rhos[k // len(phis)]
    best_phi = phis[k % len(phis)]

    d_rho = rhos[1] - rhos[0]
    d_phi = phis[1] - phis[0]
    for _ in range(max_rounds):
        if d_rho <= tol and d_phi <= tol:
            break
        local_r = np.clip(np.linspace(best_rho - d_rho, best_rho + d_rho, 9), 0.0, rho_max)
        local_p = np.linspace(best_phi - d_phi, best_phi + d_phi, 9)
        energy = _surface_grid(p, local_r, local_p, intensive)
        k = int(np.argmin(energy))
        best_rho = local_r[k // 9]
        best_phi = local_p[k % 9]
        d_rho *= 0.5
        d_phi *= 0.5
    else:
        raise ConvergenceError("surface refinement did not reach tolerance")

    if best_rho <= 10.0 * tol:
        return CriticalPoint(rho_c=best_rho, phi_c=None, degenerate=False)
    best_phi = math.fmod(best_phi, math.pi)
    if best_phi < 0.0:
        best_phi += math.pi
    # The surface is pi-periodic in phi, so any rho_c > 0 minimum comes in
    # a (phi, phi + pi) pair; snap phases that are numerically 0 or pi.
    if best_phi <= 10.0 * tol or math.pi - best_phi <= 10.0 * tol:
        best_phi = 0.0
    return CriticalPoint(rho_c=best_rho, phi_c=(best_phi, best_phi + math.pi), degenerate=True)


def _surface_grid(
    p: ModelParams, rhos: np.ndarray, phis: np.ndarray, intensive: bool = False
) -> np.ndarray:
    n = p.n_atoms
    rho2 = (rhos * rhos)[:, None]
    shell = 1.0 - rho2 / n
    # intensive: N * e(rho/sqrt(N), phi) -- the (1 + 2 rho^2) factor loses its
    # constant piece, which is what moves the finite-N stationary point.
    quad = 2.0 * rho2 if intensive else 1.0 + 2.0 * rho2
    return (
        p.epsilon * (rho2 - n / 2.0)
        + 0.25 * (p.gamma_x + p.gamma_y) * shell * quad
        + 0.5 * (p.gamma_x - p.gamma_y) * shell * rho2 * np.cos(2.0 * phis)[None, :]
    )
