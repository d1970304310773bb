"""Quadratic boson truncation of the Lipkin model around the mean field.

Bosonising the quasi-spin (Jz = b'b - N/2), displacing b by the mean-field
amplitude rho_c and keeping coefficient orders N, sqrt(N), 1 yields

    H_t = A + B c'c + C (c'^2 + c^2),

whose linear (c' + c) term vanishes identically at rho_c.  A Bogoliubov
rotation with tanh(theta) = -2C/B diagonalises H_t; the quasiparticle gap is
Delta = sqrt(B^2 - 4C^2) and the vacuum carries sinh^2(theta/2) bosons.
The same machinery expands Jx^2 = j1 + j2 a'a + j3 (a' + a) + j4 (a'^2 + a^2)
in the quasiparticle basis, which feeds the closed-form fidelity
susceptibility of the ground state with respect to gamma_x.

All square roots evaluated here have non-negative arguments inside the
supported regions; quantities that are naively complex intermediate results
in printed closed forms are assembled from manifestly real factors instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .meanfield import critical_point
from .model import ModelParams, PhaseRegion, RegionError, classify_phase

DEFAULT_GUARD = 1e-12


class SingularPointError(ValueError):
    """Raised when a truncated-theory quantity is evaluated at a gapless point."""


@dataclass(frozen=True)
class TruncatedSolution:
    """Coefficients and observables of the diagonalised quadratic Hamiltonian."""

    a_coef: float
    b_coef: float
    c_coef: float
    theta: float
    gap: float
    e_gs_t: float
    n_e_t: float


@dataclass(frozen=True)
class ChiCoefficients:
    """Quasiparticle expansion data of Jx^2 entering the susceptibility sum.

    Only j3^2 and j4 are stored: the constant and a'a pieces of Jx^2 do not
    connect the vacuum to excited states.  The sign of j4 is a phase
    convention; only j4^2 is observable.
    """

    j3_sq: float
    j4: float
    one_boson_energy: float
    two_boson_energy: float


def _deformed(p: ModelParams) -> bool:
    region = classify_phase(p)
    if region is PhaseRegion.DEFORMED_III:
        raise RegionError("y-deformed parameters: canonicalize(p) first")
    return region is PhaseRegion.DEFORMED_II


def _check_gapped(p: ModelParams, guard: float, deformed: bool) -> None:
    if abs(p.gamma_x - p.gamma_c) < guard:
        raise SingularPointError(
            f"gamma_x within {guard} of gamma_c: truncated theory is gapless there"
        )
    if deformed and abs(p.gamma_x - p.gamma_y) < guard:
        raise SingularPointError(
            f"gamma_x within {guard} of gamma_y in the deformed region: gap closes"
        )


def truncated_coefficients(p: ModelParams) -> tuple[float, float, float]:
    """Constant, c'c and (c'^2 + c^2) coefficients of the truncated Hamiltonian."""
    gx, gy, gc, n = p.gamma_x, p.gamma_y, p.gamma_c, p.n_atoms
    rho2 = critical_point(p).rho_c ** 2
    a = (
        -gc * (rho2 - n / 2.0)
        + gx / (4.0 * n) * (n - 3.0 * rho2 + 4.0 * rho2 * (n - rho2))
        + gy / (4.0 * n) * (n - rho2)
    )
    b = -gc + (n - 7.0 * rho2) * gx / (2.0 * n) + (n - rho2) * gy / (2.0 * n)
    c = (n - 5.0 * rho2) * gx / (4.0 * n) - (n - rho2) * gy / (4.0 * n)
    return a, b, c


def linear_coefficient(p: ModelParams, rho: float | None = None) -> float:
    """Coefficient of the (c' + c) term after displacing by `rho`.

    Defaults to the mean-field amplitude, where it vanishes identically --
    the displacement that kills the linear term is exactly the surface
    minimiser, in both phases.
    """
    if rho is None:
        rho = critical_point(p).rho_c
    return rho * (p.epsilon + p.gamma_x * (1.0 - 2.0 * rho * rho / p.n_atoms))


def gap(p: ModelParams, form: str = "closed") -> float:
    """Quasiparticle excitation energy Delta.

    form="closed" uses the two-branch coupling-only expression;
    form="coefficient" evaluates sqrt(B^2 - 4C^2) from the truncated
    coefficients.  The two agree to rounding at any N because rho_c^2 is
    proportional to N, which cancels every explicit 1/N in B and C.
    """
    if form == "coefficient":
        _, b, c = truncated_coefficients(p)
        return math.sqrt(max(b * b - 4.0 * c * c, 0.0))
    if form != "closed":
        raise ValueError(f"unknown gap form {form!r}")
    gx, gy, gc = p.gamma_x, p.gamma_y, p.gamma_c
    if _deformed(p):
        return math.sqrt(max((gx * gx - gc * gc) * (gx - gy) / gx, 0.0))
    return math.sqrt(max((gx - gc) * (gy - gc), 0.0))


def truncated_observables(
    p: ModelParams, guard: float = DEFAULT_GUARD
) -> tuple[float, float]:
    """Per-atom ground energy and excited fraction of the truncated theory.

    Both carry the leading 1/N correction on top of the mean-field values.
    Raises SingularPointError within `guard` of the gapless lines.
    """
    gx, gy, gc, n = p.gamma_x, p.gamma_y, p.gamma_c, p.n_atoms
    deformed = _deformed(p)
    _check_gapped(p, guard, deformed)
    delta = gap(p)
    _, b, _ = truncated_coefficients(p)
    rho2 = critical_point(p).rho_c ** 2
    # Occupation of the displaced mode: condensate rho_c^2 plus the vacuum
    # depletion sinh^2(theta/2) = (cosh(theta) - 1)/2 with cosh = |B|/Delta.
    n_e_t = (2.0 / n) * (rho2 + 0.5 * (abs(b) / delta - 1.0))
    if deformed:
        e_gs_t = (gc * gc + gx * gx) / (4.0 * gx) + (gx + delta) / (2.0 * n)
    else:
        e_gs_t = 0.5 * gc + (gc + delta) / (2.0 * n)
    return e_gs_t, n_e_t


def truncated_solution(p: ModelParams, guard: float = DEFAULT_GUARD) -> TruncatedSolution:
    """Bundle coefficients, Bogoliubov angle, gap and observables for one p."""
    a, b, c = truncated_coefficients(p)
    e_gs_t, n_e_t = truncated_observables(p, guard)
    return TruncatedSolution(
        a_coef=a,
        b_coef=b,
        c_coef=c,
        theta=math.atanh(-2.0 * c / b),
        gap=gap(p),
        e_gs_t=e_gs_t,
        n_e_t=n_e_t,
    )


def chi_coefficients(p: ModelParams, guard: float = DEFAULT_GUARD) -> ChiCoefficients:
    """Vacuum-coupling coefficients of Jx^2 in the quasiparticle basis.

    j3 excites one quasiparticle (energy Delta), j4 a pair (energy 2*Delta).
    Everything is assembled from real factors: j3^2 carries e^theta =
    (B - 2C)/Delta and j4 = N*(Cx*B - Bx*C)/Delta, where Bx, Cx are the c'c
    and pairing coefficients of Jx^2/N alone.  In the normal region j3 = 0
    exactly (no condensate) and j4 reduces to (N/4)*sqrt((gy-gc)/(gx-gc)).
    """
    gx, gy, gc, n = p.gamma_x, p.gamma_y, p.gamma_c, p.n_atoms
    deformed = _deformed(p)
    _check_gapped(p, guard, deformed)
    delta = gap(p)
    _, b, c = truncated_coefficients(p)
    rho2 = critical_point(p).rho_c ** 2
    r = rho2 / n
    bx = 0.5 * (1.0 - 7.0 * r)
    cx = 0.25 * (1.0 - 5.0 * r)
    j3_sq = n * n * rho2 * (1.0 - 2.0 * r) ** 2 * (b - 2.0 * c) / delta
    j4 = n * (cx * b - bx * c) / delta
    return ChiCoefficients(
        j3_sq=j3_sq, j4=j4, one_boson_energy=delta, two_boson_energy=2.0 * delta
    )


def chi_f_truncated(p: ModelParams, guard: float = DEFAULT_GUARD) -> float:
    """Fidelity susceptibility of the truncated ground state w.r.t. gamma_x.

    Sum of the one- and two-quasiparticle channels of the perturbation
    Jx^2/N.  In the normal region this collapses to 1/(32*(gx - gc)^2); in
    the deformed region the one-boson channel contributes the O(N) term
    -N*gc^2/(4*gx^3*Delta) (positive, since gx < 0 there).
    """
    coef = chi_coefficients(p, guard)
    n = p.n_atoms
    d1 = coef.one_boson_energy
    d2 = coef.two_boson_energy
    return coef.j3_sq / (n * n * d1 * d1) + 2.0 * coef.j4**2 / (n * n * d2 * d2)


def chi_f_special_line(
    p: ModelParams, guard: float = DEFAULT_GUARD, debug: bool = False
):
    """Leading susceptibility on the line gamma_y = gamma_c, gamma_x < gamma_c.

    Returns the one-boson channel -N*gc^2/(4*gx^3*Delta) with
    Delta = sqrt((gx^2 - gc^2)*(gx - gc)/gx); this is positive and O(N) and
    diverges as (gamma_c - gamma_x)^(-1) toward the triple point.  A
    literal reading of the same closed form routed through the principal
    square root of gx/(gx + gc) flips the overall sign; `debug=True` returns
    ``(value, literal_value)`` so the two evaluations can be compared.
    """
    gx, gy, gc, n = p.gamma_x, p.gamma_y, p.gamma_c, p.n_atoms
    if gy != gc:
        raise ValueError(f"special line requires gamma_y == gamma_c, got {gy}")
    if not gx < gc - guard:
        raise SingularPointError(
            f"special line requires gamma_x < gamma_c - {guard}, got {gx}"
        )
    delta = math.sqrt((gx * gx - gc * gc) * (gx - gc) / gx)
    value = -n * gc * gc / (4.0 * gx**3 * delta)
    if not debug:
        return value
    literal = -(n / (gx - gc)) * (gc * gc / (4.0 * gx**3)) * math.sqrt(gx / (gx + gc))
    return value, literal
