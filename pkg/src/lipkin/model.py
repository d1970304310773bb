"""Parameters and phase regions of the Lipkin model.

The Hamiltonian for N two-level atoms with level splitting epsilon > 0,

    H = epsilon*Jz + (gamma_x/N)*Jx^2 + (gamma_y/N)*Jy^2,

acts in the maximal quasi-spin sector j = N/2.  Both couplings above
gamma_c = -epsilon gives the normal (spherical) phase; driving gamma_x
(gamma_y) below gamma_c deforms the mean-field ground state along the x (y)
axis.  The two deformed regions map onto each other under Jx <-> Jy, so the
y-deformed one is always reduced to the x-deformed one by `canonicalize`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum


class RegionError(ValueError):
    """Raised when an operation receives parameters from an unsupported region."""


class PhaseRegion(Enum):
    NORMAL_I = "NormalI"
    DEFORMED_II = "DeformedII"
    DEFORMED_III = "DeformedIII"
    BOUNDARY_I_II = "BoundaryI_II"
    BOUNDARY_I_III = "BoundaryI_III"
    TRIPLE_POINT = "TriplePoint"


@dataclass(frozen=True)
class ModelParams:
    """Couplings, atom count and level splitting of one Lipkin Hamiltonian."""

    gamma_x: float
    gamma_y: float
    n_atoms: int
    epsilon: float = 1.0

    def __post_init__(self):
        if isinstance(self.n_atoms, bool) or not isinstance(self.n_atoms, int):
            raise ValueError(f"n_atoms must be an integer, got {self.n_atoms!r}")
        if self.n_atoms < 1:
            raise ValueError(f"n_atoms must be >= 1, got {self.n_atoms}")
        for name in ("gamma_x", "gamma_y", "epsilon"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ValueError(f"{name} must be a real number, got {v!r}")
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")

    @property
    def gamma_c(self) -> float:
        # Always derived from epsilon so the pair can never get out of sync.
        return -self.epsilon

    @property
    def j(self) -> float:
        return self.n_atoms / 2.0


def classify_phase(p: ModelParams, boundary_tol: float = 0.0) -> PhaseRegion:
    """Classify `p` into a phase region of the (gamma_x, gamma_y) plane.

    Equalities with gamma_c (within `boundary_tol`) get their own tags rather
    than being folded into a neighbouring region.  The tie gamma_x == gamma_y
    below gamma_c counts as the x-deformed region.
    """
    dx = p.gamma_x - p.gamma_c
    dy = p.gamma_y - p.gamma_c
    if abs(dx) <= boundary_tol and abs(dy) <= boundary_tol:
        return PhaseRegion.TRIPLE_POINT
    if abs(dx) <= boundary_tol and dy > boundary_tol:
        return PhaseRegion.BOUNDARY_I_II
    if abs(dy) <= boundary_tol and dx > boundary_tol:
        return PhaseRegion.BOUNDARY_I_III
    if dx > boundary_tol and dy > boundary_tol:
        return PhaseRegion.NORMAL_I
    if dx < -boundary_tol and p.gamma_x <= p.gamma_y:
        return PhaseRegion.DEFORMED_II
    return PhaseRegion.DEFORMED_III


def canonicalize(p: ModelParams, boundary_tol: float = 0.0) -> tuple[ModelParams, bool]:
    """Map the y-deformed region onto the x-deformed one by swapping couplings.

    Returns ``(params, swapped)``.  All scalar ground-state observables are
    invariant under the swap, so downstream solvers only ever have to handle
    the normal region, the x-deformed region and their boundary.
    """
    if classify_phase(p, boundary_tol) is PhaseRegion.DEFORMED_III:
        return replace(p, gamma_x=p.gamma_y, gamma_y=p.gamma_x), True
    return p, False
