"""Exact diagonalization of the Lipkin model in the maximal-spin sector.

H conserves the parity exp(i*pi*(Jz + j)), so the (N+1)-dimensional j = N/2
sector splits into two real symmetric tridiagonal blocks connecting m with
m + 2:

    <m|H|m>     = eps*m + (gx + gy)/(2N) * (j(j+1) - m^2)
    <m+2|H|m>   = (gx - gy)/(4N) * sqrt(j(j+1) - m(m+1)) * sqrt(j(j+1) - (m+1)(m+2))

The off-diagonal element is kept as a product of two square roots so no
intermediate exceeds j(j+1) in magnitude.  Ground pairs come from bisection
plus inverse iteration on a single block (O(N) memory), which keeps sizes up
to the safety cap N = 2^17 tractable; full decompositions are only used by
the capped perturbation-sum susceptibility.

Three independent evaluators of the ground-state fidelity susceptibility
with respect to gamma_x (perturbation Jx^2/N) are provided: the spectral
sum, a resolvent solve restricted to the ground parity block, and a
finite-difference estimate built from two-point fidelities.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace
from typing import TextIO

import numpy as np
from scipy.linalg import eigh_tridiagonal, eigvalsh_tridiagonal, solve_banded

from .model import ModelParams

DEFAULT_MAX_N = 2**17
SUM_CAP_DEFAULT = 4096
ENV_MAX_N = "LIPKIN_MAX_N"


class SizeCapError(ValueError):
    """Raised when n_atoms exceeds the configured solver cap."""


class ParityMismatchError(RuntimeError):
    """Raised when two ground states live in different parity blocks."""


class IllConditionedError(RuntimeError):
    """Raised when near-degenerate same-parity levels spoil the resolvent solve."""


@dataclass(frozen=True)
class ParityBlocks:
    """Tridiagonal data of the two parity blocks plus their m bases."""

    even_diag: np.ndarray
    even_offdiag: np.ndarray
    odd_diag: np.ndarray
    odd_offdiag: np.ndarray
    even_m: np.ndarray
    odd_m: np.ndarray


@dataclass(frozen=True)
class SpectrumResult:
    """Lowest exact levels with parity labels and the ground eigenvector."""

    energies: np.ndarray
    parities: np.ndarray
    ground_vector: np.ndarray
    ground_parity: int


def _max_n() -> int:
    env = os.environ.get(ENV_MAX_N)
    return int(env) if env else DEFAULT_MAX_N


def _check_size(p: ModelParams, max_n: int | None) -> None:
    cap = _max_n() if max_n is None else max_n
    if p.n_atoms > cap:
        raise SizeCapError(f"n_atoms = {p.n_atoms} exceeds cap {cap}")


def build_blocks(p: ModelParams, max_n: int | None = None) -> ParityBlocks:
    """Assemble both parity blocks of H as tridiagonal (diag, offdiag) arrays."""
    _check_size(p, max_n)
    n, j = p.n_atoms, p.j
    jj = j * (j + 1.0)
    m = -j + np.arange(n + 1, dtype=float)
    diag = p.epsilon * m + (p.gamma_x + p.gamma_y) / (2.0 * n) * (jj - m * m)
    # <m+2|H|m> over the full ladder; entries m, m+2 of one block are adjacent.
    amp1 = np.sqrt(jj - m[:-2] * (m[:-2] + 1.0))
    amp2 = np.sqrt(jj - (m[:-2] + 1.0) * (m[:-2] + 2.0))
    off = (p.gamma_x - p.gamma_y) / (4.0 * n) * amp1 * amp2
    return ParityBlocks(
        even_diag=diag[0::2],
        even_offdiag=off[0::2],
        odd_diag=diag[1::2],
        odd_offdiag=off[1::2],
        even_m=m[0::2],
        odd_m=m[1::2],
    )


def dense_hamiltonian(p: ModelParams) -> np.ndarray:
    """Full (N+1)x(N+1) H built from ladder-operator matrices.

    Independent construction path (matrix products instead of closed-form
    two-step elements); used as the oracle the parity blocks are checked
    against.
    """
    n, j = p.n_atoms, p.j
    jj = j * (j + 1.0)
    m = -j + np.arange(n + 1, dtype=float)
    jp = np.zeros((n + 1, n + 1))
    jp[np.arange(1, n + 1), np.arange(n)] = np.sqrt(jj - m[:-1] * (m[:-1] + 1.0))
    jx = 0.5 * (jp + jp.T)
    jy = (jp - jp.T) / 2j
    h = (
        p.epsilon * np.diag(m)
        + (p.gamma_x / n) * (jx @ jx)
        + (p.gamma_y / n) * (jy @ jy)
    )
    return h.real


def _blocks_as_list(blocks: ParityBlocks):
    # parity +1 is the block containing m = -j
    return [
        (blocks.even_diag, blocks.even_offdiag, blocks.even_m, 1),
        (blocks.odd_diag, blocks.odd_offdiag, blocks.odd_m, -1),
    ]


def _lowest_values(diag: np.ndarray, off: np.ndarray, k: int) -> np.ndarray:
    k = min(k, len(diag))
    return eigvalsh_tridiagonal(diag, off, select="i", select_range=(0, k - 1))


def lowest_levels(p: ModelParams, k: int, max_n: int | None = None):
    """Lowest `k` exact levels merged across both blocks, with parity labels."""
    blocks = build_blocks(p, max_n)
    energies, parities = [], []
    for diag, off, _, parity in _blocks_as_list(blocks):
        vals = _lowest_values(diag, off, k)
        energies.extend(vals)
        parities.extend([parity] * len(vals))
    order = np.argsort(energies, kind="stable")[:k]
    return np.asarray(energies)[order], np.asarray(parities)[order]


def ground_state(p: ModelParams, max_n: int | None = None) -> SpectrumResult:
    """Ground level and eigenvector; ties between blocks resolve to even parity.

    The eigenvector sign is fixed by making its largest-magnitude component
    positive.
    """
    blocks = build_blocks(p, max_n)
    entries = _blocks_as_list(blocks)
    e0s = [float(_lowest_values(d, o, 1)[0]) for d, o, _, _ in entries]
    which = 0 if e0s[0] <= e0s[1] else 1
    diag, off, _, parity = entries[which]
    w, v = eigh_tridiagonal(diag, off, select="i", select_range=(0, 0))
    vec = v[:, 0]
    peak = int(np.argmax(np.abs(vec)))
    if vec[peak] < 0.0:
        vec = -vec
    return SpectrumResult(
        energies=np.array([w[0]]),
        parities=np.array([parity]),
        ground_vector=vec,
        ground_parity=parity,
    )


def excitation_gaps(p: ModelParams, max_n: int | None = None) -> tuple[float, float]:
    """(E1 - E0, E2 - E0) of the combined spectrum; requires N >= 2."""
    if p.n_atoms < 2:
        raise ValueError("excitation_gaps needs at least three levels (N >= 2)")
    energies, _ = lowest_levels(p, 3, max_n)
    return float(energies[1] - energies[0]), float(energies[2] - energies[0])


def n_e_exact(p: ModelParams, max_n: int | None = None) -> float:
    """Exact excited fraction 2<Jz>/N + 1 of the ground state."""
    blocks = build_blocks(p, max_n)
    gs = ground_state(p, max_n)
    m = blocks.even_m if gs.ground_parity == 1 else blocks.odd_m
    jz = float(m @ (gs.ground_vector**2))
    return 2.0 * jz / p.n_atoms + 1.0


def fidelity(p: ModelParams, dgamma_x: float, max_n: int | None = None) -> float:
    """Squared ground-state overlap between gamma_x and gamma_x + dgamma_x."""
    a = ground_state(p, max_n)
    b = ground_state(replace(p, gamma_x=p.gamma_x + dgamma_x), max_n)
    return _overlap_sq(a, b)


def _overlap_sq(a: SpectrumResult, b: SpectrumResult) -> float:
    if a.ground_parity != b.ground_parity:
        raise ParityMismatchError(
            "ground states sit in different parity blocks; their overlap is 0"
        )
    return float(a.ground_vector @ b.ground_vector) ** 2


def _perturbation_tridiag(m: np.ndarray, j: float, n: int):
    """Tridiagonal (diag, offdiag) of Jx^2/N on one parity-block basis."""
    jj = j * (j + 1.0)
    diag = (jj - m * m) / (2.0 * n)
    head = m[:-1]
    off = (
        np.sqrt(jj - head * (head + 1.0))
        * np.sqrt(jj - (head + 1.0) * (head + 2.0))
        / (4.0 * n)
    )
    return diag, off


def _apply_tridiag(diag: np.ndarray, off: np.ndarray, vec: np.ndarray) -> np.ndarray:
    out = diag * vec
    if len(off):
        out[:-1] += off * vec[1:]
        out[1:] += off * vec[:-1]
    return out


def _ground_block(p: ModelParams, max_n: int | None):
    blocks = build_blocks(p, max_n)
    entries = _blocks_as_list(blocks)
    e0s = [float(_lowest_values(d, o, 1)[0]) for d, o, _, _ in entries]
    return entries[0 if e0s[0] <= e0s[1] else 1]


def chi_f_sum(p: ModelParams, cap: int = SUM_CAP_DEFAULT) -> float:
    """Susceptibility as the spectral sum over the ground parity block.

    Needs the full decomposition of the block, so it refuses N above `cap`
    (default 4096); use chi_f_resolvent beyond that.
    """
    if p.n_atoms > cap:
        raise SizeCapError(
            f"chi_f_sum needs a full decomposition; N = {p.n_atoms} exceeds cap "
            f"{cap} -- use chi_f_resolvent"
        )
    diag, off, m, _ = _ground_block(p, max_n=cap)
    if len(diag) == 1:
        return 0.0
    w, v = eigh_tridiagonal(diag, off)
    hd, ho = _perturbation_tridiag(m, p.j, p.n_atoms)
    work = _apply_tridiag(hd, ho, v[:, 0])
    amps = v[:, 1:].T @ work
    return float(np.sum((amps / (w[1:] - w[0])) ** 2))


def chi_f_resolvent(p: ModelParams, max_n: int | None = None) -> float:
    """Susceptibility via a deflated resolvent solve in the ground block.

    Solves (H - E0) x = Q Jx^2/N psi0 with the ground-state direction
    projected out and returns |x|^2.  The shifted tridiagonal system is
    singular along psi0 only; pinning the component at the peak of psi0 and
    solving the leading and trailing pieces separately (two banded-solve
    passes) selects a particular solution, which is then re-orthogonalised.
    Scales as O(N) in time and memory.
    """
    diag, off, m, _ = _ground_block(p, max_n)
    nb = len(diag)
    if nb == 1:
        return 0.0
    w, v = eigh_tridiagonal(diag, off, select="i", select_range=(0, min(1, nb - 1)))
    if nb > 1 and w[1] - w[0] < 1e-13:
        raise IllConditionedError(
            f"same-parity splitting {w[1] - w[0]:.3e} below 1e-13; "
            "resolvent solve would be unreliable"
        )
    e0 = w[0]
    psi0 = v[:, 0]
    hd, ho = _perturbation_tridiag(m, p.j, p.n_atoms)
    rhs = _apply_tridiag(hd, ho, psi0)
    rhs -= (psi0 @ rhs) * psi0
    x = _deflated_solve(diag, off, e0, psi0, rhs)
    return float(x @ x)


def _deflated_solve(
    diag: np.ndarray, off: np.ndarray, e0: float, psi0: np.ndarray, rhs: np.ndarray
) -> np.ndarray:
    # (T - e0) is singular with null vector psi0.  Fix x[i] = 0 at the peak of
    # psi0; the leading/trailing principal submatrices of T - e0 are then
    # nonsingular (strict interlacing for unreduced tridiagonals), and the
    # dropped row is satisfied automatically because the system is consistent.
    n = len(diag)
    i = int(np.argmax(np.abs(psi0)))
    x = np.zeros(n)
    if i > 0:
        x[:i] = _tridiag_solve(diag[:i] - e0, off[: i - 1], rhs[:i])
    if i < n - 1:
        x[i + 1 :] = _tridiag_solve(diag[i + 1 :] - e0, off[i + 1 :], rhs[i + 1 :])
    x -= (psi0 @ x) * psi0
    return x


def _tridiag_solve(diag: np.ndarray, off: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    n = len(diag)
    if n == 1:
        return rhs / diag
    ab = np.zeros((3, n))
    ab[0, 1:] = off
    ab[1] = diag
    ab[2, :-1] = off
    return solve_banded((1, 1), ab, rhs)


def chi_f_finite_difference(
    p: ModelParams, delta: float | None = None, max_n: int | None = None
) -> float:
    """Susceptibility from two-point fidelities at gamma_x +/- delta.

    Symmetrised estimator ((1 - F+) + (1 - F-)) / (2*delta^2), second-order
    accurate in delta for the spectral-sum susceptibility.  A ground-parity
    flip across the step propagates as ParityMismatchError.
    """
    if delta is None:
        delta = 1e-4 * max(1.0, abs(p.gamma_x))
    f_plus = fidelity(p, delta, max_n)
    f_minus = fidelity(p, -delta, max_n)
    return ((1.0 - f_plus) + (1.0 - f_minus)) / (2.0 * delta * delta)


def chi_f_fd_richardson(
    p: ModelParams, delta: float | None = None, max_n: int | None = None
) -> tuple[float, float, float]:
    """Finite-difference susceptibility at delta and delta/2 plus extrapolation."""
    if delta is None:
        delta = 1e-4 * max(1.0, abs(p.gamma_x))
    chi_d = chi_f_finite_difference(p, delta, max_n)
    chi_h = chi_f_finite_difference(p, 0.5 * delta, max_n)
    return chi_d, chi_h, (4.0 * chi_h - chi_d) / 3.0


def dump_ground(p: ModelParams, stream: TextIO, max_n: int | None = None) -> None:
    """Write the ground vector as '# N j parity' then 'm value' lines."""
    blocks = build_blocks(p, max_n)
    gs = ground_state(p, max_n)
    m = blocks.even_m if gs.ground_parity == 1 else blocks.odd_m
    stream.write(f"# {p.n_atoms} {p.j:g} {gs.ground_parity:+d}\n")
    for mi, amp in zip(m, gs.ground_vector):
        stream.write(f"{mi:g} {amp:.17g}\n")
