"""Coulomb deflection of two electrons on parallel leads.

Two electrons travelling on a pair of identical leads interact through a
screened Coulomb potential that depends only on the difference of their
site indices. In centre-of-mass coordinates s = i1 + i2, r = i1 - i2 the
problem separates: the total momentum p1 is conserved and the relative
coordinate scatters off the one-dimensional potential

    V(r, d) = K / sqrt(r^2 + d^2)   for |r| <= C, else 0,

with d the lead separation and C the interaction cutoff, both in units of
the lattice constant. Matching plane waves outside the cutoff leaves a
(2C+1)-unknown tridiagonal system for the transmission T, the reflection R
and the interior amplitudes f(r). Because the interaction never swaps the
two lead indices, the spatial problem needs no antisymmetrization: the
exchange structure of the pair rides along unchanged.

Momentum convention: kappa1 = p1*a/hbar, kappa2 = p2*a/hbar with
p2 = (p(1) - p(2))/2 and kappa2 <= 0 for the incoming arrangement.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.linalg import solve_banded

from .errors import FluxError, InputError, NumericalError
from .model import (
    DispersionValidityWarning,
    K_COULOMB,
    LatticeParams,
    energy_to_momentum,
)

# Escalate to an error above this flux imbalance.
FLUX_DEFECT_LIMIT = 1e-6


def coulomb_potential(r: np.ndarray | float, d: float, C: int, K: float) -> np.ndarray:
    """Screened interaction K / sqrt(r^2 + d^2), zero beyond the cutoff C."""
    r_arr = np.asarray(r, dtype=float)
    v = np.where(np.abs(r_arr) <= C, K / np.sqrt(r_arr * r_arr + d * d), 0.0)
    return v if v.ndim else float(v)


def momentum_transform(k_one: float, k_two: float) -> tuple[float, float]:
    """Per-particle phases (kappa^(1), kappa^(2)) -> (kappa1, kappa2).

    kappa1 = kappa^(1) + kappa^(2) is the total, kappa2 = (kappa^(1) -
    kappa^(2)) / 2 the relative phase; the pair is ordered so kappa2 <= 0.
    """
    total = k_one + k_two
    rel = 0.5 * (k_one - k_two)
    if rel > 0:
        rel = -rel
    return total, rel


@dataclass(frozen=True)
class TwoParticleProblem:
    """Relative-coordinate scattering setup.

    ``C`` and ``d`` are in lattice units; ``K`` is the Coulomb prefactor in
    eV (defaults to k*q^2/a for the given lattice). ``kappa1`` and
    ``kappa2`` are the total and relative per-site phases.
    """

    lattice: LatticeParams
    C: int
    d: float
    kappa2: float
    kappa1: float = 0.0
    K: float | None = None

    def __post_init__(self):
        if self.C < 1:
            raise InputError(f"interaction cutoff C must be >= 1, got {self.C}")
        if self.d <= 0:
            raise InputError(f"lead separation d must be positive, got {self.d}")
        if self.K is None:
            object.__setattr__(self, "K", K_COULOMB / self.lattice.a)
        if abs(math.sin(self.kappa2)) < 1e-12:
            raise InputError(
                f"relative phase kappa2 = {self.kappa2} carries no flux"
            )
        if abs(math.cos(0.5 * self.kappa1)) < 1e-12:
            raise InputError(
                f"total phase kappa1 = {self.kappa1} freezes the relative hopping"
            )

    @classmethod
    def equal_energy(
        cls,
        lattice: LatticeParams,
        energy_eV: float,
        C: int,
        d: float,
        K: float | None = None,
    ) -> "TwoParticleProblem":
        """Both electrons at kinetic energy ``energy_eV``, moving oppositely.

        This is the circuit arrangement: the total momentum vanishes and the
        relative phase is the single-particle kappa at that energy (taken
        negative by convention).
        """
        kappa = energy_to_momentum(energy_eV, lattice)
        return cls(lattice=lattice, C=C, d=d, kappa1=0.0, kappa2=-kappa, K=K)


def assemble_system(
    prob: TwoParticleProblem,
) -> tuple[np.ndarray, np.ndarray]:
    """Tridiagonal system for the unknowns [T, f(C-1), ..., f(-C+1), R].

    Returns the matrix in `scipy.linalg.solve_banded` layout (3, 2C+1) and
    the right-hand side. Row 0 matches the outgoing wave at r = C, row 2C
    the incoming-plus-reflected wave at r = -C, interior rows carry the
    potential and the relative-motion eigenvalue.
    """
    beta = prob.lattice.beta
    C, d, K = prob.C, prob.d, prob.K
    k2 = prob.kappa2
    t = 2.0 * beta * math.cos(0.5 * prob.kappa1)
    e2 = 2.0 * t * math.cos(k2)

    n = 2 * C + 1
    ab = np.zeros((3, n), dtype=complex)
    rhs = np.zeros(n, dtype=complex)

    edge_out = cmath.exp(-1j * k2 * C)
    v_edge_hi = float(coulomb_potential(C, d, C, K))
    v_edge_lo = float(coulomb_potential(-C, d, C, K))

    # r = C: outgoing wave against its first interior neighbour.
    ab[1, 0] = t * cmath.exp(-1j * k2 * (C - 1)) + v_edge_hi * edge_out
    ab[0, 1] = -t  # coefficient of f(C-1) in this row

    # Interior rows r = C-1 ... -C+1 (unknown index i = C - r).
    r_vals = np.arange(C - 1, -C, -1, dtype=float)
    rows = np.arange(1, n - 1)
    ab[1, rows] = coulomb_potential(r_vals, d, C, K) + e2
    # neighbour f(r+1) sits at column i-1; at r = C-1 that neighbour is T
    sub = np.full(n - 2, -t, dtype=complex)
    sub[0] = -t * edge_out
    ab[2, rows - 1] = sub
    # neighbour f(r-1) sits at column i+1; at r = -C+1 that neighbour is R
    sup = np.full(n - 2, -t, dtype=complex)
    sup[-1] = -t * edge_out
    ab[0, rows + 1] = sup
    rhs[n - 2] = t * cmath.exp(1j * k2 * C)

    # r = -C: incoming plus reflected wave against f(-C+1).
    ab[2, n - 2] = -t
    ab[1, n - 1] = t * cmath.exp(1j * k2 * (-C + 1)) + v_edge_lo * edge_out
    rhs[n - 1] = -(t * cmath.exp(-1j * k2 * (-C + 1)) + v_edge_lo * cmath.exp(1j * k2 * C))
    return ab, rhs


@dataclass(frozen=True)
class TwoParticleSolution:
    """Amplitudes of the relative-coordinate scattering state.

    ``f[i]`` holds the interior amplitude at r = -C+1+i. The flux defect
    | |R|^2 + |T|^2 - 1 | and the relative residual of the linear solve are
    recorded for every solution.
    """

    problem: TwoParticleProblem
    T: complex
    R: complex
    f: np.ndarray
    flux_defect: float
    residual: float


def solve_two_particle(prob: TwoParticleProblem) -> TwoParticleSolution:
    """Solve the relative-coordinate problem; O(C) time and memory.

    Raises `FluxError` if the scattered flux misses the incoming flux by
    more than ``FLUX_DEFECT_LIMIT``.
    """
    ab, rhs = assemble_system(prob)
    try:
        x = solve_banded((1, 1), ab, rhs)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"two-particle system is singular: {exc}") from exc

    n = rhs.size
    # residual through the banded product, without densifying
    prod = ab[1] * x
    prod[:-1] += ab[0, 1:] * x[1:]
    prod[1:] += ab[2, :-1] * x[:-1]
    norm = np.linalg.norm(rhs)
    residual = float(np.linalg.norm(prod - rhs) / norm) if norm > 0 else 0.0

    T = complex(x[0])
    R = complex(x[-1])
    f = x[1:-1][::-1].copy()
    defect = abs(abs(R) ** 2 + abs(T) ** 2 - 1.0)
    if defect > FLUX_DEFECT_LIMIT:
        raise FluxError(
            f"flux defect {defect:.3e} exceeds {FLUX_DEFECT_LIMIT:.0e} "
            f"(kappa2 = {prob.kappa2}, C = {prob.C}, d = {prob.d})"
        )
    return TwoParticleSolution(
        problem=prob, T=T, R=R, f=f, flux_defect=defect, residual=residual
    )


# ---------------------------------------------------------------------------
# Energy sweeps


@dataclass(frozen=True)
class PhaseSpectrum:
    """Two-particle sweep: per-energy T, unwrapped arg T and R."""

    energies: np.ndarray
    T: np.ndarray
    R: np.ndarray
    arg_T: np.ndarray
    flux_defect: np.ndarray
    flags: tuple[str | None, ...]
    phase_flagged: bool


def phase_spectrum(
    lattice: LatticeParams,
    energies: Sequence[float],
    C: int,
    d: float,
    K: float | None = None,
) -> PhaseSpectrum:
    """Sweep `solve_two_particle` over per-electron kinetic energies.

    Uses the equal-energy convention (total momentum zero). Failed rows are
    flagged and carry NaN; the transmission phase is unwrapped along the
    grid with the same nearest-branch rule as the one-electron spectra.
    """
    from .scatter1 import _unwrap_column, _warn_dispersion_once

    energies = np.asarray(list(energies), dtype=float)
    if energies.ndim != 1 or energies.size < 1:
        raise InputError("energy grid must be a non-empty 1-D sequence")
    n_e = energies.size
    T = np.full(n_e, np.nan + 0j)
    R = np.full(n_e, np.nan + 0j)
    defect = np.full(n_e, np.nan)
    flags: list[str | None] = [None] * n_e
    _warn_dispersion_once(lattice, energies)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DispersionValidityWarning)
        for i, e in enumerate(energies):
            try:
                prob = TwoParticleProblem.equal_energy(lattice, float(e), C, d, K=K)
                sol = solve_two_particle(prob)
            except (InputError, NumericalError) as exc:
                flags[i] = f"{type(exc).__name__}: {exc}"
                continue
            T[i] = sol.T
            R[i] = sol.R
            defect[i] = sol.flux_defect
    valid = np.array([f is None for f in flags])
    arg_T, flagged = _unwrap_column(np.angle(T), np.abs(T), valid)
    return PhaseSpectrum(
        energies=energies,
        T=T,
        R=R,
        arg_T=arg_T,
        flux_defect=defect,
        flags=tuple(flags),
        phase_flagged=flagged,
    )


_FMT = "%.11e"


def write_phase_csv(spec: PhaseSpectrum, path: str | Path):
    """Columns E_in_eV, T2, argT, R2 at 12 significant digits."""
    with open(path, "w") as f:
        f.write("E_in_eV,T2,argT,R2\n")
        for i in range(spec.energies.size):
            vals = (
                spec.energies[i],
                abs(spec.T[i]) ** 2,
                spec.arg_T[i],
                abs(spec.R[i]) ** 2,
            )
            f.write(",".join(_FMT % v for v in vals) + "\n")


def read_phase_csv(path: str | Path) -> np.ndarray:
    """Parse a `write_phase_csv` file into a (n, 4) float array."""
    lines = Path(path).read_text().strip().splitlines()
    if not lines or lines[0] != "E_in_eV,T2,argT,R2":
        raise InputError(f"unrecognized two-particle spectrum header in {path}")
    return np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
