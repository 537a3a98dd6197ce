"""One-electron scattering matrix of a multi-lead junction.

The scattering ansatz carries a plane wave exp(-i*kappa*x) + S*exp(i*kappa*x)
on each semi-infinite lead and a bound amplitude on every charged state of
the junction. Eliminating the bound amplitudes leaves an N x N linear
problem

    Q(e^{+i kappa}) S = -Q(e^{-i kappa}),
    Q(z) = beta_eff * I + z * B^dag diag(1/(E_in + E0 - E_g)) B,

whose solution is unitary whenever the resolvent denominators are real.
``beta_eff`` is hbar^2/(2 m a^2) for the quadratic dispersion and the bare
hopping beta for the cosine dispersion; with the canonical hopping the two
coincide.
"""

from __future__ import annotations

import cmath
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import InputError, NumericalError, PhaseRefinementError, PoleError
from .model import (
    Dispersion,
    DispersionValidityWarning,
    KAPPA_VALID_MAX,
    LatticeParams,
    canonical_beta,
    energy_to_momentum,
    momentum_to_energy,
)

# Below this magnitude a scattering amplitude has no meaningful phase.
PHASE_AMPLITUDE_FLOOR = 1e-12
# Resolvent gaps below these thresholds are treated as a hard pole / near-pole.
POLE_GAP_ERROR = 1e-9
POLE_GAP_WARN = 1e-6
CONDITION_WARN = 1e12


class PoleProximityWarning(UserWarning):
    """Scattering energy within 1e-6 eV of a resonance denominator."""


class IllConditionedWarning(UserWarning):
    """The linear solve behind the S-matrix is close to singular."""


def _beta_eff(lattice: LatticeParams) -> float:
    if lattice.dispersion is Dispersion.QUADRATIC:
        return canonical_beta(lattice.a, lattice.m)
    return lattice.beta


def _resolvent_gaps(D: np.ndarray, E0: float, energy_eV: float) -> np.ndarray:
    gaps = energy_eV + E0 - D
    small = np.abs(gaps)
    g = int(np.argmin(small))
    if small[g] < POLE_GAP_ERROR:
        raise PoleError(
            f"energy {energy_eV} eV sits on the resonance at state {g} "
            f"(gap {small[g]:.3e} eV)",
            state_index=g,
            gap_eV=float(small[g]),
        )
    if small[g] < POLE_GAP_WARN:
        warnings.warn(
            f"energy {energy_eV} eV within {small[g]:.3e} eV of the resonance "
            f"at state {g}",
            PoleProximityWarning,
            stacklevel=3,
        )
    return gaps


def q_matrix(
    B: np.ndarray,
    D: np.ndarray,
    E0: float,
    lattice: LatticeParams,
    energy_eV: float,
    phase_sign: int = 1,
) -> np.ndarray:
    """Boundary matrix Q(e^{phase_sign * i * kappa}) at one energy.

    Parameters
    ----------
    B : (G+1, N) complex couplings.
    D : (G+1,) charged-state energies in eV.
    E0 : neutral ground-state energy in eV.
    lattice : lead discretization; fixes kappa(E) and beta_eff.
    energy_eV : incoming kinetic energy.
    phase_sign : +1 or -1, selecting e^{+i kappa} or e^{-i kappa}.
    """
    if phase_sign not in (1, -1):
        raise InputError("phase_sign must be +1 or -1")
    B = np.asarray(B, dtype=complex)
    D = np.asarray(D, dtype=float)
    if B.ndim != 2 or D.shape != (B.shape[0],):
        raise InputError(
            f"coupling shape {B.shape} does not match {D.shape[0]} charged energies"
        )
    kappa = energy_to_momentum(energy_eV, lattice)
    gaps = _resolvent_gaps(D, E0, energy_eV)
    z = cmath.exp(1j * phase_sign * kappa)
    X = np.conj(B).T @ (B / gaps[:, None])
    return _beta_eff(lattice) * np.eye(B.shape[1]) + z * X


@dataclass(frozen=True)
class ScatterSolution:
    """S-matrix and bound amplitudes at one energy.

    ``s[n_out, n_in]`` is the outgoing amplitude on lead ``n_out`` for a unit
    wave entering on lead ``n_in``; ``psi[g, n_in]`` the amplitude on charged
    state ``g`` for the same incoming lead.
    """

    energy_eV: float
    kappa: float
    s: np.ndarray
    psi: np.ndarray

    @property
    def unitarity_defect(self) -> float:
        n = self.s.shape[0]
        return float(np.linalg.norm(np.conj(self.s).T @ self.s - np.eye(n)))


def scattering_solution(
    B: np.ndarray,
    D: np.ndarray,
    E0: float,
    lattice: LatticeParams,
    energy_eV: float,
) -> ScatterSolution:
    """Solve the boundary problem at one energy, returning S and psi."""
    B = np.asarray(B, dtype=complex)
    D = np.asarray(D, dtype=float)
    if B.ndim != 2 or D.shape != (B.shape[0],):
        raise InputError(
            f"coupling shape {B.shape} does not match {D.shape[0]} charged energies"
        )
    kappa = energy_to_momentum(energy_eV, lattice)
    gaps = _resolvent_gaps(D, E0, energy_eV)
    z = cmath.exp(1j * kappa)
    X = np.conj(B).T @ (B / gaps[:, None])
    eye = np.eye(B.shape[1])
    beta_eff = _beta_eff(lattice)
    q_plus = beta_eff * eye + z * X
    cond = np.linalg.cond(q_plus)
    if not np.isfinite(cond) or cond > CONDITION_WARN:
        warnings.warn(
            f"boundary matrix condition number {cond:.3e} at E = {energy_eV} eV",
            IllConditionedWarning,
            stacklevel=2,
        )
    try:
        s = np.linalg.solve(q_plus, -(beta_eff * eye + np.conj(z) * X))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"singular boundary matrix at E = {energy_eV} eV: {exc}"
        ) from exc
    psi = (B @ (np.conj(z) * eye + z * s)) / gaps[:, None]
    return ScatterSolution(energy_eV=energy_eV, kappa=kappa, s=s, psi=psi)


def s_matrix(
    B: np.ndarray,
    D: np.ndarray,
    E0: float,
    lattice: LatticeParams,
    energy_eV: float,
) -> np.ndarray:
    """S[n_out, n_in] at one energy; see `scattering_solution` for psi too."""
    return scattering_solution(B, D, E0, lattice, energy_eV).s


# ---------------------------------------------------------------------------
# Energy sweeps


@dataclass(frozen=True)
class SpectrumTable:
    """S-matrix sweep over an energy grid.

    ``arg_s`` holds per-pair phases unwrapped along the grid by nearest-branch
    continuation. Rows that failed (resonance poles) keep NaN entries and an
    explanatory string in ``flags``; pairs whose phase jumped by more than
    pi/2 between neighbouring grid points are listed in ``phase_flags``.
    """

    energies: np.ndarray
    s: np.ndarray
    t2: np.ndarray
    arg_s: np.ndarray
    unitarity_defect: np.ndarray
    flags: tuple[str | None, ...]
    phase_flags: tuple[tuple[int, int], ...]

    @property
    def n_leads(self) -> int:
        return self.s.shape[1]


def _unwrap_column(
    phases: np.ndarray, amps: np.ndarray, valid: np.ndarray
) -> tuple[np.ndarray, bool]:
    """Nearest-branch continuation of one pair's phase along the grid.

    Points with negligible amplitude (or failed rows) carry the running
    phase forward and are excluded from the jump check. Returns the
    unwrapped phases and whether any step exceeded pi/2.
    """
    out = np.array(phases, dtype=float)
    flagged = False
    prev = None
    running = 0.0
    for i in range(len(phases)):
        live = valid[i] and amps[i] > PHASE_AMPLITUDE_FLOOR
        if not live:
            out[i] = running if prev is not None else 0.0
            continue
        if prev is None:
            running = phases[i]
        else:
            step = math.remainder(phases[i] - prev, 2.0 * math.pi)
            if abs(step) > 0.5 * math.pi:
                flagged = True
            running += step
        out[i] = running
        prev = phases[i]
    return out, flagged


def _warn_dispersion_once(lattice: LatticeParams, energies: np.ndarray):
    """One summary warning per sweep instead of one per grid row."""
    kap_max = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DispersionValidityWarning)
        for E in energies:
            try:
                kap_max = max(kap_max, energy_to_momentum(float(E), lattice))
            except InputError:
                pass
    if kap_max > KAPPA_VALID_MAX:
        warnings.warn(
            f"sweep reaches kappa = {kap_max:.4f}, beyond {KAPPA_VALID_MAX}; "
            "the lattice and continuum dispersions differ appreciably there",
            DispersionValidityWarning,
            stacklevel=3,
        )


def spectrum(
    B: np.ndarray,
    D: np.ndarray,
    E0: float,
    lattice: LatticeParams,
    energies: Sequence[float],
    strict_phases: bool = False,
    jobs: int = 1,
) -> SpectrumTable:
    """Sweep the S-matrix over an energy grid.

    Per-row failures (e.g. a grid point landing on a pole) flag the row and
    leave NaNs rather than aborting the sweep. With ``strict_phases`` a
    phase step above pi/2 between adjacent grid points raises
    `PhaseRefinementError` instead of being recorded in ``phase_flags``.
    """
    energies = np.asarray(list(energies), dtype=float)
    if energies.ndim != 1 or energies.size < 1:
        raise InputError("energy grid must be a non-empty 1-D sequence")
    B = np.asarray(B, dtype=complex)
    n = B.shape[1]
    n_e = energies.size
    s = np.full((n_e, n, n), np.nan + 0j)
    defect = np.full(n_e, np.nan)
    flags: list[str | None] = [None] * n_e
    _warn_dispersion_once(lattice, energies)

    def solve_row(i: int):
        try:
            sol = scattering_solution(B, D, E0, lattice, float(energies[i]))
        except (PoleError, NumericalError) as exc:
            flags[i] = f"{type(exc).__name__}: {exc}"
            return
        s[i] = sol.s
        defect[i] = sol.unitarity_defect

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DispersionValidityWarning)
        if jobs > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                list(pool.map(solve_row, range(n_e)))
        else:
            for i in range(n_e):
                solve_row(i)

    t2 = np.abs(s) ** 2
    raw = np.angle(s)
    valid = np.array([f is None for f in flags])
    arg_s = np.zeros_like(raw)
    phase_flags = []
    for i in range(n):
        for j in range(n):
            col, flagged = _unwrap_column(raw[:, i, j], np.abs(s[:, i, j]), valid)
            arg_s[:, i, j] = col
            if flagged:
                if strict_phases:
                    raise PhaseRefinementError(
                        f"phase of S[{i}][{j}] jumps by more than pi/2 between "
                        "grid points; refine the energy grid"
                    )
                phase_flags.append((i, j))
    return SpectrumTable(
        energies=energies,
        s=s,
        t2=t2,
        arg_s=arg_s,
        unitarity_defect=defect,
        flags=tuple(flags),
        phase_flags=tuple(phase_flags),
    )


def transmission_peaks(
    energies: np.ndarray, values: np.ndarray, min_height: float = 0.0
) -> list[tuple[float, float]]:
    """Local maxima of a transmission column, tallest first.

    Failed (NaN) rows are compressed out before comparing neighbours, so a
    sweep that straddles a resonance pole still reports the peak from its
    surviving flank, located to within one grid step.
    """
    energies = np.asarray(energies, dtype=float)
    values = np.asarray(values, dtype=float)
    valid = np.isfinite(values)
    e, v = energies[valid], values[valid]
    peaks = [
        (float(e[i]), float(v[i]))
        for i in range(1, v.size - 1)
        if v[i] > v[i - 1] and v[i] >= v[i + 1] and v[i] > min_height
    ]
    return sorted(peaks, key=lambda p: -p[1])


# ---------------------------------------------------------------------------
# Delimited output

_FMT = "%.11e"  # 12 significant digits


def _spectrum_header(n: int) -> list[str]:
    cols = ["E_in_eV"]
    for tag in ("S_re", "S_im", "T2", "argS"):
        cols.extend(f"{tag}[{i}][{j}]" for i in range(n) for j in range(n))
    return cols


def write_spectrum_csv(table: SpectrumTable, path: str | Path):
    """Write one row per energy at 12 significant digits; failed rows keep nan."""
    n = table.n_leads
    with open(path, "w") as f:
        f.write(",".join(_spectrum_header(n)) + "\n")
        for k in range(table.energies.size):
            vals = [table.energies[k]]
            vals.extend(table.s[k].real.ravel())
            vals.extend(table.s[k].imag.ravel())
            vals.extend(table.t2[k].ravel())
            vals.extend(table.arg_s[k].ravel())
            f.write(",".join(_FMT % v for v in vals) + "\n")


def read_spectrum_csv(path: str | Path) -> SpectrumTable:
    """Parse a file written by `write_spectrum_csv`."""
    path = Path(path)
    lines = path.read_text().strip().splitlines()
    if not lines:
        raise InputError(f"empty spectrum file {path}")
    header = lines[0].split(",")
    n = int(round(math.sqrt((len(header) - 1) / 4)))
    if _spectrum_header(n) != header:
        raise InputError(f"unrecognized spectrum header in {path}")
    n_e = len(lines) - 1
    energies = np.zeros(n_e)
    s = np.zeros((n_e, n, n), dtype=complex)
    t2 = np.zeros((n_e, n, n))
    arg_s = np.zeros((n_e, n, n))
    nn = n * n
    for k, line in enumerate(lines[1:]):
        vals = np.array([float(v) for v in line.split(",")])
        if vals.size != 1 + 4 * nn:
            raise InputError(f"row {k} of {path} has {vals.size} columns")
        energies[k] = vals[0]
        re = vals[1 : 1 + nn].reshape(n, n)
        im = vals[1 + nn : 1 + 2 * nn].reshape(n, n)
        s[k] = re + 1j * im
        t2[k] = vals[1 + 2 * nn : 1 + 3 * nn].reshape(n, n)
        arg_s[k] = vals[1 + 3 * nn :].reshape(n, n)
    flags = tuple(
        "parsed: row contains nan" if np.isnan(s[k]).any() else None
        for k in range(n_e)
    )
    return SpectrumTable(
        energies=energies,
        s=s,
        t2=t2,
        arg_s=arg_s,
        unitarity_defect=np.full(n_e, np.nan),
        flags=flags,
        phase_flags=(),
    )


# ---------------------------------------------------------------------------
# Derived quantities


def effective_length(
    s_of_kappa: Callable[[float], np.ndarray],
    kappa: float,
    pair: tuple[int, int],
    a: float,
    step: float = 1e-5,
) -> float:
    """Length hbar * d(arg S)/dp = a * d(arg S)/d(kappa) for one S entry, in angstrom.

    Uses Richardson-extrapolated central differences of the phase; each
    difference is taken through arg(S(k+h)/S(k-h)) so no global branch
    choice is needed, provided the phase moves by less than pi/2 per step
    (the step is halved a few times before giving up).
    """
    i, j = pair
    if step <= 0:
        raise InputError("step must be positive")

    def phase_diff(h: float) -> float:
        lo, hi = s_of_kappa(kappa - h)[i, j], s_of_kappa(kappa + h)[i, j]
        if min(abs(lo), abs(hi)) < PHASE_AMPLITUDE_FLOOR:
            raise NumericalError(
                f"S[{i}][{j}] amplitude vanishes near kappa = {kappa}; "
                "phase derivative undefined"
            )
        return cmath.phase(hi / lo)

    h = step
    for _ in range(6):
        d_full = phase_diff(h)
        d_half = phase_diff(h / 2)
        if abs(d_full) < 0.5 * math.pi and abs(d_half) < 0.5 * math.pi:
            full = d_full / (2 * h)
            half = d_half / h
            return a * (4.0 * half - full) / 3.0
        h /= 4.0
    raise PhaseRefinementError(
        f"phase of S[{i}][{j}] varies too rapidly near kappa = {kappa} "
        "for a stable derivative"
    )


def effective_length_at_energy(
    B: np.ndarray,
    D: np.ndarray,
    E0: float,
    lattice: LatticeParams,
    energy_eV: float,
    pair: tuple[int, int],
    step: float = 1e-5,
) -> float:
    """`effective_length` of a junction solved at a given incoming energy."""
    kappa0 = energy_to_momentum(energy_eV, lattice)

    def s_of_kappa(k: float) -> np.ndarray:
        return s_matrix(B, D, E0, lattice, momentum_to_energy(k, lattice))

    return effective_length(s_of_kappa, kappa0, pair, lattice.a, step=step)


# ---------------------------------------------------------------------------
# Exact references


def chain_s_matrix(G: int, kappa: float) -> np.ndarray:
    """Two-lead S-matrix of a G-site uniform chain at hopping beta.

    The chain is reflectionless at every energy inside the band and simply
    delays the wave by its length: S11 = S22 = 0 and
    S21 = S12 = exp(i * kappa * (G - 1)).
    """
    if G < 1:
        raise InputError(f"chain needs at least one site, got G = {G}")
    t = cmath.exp(1j * kappa * (G - 1))
    return np.array([[0.0, t], [t, 0.0]], dtype=complex)


def chain_coupling(G: int, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Cast the G-site chain as (B, D) via its eigendecomposition.

    Feeding the result to `s_matrix` with E0 = 0 and a cosine-dispersion
    lattice of the same beta must reproduce `chain_s_matrix`.
    """
    if G < 1:
        raise InputError(f"chain needs at least one site, got G = {G}")
    h = np.full(G, 2.0 * beta)
    ham = np.diag(h)
    idx = np.arange(G - 1)
    ham[idx, idx + 1] = -beta
    ham[idx + 1, idx] = -beta
    evals, vecs = np.linalg.eigh(ham)
    B = np.zeros((G, 2), dtype=complex)
    B[:, 0] = -beta * vecs[0, :]
    B[:, 1] = -beta * vecs[G - 1, :]
    return B, evals


def splitter_total_transmission(
    V_ratios: Sequence[float], phi: float, N: int
) -> float:
    """Closed-form summed transmission out of lead 1 for separable couplings.

    ``V_ratios`` are (v2, v3) for N = 3 or (v2, v3, v4) for N = 4, each
    v_n = V_n / V_1; ``phi`` is the phase of the input-channel response.
    For N = 3 the sum covers both output leads and reaches cos(phi)^2
    exactly when v2^2 + v3^2 = 1; for N = 4 it covers leads 3 and 4 and
    stays below cos(phi)^2 / (1 + v2^2) whenever v2 > 0.
    """
    ratios = [float(v) for v in V_ratios]
    if N == 3:
        if len(ratios) != 2:
            raise InputError("N = 3 takes ratios (v2, v3)")
        v2, v3 = ratios
        out = v2 * v2 + v3 * v3
        total = 1.0 + out
    elif N == 4:
        if len(ratios) != 3:
            raise InputError("N = 4 takes ratios (v2, v3, v4)")
        v2, v3, v4 = ratios
        out = v3 * v3 + v4 * v4
        total = 1.0 + v2 * v2 + out
    else:
        raise InputError(f"closed form known for N in (3, 4), got N = {N}")
    return 4.0 * math.cos(phi) ** 2 * out / total**2


def splitter_phase(psi_column: np.ndarray, state_column: np.ndarray) -> float:
    """Phase of the input-channel response K for a separable junction.

    ``psi_column`` is the bound-amplitude column of the incoming lead,
    ``state_column`` the separable per-state coupling column; 1/K is their
    overlap sum_g psi[g] * conj(c[g]).
    """
    k_inv = complex(np.vdot(np.asarray(state_column), np.asarray(psi_column)))
    if abs(k_inv) < PHASE_AMPLITUDE_FLOOR:
        raise NumericalError("channel response vanishes; phase undefined")
    return -cmath.phase(k_inv)
