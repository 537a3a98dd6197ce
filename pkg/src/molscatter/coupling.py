"""Junction coupling matrix from configuration-interaction overlaps.

An incoming electron entering the molecule turns the neutral ground state
into one of the charged eigenstates. The amplitude for that process is a
sum over pairs of determinants that differ by exactly one added occupation,
weighted by the CI coefficients of both states and by the lead-orbital
coupling of the orbital that was filled.

Fermionic sign convention: adding an electron in orbital ``p`` to a ket
costs (-1)^(number of occupied orbitals left of p), with index 0 leftmost.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .model import (
    CIState,
    LeadConfig,
    MoleculeModel,
    OccupationVector,
    validate_molecule,
)


def single_creation_overlap(
    bra: OccupationVector, ket: OccupationVector
) -> tuple[int, int] | None:
    """Orbital index and sign of <bra| a_p^dag |ket>, or None if it vanishes.

    The bra must hold exactly one electron more than the ket; anything else
    is a caller error. None means the two patterns differ in more than the
    single added occupation.
    """
    if len(bra) != len(ket):
        raise InputError(
            f"occupation lengths differ: {bra} vs {ket}"
        )
    if bra.popcount != ket.popcount + 1:
        raise InputError(
            f"bra {bra} must hold exactly one more electron than ket {ket}"
        )
    added = None
    for p, (b, k) in enumerate(zip(bra.bits, ket.bits)):
        if b == k:
            continue
        if b == "1" and k == "0" and added is None:
            added = p
        else:
            return None
    if added is None:
        return None
    sign = -1 if ket.bits[:added].count("1") % 2 else 1
    return added, sign


def creation_amplitudes(molecule: MoleculeModel) -> np.ndarray:
    """Matrix A[g, p] = <charged_g| a_p^dag |neutral>, shape (G+1, M)."""
    amps = np.zeros((molecule.n_charged, molecule.M), dtype=complex)
    for g, state in enumerate(molecule.charged):
        for bra_occ, bra_c in state.terms:
            for ket_occ, ket_c in molecule.neutral.terms:
                hit = single_creation_overlap(bra_occ, ket_occ)
                if hit is None:
                    continue
                p, sign = hit
                amps[g, p] += sign * np.conj(bra_c) * ket_c
    return amps


@dataclass(frozen=True)
class CouplingMatrix:
    """Lead-to-charged-state couplings B[g, n] in eV, shape (G+1, N)."""

    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.ndim != 2:
            raise InputError(f"coupling matrix must be 2-D, got shape {entries.shape}")
        object.__setattr__(self, "entries", entries)

    @property
    def n_states(self) -> int:
        return self.entries.shape[0]

    @property
    def n_leads(self) -> int:
        return self.entries.shape[1]


def assemble_B(molecule: MoleculeModel, leads: LeadConfig) -> CouplingMatrix:
    """Couplings B[g, n] = sum_p conj(V[n, p]) <charged_g| a_p^dag |neutral>.

    The molecule must validate cleanly; the lead configuration supplies
    V[n, p] either separably or as a full matrix.
    """
    violations = validate_molecule(molecule)
    if violations:
        raise InputError(
            "cannot assemble couplings for an invalid molecule: "
            + "; ".join(str(v) for v in violations)
        )
    V = leads.coupling_matrix(molecule)
    A = creation_amplitudes(molecule)
    return CouplingMatrix(entries=A @ np.conj(V).T)


def state_coupling_column(molecule: MoleculeModel) -> np.ndarray:
    """Separable-form column c[g] = sum_p conj(V_p) <charged_g| a_p^dag |neutral>.

    With separable couplings, B[g, n] = conj(V_n) * c[g]; the column is what
    beam-splitter phase analysis needs independently of the lead factors.
    """
    v_orb = np.asarray(molecule.orbital_factors, dtype=float)
    return creation_amplitudes(molecule) @ np.conj(v_orb)
