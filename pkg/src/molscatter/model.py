"""Physical setting shared by every solver in the package.

Leads are semi-infinite tight-binding chains with lattice constant ``a``
and hopping ``beta``; the junction between them is described by many-body
eigenstates in an occupation-number basis. This module holds the parameter
containers, the energy/momentum mapping for both supported dispersions,
the molecule file format, and the validation rules everything else
relies on.

Units: energies in eV, lengths in angstrom, masses in electron masses.
Momenta appear as the dimensionless phase per site kappa = p*a/hbar.
"""

from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import InputError, SchemaError

# hbar^2 / (2 m_e) in eV * angstrom^2
K_KIN = 3.80998
# Coulomb prefactor k*q^2 for two electrons, in eV * angstrom
K_COULOMB = 14.39964
# The continuum and lattice dispersions separate noticeably past this kappa.
KAPPA_VALID_MAX = 0.3


class DispersionValidityWarning(UserWarning):
    """Momentum large enough that the quadratic band approximation degrades."""


class OrbitalNormWarning(UserWarning):
    """Integrated orbital weight exceeded 1 and was clamped."""


class Dispersion(enum.Enum):
    """Lead band structure used to translate energies into momenta."""

    QUADRATIC = "quadratic"
    COSINE = "cosine"

    @classmethod
    def parse(cls, label: str) -> "Dispersion":
        try:
            return cls(label.strip().lower())
        except ValueError:
            raise InputError(
                f"unknown dispersion {label!r}, expected 'quadratic' or 'cosine'"
            ) from None


def canonical_beta(a: float, m: float = 1.0) -> float:
    """Hopping that matches the quadratic band bottom: hbar^2/(2 m a^2), in eV."""
    if a <= 0 or m <= 0:
        raise InputError("lattice constant and mass must be positive")
    return K_KIN / (m * a * a)


@dataclass(frozen=True)
class LatticeParams:
    """Lead discretization: spacing ``a`` (angstrom), hopping ``beta`` (eV),
    carrier mass ``m`` (electron masses) and the dispersion used for the
    energy/momentum mapping.
    """

    a: float
    beta: float
    m: float = 1.0
    dispersion: Dispersion = Dispersion.QUADRATIC

    def __post_init__(self):
        if self.a <= 0:
            raise InputError(f"lattice constant must be positive, got {self.a}")
        if self.beta <= 0:
            raise InputError(f"hopping beta must be positive, got {self.beta}")
        if self.m <= 0:
            raise InputError(f"mass must be positive, got {self.m}")
        if not isinstance(self.dispersion, Dispersion):
            object.__setattr__(self, "dispersion", Dispersion.parse(self.dispersion))

    @classmethod
    def canonical(
        cls, a: float, m: float = 1.0, dispersion: Dispersion = Dispersion.QUADRATIC
    ) -> "LatticeParams":
        """Lattice whose hopping reproduces the free-particle mass ``m``."""
        return cls(a=a, beta=canonical_beta(a, m), m=m, dispersion=dispersion)


def energy_to_momentum(energy_eV: float, lattice: LatticeParams) -> float:
    """Map an incoming kinetic energy to the per-site phase kappa.

    Quadratic mode inverts E = p^2/2m, cosine mode inverts the exact band
    E = 2*beta*(1 - cos kappa), which requires 0 <= E <= 4*beta. Values of
    kappa beyond ``KAPPA_VALID_MAX`` trigger a `DispersionValidityWarning`
    because the two mappings stop agreeing there.
    """
    if energy_eV < 0:
        raise InputError(f"kinetic energy must be non-negative, got {energy_eV}")
    if lattice.dispersion is Dispersion.QUADRATIC:
        kappa = lattice.a * math.sqrt(lattice.m * energy_eV / K_KIN)
    else:
        x = 1.0 - energy_eV / (2.0 * lattice.beta)
        if x < -1.0:
            raise InputError(
                f"energy {energy_eV} eV lies above the cosine band top "
                f"4*beta = {4.0 * lattice.beta} eV"
            )
        kappa = math.acos(x)
    if kappa > KAPPA_VALID_MAX:
        warnings.warn(
            f"kappa = {kappa:.4f} exceeds {KAPPA_VALID_MAX}; the lattice and "
            "continuum dispersions differ appreciably here",
            DispersionValidityWarning,
            stacklevel=2,
        )
    return kappa


def momentum_to_energy(kappa: float, lattice: LatticeParams) -> float:
    """Inverse of `energy_to_momentum`; kappa is taken as a magnitude."""
    k = abs(kappa)
    if lattice.dispersion is Dispersion.QUADRATIC:
        return K_KIN * (k / lattice.a) ** 2 / lattice.m
    if k > math.pi:
        raise InputError(f"kappa = {k} outside the first Brillouin zone")
    return 2.0 * lattice.beta * (1.0 - math.cos(k))


@dataclass(frozen=True)
class OccupationVector:
    """Spin-orbital occupation pattern, e.g. "1100".

    Index 0 is the leftmost character. The ordering fixes the fermionic
    sign convention used when comparing two patterns.
    """

    bits: str

    def __post_init__(self):
        if not self.bits:
            raise InputError("occupation vector must not be empty")
        if any(c not in "01" for c in self.bits):
            raise InputError(f"occupation vector {self.bits!r} must be 0/1 only")

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def popcount(self) -> int:
        return self.bits.count("1")

    def occupied(self) -> tuple[int, ...]:
        return tuple(i for i, c in enumerate(self.bits) if c == "1")

    def __str__(self) -> str:
        return self.bits


@dataclass(frozen=True)
class CIState:
    """One many-body eigenstate as a configuration-interaction expansion.

    ``terms`` maps occupation patterns to complex coefficients; ``energy_eV``
    is the eigenvalue and ``electron_count`` the particle number every term
    should share. Consistency beyond basic shape is checked by
    `validate_molecule`, so ill-formed states can still be constructed and
    then reported on.
    """

    terms: tuple[tuple[OccupationVector, complex], ...]
    energy_eV: float
    electron_count: int

    def __post_init__(self):
        if not self.terms:
            raise InputError("CI state needs at least one term")
        norm_terms = tuple(
            (occ if isinstance(occ, OccupationVector) else OccupationVector(occ), complex(c))
            for occ, c in self.terms
        )
        object.__setattr__(self, "terms", norm_terms)
        if not all(map(math.isfinite, (self.energy_eV,))):
            raise InputError("state energy must be finite")
        for _, c in self.terms:
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise InputError("CI coefficients must be finite")

    def norm_sq(self) -> float:
        return sum(abs(c) ** 2 for _, c in self.terms)

    def coefficient(self, occ: OccupationVector) -> complex:
        for o, c in self.terms:
            if o.bits == occ.bits:
                return c
        return 0.0 + 0.0j


@dataclass(frozen=True)
class MoleculeModel:
    """Junction electronic structure: one neutral ground state plus the
    charged (one extra electron) eigenstates it can virtually occupy, and
    the per-orbital weights of each spin orbital in the coupling region.
    """

    name: str
    M: int
    neutral: CIState
    charged: tuple[CIState, ...]
    orbital_factors: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "charged", tuple(self.charged))
        object.__setattr__(
            self, "orbital_factors", tuple(float(v) for v in self.orbital_factors)
        )
        if self.M <= 0:
            raise InputError(f"orbital count M must be positive, got {self.M}")
        if not self.charged:
            raise InputError("molecule needs at least one charged state")

    @property
    def n_charged(self) -> int:
        return len(self.charged)


@dataclass(frozen=True)
class LeadConfig:
    """How ``N`` leads attach to the molecule.

    The separable form couples lead ``n`` to orbital ``p`` with strength
    ``lead_factors[n] * orbital_factors[p]``; ``full_matrix`` (N x M)
    overrides that product when given.
    """

    lead_factors: tuple[complex, ...]
    full_matrix: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "lead_factors", tuple(complex(v) for v in self.lead_factors)
        )
        if not self.lead_factors:
            raise InputError("at least one lead is required")
        if self.full_matrix is not None:
            fm = np.asarray(self.full_matrix, dtype=complex)
            if fm.ndim != 2 or fm.shape[0] != len(self.lead_factors):
                raise InputError(
                    f"full coupling matrix must be N x M with N = "
                    f"{len(self.lead_factors)}, got shape {fm.shape}"
                )
            object.__setattr__(self, "full_matrix", fm)

    @property
    def n_leads(self) -> int:
        return len(self.lead_factors)

    def coupling_matrix(self, molecule: MoleculeModel) -> np.ndarray:
        """Per-lead, per-orbital couplings V[n, p] in eV."""
        if self.full_matrix is not None:
            if self.full_matrix.shape[1] != molecule.M:
                raise InputError(
                    f"full coupling matrix has {self.full_matrix.shape[1]} orbitals, "
                    f"molecule has {molecule.M}"
                )
            return self.full_matrix
        v_lead = np.array(self.lead_factors, dtype=complex)
        v_orb = np.array(molecule.orbital_factors, dtype=float)
        return np.outer(v_lead, v_orb)


@dataclass(frozen=True)
class OrbitalGrid:
    """Sampled |chi_p|^2 values inside a chosen integration region.

    For each orbital index the grid stores sample positions (angstrom),
    densities (1/angstrom^3) and per-sample voxel volumes (angstrom^3).
    The region itself is the caller's choice; integration only sums what
    is present.
    """

    samples: Mapping[int, tuple[np.ndarray, np.ndarray, np.ndarray]]

    def __post_init__(self):
        clean = {}
        for p, (pos, dens, vol) in dict(self.samples).items():
            pos = np.atleast_2d(np.asarray(pos, dtype=float))
            dens = np.asarray(dens, dtype=float).ravel()
            vol = np.asarray(vol, dtype=float).ravel()
            if vol.size == 1:
                vol = np.full_like(dens, vol.item())
            if pos.shape != (dens.size, 3) or vol.size != dens.size:
                raise InputError(
                    f"orbital {p}: positions, densities and volumes disagree in shape"
                )
            if np.any(dens < 0):
                raise InputError(f"orbital {p}: densities must be non-negative")
            if np.any(vol <= 0):
                raise InputError(f"orbital {p}: voxel volumes must be positive")
            clean[int(p)] = (pos, dens, vol)
        object.__setattr__(self, "samples", clean)


def integrate_orbital_factor(grid: OrbitalGrid, p: int) -> float:
    """Weight of orbital ``p`` inside the grid's region: sum of density * volume.

    The result is clamped to [0, 1]; exceeding 1 (quadrature error or an
    overcomplete region) raises an `OrbitalNormWarning`.
    """
    if p not in grid.samples:
        raise InputError(f"orbital {p} has no samples in this grid")
    _, dens, vol = grid.samples[p]
    total = float(np.dot(dens, vol))
    if total > 1.0:
        warnings.warn(
            f"orbital {p} integrates to {total:.6f} > 1; clamping",
            OrbitalNormWarning,
            stacklevel=2,
        )
        total = 1.0
    return max(total, 0.0)


@dataclass(frozen=True)
class Violation:
    """One validation finding: a stable machine-readable code, a location
    and a human-readable message."""

    code: str
    where: str
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.where}: {self.message}"


CI_NORM_TOL = 1e-8


def _validate_state(state: CIState, M: int, where: str) -> list[Violation]:
    found = []
    seen = set()
    for occ, _ in state.terms:
        if len(occ) != M:
            found.append(
                Violation(
                    "occupation-length",
                    where,
                    f"occupation {occ} has {len(occ)} orbitals, expected {M}",
                )
            )
        if occ.bits in seen:
            found.append(
                Violation(
                    "duplicate-occupation", where, f"occupation {occ} appears twice"
                )
            )
        seen.add(occ.bits)
        if occ.popcount != state.electron_count:
            found.append(
                Violation(
                    "electron-count",
                    where,
                    f"occupation {occ} holds {occ.popcount} electrons, "
                    f"state declares {state.electron_count}",
                )
            )
    norm = state.norm_sq()
    if abs(norm - 1.0) > CI_NORM_TOL:
        found.append(
            Violation("ci-norm", where, f"CI norm^2 = {norm:.10f}, expected 1")
        )
    return found


def validate_molecule(molecule: MoleculeModel) -> list[Violation]:
    """Every way the molecule fails its contracts, as an ordered list.

    An empty list means the molecule is usable by the solvers.
    """
    found = _validate_state(molecule.neutral, molecule.M, "neutral")
    expected = molecule.neutral.electron_count + 1
    for g, state in enumerate(molecule.charged):
        where = f"charged[{g}]"
        found.extend(_validate_state(state, molecule.M, where))
        if state.electron_count != expected:
            found.append(
                Violation(
                    "charged-electron-count",
                    where,
                    f"declares {state.electron_count} electrons, expected {expected}",
                )
            )
    energies = [s.energy_eV for s in molecule.charged]
    if any(b < a for a, b in zip(energies, energies[1:])):
        found.append(
            Violation(
                "charged-energy-order",
                "charged",
                f"energies {energies} are not sorted non-decreasing",
            )
        )
    if len(molecule.orbital_factors) != molecule.M:
        found.append(
            Violation(
                "orbital-factor-count",
                "orbital_factors",
                f"{len(molecule.orbital_factors)} factors for M = {molecule.M} orbitals",
            )
        )
    for p, v in enumerate(molecule.orbital_factors):
        if not (0.0 <= v <= 1.0):
            found.append(
                Violation(
                    "orbital-factor-range",
                    f"orbital_factors[{p}]",
                    f"value {v} outside [0, 1]",
                )
            )
    return found


# ---------------------------------------------------------------------------
# Molecule files

_STATE_FIELDS = {"energy_eV", "terms"}
_TERM_FIELDS = {"occ", "re", "im"}
_MOLECULE_FIELDS = {"name", "M", "neutral", "charged", "orbital_factors"}


def _check_fields(doc: Mapping, allowed: set, where: str):
    for key in doc:
        if key not in allowed:
            raise SchemaError(f"unknown field {key!r} in {where}")


def _require(doc: Mapping, key: str, where: str):
    if key not in doc:
        raise SchemaError(f"missing field {key!r} in {where}")
    return doc[key]


def _parse_state(doc: Mapping, electron_count: int, where: str) -> CIState:
    if not isinstance(doc, Mapping):
        raise SchemaError(f"{where} must be an object")
    _check_fields(doc, _STATE_FIELDS, where)
    energy = float(_require(doc, "energy_eV", where))
    raw_terms = _require(doc, "terms", where)
    if not isinstance(raw_terms, Sequence) or isinstance(raw_terms, str):
        raise SchemaError(f"{where}.terms must be a list")
    terms = []
    for i, t in enumerate(raw_terms):
        tw = f"{where}.terms[{i}]"
        if not isinstance(t, Mapping):
            raise SchemaError(f"{tw} must be an object")
        _check_fields(t, _TERM_FIELDS, tw)
        occ = OccupationVector(str(_require(t, "occ", tw)))
        coeff = complex(float(_require(t, "re", tw)), float(t.get("im", 0.0)))
        terms.append((occ, coeff))
    return CIState(terms=tuple(terms), energy_eV=energy, electron_count=electron_count)


def parse_molecule(doc: Mapping) -> MoleculeModel:
    """Build a `MoleculeModel` from a decoded molecule document.

    Unknown fields are rejected by name. Electron counts are inferred from
    the occupations themselves: the neutral count is the popcount of its
    first term, charged states take that plus one.
    """
    if not isinstance(doc, Mapping):
        raise SchemaError("molecule document must be an object")
    _check_fields(doc, _MOLECULE_FIELDS, "molecule")
    name = str(_require(doc, "name", "molecule"))
    M = int(_require(doc, "M", "molecule"))
    neutral_doc = _require(doc, "neutral", "molecule")
    charged_docs = _require(doc, "charged", "molecule")
    factors = _require(doc, "orbital_factors", "molecule")
    if not isinstance(charged_docs, Sequence) or isinstance(charged_docs, str):
        raise SchemaError("molecule.charged must be a list")
    if not isinstance(factors, Sequence) or isinstance(factors, str):
        raise SchemaError("molecule.orbital_factors must be a list")

    first_occ = None
    if isinstance(neutral_doc, Mapping):
        terms = neutral_doc.get("terms")
        if isinstance(terms, Sequence) and terms and isinstance(terms[0], Mapping):
            first_occ = str(terms[0].get("occ", ""))
    eta = first_occ.count("1") if first_occ else 0

    neutral = _parse_state(neutral_doc, eta, "neutral")
    charged = tuple(
        _parse_state(d, eta + 1, f"charged[{g}]") for g, d in enumerate(charged_docs)
    )
    return MoleculeModel(
        name=name,
        M=M,
        neutral=neutral,
        charged=charged,
        orbital_factors=tuple(float(v) for v in factors),
    )


def molecule_to_dict(molecule: MoleculeModel) -> dict:
    def state_doc(state: CIState) -> dict:
        return {
            "energy_eV": state.energy_eV,
            "terms": [
                {"occ": occ.bits, "re": c.real, "im": c.imag} for occ, c in state.terms
            ],
        }

    return {
        "name": molecule.name,
        "M": molecule.M,
        "neutral": state_doc(molecule.neutral),
        "charged": [state_doc(s) for s in molecule.charged],
        "orbital_factors": list(molecule.orbital_factors),
    }


def load_molecule(path: str | Path, validate: bool = True) -> MoleculeModel:
    """Read a molecule JSON file, rejecting unknown fields.

    With ``validate`` (the default) any `validate_molecule` finding is
    raised as an `InputError`; pass False to inspect a broken file.
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"molecule file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"molecule file {path} is not valid JSON: {exc}") from exc
    molecule = parse_molecule(doc)
    if validate:
        violations = validate_molecule(molecule)
        if violations:
            listing = "; ".join(str(v) for v in violations)
            raise InputError(f"molecule file {path} is invalid: {listing}")
    return molecule


def dump_molecule(molecule: MoleculeModel, path: str | Path):
    Path(path).write_text(json.dumps(molecule_to_dict(molecule), indent=2) + "\n")


def bundled_molecule_path(name: str = "h2_sto3g") -> Path:
    """Location of a data file shipped with the package."""
    p = Path(__file__).parent / "data" / f"{name}.json"
    if not p.exists():
        raise InputError(f"no bundled molecule named {name!r}")
    return p
