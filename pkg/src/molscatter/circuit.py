"""Qubit layer: splitter gates, the controlled phase, and the Hadamard test.

A qubit is the position of one electron on a pair of leads. A three-lead
junction whose reflection is negligible acts as a one-qubit beam splitter;
two electrons passing each other on adjacent leads pick up a relative
phase, which is a controlled-phase gate in this encoding; a second junction
recombines the arms. The readout probability of the composed circuit is the
interference signal (1 + cos phi)/2 when the splitter is balanced.

Lead indices follow the junction convention: lead 0 is the splitter input,
leads 1 and 2 its arms; after relabeling, lead 2 of the recombiner is the
readout. S-matrices are indexed S[out][in] throughout.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GateError, InputError

UNITARY_TOL = 1e-10
SYMMETRY_TOL = 1e-8
NORM_TOL = 1e-10
REFLECTION_LIMIT = 1e-3

# Arm relabeling that turns a splitter (input on lead 0) into a recombiner
# (readout on lead 2): old lead 0 -> 2, 1 -> 0, 2 -> 1.
_RECOMBINER_RELABEL = (2, 0, 1)


def _unitarity_defect(U: np.ndarray) -> float:
    return float(np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0])))


class GateKind(enum.Enum):
    SPLITTER = "splitter"
    CPHASE = "cphase"
    RECOMBINER = "recombiner"


@dataclass(frozen=True)
class GateOp:
    """One circuit element: an embedded unitary plus its role."""

    kind: GateKind
    matrix: np.ndarray
    phi: float | None = None
    input_lead: int | None = None

    def __post_init__(self):
        U = np.asarray(self.matrix, dtype=complex)
        if U.ndim != 2 or U.shape[0] != U.shape[1]:
            raise InputError(f"gate matrix must be square, got {U.shape}")
        defect = _unitarity_defect(U)
        if defect > UNITARY_TOL:
            raise GateError(
                f"{self.kind.value} matrix is not unitary "
                f"(defect {defect:.2e} > {UNITARY_TOL:.0e})"
            )
        object.__setattr__(self, "matrix", U)


@dataclass(frozen=True)
class LeadState:
    """Normalized amplitude vector over leads (or lead pairs)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.ndim != 1 or amp.size == 0:
            raise InputError("amplitudes must form a non-empty vector")
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > NORM_TOL:
            raise InputError(f"state norm {norm} is not 1 within {NORM_TOL:.0e}")
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def on_lead(cls, lead: int, n_leads: int) -> "LeadState":
        amp = np.zeros(n_leads, dtype=complex)
        amp[lead] = 1.0
        return cls(amp)

    def probability(self, index: int) -> float:
        return float(abs(self.amplitudes[index]) ** 2)


def propagate(state: LeadState, ops: list[GateOp] | tuple[GateOp, ...]) -> LeadState:
    """Apply each gate's unitary in order; norm is preserved by construction."""
    amp = state.amplitudes
    for op in ops:
        if op.matrix.shape[1] != amp.size:
            raise InputError(
                f"{op.kind.value} acts on {op.matrix.shape[1]} amplitudes, "
                f"state has {amp.size}"
            )
        amp = op.matrix @ amp
    return LeadState(amp)


def ideal_splitter() -> np.ndarray:
    """Lossless symmetric splitter: no reflection, equal real arms.

    The arm-arm block is the unique real symmetric unitary completion.
    """
    s = 1.0 / math.sqrt(2.0)
    return np.array(
        [
            [0.0, s, s],
            [s, 0.5, -0.5],
            [s, -0.5, 0.5],
        ],
        dtype=complex,
    )


def relabel_leads(S: np.ndarray, relabel: tuple[int, ...]) -> np.ndarray:
    """Return the same junction with lead i renamed relabel[i]."""
    S = np.asarray(S, dtype=complex)
    n = S.shape[0]
    if sorted(relabel) != list(range(n)):
        raise InputError(f"relabel {relabel} is not a permutation of 0..{n - 1}")
    out = np.empty_like(S)
    for i in range(n):
        for j in range(n):
            out[relabel[i], relabel[j]] = S[i, j]
    return out


def recombiner_matrix(S_split: np.ndarray) -> np.ndarray:
    """The splitter reused as the recombiner, readout on lead 2."""
    return relabel_leads(S_split, _RECOMBINER_RELABEL)


def _arm_wiring() -> np.ndarray:
    """Permutation routing splitter outputs onto recombiner inputs.

    Arm 1 feeds recombiner lead 0, arm 2 feeds lead 1; the input-lead slot
    maps to the readout port, which carries amplitude only through whatever
    reflected at the splitter.
    """
    P = np.zeros((3, 3), dtype=complex)
    for old, new in enumerate(_RECOMBINER_RELABEL):
        P[new, old] = 1.0
    return P


def recombiner_op(S_split: np.ndarray) -> GateOp:
    """Recombiner as a pipeline element, arm wiring folded in.

    Its matrix acts directly on splitter-indexed amplitudes and reads out
    on index 2, so [splitter, phase, recombiner] composes by plain matrix
    products.
    """
    wired = recombiner_matrix(S_split) @ _arm_wiring()
    return GateOp(kind=GateKind.RECOMBINER, matrix=wired)


@dataclass(frozen=True)
class SplitterGate:
    """Validated splitter extraction: normalized arm pair and global phase."""

    amplitudes: tuple[complex, complex]
    theta: float
    reflection: float
    op: GateOp = field(repr=False)


def splitter_gate(
    S: np.ndarray, input_lead: int = 0, eps_refl: float = REFLECTION_LIMIT
) -> SplitterGate:
    """Extract the one-qubit gate a three-lead junction performs.

    The junction realizes a splitter at this energy only if almost nothing
    reflects back into the input; the returned arm amplitudes are then the
    normalized transmission pair and theta the global phase carried by the
    first arm.
    """
    S = np.asarray(S, dtype=complex)
    if S.shape != (3, 3):
        raise InputError(f"splitter extraction expects a 3x3 S-matrix, got {S.shape}")
    if not 0 <= input_lead < 3:
        raise InputError(f"input lead {input_lead} out of range")
    col = S[:, input_lead]
    refl = float(abs(col[input_lead]) ** 2)
    if refl >= eps_refl:
        raise GateError(
            f"reflection {refl:.3e} at the input lead exceeds {eps_refl:.0e}; "
            "no splitter gate is realized at this energy"
        )
    arms = [i for i in range(3) if i != input_lead]
    t = col[arms]
    if min(abs(t)) < 1e-12:
        raise GateError("one arm receives no amplitude; not a splitter")
    t = t / np.linalg.norm(t)
    return SplitterGate(
        amplitudes=(complex(t[0]), complex(t[1])),
        theta=cmath.phase(col[arms[0]]),
        reflection=refl,
        op=GateOp(kind=GateKind.SPLITTER, matrix=S, input_lead=input_lead),
    )


def cphase_gate(phi: float) -> GateOp:
    """Two-qubit controlled phase over (|00>, |01>, |10>, |11>).

    Only |10> acquires the phase: the arm electron passes the interaction
    region while the control electron is present on its lead.
    """
    U = np.diag([1.0, 1.0, cmath.exp(1j * phi), 1.0]).astype(complex)
    return GateOp(kind=GateKind.CPHASE, matrix=U, phi=float(phi))


def arm_phase_gate(phi: float) -> GateOp:
    """The controlled phase seen by the arm electron alone (control at |0>).

    Acting on three-lead amplitudes: the arm on lead 2 picks up e^{i phi},
    the other arm and the input lead are untouched.
    """
    U = np.diag([1.0, 1.0, cmath.exp(1j * phi)]).astype(complex)
    return GateOp(kind=GateKind.CPHASE, matrix=U, phi=float(phi))


def _check_recombiner_symmetries(S: np.ndarray, R: np.ndarray, tol: float):
    """The interference algebra needs symmetric arms and time reversal."""
    if np.max(np.abs(S - S.T)) > tol:
        raise GateError("S-matrix is not symmetric; time reversal is broken")
    pairs = [
        (abs(R[2, 0] - R[2, 1]), "unequal arm-to-readout transmissions"),
        (abs(R[0, 0] - R[1, 1]), "unequal arm reflections"),
        (abs(R[1, 0] - R[0, 1]), "asymmetric arm-arm exchange"),
    ]
    for defect, label in pairs:
        if defect > tol:
            raise GateError(f"{label} (defect {defect:.2e} > {tol:.0e})")


def hadamard_test(
    S_split: np.ndarray, phi: float, q: int = 0, tol: float = SYMMETRY_TOL
) -> float:
    """Readout probability of the two-junction interference circuit.

    The electron splits, one arm conditionally acquires phi (only when the
    control qubit is 0), and the arms recombine through the relabeled
    junction; returns the probability on the readout lead. For a balanced
    reflection-free splitter this is (1 + cos phi)/2; residual reflection
    perturbs it by at most about twice the reflection amplitude, because
    the reflected part re-enters the second junction through its readout
    port.
    """
    S = np.asarray(S_split, dtype=complex)
    if S.shape != (3, 3):
        raise InputError(f"expected a 3x3 splitter S-matrix, got {S.shape}")
    if q not in (0, 1):
        raise InputError(f"control qubit value must be 0 or 1, got {q}")
    _check_recombiner_symmetries(S, recombiner_matrix(S), tol)
    state = propagate(LeadState.on_lead(0, 3), circuit_ops(S, phi, q))
    return state.probability(2)


def circuit_ops(S_split: np.ndarray, phi: float, q: int = 0) -> list[GateOp]:
    """The interference pipeline as explicit gates on splitter-indexed leads."""
    applied = phi if q == 0 else 0.0
    return [
        GateOp(kind=GateKind.SPLITTER, matrix=np.asarray(S_split, dtype=complex),
               input_lead=0),
        arm_phase_gate(applied),
        recombiner_op(S_split),
    ]
