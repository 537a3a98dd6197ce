"""Figure rendering for the sweep commands.

Every renderer takes already-computed table data and writes one PNG next
to the CSV it illustrates; nothing here recomputes physics. The Agg
backend is forced so the CLI works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .scatter1 import SpectrumTable
from .scatter2 import PhaseSpectrum


def render_spectrum1(table: SpectrumTable, path: str, input_lead: int = 0) -> str:
    """Transmission magnitudes and phases of one S-matrix column vs energy."""
    n = table.s.shape[1]
    fig, (ax_mag, ax_ph) = plt.subplots(2, 1, sharex=True, figsize=(7, 6))
    for out in range(n):
        if out == input_lead:
            label = "$|R|^2$"
            style = {"color": "0.45", "lw": 1.0, "ls": "--"}
        else:
            label = f"$|T_{{{input_lead + 1}{out + 1}}}|^2$"
            style = {"lw": 1.4}
        ax_mag.plot(table.energies, np.abs(table.s[:, out, input_lead]) ** 2,
                    label=label, **style)
        ax_ph.plot(table.energies, table.arg_s[:, out, input_lead],
                   label=label, lw=1.0)
    ax_mag.set_ylabel("probability")
    ax_mag.set_ylim(-0.02, 1.02)
    ax_mag.legend(loc="best", fontsize=9)
    ax_ph.set_ylabel("phase (rad)")
    ax_ph.set_xlabel("incoming energy (eV)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_spectrum2(spec: PhaseSpectrum, path: str) -> str:
    """Two-electron transmission magnitude and phase vs kinetic energy."""
    fig, (ax_mag, ax_ph) = plt.subplots(2, 1, sharex=True, figsize=(7, 6))
    ax_mag.plot(spec.energies, np.abs(spec.T) ** 2, lw=1.4, color="C0")
    ax_mag.set_ylabel("$|T|^2$")
    ax_mag.set_ylim(-0.02, 1.02)
    ax_ph.plot(spec.energies, spec.arg_T, lw=1.2, color="C1")
    ax_ph.set_ylabel(r"$\arg T$ (rad)")
    ax_ph.set_xlabel("kinetic energy per electron (eV)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_splitter(
    energies: np.ndarray,
    arm_t2: np.ndarray,
    reflection: np.ndarray,
    path: str,
    design_energy: float | None = None,
) -> str:
    """Per-arm transmissions and reflection of a three-lead junction sweep."""
    fig, ax = plt.subplots(figsize=(7, 4.2))
    ax.plot(energies, arm_t2[:, 0], lw=1.4, label="$|T_{12}|^2$")
    ax.plot(energies, arm_t2[:, 1], lw=1.4, ls=":", label="$|T_{13}|^2$")
    ax.plot(energies, reflection, lw=1.0, color="0.45", ls="--", label="$|R|^2$")
    ax.axhline(0.5, color="0.8", lw=0.8, zorder=0)
    if design_energy is not None:
        ax.axvline(design_energy, color="C3", lw=0.9, alpha=0.7)
    ax.set_xlabel("incoming energy (eV)")
    ax.set_ylabel("probability")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="best", fontsize=9)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
