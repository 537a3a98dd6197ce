"""One-electron S-matrix: algebraic invariants, exact references, sweeps.

The deepest check here embeds each scattering solution on a finite lattice
and verifies (H - E)|state> = 0 row by row, which ties the boundary-matrix
algebra to the Hamiltonian it claims to solve without sharing any code path.
"""

import cmath
import math

import numpy as np
import pytest

from molscatter import (
    InputError,
    LatticeParams,
    NumericalError,
    PhaseRefinementError,
    PoleError,
    PoleProximityWarning,
    build_truncated_hamiltonian,
    chain_coupling,
    chain_s_matrix,
    effective_length_at_energy,
    momentum_to_energy,
    read_spectrum_csv,
    s_matrix,
    scattering_solution,
    spectrum,
    splitter_phase,
    splitter_total_transmission,
    transmission_peaks,
    write_spectrum_csv,
)
from conftest import random_junction


def test_unitarity_random_junctions(quad_lattice):
    rng = np.random.default_rng(2024)
    energies = np.linspace(0.5, 18.0, 20)
    worst = 0.0
    for _ in range(40):
        B, D, E0 = random_junction(rng)
        for E in energies:
            S = s_matrix(B, D, E0, quad_lattice, E)
            n = S.shape[0]
            worst = max(worst, np.abs(S.conj().T @ S - np.eye(n)).max())
    assert worst < 1e-10


def test_reciprocity_real_couplings(cos_lattice):
    rng = np.random.default_rng(77)
    for _ in range(25):
        B, D, E0 = random_junction(rng)
        S = s_matrix(B, D, E0, cos_lattice, rng.uniform(0.5, 10.0))
        assert np.abs(S - S.T).max() < 1e-10


def test_complex_couplings_break_reciprocity_not_unitarity(quad_lattice):
    rng = np.random.default_rng(8)
    B = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    D = np.array([40.0, 60.0, -35.0])
    S = s_matrix(B, D, 0.0, quad_lattice, 4.0)
    assert np.abs(S.conj().T @ S - np.eye(3)).max() < 1e-12
    assert np.abs(S - S.T).max() > 1e-3


def test_zero_coupling_full_reflection(quad_lattice):
    B = np.zeros((2, 3))
    D = np.array([50.0, -50.0])
    for E in np.linspace(0.3, 12.0, 7):
        S = s_matrix(B, D, 0.0, quad_lattice, E)
        assert np.abs(S + np.eye(3)).max() < 1e-14


def test_scattering_state_solves_hamiltonian(cos_lattice):
    # embed the solution on truncated leads: every row of (H - E)|state>
    # must vanish except the two artificial truncation boundaries
    rng = np.random.default_rng(7)
    L = 120
    for _ in range(4):
        B, D, E0 = random_junction(rng, n_leads=3, n_states=4)
        kappa = rng.uniform(0.3, 2.2)
        E = momentum_to_energy(kappa, cos_lattice)
        sol = scattering_solution(B, D, E0, cos_lattice, E)
        lat = build_truncated_hamiltonian(B, D, E0, cos_lattice, L)
        H = lat.hamiltonian.toarray()
        n = B.shape[1]
        for inc in range(n):
            state = np.zeros(n * L + B.shape[0], dtype=complex)
            j = np.arange(1, L + 1)  # lead site x sits at lattice position x+1
            for lead in range(n):
                amp = sol.s[lead, inc] * np.exp(1j * kappa * j)
                if lead == inc:
                    amp = amp + np.exp(-1j * kappa * j)
                state[lead * L : (lead + 1) * L] = amp
            state[n * L :] = sol.psi[:, inc]
            resid = np.abs(H @ state - E * state)
            interior = np.concatenate(
                [resid[lead * L : lead * L + L - 1] for lead in range(n)]
                + [resid[n * L :]]
            )
            assert interior.max() < 1e-8


def test_dispersion_consistency_small_momentum():
    quad = LatticeParams.canonical(a=1.0, dispersion="quadratic")
    cos = LatticeParams.canonical(a=1.0, dispersion="cosine")
    rng = np.random.default_rng(31)
    B, D, E0 = random_junction(rng, n_leads=2, n_states=3)
    for kappa in (0.05, 0.1, 0.15, 0.199):
        E = momentum_to_energy(kappa, quad)
        Sq = s_matrix(B, D, E0, quad, E)
        Sc = s_matrix(B, D, E0, cos, E)
        assert np.abs(Sq - Sc).max() < 5.0 * kappa * kappa


def test_chain_closed_form():
    for G in (1, 2, 5):
        S = chain_s_matrix(G, 0.8)
        assert np.abs(S.conj().T @ S - np.eye(2)).max() < 1e-15
        assert S[0, 0] == 0.0
        assert S[1, 0] == pytest.approx(cmath.exp(1j * 0.8 * (G - 1)), abs=1e-15)
    with pytest.raises(InputError):
        chain_s_matrix(0, 0.5)


def test_chain_equivalence(cos_lattice):
    # casting the G-site chain as a junction must reproduce the closed form
    for G in range(1, 11):
        B, D = chain_coupling(G, cos_lattice.beta)
        for kappa in (0.4, 0.9, 1.7):
            E = momentum_to_energy(kappa, cos_lattice)
            S = s_matrix(B, D, 0.0, cos_lattice, E)
            assert np.abs(S - chain_s_matrix(G, kappa)).max() < 1e-9


def test_chain_effective_length_scales_with_a():
    lat = LatticeParams.canonical(a=2.0, dispersion="cosine")
    for G in (1, 3, 8):
        B, D = chain_coupling(G, lat.beta)
        E = momentum_to_energy(0.7, lat)
        ell = effective_length_at_energy(B, D, 0.0, lat, E, (1, 0))
        assert ell == pytest.approx(2.0 * (G - 1), abs=1e-6 * max(G - 1, 1))


def test_splitter_identity_three_leads(cos_lattice):
    # single separable state, v2 = v3 = 1/sqrt(2): summed transmission out of
    # the input lead equals cos^2 of the response phase at every energy
    v = np.array([1.0, 1 / math.sqrt(2), 1 / math.sqrt(2)])
    B = 2.0 * v[None, :]  # one charged state, couplings proportional to v
    D = np.array([18.0])
    for kappa in np.linspace(0.3, 2.6, 24):
        E = momentum_to_energy(kappa, cos_lattice)
        sol = scattering_solution(B, D, -2.0, cos_lattice, E)
        total = abs(sol.s[1, 0]) ** 2 + abs(sol.s[2, 0]) ** 2
        phi = splitter_phase(sol.psi[:, 0], np.array([1.0 + 0j]))
        assert total == pytest.approx(math.cos(phi) ** 2, abs=1e-9)
        assert total == pytest.approx(
            splitter_total_transmission((v[1], v[2]), phi, 3), abs=1e-9
        )


def test_splitter_four_lead_bound():
    rng = np.random.default_rng(19)
    for _ in range(200):
        v2 = rng.uniform(0.05, 3.0)
        v3, v4 = rng.uniform(0.0, 3.0, 2)
        phi = rng.uniform(-math.pi, math.pi)
        val = splitter_total_transmission((v2, v3, v4), phi, 4)
        bound = math.cos(phi) ** 2 / (1.0 + v2 * v2)
        assert val <= bound + 1e-12
        assert val <= math.cos(phi) ** 2 + 1e-12


def test_splitter_total_transmission_validation():
    with pytest.raises(InputError):
        splitter_total_transmission((0.5,), 0.1, 3)
    with pytest.raises(InputError):
        splitter_total_transmission((0.5, 0.5), 0.1, 4)
    with pytest.raises(InputError):
        splitter_total_transmission((0.5, 0.5), 0.1, 5)


def test_pole_handling(quad_lattice):
    B = np.array([[1.0, 0.5]])
    D = np.array([12.0])
    E0 = 2.0
    with pytest.raises(PoleError):
        s_matrix(B, D, E0, quad_lattice, 10.0)  # exactly on the resonance
    with pytest.warns(PoleProximityWarning):
        s_matrix(B, D, E0, quad_lattice, 10.0 + 3e-7)
    table = spectrum(B, D, E0, quad_lattice, [9.0, 10.0, 11.0])
    assert table.flags[1] is not None
    assert np.isnan(table.s[1]).all()
    assert table.flags[0] is None


def test_spectrum_table_consistency(h2, quad_lattice):
    from molscatter import LeadConfig, assemble_B

    B = assemble_B(h2, LeadConfig(lead_factors=(0.25, 0.25))).entries
    D = np.array([s.energy_eV for s in h2.charged])
    energies = np.linspace(1.0, 30.0, 240)
    table = spectrum(B, D, h2.neutral.energy_eV, quad_lattice, energies)
    assert table.n_leads == 2
    assert all(f is None for f in table.flags)
    valid = ~np.isnan(table.unitarity_defect)
    assert table.unitarity_defect[valid].max() < 1e-10
    assert np.allclose(table.t2, np.abs(table.s) ** 2, atol=1e-14)
    # narrow resonances swing the phase fast; every pair that moved more
    # than pi/2 per grid step must be flagged, every other pair must not be
    steps = np.abs(np.diff(table.arg_s, axis=0))
    flagged = set(table.phase_flags)
    for i in range(2):
        for j in range(2):
            fast = steps[:, i, j].max() > 0.5 * math.pi
            assert ((i, j) in flagged) == fast
    assert flagged  # this grid is too coarse for the weak-coupling resonance


def test_spectrum_jobs_deterministic(h2, quad_lattice):
    from molscatter import LeadConfig, assemble_B

    B = assemble_B(h2, LeadConfig(lead_factors=(1.0, 1.0))).entries
    D = np.array([s.energy_eV for s in h2.charged])
    energies = np.linspace(2.0, 28.0, 90)
    t1 = spectrum(B, D, h2.neutral.energy_eV, quad_lattice, energies, jobs=1)
    t4 = spectrum(B, D, h2.neutral.energy_eV, quad_lattice, energies, jobs=4)
    assert np.array_equal(t1.s, t4.s)
    assert np.array_equal(t1.arg_s, t4.arg_s)


def test_spectrum_strict_phases(quad_lattice):
    B = np.array([[2.0, 2.0]])
    D = np.array([12.0])
    # a coarse grid straddling the resonance jumps by more than pi/2
    energies = [6.0, 9.9, 14.0, 18.0]
    table = spectrum(B, D, 0.0, quad_lattice, energies)
    assert table.phase_flags
    with pytest.raises(PhaseRefinementError):
        spectrum(B, D, 0.0, quad_lattice, energies, strict_phases=True)


def test_spectrum_csv_round_trip(h2, quad_lattice, tmp_path):
    from molscatter import LeadConfig, assemble_B

    B = assemble_B(h2, LeadConfig(lead_factors=(0.5, 1.5))).entries
    D = np.array([s.energy_eV for s in h2.charged])
    energies = np.linspace(3.0, 22.0, 40)
    table = spectrum(B, D, h2.neutral.energy_eV, quad_lattice, energies)
    path = tmp_path / "spec.csv"
    write_spectrum_csv(table, path)
    back = read_spectrum_csv(path)
    assert np.allclose(back.energies, table.energies, rtol=1e-11)
    assert np.allclose(back.s, table.s, rtol=1e-10, atol=1e-11)
    assert np.allclose(back.t2, table.t2, rtol=1e-10, atol=1e-11)
    bad = tmp_path / "bad.csv"
    bad.write_text("energy,stuff\n1,2\n")
    with pytest.raises(InputError):
        read_spectrum_csv(bad)


def test_transmission_peaks():
    e = np.linspace(0.0, 10.0, 101)
    v = np.exp(-((e - 3.0) ** 2) / 0.1) + 0.5 * np.exp(-((e - 7.0) ** 2) / 0.2)
    peaks = transmission_peaks(e, v)
    assert len(peaks) >= 2
    assert peaks[0][0] == pytest.approx(3.0, abs=0.1)
    assert peaks[1][0] == pytest.approx(7.0, abs=0.1)
    # a NaN gap (failed rows) does not hide the flanking peak
    v2 = v.copy()
    v2[29:31] = np.nan
    peaks2 = transmission_peaks(e, v2)
    assert peaks2[0][0] == pytest.approx(3.0, abs=0.2)
    assert transmission_peaks(e, np.zeros_like(e), min_height=0.1) == []


def test_effective_length_matches_finite_difference(h2, quad_lattice):
    from molscatter import LeadConfig, assemble_B, energy_to_momentum

    B = assemble_B(h2, LeadConfig(lead_factors=(0.25, 0.25))).entries
    D = np.array([s.energy_eV for s in h2.charged])
    E0 = h2.neutral.energy_eV
    E = 12.0
    ell = effective_length_at_energy(B, D, E0, quad_lattice, E, (1, 0))
    kappa = energy_to_momentum(E, quad_lattice)
    h = 1e-6

    def phase_at(k):
        return cmath.phase(
            s_matrix(B, D, E0, quad_lattice, momentum_to_energy(k, quad_lattice))[1, 0]
        )

    fd = (phase_at(kappa + h) - phase_at(kappa - h)) / (2 * h)
    assert ell == pytest.approx(quad_lattice.a * fd, rel=1e-5)


def test_input_validation(quad_lattice):
    with pytest.raises(InputError):
        s_matrix(np.ones((2, 2)), np.ones(3), 0.0, quad_lattice, 1.0)
    with pytest.raises(InputError):
        effective_length_at_energy(
            np.ones((1, 2)), np.array([50.0]), 0.0, quad_lattice, 1.0, (1, 0), step=0.0
        )
