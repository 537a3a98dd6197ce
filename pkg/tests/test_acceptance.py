"""Acceptance gate: ten numbered criteria, one verdict line each.

Run `pytest tests/test_acceptance.py -v -s` to see the verdicts as they
are produced. Each criterion prints its measured numbers and PASS/FAIL
before asserting, so a red run still reports exactly what was achieved.
Criteria with runtime budgets time themselves and fail when over budget.
"""

import cmath
import math
import time

import numpy as np
import pytest

from molscatter import (
    LatticeParams,
    LeadConfig,
    TwoParticleProblem,
    Wavepacket,
    assemble_B,
    build_truncated_hamiltonian,
    bundled_molecule_path,
    chain_coupling,
    effective_length_at_energy,
    hadamard_test,
    ideal_splitter,
    load_molecule,
    momentum_averaged_transmission,
    momentum_to_energy,
    s_matrix,
    scattering_solution,
    solve_two_particle,
    spectrum,
    splitter_phase,
    transfer_matrix_two_particle,
    transmission_peaks,
    wavepacket_transmission,
)

COS = LatticeParams.canonical(a=1.0, dispersion="cosine")
QUAD = LatticeParams.canonical(a=1.0, dispersion="quadratic")

# Balanced operating point of the bundled molecule at arm factors
# (sqrt(2), 1, 1); located by the design sweep and pinned for criteria 6/9.
DESIGN_ENERGY_EV = 13.139071311090225


def verdict(num: int, label: str, ok: bool, detail: str) -> bool:
    print(f"criterion {num:02d} {label}: {detail} -> {'PASS' if ok else 'FAIL'}")
    return ok


@pytest.fixture(scope="module")
def h2():
    return load_molecule(bundled_molecule_path())


def h2_junction(h2, factors):
    B = assemble_B(h2, LeadConfig(lead_factors=factors)).entries
    D = np.array([state.energy_eV for state in h2.charged])
    return B, D, h2.neutral.energy_eV


def test_criterion_01_unitarity_ensemble():
    rng = np.random.default_rng(11)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 5))
        G = int(rng.integers(1, 7))
        B = rng.normal(size=(G, n)) * 3.0
        D = rng.uniform(30.0, 120.0, size=G) * rng.choice([-1.0, 1.0], size=G)
        E0 = rng.uniform(-5.0, 5.0)
        lattice = COS if rng.integers(2) else QUAD
        hi = 14.9 if lattice is COS else 30.0
        for E in rng.uniform(0.3, hi, size=100):
            S = s_matrix(B, D, E0, lattice, float(E))
            worst = max(
                worst, float(np.linalg.norm(np.conj(S).T @ S - np.eye(n)))
            )
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and elapsed < 10.0
    assert verdict(
        1, "unitarity over 200 random junctions x 100 energies", ok,
        f"max defect {worst:.2e} (tol 1e-10), {elapsed:.1f}s (budget 10s)",
    )


def test_criterion_02_zero_coupling_full_reflection():
    B = np.zeros((2, 3))
    D = np.array([50.0, -80.0])
    worst = 0.0
    for E in np.linspace(0.5, 14.5, 50):
        S = s_matrix(B, D, 0.0, COS, float(E))
        worst = max(worst, float(np.abs(S + np.eye(3)).max()))
    ok = worst < 1e-14
    assert verdict(
        2, "decoupled junction reflects with S = -I", ok,
        f"max |S + I| = {worst:.2e} (tol 1e-14) at 50 energies",
    )


def test_criterion_03_chain_closed_form():
    worst_s = 0.0
    worst_len = 0.0
    for kappa in (0.4, 0.9, 1.7):
        energy = momentum_to_energy(kappa, COS)
        for G in range(1, 11):
            B, D = chain_coupling(G, COS.beta)
            S = s_matrix(B, D, 0.0, COS, energy)
            through = cmath.exp(1j * kappa * (G - 1))
            expected = np.array([[0.0, through], [through, 0.0]])
            worst_s = max(worst_s, float(np.abs(S - expected).max()))
            ell = effective_length_at_energy(B, D, 0.0, COS, energy, (1, 0))
            target = COS.a * (G - 1)
            worst_len = max(
                worst_len, abs(ell - target) / max(target, COS.a)
            )
    ok = worst_s < 1e-9 and worst_len < 1e-6
    assert verdict(
        3, "embedded chains transmit perfectly with linear phase", ok,
        f"max S defect {worst_s:.2e} (tol 1e-9), "
        f"max length error {worst_len:.2e} (tol 1e-6), G = 1..10",
    )


def test_criterion_04_splitter_identities():
    # three leads, equal arms: summed transmission equals cos^2 of the
    # response phase at every energy
    v = np.array([1.0, 1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0)])
    B3 = 2.0 * v[None, :]
    D3 = np.array([18.0])
    worst3 = 0.0
    for kappa in np.linspace(0.3, 2.6, 60):
        sol = scattering_solution(
            B3, D3, -2.0, COS, momentum_to_energy(float(kappa), COS)
        )
        total = abs(sol.s[1, 0]) ** 2 + abs(sol.s[2, 0]) ** 2
        phi = splitter_phase(sol.psi[:, 0], np.array([1.0 + 0j]))
        worst3 = max(worst3, abs(total - math.cos(phi) ** 2))

    # four leads: the extra arm caps what the two outputs can carry
    rng = np.random.default_rng(17)
    margin4 = 0.0
    for _ in range(200):
        v2 = rng.uniform(0.05, 2.5)
        v3, v4 = rng.uniform(0.1, 2.5, 2)
        B4 = rng.uniform(0.5, 3.0) * np.array([[1.0, v2, v3, v4]])
        D4 = np.array([rng.uniform(20.0, 70.0) * rng.choice([-1.0, 1.0])])
        sol = scattering_solution(
            B4, D4, rng.uniform(-3.0, 3.0), COS,
            momentum_to_energy(rng.uniform(0.3, 2.7), COS),
        )
        total = abs(sol.s[2, 0]) ** 2 + abs(sol.s[3, 0]) ** 2
        phi = splitter_phase(sol.psi[:, 0], np.array([1.0 + 0j]))
        bound = math.cos(phi) ** 2 / (1.0 + v2 * v2)
        margin4 = max(margin4, total - bound)
    ok = worst3 < 1e-9 and margin4 < 1e-9
    assert verdict(
        4, "splitter transmission identities", ok,
        f"three-lead identity defect {worst3:.2e} (tol 1e-9), "
        f"four-lead bound excess {margin4:.2e} (tol 1e-9)",
    )


def test_criterion_05_molecular_peaks_and_shift(h2):
    t0 = time.perf_counter()
    B, D, E0 = h2_junction(h2, (0.25, 0.25))
    table = spectrum(B, D, E0, QUAD, np.linspace(10.0, 30.0, 800))
    peaks = transmission_peaks(table.energies, table.t2[:, 1, 0], min_height=1e-12)
    positions = [e for e, _ in peaks]
    offsets = [
        min(abs(p - target) for p in positions) for target in (13.05, 24.74)
    ]
    near_ok = max(offsets) <= 0.5

    lower = []
    for V in (0.25, 2.0, 4.0, 8.0):
        Bv, _, _ = h2_junction(h2, (V, V))
        tab = spectrum(Bv, D, E0, QUAD, np.linspace(10.0, 22.0, 900))
        pk = transmission_peaks(tab.energies, tab.t2[:, 1, 0], min_height=1e-9)
        lower.append(pk[0][0])
    shift_ok = all(b > a for a, b in zip(lower, lower[1:]))
    elapsed = time.perf_counter() - t0
    ok = near_ok and shift_ok and elapsed < 5.0
    assert verdict(
        5, "bundled-molecule resonances and coupling shift", ok,
        f"weak-coupling peaks off by {offsets[0]:.3f}/{offsets[1]:.3f} eV "
        f"(tol 0.5), lower peak {'/'.join(f'{p:.2f}' for p in lower)} eV "
        f"monotone={shift_ok}, {elapsed:.1f}s (budget 5s)",
    )


def test_criterion_06_balanced_three_lead_point(h2):
    B, D, E0 = h2_junction(h2, (math.sqrt(2.0), 1.0, 1.0))
    S = s_matrix(B, D, E0, QUAD, DESIGN_ENERGY_EV)
    t12 = abs(S[1, 0]) ** 2
    t13 = abs(S[2, 0]) ** 2
    r2 = abs(S[0, 0]) ** 2
    ok = abs(t12 - 0.5) <= 0.02 and abs(t13 - 0.5) <= 0.02 and r2 < 0.02
    status = "found" if ok else "not-achieved"
    assert verdict(
        6, "half/half splitting with sqrt(2) input coupling", ok,
        f"{status}: E = {DESIGN_ENERGY_EV:.6f} eV, |T12|^2 = {t12:.4f}, "
        f"|T13|^2 = {t13:.4f}, |R|^2 = {r2:.1e}",
    )


def test_criterion_07_pair_flux_and_transfer_match():
    t0 = time.perf_counter()
    worst_flux = 0.0
    for E in np.linspace(0.005, 0.5, 200):
        sol = solve_two_particle(
            TwoParticleProblem.equal_energy(COS, float(E), C=10_000, d=1000.0)
        )
        worst_flux = max(worst_flux, sol.flux_defect)
    sweep_s = time.perf_counter() - t0

    worst_tm = 0.0
    for C in (250, 600, 1000):
        for E in (0.03, 0.1, 0.3):
            prob = TwoParticleProblem.equal_energy(COS, E, C=C, d=500.0)
            sol = solve_two_particle(prob)
            marched = transfer_matrix_two_particle(prob)
            worst_tm = max(
                worst_tm, abs(sol.T - marched.T), abs(sol.R - marched.R)
            )
    ok = worst_flux < 1e-8 and worst_tm < 1e-8 and sweep_s < 5.0
    assert verdict(
        7, "pair scattering conserves flux and matches the march", ok,
        f"max flux defect {worst_flux:.2e} over 200 pts at C=10^4 "
        f"({sweep_s:.1f}s, budget 5s), max oracle gap {worst_tm:.2e} "
        "(tol 1e-8)",
    )


def test_criterion_08_far_lead_phase_vanishes():
    lattice = LatticeParams.canonical(a=0.1, dispersion="cosine")
    t2_min = math.inf
    phase_max = 0.0
    for E in np.linspace(0.001, 0.01, 25):
        sol = solve_two_particle(
            TwoParticleProblem.equal_energy(lattice, float(E), C=10_000,
                                            d=1_000_000.0)
        )
        t2_min = min(t2_min, abs(sol.T) ** 2)
        phase_max = max(phase_max, abs(cmath.phase(sol.T)))
    t2_ok = t2_min > 0.999
    phase_ok = phase_max < 0.01
    ok = t2_ok and phase_ok
    assert verdict(
        8, "distant control lead leaves only a tiny phase", ok,
        f"min |T|^2 = {t2_min:.6f} (>0.999 {'ok' if t2_ok else 'MISS'}), "
        f"max |arg T| = {phase_max:.3f} rad (<0.01 {'ok' if phase_ok else 'MISS'}) "
        "on 1..10 meV at d=10^6, a=0.1",
    )


def test_criterion_09_interference_circuit(h2):
    rng = np.random.default_rng(19)
    ideal = ideal_splitter()
    worst_ideal = max(
        abs(hadamard_test(ideal, float(phi)) - 0.5 * (1.0 + math.cos(phi)))
        for phi in rng.uniform(-2.0 * math.pi, 2.0 * math.pi, size=100)
    )
    control = abs(hadamard_test(ideal, 1.3, q=1) - 1.0)

    B, D, E0 = h2_junction(h2, (math.sqrt(2.0), 1.0, 1.0))
    sol = scattering_solution(B, D, E0, QUAD, DESIGN_ENERGY_EV)
    pair = solve_two_particle(
        TwoParticleProblem.equal_energy(COS, 0.05, C=500, d=1000.0)
    )
    phi = cmath.phase(pair.T)
    measured = hadamard_test(sol.s, phi)
    deviation = abs(measured - 0.5 * (1.0 + math.cos(phi)))
    budget = 2.0 * abs(sol.s[0, 0])
    ok = worst_ideal < 1e-12 and control < 1e-12 and deviation <= budget
    assert verdict(
        9, "interference readout follows (1 + cos phi)/2", ok,
        f"ideal defect {worst_ideal:.1e} (tol 1e-12), control {control:.1e}, "
        f"measured-splitter deviation {deviation:.2e} <= 2|R| = {budget:.2e}",
    )


def test_criterion_10_wavepacket_oracle(h2):
    t0 = time.perf_counter()
    B, D, E0 = h2_junction(h2, (60.0, 60.0))
    lat = build_truncated_hamiltonian(B, D, E0, COS, 2000)

    def s_of_kappa(k):
        return s_matrix(B, D, E0, COS, momentum_to_energy(k, COS))

    worst_rel = 0.0
    for kappa0 in (0.9, 1.3, 1.8):
        packet = Wavepacket(x0=80.0, sigma=10.0, kappa0=kappa0)
        counted = wavepacket_transmission(lat, packet).lead_probability[1]
        grid, weights = packet.momentum_weights(2000)
        predicted = momentum_averaged_transmission(s_of_kappa, grid, weights, (1, 0))
        worst_rel = max(worst_rel, abs(counted - predicted) / predicted)

    G = 5
    Bc, Dc = chain_coupling(G, COS.beta)
    chain = build_truncated_hamiltonian(Bc, Dc, 0.0, COS, 1200)
    kappa = 0.9
    packet = Wavepacket(x0=100.0, sigma=10.0, kappa0=kappa)
    v = chain.velocity(kappa)
    detector = 150
    from molscatter import arrival_time

    res = arrival_time(
        chain, packet, detector_site=detector,
        t_total=(packet.x0 + detector + (G - 1) + 140.0) / v,
    )
    ell = effective_length_at_energy(
        Bc, Dc, 0.0, COS, momentum_to_energy(kappa, COS), (1, 0)
    )
    expected = (packet.x0 + detector + ell / COS.a) / v
    arrival_rel = abs(res.t_mean - expected) / expected
    elapsed = time.perf_counter() - t0
    ok = worst_rel < 0.02 and arrival_rel < 0.05 and elapsed < 60.0
    assert verdict(
        10, "wavepacket counts corroborate the solver", ok,
        f"packet vs averaged solver rel {worst_rel:.1e} (tol 0.02) at three "
        f"momenta, chain arrival rel {arrival_rel:.1e} (tol 0.05), "
        f"{elapsed:.1f}s (budget 60s)",
    )
