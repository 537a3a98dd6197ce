"""Command-line front end.

Subcommands take a JSON config whose field names carry their units
(`*_eV`, `*_angstrom`, `d_sites`); unknown keys are rejected so typos
fail loudly instead of silently using defaults. Sweep commands write a
CSV (fixed 12-significant-digit format, byte-identical across reruns and
`--jobs` settings) and render a PNG next to it unless `--no-plot`.

Exit codes: 0 success, 1 a check or oracle comparison failed, 2 invalid
input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import cmath
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .circuit import hadamard_test, splitter_gate
from .coupling import assemble_B
from .errors import (
    FluxError,
    GateError,
    InputError,
    MolscatterError,
    NumericalError,
    SchemaError,
)
from .model import (
    DispersionValidityWarning,
    KAPPA_VALID_MAX,
    LatticeParams,
    LeadConfig,
    _check_fields,
    _require,
    bundled_molecule_path,
    canonical_beta,
    load_molecule,
    momentum_to_energy,
    validate_molecule,
)
from .oracle import (
    Wavepacket,
    arrival_time,
    build_truncated_hamiltonian,
    momentum_averaged_transmission,
    transfer_matrix_two_particle,
    wavepacket_transmission,
)
from .scatter1 import (
    _warn_dispersion_once,
    chain_coupling,
    chain_s_matrix,
    effective_length_at_energy,
    s_matrix,
    scattering_solution,
    spectrum,
    transmission_peaks,
    write_spectrum_csv,
)
from .scatter2 import TwoParticleProblem, phase_spectrum, solve_two_particle, write_phase_csv

# Desk-scale ceilings for oracle runs; beyond these the brute force stops
# being a quick check and the request is refused rather than ground through.
ORACLE_MAX_L = 5000
ORACLE_MAX_C = 1000

_LATTICE_FIELDS = {"a_angstrom", "beta_eV", "m", "dispersion"}


def _load_config(path: str) -> dict:
    p = Path(path)
    if not p.exists():
        raise InputError(f"config file {path} does not exist")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError(f"config {path} must hold a JSON object")
    return doc


def _lattice_from(doc: dict, where: str = "lattice") -> LatticeParams:
    if not isinstance(doc, dict):
        raise SchemaError(f"{where} must be an object")
    _check_fields(doc, _LATTICE_FIELDS, where)
    a = float(_require(doc, "a_angstrom", where))
    m = float(doc.get("m", 1.0))
    beta = doc.get("beta_eV")
    beta = canonical_beta(a, m) if beta is None else float(beta)
    return LatticeParams(
        a=a, beta=beta, m=m, dispersion=doc.get("dispersion", "quadratic")
    )


def _molecule_from(cfg: dict, where: str = "config"):
    path = cfg.get("molecule_file")
    name = cfg.get("bundled_molecule")
    if (path is None) == (name is None):
        raise SchemaError(
            f"{where} needs exactly one of 'molecule_file' or 'bundled_molecule'"
        )
    if path is not None:
        if not Path(path).exists():
            raise InputError(f"molecule file {path} does not exist")
        return load_molecule(path)
    return load_molecule(bundled_molecule_path(name))


def _energy_grid(cfg: dict, where: str = "config") -> np.ndarray:
    lo = float(_require(cfg, "energy_min_eV", where))
    hi = float(_require(cfg, "energy_max_eV", where))
    count = int(_require(cfg, "energy_count", where))
    if count < 2:
        raise InputError(f"energy_count must be >= 2, got {count}")
    if not lo < hi:
        raise InputError(f"energy_min_eV {lo} must be below energy_max_eV {hi}")
    return np.linspace(lo, hi, count)


def _junction_from(cfg: dict, where: str = "config"):
    """Molecule + lead couplings resolved to the solver inputs (B, D, E0)."""
    mol = _molecule_from(cfg, where)
    factors = _require(cfg, "lead_factors", where)
    leads = LeadConfig(lead_factors=tuple(float(v) for v in factors))
    B = assemble_B(mol, leads).entries
    D = np.array([s.energy_eV for s in mol.charged])
    return mol, B, D, mol.neutral.energy_eV


def _figure_path(csv_path: str) -> str:
    return str(Path(csv_path).with_suffix(".png"))


# ---------------------------------------------------------------------------
# Subcommands

_SPECTRUM1_FIELDS = {
    "molecule_file", "bundled_molecule", "lead_factors", "lattice",
    "energy_min_eV", "energy_max_eV", "energy_count", "input_lead", "output_csv",
}


def cmd_spectrum1(args) -> int:
    cfg = _load_config(args.config)
    _check_fields(cfg, _SPECTRUM1_FIELDS, "spectrum1 config")
    lattice = _lattice_from(_require(cfg, "lattice", "spectrum1 config"))
    _, B, D, E0 = _junction_from(cfg, "spectrum1 config")
    energies = _energy_grid(cfg, "spectrum1 config")
    input_lead = int(cfg.get("input_lead", 0))
    out_csv = str(_require(cfg, "output_csv", "spectrum1 config"))

    table = spectrum(B, D, E0, lattice, energies, jobs=args.jobs)
    write_spectrum_csv(table, out_csv)

    flagged = sum(1 for f in table.flags if f is not None)
    defect = np.nanmax(table.unitarity_defect) if np.isfinite(
        table.unitarity_defect
    ).any() else float("nan")
    print(f"wrote {out_csv}: {energies.size} rows, {flagged} flagged")
    print(f"max unitarity defect {defect:.3e}")
    n = table.s.shape[1]
    for out in range(n):
        if out == input_lead:
            continue
        peaks = transmission_peaks(
            table.energies, table.t2[:, out, input_lead], min_height=1e-12
        )
        shown = ", ".join(f"{e:.3f} eV ({h:.3g})" for e, h in peaks[:4])
        print(f"|T[{out}][{input_lead}]|^2 peaks: {shown or 'none'}")
    if not args.no_plot:
        from .plots import render_spectrum1

        print(f"figure {render_spectrum1(table, _figure_path(out_csv), input_lead)}")
    if flagged:
        print(f"warning: {flagged} rows failed and carry nan", file=sys.stderr)
    return 0


_SPECTRUM2_FIELDS = {
    "lattice", "C", "d_sites", "K_eV",
    "energy_min_eV", "energy_max_eV", "energy_count", "output_csv",
}


def cmd_spectrum2(args) -> int:
    cfg = _load_config(args.config)
    _check_fields(cfg, _SPECTRUM2_FIELDS, "spectrum2 config")
    lattice = _lattice_from(_require(cfg, "lattice", "spectrum2 config"))
    C = int(_require(cfg, "C", "spectrum2 config"))
    d = float(_require(cfg, "d_sites", "spectrum2 config"))
    K = cfg.get("K_eV")
    energies = _energy_grid(cfg, "spectrum2 config")
    out_csv = str(_require(cfg, "output_csv", "spectrum2 config"))

    spec = phase_spectrum(lattice, energies, C, d, K=None if K is None else float(K))
    write_phase_csv(spec, out_csv)

    flagged = sum(1 for f in spec.flags if f is not None)
    max_defect = np.nanmax(spec.flux_defect) if np.isfinite(spec.flux_defect).any() else float("nan")
    print(f"wrote {out_csv}: {energies.size} rows, {flagged} flagged")
    print(f"max flux defect {max_defect:.3e}")
    t2 = np.abs(spec.T) ** 2
    with np.errstate(invalid="ignore"):
        above = spec.energies[np.nan_to_num(t2) > 0.5]
    if above.size:
        print(f"|T|^2 crosses 1/2 near {above[0]:.6g} eV")
    if not args.no_plot:
        from .plots import render_spectrum2

        print(f"figure {render_spectrum2(spec, _figure_path(out_csv))}")
    if flagged:
        print(f"warning: {flagged} rows failed and carry nan", file=sys.stderr)
    return 0


def cmd_chain_check(args) -> int:
    lattice = LatticeParams(
        a=args.a, beta=canonical_beta(args.a), dispersion="cosine"
    )
    energy = momentum_to_energy(args.kappa, lattice)
    worst_s = 0.0
    worst_len = 0.0
    failed = False
    for G in range(1, args.g_max + 1):
        B, D = chain_coupling(G, lattice.beta)
        S = s_matrix(B, D, 0.0, lattice, energy)
        defect = float(np.max(np.abs(S - chain_s_matrix(G, args.kappa))))
        ell = effective_length_at_energy(B, D, 0.0, lattice, energy, (1, 0))
        expected = lattice.a * (G - 1)
        len_err = abs(ell - expected) / max(expected, lattice.a)
        ok = defect < args.tol and len_err < args.length_tol
        failed |= not ok
        worst_s = max(worst_s, defect)
        worst_len = max(worst_len, len_err)
        print(
            f"G={G:2d}: S defect {defect:.2e}, length {ell:+.6f} "
            f"(expected {expected:.6f}, rel {len_err:.2e}) "
            f"{'ok' if ok else 'FAIL'}"
        )
    print(f"worst S defect {worst_s:.2e}, worst length error {worst_len:.2e}")
    return 1 if failed else 0


_SPLITTER_FIELDS = {
    "molecule_file", "bundled_molecule", "lattice", "v_right", "ratio",
    "energy_min_eV", "energy_max_eV", "energy_count",
    "t2_tol", "r2_max", "output_csv", "output_json",
}


def _splitter_sweep(B, D, E0, lattice, energies):
    t2 = np.full((energies.size, 2), np.nan)
    r2 = np.full(energies.size, np.nan)
    _warn_dispersion_once(lattice, energies)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DispersionValidityWarning)
        for i, E in enumerate(energies):
            try:
                S = s_matrix(B, D, E0, lattice, float(E))
            except (NumericalError, InputError):
                continue
            r2[i] = abs(S[0, 0]) ** 2
            t2[i, 0] = abs(S[1, 0]) ** 2
            t2[i, 1] = abs(S[2, 0]) ** 2
    return t2, r2


def cmd_splitter_design(args) -> int:
    cfg = _load_config(args.config)
    _check_fields(cfg, _SPLITTER_FIELDS, "splitter-design config")
    lattice = _lattice_from(_require(cfg, "lattice", "splitter-design config"))
    mol = _molecule_from(cfg, "splitter-design config")
    v_right = float(cfg.get("v_right", 1.0))
    ratio = float(cfg.get("ratio", math.sqrt(2.0)))
    t2_tol = float(cfg.get("t2_tol", 0.02))
    r2_max = float(cfg.get("r2_max", 0.02))
    energies = _energy_grid(cfg, "splitter-design config")
    out_csv = str(_require(cfg, "output_csv", "splitter-design config"))

    leads = LeadConfig(lead_factors=(ratio * v_right, v_right, v_right))
    B = assemble_B(mol, leads).entries
    D = np.array([s.energy_eV for s in mol.charged])
    E0 = mol.neutral.energy_eV

    t2, r2 = _splitter_sweep(B, D, E0, lattice, energies)
    with open(out_csv, "w") as f:
        f.write("E_in_eV,T12_sq,T13_sq,R_sq\n")
        for i in range(energies.size):
            f.write(
                "%.11e,%.11e,%.11e,%.11e\n" % (energies[i], t2[i, 0], t2[i, 1], r2[i])
            )

    # widen towards 0.5/0.5/0 by zooming on the best coarse point
    def score(i):
        return max(abs(t2[i, 0] - 0.5), abs(t2[i, 1] - 0.5), r2[i] / 2.0)

    finite = [i for i in range(energies.size) if np.isfinite(r2[i])]
    if not finite:
        raise NumericalError("every grid point failed; no splitter sweep available")
    best_i = min(finite, key=score)
    lo = energies[max(best_i - 1, 0)]
    hi = energies[min(best_i + 1, energies.size - 1)]
    best = (energies[best_i], t2[best_i, 0], t2[best_i, 1], r2[best_i])
    with warnings.catch_warnings():
        # refinement stays inside the coarse window the sweep already warned about
        warnings.simplefilter("ignore", DispersionValidityWarning)
        for _ in range(3):
            grid = np.linspace(lo, hi, 81)
            ft2, fr2 = _splitter_sweep(B, D, E0, lattice, grid)
            ok = np.isfinite(fr2)
            if not ok.any():
                break
            scores = np.where(
                ok,
                np.maximum.reduce(
                    [np.abs(ft2[:, 0] - 0.5), np.abs(ft2[:, 1] - 0.5), fr2 / 2.0]
                ),
                np.inf,
            )
            j = int(np.argmin(scores))
            best = (grid[j], ft2[j, 0], ft2[j, 1], fr2[j])
            lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, grid.size - 1)]

    e_best, t12, t13, rr = best
    achieved = (
        abs(t12 - 0.5) <= t2_tol and abs(t13 - 0.5) <= t2_tol and rr < r2_max
    )
    result = {
        "status": "found" if achieved else "not-achieved",
        "energy_eV": e_best,
        "t12_squared": t12,
        "t13_squared": t13,
        "r_squared": rr,
        "v_left": ratio * v_right,
        "v_right": v_right,
    }
    print(f"wrote {out_csv}: {energies.size} rows")
    if achieved:
        print(
            f"design point at {e_best:.6f} eV: |T12|^2={t12:.4f} "
            f"|T13|^2={t13:.4f} |R|^2={rr:.2e}"
        )
    else:
        print(
            "not-achieved: best candidate "
            f"{e_best:.6f} eV with |T12|^2={t12:.4f} |T13|^2={t13:.4f} "
            f"|R|^2={rr:.3e} misses the tolerance"
        )
    out_json = cfg.get("output_json")
    if out_json:
        Path(out_json).write_text(json.dumps(result, indent=2) + "\n")
        print(f"wrote {out_json}")
    if not args.no_plot:
        from .plots import render_splitter

        fig = render_splitter(
            energies, t2, r2, _figure_path(out_csv),
            design_energy=e_best if achieved else None,
        )
        print(f"figure {fig}")
    return 0


_HADAMARD_FIELDS = {
    "molecule_file", "bundled_molecule", "lead_factors", "lattice",
    "splitter_energy_eV", "phi_rad", "phi_from", "control_q", "output_json",
}
_PHI_FROM_FIELDS = {"C", "d_sites", "K_eV", "energy_eV"}


def cmd_hadamard(args) -> int:
    cfg = _load_config(args.config)
    _check_fields(cfg, _HADAMARD_FIELDS, "hadamard config")
    lattice = _lattice_from(_require(cfg, "lattice", "hadamard config"))
    _, B, D, E0 = _junction_from(cfg, "hadamard config")
    energy = float(_require(cfg, "splitter_energy_eV", "hadamard config"))
    q = int(cfg.get("control_q", 0))

    phi_direct = cfg.get("phi_rad")
    phi_from = cfg.get("phi_from")
    if (phi_direct is None) == (phi_from is None):
        raise SchemaError(
            "hadamard config needs exactly one of 'phi_rad' or 'phi_from'"
        )
    if phi_direct is not None:
        phi = float(phi_direct)
    else:
        _check_fields(phi_from, _PHI_FROM_FIELDS, "phi_from")
        prob = TwoParticleProblem.equal_energy(
            lattice,
            float(_require(phi_from, "energy_eV", "phi_from")),
            C=int(_require(phi_from, "C", "phi_from")),
            d=float(_require(phi_from, "d_sites", "phi_from")),
            K=None if phi_from.get("K_eV") is None else float(phi_from["K_eV"]),
        )
        phi = cmath.phase(solve_two_particle(prob).T)

    sol = scattering_solution(B, D, E0, lattice, energy)
    try:
        gate = splitter_gate(sol.s)
    except GateError as exc:
        raise InputError(
            f"no splitter at {energy} eV: {exc}"
        ) from exc
    t_f_sq = hadamard_test(sol.s, phi, q=q)
    closed = 0.5 * (1.0 + math.cos(phi if q == 0 else 0.0))
    result = {
        "T_f_squared": t_f_sq,
        "phi": phi,
        "theta": gate.theta,
        "deviation_from_closed_form": abs(t_f_sq - closed),
        "reflection_squared": gate.reflection,
        "control_q": q,
    }
    print(json.dumps(result, indent=2))
    out_json = cfg.get("output_json")
    if out_json:
        Path(out_json).write_text(json.dumps(result, indent=2) + "\n")
        print(f"wrote {out_json}")
    return 0


_ORACLE_FIELDS = {"one_particle", "chain", "two_particle", "output_csv"}
_ORACLE_ONE_FIELDS = {
    "molecule_file", "bundled_molecule", "lead_factors", "lattice",
    "kappas", "L", "sigma", "tolerance_rel",
}
_ORACLE_CHAIN_FIELDS = {"G", "kappa", "L", "a_angstrom", "tolerance_rel"}
_ORACLE_TWO_FIELDS = {"lattice", "C", "d_sites", "K_eV", "energies_eV", "tolerance"}


def _oracle_one_particle(section, rows):
    _check_fields(section, _ORACLE_ONE_FIELDS, "oracle one_particle")
    lattice = _lattice_from(_require(section, "lattice", "oracle one_particle"))
    _, B, D, E0 = _junction_from(section, "oracle one_particle")
    L = int(section.get("L", 2000))
    if L > ORACLE_MAX_L:
        raise InputError(f"oracle lead length {L} exceeds the {ORACLE_MAX_L} limit")
    sigma = float(section.get("sigma", 10.0))
    tol = float(section.get("tolerance_rel", 0.02))
    kappas = [float(k) for k in section.get("kappas", (0.9, 1.3, 1.8))]

    lat = build_truncated_hamiltonian(B, D, E0, lattice, L)

    def s_of_kappa(k):
        return s_matrix(B, D, E0, lattice, momentum_to_energy(k, lattice))

    if max(kappas) > KAPPA_VALID_MAX:
        warnings.warn(
            f"packet momenta reach kappa = {max(kappas):g}, beyond "
            f"{KAPPA_VALID_MAX}; the lattice and continuum dispersions "
            "differ appreciably there",
            DispersionValidityWarning,
            stacklevel=3,
        )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DispersionValidityWarning)
        for k0 in kappas:
            packet = Wavepacket(x0=max(8.0 * sigma, 80.0), sigma=sigma, kappa0=k0)
            res = wavepacket_transmission(lat, packet)
            measured = float(np.sum(res.lead_probability[1:]))
            grid, weights = packet.momentum_weights(L)
            predicted = sum(
                momentum_averaged_transmission(s_of_kappa, grid, weights, (out, 0))
                for out in range(1, lat.n_leads)
            )
            diff = abs(measured - predicted) / max(predicted, 1e-15)
            rows.append(
                (f"packet kappa0={k0:g}", measured, predicted, diff, diff <= tol)
            )


def _oracle_chain(section, rows):
    _check_fields(section, _ORACLE_CHAIN_FIELDS, "oracle chain")
    G = int(section.get("G", 5))
    kappa = float(section.get("kappa", 0.9))
    L = int(section.get("L", 1200))
    if L > ORACLE_MAX_L:
        raise InputError(f"oracle lead length {L} exceeds the {ORACLE_MAX_L} limit")
    a = float(section.get("a_angstrom", 1.0))
    tol = float(section.get("tolerance_rel", 0.05))
    lattice = LatticeParams(a=a, beta=canonical_beta(a), dispersion="cosine")
    B, D = chain_coupling(G, lattice.beta)
    lat = build_truncated_hamiltonian(B, D, 0.0, lattice, L)
    packet = Wavepacket(x0=100.0, sigma=10.0, kappa0=kappa)
    v = lat.velocity(kappa)
    detector = 150
    expected = (packet.x0 + detector + (G - 1)) / v
    res = arrival_time(
        lat, packet, detector_site=detector,
        t_total=(packet.x0 + detector + (G - 1) + 140.0) / v,
    )
    diff = abs(res.t_mean - expected) / expected
    rows.append((f"chain G={G} arrival", res.t_mean, expected, diff, diff <= tol))


def _oracle_two_particle(section, rows):
    _check_fields(section, _ORACLE_TWO_FIELDS, "oracle two_particle")
    lattice = _lattice_from(_require(section, "lattice", "oracle two_particle"))
    C = int(section.get("C", 500))
    if C > ORACLE_MAX_C:
        raise InputError(f"oracle cutoff C={C} exceeds the {ORACLE_MAX_C} limit")
    d = float(_require(section, "d_sites", "oracle two_particle"))
    K = section.get("K_eV")
    tol = float(section.get("tolerance", 1e-8))
    energies = [float(e) for e in _require(section, "energies_eV", "oracle two_particle")]
    for E in energies:
        prob = TwoParticleProblem.equal_energy(
            lattice, E, C=C, d=d, K=None if K is None else float(K)
        )
        solved = solve_two_particle(prob)
        marched = transfer_matrix_two_particle(prob)
        diff = max(abs(solved.T - marched.T), abs(solved.R - marched.R))
        rows.append(
            (f"two-particle E={E:g} eV", abs(solved.T) ** 2, abs(marched.T) ** 2,
             diff, diff <= tol)
        )


def cmd_oracle_compare(args) -> int:
    cfg = _load_config(args.config)
    _check_fields(cfg, _ORACLE_FIELDS, "oracle-compare config")
    rows: list[tuple[str, float, float, float, bool]] = []
    if "one_particle" in cfg:
        _oracle_one_particle(cfg["one_particle"], rows)
    if "chain" in cfg:
        _oracle_chain(cfg["chain"], rows)
    if "two_particle" in cfg:
        _oracle_two_particle(cfg["two_particle"], rows)
    if not rows:
        raise SchemaError(
            "oracle-compare config names none of one_particle/chain/two_particle"
        )
    width = max(len(r[0]) for r in rows)
    print(f"{'case':<{width}}  {'solver':>13} {'oracle':>13} {'diff':>10}  verdict")
    for name, solver_val, oracle_val, diff, ok in rows:
        print(
            f"{name:<{width}}  {solver_val:>13.6e} {oracle_val:>13.6e} "
            f"{diff:>10.3e}  {'ok' if ok else 'FAIL'}"
        )
    out_csv = cfg.get("output_csv")
    if out_csv:
        with open(out_csv, "w") as f:
            f.write("case,solver,oracle,diff,ok\n")
            for name, sv, ov, diff, ok in rows:
                f.write(f"{name},{sv:.11e},{ov:.11e},{diff:.11e},{int(ok)}\n")
        print(f"wrote {out_csv}")
    return 0 if all(r[4] for r in rows) else 1


def cmd_validate(args) -> int:
    path = Path(args.molecule)
    if not path.exists():
        raise InputError(f"molecule file {path} does not exist")
    mol = load_molecule(path, validate=False)
    violations = validate_molecule(mol)
    if violations:
        for v in violations:
            print(f"{v.code} at {v.where}: {v.message}")
        print(f"{len(violations)} violation(s)")
        return 2
    print(
        f"ok: {mol.name!r}, M={mol.M} orbitals, "
        f"{mol.n_charged} charged state(s)"
    )
    return 0


# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="molscatter",
        description="Scattering spectra, gates and oracles for molecular junctions.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_config_cmd(name, func, help_text, plot=False, jobs=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("config", help="JSON config path")
        if jobs:
            p.add_argument("--jobs", type=int, default=1,
                           help="parallel workers for the sweep")
        if plot:
            p.add_argument("--no-plot", action="store_true",
                           help="skip figure rendering")
        p.set_defaults(func=func)
        return p

    add_config_cmd("spectrum1", cmd_spectrum1,
                   "one-electron S-matrix sweep", plot=True, jobs=True)
    add_config_cmd("spectrum2", cmd_spectrum2,
                   "two-electron transmission and phase sweep", plot=True)
    add_config_cmd("splitter-design", cmd_splitter_design,
                   "search a three-lead junction for the balanced point",
                   plot=True)
    add_config_cmd("hadamard", cmd_hadamard,
                   "run the interference circuit and report the readout")
    add_config_cmd("oracle-compare", cmd_oracle_compare,
                   "compare solver results against brute-force oracles")

    p = sub.add_parser("chain-check",
                       help="solver vs exact chain junction answer")
    p.add_argument("--g-max", type=int, default=10, help="largest chain length")
    p.add_argument("--kappa", type=float, default=0.7, help="probe phase per site")
    p.add_argument("--a", type=float, default=1.0, help="dot spacing in angstrom")
    p.add_argument("--tol", type=float, default=1e-9, help="S-matrix tolerance")
    p.add_argument("--length-tol", type=float, default=1e-6,
                   help="relative effective-length tolerance")
    p.set_defaults(func=cmd_chain_check)

    p = sub.add_parser("validate", help="check a molecule file")
    p.add_argument("molecule", help="molecule JSON path")
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    # repeated identical validity warnings carry no extra information on a CLI run
    warnings.simplefilter("once", DispersionValidityWarning)
    try:
        return args.func(args)
    except (SchemaError, InputError, GateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, FluxError, MolscatterError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
