"""Command-line driver: config ingestion, orchestration, CSV/JSON emission.

Subcommands: spectrum | coherence | dephase | witness | oracle-check.
Options resolve with precedence flags > config file > preset defaults.  Every
CSV starts with '#' metadata lines embedding the resolved configuration, so
outputs are self-describing and byte-reproducible for identical configs.
Exit codes: 0 ok, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .circuit import (PRESETS, THREE_JUNCTION_PRESETS, CircuitParams,
                      ThreeJunctionParams, delft_effective_size, derived_scales,
                      ideal_effective_size, potential, reference_variance,
                      well_geometry)
from .coherence import (DephasingChannel, coherence_report, coherence_vs_gamma,
                        dephase, quantum_coherence)
from .errors import ConfigError, FluxcatError, NumericalError
from .grid import FluxGrid, finite_difference_oracle, hermite_basis, to_grid
from .hobasis import (HoBasisConfig, build_hamiltonian, find_target_states,
                      solve_circuit, sweep_phi_x)
from .witness import TimeDistribution, simulate_protocol

#: Literature values for the two experiments, reported next to computed numbers.
LITERATURE = {
    "well_separation_phi0": 0.655,
    "target1_variance_phi0sq": 6.32e-2,
    "i_rel_target": 194.0,
    "i_rel_ideal_cat": 1315.0,
    "i_rel_dominant_ej": 2565.0,
    "delft_effective_size": 45.0,
}


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config document must be a JSON object")
    return cfg


def _resolve_params(cfg: dict, args) -> CircuitParams:
    flag_preset = getattr(args, "preset", None)
    preset = flag_preset or cfg.get("preset")
    # precedence: --preset flag > config circuit section > config preset
    circuit = cfg.get("circuit") if flag_preset is None else None
    if circuit is not None:
        try:
            params = CircuitParams(e_c=float(circuit["e_c_ghz"]),
                                   e_l=float(circuit["e_l_ghz"]),
                                   e_j=float(circuit["e_j_ghz"]),
                                   phi_x=float(circuit.get("phi_x", 0.0)))
        except KeyError as exc:
            raise ConfigError(f"circuit section missing key {exc}") from exc
    elif preset is not None:
        if preset in THREE_JUNCTION_PRESETS and preset not in PRESETS:
            raise ConfigError(f"preset {preset!r} is a three-junction preset; "
                              "it supports the coherence summary only")
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; "
                              f"choices: {sorted(PRESETS)}")
        params = PRESETS[preset]
    else:
        raise ConfigError("no circuit parameters: give --preset or a 'circuit' section")
    phi_x = getattr(args, "phi_x", None)
    if phi_x is not None:
        params = params.with_phi_x(phi_x)
    return params


def _resolve_three_junction(cfg: dict, args) -> ThreeJunctionParams | None:
    preset = getattr(args, "preset", None) or cfg.get("preset")
    section = cfg.get("three_junction")
    if section is not None:
        return ThreeJunctionParams(float(section["e_j_over_e_c"]), float(section["alpha"]))
    if preset in THREE_JUNCTION_PRESETS:
        return THREE_JUNCTION_PRESETS[preset]
    return None


def _resolve_basis(cfg: dict, args) -> HoBasisConfig:
    section = cfg.get("basis", {})
    dim = getattr(args, "dim", None)
    if dim is None:
        dim = section.get("dim", 512)
    return HoBasisConfig(dim=int(dim), center=section.get("center"))


def _resolve_grid(cfg: dict, args) -> FluxGrid:
    section = cfg.get("grid", {})
    n_points = getattr(args, "grid_points", None)
    if n_points is None:
        n_points = section.get("n_points", 2048)
    return FluxGrid(phi_min=float(section.get("phi_min", -1.0)),
                    phi_max=float(section.get("phi_max", 2.0)),
                    n_points=int(n_points))


def _meta(command: str, resolved: dict) -> list[str]:
    return [f"# fluxcat {command} v{__version__}",
            "# config = " + json.dumps(resolved, sort_keys=True)]


def _write_csv(path: str, meta: list[str], header: list[str], rows) -> None:
    out = Path(path)
    with open(out, "w", newline="") as fh:
        for line in meta:
            fh.write(line + "\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(f"{v:.12g}" for v in row) + "\n")


def _write_json(path: str | None, payload: dict) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path is None:
        print(text)
    else:
        Path(path).write_text(text + "\n")


def _params_dict(params: CircuitParams) -> dict:
    return {"e_c_ghz": params.e_c, "e_l_ghz": params.e_l,
            "e_j_ghz": params.e_j, "phi_x": params.phi_x}


def _target_pair(params: CircuitParams, basis_cfg: HoBasisConfig, target_phi_x: float):
    result = solve_circuit(params.with_phi_x(target_phi_x), basis_cfg)
    return result, find_target_states(result)


def cmd_spectrum(cfg: dict, args) -> int:
    params = _resolve_params(cfg, args)
    basis_cfg = _resolve_basis(cfg, args)
    section = cfg.get("spectrum", {})
    lo = args.phi_x_min if args.phi_x_min is not None else section.get("phi_x_min", 0.497)
    hi = args.phi_x_max if args.phi_x_max is not None else section.get("phi_x_max", 0.503)
    points = args.points if args.points is not None else section.get("points", 121)
    n_levels = args.n_levels if args.n_levels is not None else section.get("n_levels", 48)
    gamma = args.dephase_gamma if args.dephase_gamma is not None \
        else section.get("dephase_gamma")
    target_phi_x = float(section.get("target_phi_x", 0.5))
    workers = args.workers if args.workers is not None else cfg.get("workers", 1)
    if points < 1:
        raise ConfigError("spectrum needs at least one sweep point")
    if not hi >= lo:
        raise ConfigError("phi_x_max must be >= phi_x_min")

    phi_values = np.linspace(lo, hi, int(points))
    _, (i0, i1) = _target_pair(params, basis_cfg, target_phi_x)
    n_levels = max(int(n_levels), i1 + 1)
    energies = sweep_phi_x(params, phi_values, n_levels, basis_cfg, workers=int(workers))
    gap = energies[:, i1] - energies[:, i0]

    header = ["phi_x"] + [f"e{k}" for k in range(n_levels)] + ["gap_target"]
    columns = [phi_values] + [energies[:, k] for k in range(n_levels)] + [gap]

    if gamma is not None:
        grid = _resolve_grid(cfg, args)
        channel = DephasingChannel(float(gamma))
        deph = {"ground": [], "t0": [], "t1": []}
        for phi_x in phi_values:
            p = params.with_phi_x(float(phi_x))
            res = solve_circuit(p, basis_cfg)
            btab = hermite_basis(p, basis_cfg, grid)
            ham = build_hamiltonian(p, basis_cfg)
            for key, idx in (("ground", 0), ("t0", i0), ("t1", i1)):
                pure = to_grid(res.states[:, idx], p, basis_cfg, grid, basis=btab)
                rep = coherence_report(dephase(pure, channel), p, basis_cfg,
                                       hamiltonian=ham, basis=btab)
                deph[key].append(rep.energy)
        header += ["e_target0_dephased", "e_target1_dephased", "e_ground_dephased"]
        columns += [np.array(deph["t0"]), np.array(deph["t1"]), np.array(deph["ground"])]

    resolved = {"command": "spectrum", "params": _params_dict(params),
                "dim": basis_cfg.dim, "phi_x_min": lo, "phi_x_max": hi,
                "points": int(points), "n_levels": int(n_levels),
                "target_indices": [i0, i1],
                "dephase_gamma": gamma, "workers": int(workers)}
    _write_csv(args.output, _meta("spectrum", resolved), header, zip(*columns))
    return 0


def cmd_coherence(cfg: dict, args) -> int:
    three = _resolve_three_junction(cfg, args)
    preset = getattr(args, "preset", None) or cfg.get("preset")
    payload: dict = {"schema": 1, "command": "coherence", "literature": dict(LITERATURE)}

    if three is not None:
        payload["three_junction"] = {"e_j_over_e_c": three.e_j_over_e_c,
                                     "alpha": three.alpha,
                                     "effective_size": delft_effective_size(three)}
    if preset in THREE_JUNCTION_PRESETS and cfg.get("circuit") is None:
        _write_json(args.output, payload)
        return 0

    params = _resolve_params(cfg, args)
    basis_cfg = _resolve_basis(cfg, args)
    grid = _resolve_grid(cfg, args)
    section = cfg.get("coherence", {})
    target_phi_x = float(section.get("target_phi_x", params.phi_x))

    result, (i0, i1) = _target_pair(params, basis_cfg, target_phi_x)
    work = params.with_phi_x(target_phi_x)
    geom = well_geometry(work)
    btab = hermite_basis(work, basis_cfg, grid)
    ham = build_hamiltonian(work, basis_cfg)

    targets = []
    pures = []
    for idx in (i0, i1):
        pure = to_grid(result.states[:, idx], work, basis_cfg, grid, basis=btab)
        pures.append(pure)
        rep = coherence_report(pure.as_mixed(), work, basis_cfg,
                               hamiltonian=ham, basis=btab)
        targets.append({
            "index": idx,
            "variance_phi0sq": rep.variance,
            "coherence_i_phi0sq": rep.coherence_i,
            "i_rel": rep.i_rel,
            "energy_ghz": rep.energy,
            "eigenvalue_ghz": float(result.energies[idx]),
            "variance_over_reference_variance": rep.variance / reference_variance(work),
        })

    # classical reference: ground state of the single well at phi_x = 0
    ref_params = params.with_phi_x(0.0)
    ref_result = solve_circuit(ref_params, basis_cfg)
    ref_grid = FluxGrid(-1.5, 1.5, grid.n_points)
    ref_pure = to_grid(ref_result.states[:, 0], ref_params, basis_cfg, ref_grid)
    _, ref_var_num = ref_pure.flux_moments()
    ref_i = quantum_coherence(ref_pure)

    cat = ideal_effective_size(work, geom.separation ** 2) if geom.is_double_well else None
    payload["computed"] = {
        "phi_x": target_phi_x,
        "target_indices": [i0, i1],
        "tunnel_splitting_ghz": float(result.energies[i1] - result.energies[i0]),
        "well_separation_phi0": geom.separation,
        "reference_variance_phi0sq": reference_variance(work),
        "reference": {
            "variance_phi0sq": ref_var_num,
            "coherence_i_phi0sq": ref_i,
            "i_rel_self": ref_i / ref_i,
            "energy_ghz": float(ref_result.energies[0]),
        },
        "targets": targets,
    }
    if cat is not None:
        payload["computed"]["ideal_cat"] = {
            "ratio": cat.ratio,
            "harmonic_approx": cat.harmonic_approx,
            "dominant_ej_approx": cat.dominant_ej_approx,
        }

    if args.dump_states:
        dump_dir = Path(args.dump_states)
        dump_dir.mkdir(parents=True, exist_ok=True)
        u = potential(work, grid.phi)
        rows = zip(grid.phi, u, pures[0].data, pures[1].data)
        meta = _meta("coherence", {"params": _params_dict(work), "dim": basis_cfg.dim})
        meta.append(f"# e0_ghz = {result.energies[i0]:.12g}")
        meta.append(f"# e1_ghz = {result.energies[i1]:.12g}")
        meta.append(f"# u_barrier_ghz = {geom.u_barrier:.12g}")
        _write_csv(dump_dir / f"wells_phix{target_phi_x:g}.csv", meta,
                   ["phi", "potential_ghz", "psi0", "psi1"], rows)

    _write_json(args.output, payload)
    return 0


def cmd_dephase(cfg: dict, args) -> int:
    params = _resolve_params(cfg, args)
    basis_cfg = _resolve_basis(cfg, args)
    grid = _resolve_grid(cfg, args)
    section = cfg.get("dephase", {})
    gmin = args.gamma_min_ref if args.gamma_min_ref is not None else section.get("gamma_min_ref", 0.5)
    gmax = args.gamma_max_ref if args.gamma_max_ref is not None else section.get("gamma_max_ref", 64.0)
    points = args.points if args.points is not None else section.get("points", 25)
    target_phi_x = float(section.get("target_phi_x", 0.5))
    if points < 2:
        raise ConfigError("dephase ladder needs at least two points")

    result, (i0, i1) = _target_pair(params, basis_cfg, target_phi_x)
    work = params.with_phi_x(target_phi_x)
    sigma_ref = math.sqrt(reference_variance(work))
    marker_gamma = math.sqrt(2.0 * derived_scales(work).sigma0_sq)  # sqrt(hbar/(C omega))
    ladder = list(np.geomspace(gmin * sigma_ref, gmax * sigma_ref, int(points)))
    if not any(abs(g - marker_gamma) < 1e-12 for g in ladder):
        ladder.append(marker_gamma)
    ladder.sort()

    workers = args.workers if args.workers is not None else cfg.get("workers", 1)
    gap0 = float(result.energies[i1] - result.energies[i0])
    rows = coherence_vs_gamma(work, basis_cfg, grid,
                              [result.states[:, i0], result.states[:, i1]],
                              gap0, ladder, workers=int(workers))

    resolved = {"command": "dephase", "params": _params_dict(work),
                "dim": basis_cfg.dim, "grid_points": grid.n_points,
                "gamma_min_ref": gmin, "gamma_max_ref": gmax,
                "points": int(points), "target_indices": [i0, i1],
                "reference_gap_ghz": gap0, "marker_gamma_phi0": marker_gamma,
                "workers": int(workers)}
    header = ["gamma_phi0", "gamma_over_sigma_ref", "i_rel_0", "i_rel_1",
              "e0_dephased", "e1_dephased", "gap_rel_diff", "marker"]
    table = [(r.gamma, r.gamma_over_sigma_ref, r.i_rel[0], r.i_rel[1],
              r.energies[0], r.energies[1], r.gap_rel_diff,
              1.0 if abs(r.gamma - marker_gamma) < 1e-12 else 0.0) for r in rows]
    _write_csv(args.output, _meta("dephase", resolved), header, table)
    return 0


def cmd_witness(cfg: dict, args) -> int:
    params = _resolve_params(cfg, args)
    basis_cfg = _resolve_basis(cfg, args)
    grid = _resolve_grid(cfg, args)
    section = cfg.get("witness", {})
    state_name = args.state or section.get("state", "target1")
    kind = args.kind or section.get("kind", "gaussian")
    n_bins = args.n_bins if args.n_bins is not None else section.get("n_bins", 128)
    basis = args.measure_basis or section.get("basis", "energy")
    target_phi_x = float(section.get("target_phi_x", params.phi_x))

    result, (i0, i1) = _target_pair(params, basis_cfg, target_phi_x)
    work = params.with_phi_x(target_phi_x)
    index = {"target0": i0, "target1": i1, "ground0": 0}.get(state_name)
    if index is None:
        raise ConfigError(f"unknown state {state_name!r}; "
                          "choices: target0, target1, ground0")
    state = to_grid(result.states[:, index], work, basis_cfg, grid)

    sigma_ref = math.sqrt(reference_variance(work))
    if kind == "gaussian":
        gamma = args.gamma if args.gamma is not None \
            else section.get("gamma_phi0", 4.0 * sigma_ref)
        mu = TimeDistribution.gaussian(float(gamma))
        channel_desc = {"kind": "gaussian", "gamma_phi0": float(gamma),
                        "sigma_t": 1.0 / float(gamma)}
    elif kind == "delta":
        t = args.t if args.t is not None else section.get("t")
        if t is None:
            raise ConfigError("delta witness needs --t")
        mu = TimeDistribution.delta(float(t))
        channel_desc = {"kind": "delta", "t": float(t)}
    else:
        raise ConfigError(f"unknown dynamics kind {kind!r}")

    bound = simulate_protocol(state, mu, work, n_bins=int(n_bins), basis=basis)
    true_i = quantum_coherence(state)
    payload = {
        "schema": 1,
        "command": "witness",
        "b": bound.b,
        "method": bound.method,
        "bound_i_phi0sq": bound.bound_i,
        "bound_i_rel": bound.bound_i / reference_variance(work),
        "channel": channel_desc,
        "bins": int(n_bins),
        "measurement_basis": basis,
        "state": state_name,
        "true_i_phi0sq": true_i,
        "sound": bool(bound.bound_i <= true_i * (1 + 1e-9)),
    }
    _write_json(args.output, payload)
    return 0


def cmd_oracle_check(cfg: dict, args) -> int:
    params = _resolve_params(cfg, args)
    basis_cfg = _resolve_basis(cfg, args)
    phi_list = args.phi_x_list or cfg.get("oracle_check", {}).get(
        "phi_x", [0.0, 0.499, 0.5])
    n_levels = args.n_levels if args.n_levels is not None else 10
    fd_points = args.fd_points if args.fd_points is not None else 131072
    rtol = args.rtol if args.rtol is not None else 1e-6
    fd_grid = FluxGrid(args.fd_min, args.fd_max, int(fd_points))

    worst = 0.0
    for phi_x in phi_list:
        p = params.with_phi_x(float(phi_x))
        ho = solve_circuit(p, basis_cfg).energies[:n_levels]
        fd, _ = finite_difference_oracle(p, fd_grid, n_levels)
        rel = float(np.max(np.abs(fd - ho) / np.abs(ho)))
        worst = max(worst, rel)
        status = "ok" if rel <= rtol else "FAIL"
        print(f"phi_x={phi_x:g}: max relative deviation {rel:.3e} [{status}]")
    if worst > rtol:
        raise NumericalError(
            f"oracle deviation {worst:.3e} exceeds tolerance {rtol:.0e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fluxcat",
        description="Flux-qubit spectra, coherence under flux dephasing, and witnesses")
    parser.add_argument("--version", action="version", version=f"fluxcat {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, output_required=True):
        p.add_argument("--config", help="JSON configuration document")
        p.add_argument("--preset", help="circuit preset name (e.g. suny2000)")
        p.add_argument("--dim", type=int, help="oscillator basis truncation")
        p.add_argument("--grid-points", type=int, dest="grid_points")
        if output_required:
            p.add_argument("--output", required=True, help="output file path")

    p = sub.add_parser("spectrum", help="energy levels vs bias flux (CSV)")
    common(p)
    p.add_argument("--phi-x-min", type=float, dest="phi_x_min")
    p.add_argument("--phi-x-max", type=float, dest="phi_x_max")
    p.add_argument("--points", type=int)
    p.add_argument("--n-levels", type=int, dest="n_levels")
    p.add_argument("--dephase-gamma", type=float, dest="dephase_gamma",
                   help="also emit dephased target/ground energies for this gamma")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_spectrum, phi_x=None)

    p = sub.add_parser("coherence", help="coherence summary for target states (JSON)")
    common(p, output_required=False)
    p.add_argument("--output", help="JSON path (default: stdout)")
    p.add_argument("--phi-x", type=float, dest="phi_x",
                   help="override working bias flux")
    p.add_argument("--dump-states", dest="dump_states",
                   help="directory for wavefunction/potential CSV dumps")
    p.set_defaults(func=cmd_coherence)

    p = sub.add_parser("dephase", help="dephasing scan over correlation lengths (CSV)")
    common(p)
    p.add_argument("--points", type=int)
    p.add_argument("--gamma-min-ref", type=float, dest="gamma_min_ref",
                   help="ladder start in units of sqrt(reference variance)")
    p.add_argument("--gamma-max-ref", type=float, dest="gamma_max_ref")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_dephase, phi_x=None)

    p = sub.add_parser("witness", help="simulate the certification protocol (JSON)")
    common(p, output_required=False)
    p.add_argument("--output", help="JSON path (default: stdout)")
    p.add_argument("--state", choices=["target0", "target1", "ground0"])
    p.add_argument("--kind", choices=["gaussian", "delta"])
    p.add_argument("--gamma", type=float, help="correlation length in Phi_0")
    p.add_argument("--t", type=float, help="fixed duration for the delta kind")
    p.add_argument("--n-bins", type=int, dest="n_bins")
    p.add_argument("--measure-basis", choices=["energy", "flux"], dest="measure_basis")
    p.set_defaults(func=cmd_witness, phi_x=None)

    p = sub.add_parser("oracle-check",
                       help="compare oscillator-basis and finite-difference spectra")
    common(p, output_required=False)
    p.add_argument("--phi-x", type=float, nargs="*", dest="phi_x_list")
    p.add_argument("--n-levels", type=int, dest="n_levels")
    p.add_argument("--fd-points", type=int, dest="fd_points")
    p.add_argument("--fd-min", type=float, default=-1.5)
    p.add_argument("--fd-max", type=float, default=2.5)
    p.add_argument("--rtol", type=float)
    p.set_defaults(func=cmd_oracle_check, phi_x=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        return args.func(cfg, args)
    except ConfigError as exc:
        print(f"fluxcat: configuration error: {exc}", file=sys.stderr)
        return 2
    except (FluxcatError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"fluxcat: numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
