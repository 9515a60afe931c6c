"""Command-line driver.

Every subcommand reads one validated JSON configuration, runs the
corresponding scenario deterministically, writes a CSV data artifact plus
a JSON run record (configuration echo, summary outputs, invariant
verdicts, wall clock, tool version), and exits 0.  Failures map to stable
exit codes: 2 for configuration/schema problems, 3 for numerical failures
(non-convergence, overflow), and 4 when ``check-all`` finds an invariant
violation.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    ConfigError,
    constants_from,
    grid_from,
    hamiltonian_from,
    load_config,
    patch_from,
    reference_from,
    region_from,
    source_from,
    state_from,
    system_from,
    validate_config,
)
from .entropy_picture import (
    ConvergenceError,
    entropy_operator,
    evolve_s,
    picture_consistency,
    wick_factor,
)
from .energy_picture import evolve_h, evolve_h_perturbed, noether_energy_drift
from .fluctuations import (
    boundary_action,
    covariance_report,
    gaussian_sample,
    symplectic_area,
)
from .gravity import laplacian_spot_check, mean_h, trace_potential
from .onsager import entropy_rate, reciprocity_check, relax
from .operators import spectral_decompose
from .report import emit_report
from .suite import run_all

__all__ = ["main"]

_NUMERICAL_ERRORS = (OverflowError, ConvergenceError, ArithmeticError, np.linalg.LinAlgError)


def _jsonable(value):
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, (bool, str)) or value is None:
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, np.ndarray):
        return [_jsonable(item) for item in value.tolist()]
    return value


def _verdict(name: str, tolerance: float, measured: float, passed: bool) -> dict:
    return {
        "name": name,
        "tolerance": float(tolerance),
        "measured": float(measured),
        "passed": bool(passed),
    }


def _bounded_verdict(name: str, measured: float, tolerance: float) -> dict:
    return _verdict(name, tolerance, measured, measured <= tolerance)


def _state_rows(label: str, grid, trajectory_states, norms, expectations, expect_label: str):
    dim = trajectory_states[0].dim
    header = ["step", label, "norm", expect_label]
    for k in range(dim):
        header += [f"re_{k}", f"im_{k}"]
    rows = []
    for step, (value, state, norm, expect) in enumerate(
        zip(grid, trajectory_states, norms, expectations)
    ):
        row = [str(step), repr(float(value)), repr(float(norm)), repr(float(expect))]
        for amp in state.amplitudes:
            row += [repr(float(amp.real)), repr(float(amp.imag))]
        rows.append(row)
    return header, rows


def _run_evolve_h(config: dict, base_dir: Path):
    constants = constants_from(config)
    block = config["evolve_h"]
    hamiltonian = hamiltonian_from(block["hamiltonian"], constants)
    psi0 = state_from(block["state"], hamiltonian.dim)
    grid = grid_from(block["grid"])
    epsilon_prime = block.get("epsilon_prime", 0.0)
    mode = block.get("mode", "first_order" if config.get("first_order_mode") else "exact")
    if epsilon_prime == 0.0:
        trajectory = evolve_h(psi0, hamiltonian, grid, constants)
    else:
        trajectory = evolve_h_perturbed(psi0, hamiltonian, grid, epsilon_prime, mode, constants)
    header, rows = _state_rows(
        "t", trajectory.times, trajectory.states, trajectory.norms,
        trajectory.energy_expectations, "expect_H",
    )
    drift = noether_energy_drift(trajectory)
    outputs = {
        "final_norm": float(trajectory.norms[-1]),
        "energy_drift": float(drift),
        "epsilon_prime": float(epsilon_prime),
        "mode": mode,
    }
    verdicts = []
    if epsilon_prime == 0.0:
        norm_wander = float(np.max(np.abs(trajectory.norms - trajectory.norms[0])))
        verdicts.append(_bounded_verdict("h-norm-preservation", norm_wander, 1e-12))
        e0 = abs(float(trajectory.energy_expectations[0]))
        verdicts.append(_bounded_verdict("h-energy-conservation", drift, 1e-10 * e0 + 1e-12))
    return outputs, verdicts, (header, rows)


def _epsilon_from(block: dict) -> float:
    if "epsilon" in block and "strength" in block:
        raise ConfigError("give either 'epsilon' or 'strength', not both")
    if "strength" in block:
        return wick_factor(block["strength"]).epsilon
    return float(block.get("epsilon", 0.0))


def _run_evolve_s(config: dict, base_dir: Path):
    constants = constants_from(config)
    block = config["evolve_s"]
    hamiltonian = hamiltonian_from(block["hamiltonian"], constants)
    psi0 = state_from(block["state"], hamiltonian.dim)
    grid = grid_from(block["grid"])
    epsilon = _epsilon_from(block)
    schedule_kind = block.get("schedule", "frozen")
    allow = block.get("allow_antidissipative", False)
    if schedule_kind == "frozen":
        generator = entropy_operator(hamiltonian, block.get("temperature", 1.0))
    else:
        t0 = block.get("reference_temperature")
        if t0 is None:
            raise ConfigError("chart schedule needs reference_temperature")
        generator = lambda tau: entropy_operator(hamiltonian, t0 * math.exp(tau))  # noqa: E731
    trajectory = evolve_s(
        psi0, generator, grid, epsilon, constants, allow_antidissipative=allow
    )
    header, rows = _state_rows(
        "tau", trajectory.taus, trajectory.states, trajectory.norms,
        trajectory.entropy_expectations, "expect_S",
    )
    outputs = {
        "epsilon": float(epsilon),
        "schedule": schedule_kind,
        "final_norm": float(trajectory.norms[-1]),
        "norm_ratio": float(trajectory.norms[-1] / trajectory.norms[0]),
    }
    verdicts = []
    if epsilon == 0.0:
        wander = float(np.max(np.abs(trajectory.norms - trajectory.norms[0])))
        verdicts.append(_bounded_verdict("s-unitary-norms", wander, 1e-12))
    else:
        bottom = float(spectral_decompose(hamiltonian).eigenvalues[0])
        if bottom >= -1e-12:
            steps = np.diff(trajectory.norms)
            violation = float(max(np.max(-steps) if epsilon < 0 else np.max(steps), 0.0))
            name = "s-dilatation" if epsilon < 0 else "s-contraction"
            verdicts.append(_bounded_verdict(name, violation, 1e-12))
    if schedule_kind == "frozen" and grid.size >= 2 and grid[-1] > 0:
        half = 0.5 * grid[-1]
        leg = evolve_s(psi0, generator, [0.0, half], epsilon, constants,
                       allow_antidissipative=allow).states[-1]
        two_step = evolve_s(leg, generator, [0.0, grid[-1] - half], epsilon, constants,
                            allow_antidissipative=allow).states[-1]
        gap = float(np.linalg.norm(two_step.amplitudes - trajectory.states[-1].amplitudes))
        verdicts.append(_bounded_verdict("s-semigroup-composition", gap, 1e-10))
    return outputs, verdicts, (header, rows)


def _run_compare_pictures(config: dict, base_dir: Path):
    constants = constants_from(config)
    block = config["compare_pictures"]
    hamiltonian = hamiltonian_from(block["hamiltonian"], constants)
    psi0 = state_from(block["state"], hamiltonian.dim)
    grid = grid_from(block["grid"])
    mode = block["mode"]
    epsilon = block.get("epsilon", 0.0)
    deviation = picture_consistency(
        psi0, hamiltonian, block["reference_temperature"], mode, grid, epsilon, constants
    )
    tolerance = {"real_C": 1e-8, "frozen_S": 1e-10, "chart_S": 1e-8}[mode]
    header = ["mode", "epsilon", "max_deviation"]
    rows = [[mode, repr(float(epsilon)), repr(float(deviation))]]
    outputs = {"mode": mode, "epsilon": float(epsilon), "max_deviation": float(deviation)}
    verdicts = [_bounded_verdict("picture-deviation", deviation, tolerance)]
    return outputs, verdicts, (header, rows)


def _run_gravity(config: dict, base_dir: Path):
    block = config["gravity"]
    source = source_from(block["source"], base_dir)
    seed = config.get("seed", 0)
    header = ["x", "y", "z", "h"]
    rows = []
    potentials = []
    for probe in block.get("probes", []):
        value = trace_potential(source, probe)
        potentials.append(value)
        rows.append([repr(float(c)) for c in probe] + [repr(float(value))])
    outputs = {"total_mass": float(source.total_mass)}
    verdicts = []
    if potentials:
        lowest = float(min(potentials))
        verdicts.append(_verdict("potential-nonnegative", 0.0, min(lowest, 0.0), lowest >= 0.0))
    if "region" in block:
        strength = mean_h(source, region_from(block["region"]), seed)
        outputs["mean_h"] = float(strength)
        outputs["weak_field_epsilon"] = float(wick_factor(strength).epsilon)
    if "laplacian" in block:
        residual = laplacian_spot_check(
            source, block["laplacian"]["point"], block["laplacian"].get("step")
        )
        outputs["laplacian_residual"] = float(residual)
    return outputs, verdicts, (header, rows)


def _run_onsager(config: dict, base_dir: Path):
    block = config["onsager"]
    system = system_from(block["system"], base_dir)
    grid = grid_from(block["grid"])
    trajectory = relax(system, grid)
    header = ["step", "tprime", "entropy_rate"] + [f"y_{k}" for k in range(system.dim)]
    rows = []
    for step, (t, y, rate) in enumerate(
        zip(trajectory.tprimes, trajectory.ys, trajectory.entropy_rates)
    ):
        rows.append(
            [str(step), repr(float(t)), repr(float(rate))] + [repr(float(c)) for c in y]
        )
    rate0 = entropy_rate(system, system.y0)
    scale = max(abs(rate0.via_velocities), abs(rate0.via_forces), 1e-300)
    gap = abs(rate0.via_velocities - rate0.via_forces) / scale
    reciprocity = reciprocity_check(system.kinetic)
    outputs = {
        "entropy_rate_initial": float(rate0.via_velocities),
        "kinetic_symmetric": bool(reciprocity.symmetric),
        "kinetic_asymmetry_norm": float(reciprocity.asymmetry_norm),
    }
    verdicts = [_bounded_verdict("entropy-forms-agree", gap, 1e-12)]
    if reciprocity.symmetric:
        worst = float(np.max(-trajectory.entropy_rates))
        verdicts.append(_bounded_verdict("entropy-rate-nonnegative", max(worst, 0.0), 1e-12))
    return outputs, verdicts, (header, rows)


def _run_fluct(config: dict, base_dir: Path):
    constants = constants_from(config)
    block = config["fluct"]
    reference = reference_from(block["reference"])
    samples = gaussian_sample(
        reference,
        block["n"],
        seed=config.get("seed", 0),
        constants=constants,
        workers=block.get("workers", 1),
    )
    header = ["dp", "dV", "dT", "dS"]
    rows = [
        [
            repr(float(samples.dp[i])), repr(float(samples.dV[i])),
            repr(float(samples.dT[i])), repr(float(samples.dS[i])),
        ]
        for i in range(len(samples))
    ]
    outputs = {"n": len(samples)}
    verdicts = []
    if len(samples) >= 1000:
        report = covariance_report(samples, reference, constants)
        outputs["covariance"] = report.to_dict()
        for name, statistic, target in (
            ("fluct-ds-dt", report.ds_dt_over_kBT, 1.0),
            ("fluct-dp-dv", report.dp_dv_over_kBT, -1.0),
            ("fluct-ds-dtau", report.ds_dtau_over_kB, 1.0),
            ("fluct-dt-dv-uncorrelated", report.dt_dv_correlation, 0.0),
        ):
            verdicts.append(
                _bounded_verdict(name, statistic.standardized_deviation(target), 3.0)
            )
    return outputs, verdicts, (header, rows)


def _run_stokes(config: dict, base_dir: Path):
    block = config["stokes"]
    patch = patch_from(block["patch"])
    resolutions = block["resolutions"]
    header = ["resolution", "area", "boundary_action", "abs_gap"]
    rows = []
    gaps = []
    for resolution in resolutions:
        area = symplectic_area(patch, resolution)
        circulation = boundary_action(patch, resolution)
        gap = abs(area - circulation)
        gaps.append(gap)
        rows.append([
            str(int(resolution)), repr(float(area)),
            repr(float(circulation)), repr(float(gap)),
        ])
    outputs = {"gaps": [float(g) for g in gaps]}
    verdicts = []
    if len(resolutions) >= 3 and all(g > 1e-13 for g in gaps):
        x = np.log2(np.asarray(resolutions, dtype=float))
        y = np.log2(np.asarray(gaps, dtype=float))
        order = float(-np.polyfit(x, y, 1)[0])
        outputs["convergence_order"] = order
        verdicts.append(_verdict("stokes-order", 1.9, order, order >= 1.9))
    elif gaps:
        verdicts.append(_bounded_verdict("stokes-gap", float(max(gaps)), 1e-9))
    return outputs, verdicts, (header, rows)


_RUNNERS = {
    "evolve-h": _run_evolve_h,
    "evolve-s": _run_evolve_s,
    "compare-pictures": _run_compare_pictures,
    "gravity": _run_gravity,
    "onsager": _run_onsager,
    "fluct": _run_fluct,
    "stokes": _run_stokes,
}


def _write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def _write_record(path: Path, config: dict, outputs: dict, verdicts, wall_clock: float) -> None:
    record = {
        "version": __version__,
        "config": _jsonable(config),
        "outputs": _jsonable(outputs),
        "verdicts": _jsonable(list(verdicts)),
        "wall_clock_s": wall_clock,
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(record, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _scenario_command(args) -> int:
    try:
        config = load_config(args.config)
        scenario = config["scenario"]
        if scenario != args.command:
            raise ConfigError(
                f"config declares scenario {scenario!r} but was passed to {args.command!r}"
            )
        out_path = args.out or config.get("output", {}).get("csv")
        if out_path is None:
            raise ConfigError("no CSV output path: pass --out or set output.csv")
        record_path = (
            args.record
            or config.get("output", {}).get("record")
            or str(out_path) + ".record.json"
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    started = time.perf_counter()
    try:
        outputs, verdicts, (header, rows) = _RUNNERS[args.command](
            config, Path(args.config).resolve().parent
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    wall_clock = time.perf_counter() - started

    _write_csv(Path(out_path), header, rows)
    _write_record(Path(record_path), config, outputs, verdicts, wall_clock)
    return 0


def _check_all_command(args) -> int:
    try:
        if args.config:
            config = load_config(args.config)
            if config["scenario"] != "check-all":
                raise ConfigError("config scenario must be 'check-all'")
        else:
            config = {
                "scenario": "check-all",
                "seed": args.seed,
                "check_all": {"workers": args.workers},
            }
            validate_config(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    seed = config.get("seed", 0)
    workers = config.get("check_all", {}).get("workers", 1)
    outdir = Path(args.outdir)

    started = time.perf_counter()
    try:
        results = run_all(seed=seed, workers=workers)
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    wall_clock = time.perf_counter() - started

    header = ["criterion", "tolerance", "measured", "passed"]
    rows = [
        [result.name, repr(float(result.tolerance)), repr(float(result.measured)),
         str(bool(result.passed)).lower()]
        for result in results
    ]
    _write_csv(outdir / "summary.csv", header, rows)

    verdicts = [
        _verdict(result.name, result.tolerance, result.measured, result.passed)
        for result in results
    ]
    outputs = {"criteria": [result.to_dict() for result in results]}
    _write_record(outdir / "record.json", config, outputs, verdicts, wall_clock)

    record = {"config": config, "verdicts": verdicts}
    print(emit_report([record]).text)
    return 0 if all(result.passed for result in results) else 4


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="entropiclab",
        description="Deterministic scenario runner for the entropic-evolution laboratory",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    for name in _RUNNERS:
        sub = subparsers.add_parser(name, help=f"run the {name} scenario from a JSON config")
        sub.add_argument("--config", required=True, help="path to the run configuration JSON")
        sub.add_argument("--out", help="CSV output path (overrides output.csv)")
        sub.add_argument("--record", help="run-record JSON path (overrides output.record)")

    check = subparsers.add_parser("check-all", help="run the full invariant suite")
    check.add_argument("--config", help="optional check-all configuration JSON")
    check.add_argument("--seed", type=int, default=0, help="master seed (ignored with --config)")
    check.add_argument("--workers", type=int, default=1,
                       help="worker count for sampling criteria (ignored with --config)")
    check.add_argument("--outdir", default="check_all_artifacts",
                       help="directory for summary.csv and record.json")

    args = parser.parse_args(argv)
    if args.command == "check-all":
        return _check_all_command(args)
    return _scenario_command(args)


if __name__ == "__main__":
    sys.exit(main())
