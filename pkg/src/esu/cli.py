"""Experiment driver.

Five subcommands map onto the study's figures: ``spectrum`` (static
eigenstate entanglement), ``optimize`` (pulse search plus free-evolution
trace), ``noise`` (telegraph-noise survival traces), ``lifetime``
(survival-lifetime scaling over system size), and ``ising`` (end-spin
concurrence protocol).  Each writes CSV tables with a comment line
carrying the config hash and seed, a PNG per CSV, and JSON run records
where a prepared state needs persisting.

Exit codes: 0 success, 2 bad config, 3 missing input records,
4 optimizer made no progress over the zero pulse.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import os
import sys

import numpy as np

from esu import plotting
from esu.config import ConfigError, ExperimentConfig, load_config
from esu.crab import CostSpec, OptimizerConfig, optimize, sample_pulse, CrabPulse
from esu.dynamics import evolve_free, frequency_sweep, lifetime, mean_survival_trace
from esu.entanglement import uhlmann_fidelity
from esu.hilbert import eig_hermitian
from esu.ising import build_ising, reduced_two_spin
from esu.lmg import build_dicke_sector, eigenstate_entropy_scan
from esu import records as rec

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MISSING_INPUT = 3
EXIT_NO_PROGRESS = 4


class MissingInputError(FileNotFoundError):
    pass


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path, header, rows, config: ExperimentConfig):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# config={config.hash()} seed={config.seed}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _csv_path(config, out_dir, command, suffix=""):
    stem = f"{command}{suffix}-{config.hash()}-{config.seed}"
    return os.path.join(out_dir, stem + ".csv")


def _build_model(model_name: str, n_spins: int):
    if model_name == "lmg":
        return build_dicke_sector(n_spins)
    return build_ising(n_spins)


def _fit_through_origin(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.dot(x, y) / np.dot(x, x))


def _fit_loglog_slope(n_values, lifetimes) -> float:
    x = np.log(np.asarray(n_values, dtype=float))
    y = np.log(np.asarray(lifetimes, dtype=float))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def cmd_spectrum(config: ExperimentConfig, out_dir: str) -> int:
    if config.model != "lmg":
        raise ConfigError("spectrum requires model: lmg")
    rows = []
    groups = {}
    fit_rows = []
    centrals, grounds, sizes = [], [], []
    for n in config.n_spins:
        ops = build_dicke_sector(n)
        scan = eigenstate_entropy_scan(ops, config.gamma_ref)
        groups[n] = scan
        for index, energy, entropy in scan:
            rows.append((n, index, energy, entropy))
        central = scan[(len(scan) + 1) // 2 - 1]
        critical = ops.block_entropy(ops.ground_state(1.0))
        fit_rows.append(("central", n, central[2]))
        fit_rows.append(("critical_ground", n, critical))
        sizes.append(np.log2(n / 2 + 1))
        centrals.append(central[2])
        grounds.append(critical)
    fit_rows.append(("fit_central", "", _fit_through_origin(sizes, centrals)))
    fit_rows.append(("fit_critical_ground", "", _fit_through_origin(sizes, grounds)))

    path = _csv_path(config, out_dir, "spectrum")
    write_csv(path, ("n_spins", "n", "energy", "entropy"), rows, config)
    plotting.plot_spectrum(groups, path[:-4] + ".png")
    fit_path = _csv_path(config, out_dir, "spectrumfit")
    write_csv(fit_path, ("kind", "n_spins", "value"), fit_rows, config)
    plotting.plot_series(
        sizes,
        {"central": centrals, "critical ground": grounds},
        "log2(N/2+1)",
        "entropy",
        fit_path[:-4] + ".png",
    )
    return EXIT_OK


def _run_single_optimization(config: ExperimentConfig, n, lam, initial_n):
    """One (N, lambda, initial state) optimization plus its free trace."""
    model = _build_model(config.model, n)
    psi_in = model.eigenstate(config.gamma_ref, initial_n)
    spec = CostSpec(
        lam=lam,
        measure=config.resolved_measure,
        fluctuation_form=config.resolved_fluctuation_form,
    )
    opt_cfg = OptimizerConfig(
        max_evaluations=config.budget,
        restarts=config.restarts,
        simplex_scale=config.simplex_scale,
        seed=config.seed,
        time_steps=config.time_steps,
        start_scale=config.start_scale,
    )
    result = optimize(
        model,
        psi_in,
        spec,
        opt_cfg,
        gamma_ref=config.gamma_ref,
        duration=config.window,
        n_frequencies=config.n_frequencies,
        boundary_stiffness=config.boundary_stiffness,
    )
    return model, result


def _record_for_result(command, config, n, lam, initial_n, model, result, extra=None):
    sub = config.replace(lam=(lam,), n_spins=(n,), initial_state=(initial_n,))
    decomposition = eig_hermitian(model.hamiltonian(config.gamma_ref))
    amplitudes = result.cost.state.amplitudes
    record = rec.build_record(
        command=command,
        config=sub,
        seed=config.seed,
        model_tag=config.model,
        basis_tag=model.basis_tag,
        amplitudes=amplitudes,
        pulse=rec.pulse_payload(result.pulse),
        cost=rec.cost_payload(result.cost),
        zero_pulse_cost=result.zero_pulse_cost,
        no_progress=result.no_progress,
        evaluations=result.evaluations,
        overlaps=rec.eigenstate_overlaps(decomposition, amplitudes),
        restarts=[
            {
                "index": s.index,
                "seed_entropy": list(s.seed_entropy),
                "frequency_shifts": [float(v) for v in s.frequency_shifts],
                "evaluations": s.evaluations,
                "best_cost": s.best_cost,
            }
            for s in result.restarts
        ],
    )
    return record, sub


def _render_pulse(result, config, out_dir, stem):
    grid = np.linspace(-config.window, 0.0, 600)
    gammas = sample_pulse(result.pulse, grid)
    plotting.plot_pulse(grid, gammas, config.gamma_ref, os.path.join(out_dir, stem + "-pulse.png"))


def cmd_optimize(config: ExperimentConfig, out_dir: str) -> int:
    trace_rows = []
    best_rows = []
    series = {}
    any_no_progress = False
    for n, lam in itertools.product(config.n_spins, config.lam):
        best_for_combo = None
        for initial_n in config.initial_state:
            model, result = _run_single_optimization(config, n, lam, initial_n)
            record, sub = _record_for_result(
                "optimize", config, n, lam, initial_n, model, result
            )
            rec.save_record(record, out_dir)
            _render_pulse(result, config, out_dir, record.file_name()[:-5])
            any_no_progress |= result.no_progress
            traj = evolve_free(
                model,
                result.cost.state,
                config.gamma_ref,
                config.horizon,
                config.dt,
                record=("survival", "entanglement"),
            )
            for t, s, p in zip(traj.times, traj.entanglement, traj.survival):
                trace_rows.append((n, lam, initial_n, t, s, p))
            series[f"N{n} lam{lam} n{initial_n}"] = traj.entanglement
            times = traj.times
            if best_for_combo is None or result.cost.entanglement > best_for_combo[1]:
                best_for_combo = (initial_n, result.cost.entanglement)
        best_rows.append((n, lam) + best_for_combo)

    path = _csv_path(config, out_dir, "optimize")
    write_csv(
        path,
        ("n_spins", "lambda", "initial_n", "t", "entanglement", "survival"),
        trace_rows,
        config,
    )
    plotting.plot_series(times, series, "t", "entanglement", path[:-4] + ".png")
    if len(config.initial_state) > 1:
        best_path = _csv_path(config, out_dir, "optimizemax")
        write_csv(
            best_path,
            ("n_spins", "lambda", "best_initial_n", "entanglement"),
            best_rows,
            config,
        )
        plotting.plot_series(
            [r[0] for r in best_rows],
            {"best entanglement": [r[3] for r in best_rows]},
            "N",
            "entanglement",
            best_path[:-4] + ".png",
        )
    return EXIT_NO_PROGRESS if any_no_progress else EXIT_OK


def _load_input_record(path):
    if not os.path.exists(path):
        raise MissingInputError(f"input record not found: {path}")
    return rec.load_record(path)


def _model_from_record(record):
    return _build_model(record.model, record.config["n_spins"][0])


def cmd_noise(config: ExperimentConfig, out_dir: str) -> int:
    if not config.input_records:
        raise MissingInputError("noise requires input_records with stored psi(0)")
    trace_rows = []
    lifetime_rows = []
    for path in config.input_records:
        record = _load_input_record(path)
        model = _model_from_record(record)
        psi0 = record.state_vector()
        gamma_ref = record.config["gamma_ref"]
        label = os.path.basename(path)
        sweep = frequency_sweep(
            model,
            psi0,
            gamma_ref,
            (config.noise.i_alpha, config.noise.i_beta),
            config.noise.nu,
            config.noise.instances,
            config.horizon,
            dt=config.dt,
            seed=config.seed,
            dwell=config.noise.dwell,
            threshold=config.noise.threshold,
        )
        for row in sweep.rows:
            for t, mean, std in zip(row.times, row.p_mean, row.p_std):
                trace_rows.append((label, row.nu, t, mean, std))
            lifetime_rows.append((label, row.nu, row.lifetime))
        series = {f"nu={row.nu:g}": row.p_mean for row in sweep.rows}
        stem_png = _csv_path(config, out_dir, "noise")[:-4] + f"-{label[:-5]}.png"
        plotting.plot_series(sweep.rows[0].times, series, "t", "mean survival", stem_png)

    path = _csv_path(config, out_dir, "noise")
    write_csv(path, ("record", "nu", "t", "p_mean", "p_std"), trace_rows, config)
    life_path = _csv_path(config, out_dir, "noiselifetime")
    write_csv(life_path, ("record", "nu", "lifetime"), lifetime_rows, config)
    lifetimes = [r[2] for r in lifetime_rows]
    plotting.plot_series(
        range(len(lifetimes)),
        {"lifetime": lifetimes},
        "row",
        "lifetime",
        life_path[:-4] + ".png",
    )
    return EXIT_OK


def cmd_lifetime(config: ExperimentConfig, out_dir: str) -> int:
    if not config.input_records or not config.reference_records:
        raise MissingInputError(
            "lifetime requires input_records (stabilized) and reference_records"
        )
    nu = config.noise.nu[0]
    rows = []
    scaling = {"esu": [], "reference": []}
    for kind, paths in (
        ("esu", config.input_records),
        ("reference", config.reference_records),
    ):
        for path in paths:
            record = _load_input_record(path)
            model = _model_from_record(record)
            n = record.config["n_spins"][0]
            trace = mean_survival_trace(
                model,
                record.state_vector(),
                record.config["gamma_ref"],
                config.noise.i_alpha,
                config.noise.i_beta,
                nu,
                config.noise.instances,
                config.horizon,
                dt=config.dt,
                seed=config.seed,
                dwell=config.noise.dwell,
                threshold=config.noise.threshold,
            )
            rows.append((kind, n, config.noise.i_alpha, trace.lifetime))
            scaling[kind].append((n, trace.lifetime))
            for intensity in config.intensities:
                extra = mean_survival_trace(
                    model,
                    record.state_vector(),
                    record.config["gamma_ref"],
                    intensity,
                    intensity,
                    nu,
                    config.noise.instances,
                    config.horizon,
                    dt=config.dt,
                    seed=config.seed,
                    dwell=config.noise.dwell,
                    threshold=config.noise.threshold,
                )
                rows.append((kind, n, intensity, extra.lifetime))

    fit_rows = []
    for kind, pairs in scaling.items():
        finite = [(n, t) for n, t in pairs if np.isfinite(t)]
        if len(finite) >= 2:
            gamma = _fit_loglog_slope([n for n, _ in finite], [t for _, t in finite])
            fit_rows.append((kind, gamma))

    path = _csv_path(config, out_dir, "lifetime")
    write_csv(path, ("state_kind", "n_spins", "intensity", "lifetime"), rows, config)
    series = {
        kind: np.array([t for _, t in pairs])
        for kind, pairs in scaling.items()
        if pairs
    }
    ns = [n for n, _ in scaling["esu"]] or [n for n, _ in scaling["reference"]]
    plotting.plot_scaling(ns, series, "survival lifetime", path[:-4] + ".png")
    fit_path = _csv_path(config, out_dir, "lifetimefit")
    write_csv(fit_path, ("state_kind", "gamma"), fit_rows, config)
    plotting.plot_series(
        range(len(fit_rows)),
        {"gamma": [g for _, g in fit_rows]},
        "fit",
        "exponent",
        fit_path[:-4] + ".png",
    )
    return EXIT_OK


def cmd_ising(config: ExperimentConfig, out_dir: str) -> int:
    if config.model != "ising":
        raise ConfigError("ising requires model: ising")
    trace_rows = []
    series = {}
    any_no_progress = False
    for n, lam in itertools.product(config.n_spins, config.lam):
        for initial_n in config.initial_state:
            model, result = _run_single_optimization(config, n, lam, initial_n)
            record, _ = _record_for_result(
                "ising", config, n, lam, initial_n, model, result
            )
            rec.save_record(record, out_dir)
            _render_pulse(result, config, out_dir, record.file_name()[:-5])
            any_no_progress |= result.no_progress
            rho0 = reduced_two_spin(result.cost.state, 1, n)
            traj = evolve_free(
                model,
                result.cost.state,
                config.gamma_ref,
                config.horizon,
                config.dt,
                record=("survival", "entanglement"),
                extra_observables={
                    "pair_survival": lambda psi, n=n, rho0=rho0: uhlmann_fidelity(
                        rho0, reduced_two_spin(psi, 1, n)
                    )
                },
            )
            for t, c, p, pp in zip(
                traj.times, traj.entanglement, traj.survival,
                traj.extras["pair_survival"],
            ):
                trace_rows.append((n, lam, initial_n, t, c, p, pp))
            series[f"N{n} lam{lam} n{initial_n}"] = traj.entanglement
            times = traj.times

    path = _csv_path(config, out_dir, "ising")
    write_csv(
        path,
        ("n_spins", "lambda", "initial_n", "t", "concurrence", "survival",
         "pair_survival"),
        trace_rows,
        config,
    )
    plotting.plot_series(times, series, "t", "end-spin concurrence", path[:-4] + ".png")
    return EXIT_NO_PROGRESS if any_no_progress else EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "optimize": cmd_optimize,
    "noise": cmd_noise,
    "lifetime": cmd_lifetime,
    "ising": cmd_ising,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="esu",
        description="Entanglement storage experiments: spectra, pulse "
        "optimization, telegraph-noise robustness, lifetime scaling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML config file")
        p.add_argument("--seed", type=int, default=None, help="master seed override")
        p.add_argument("--out", default=None, help="output directory override")
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
        if args.seed is not None:
            config = config.replace(seed=args.seed)
        if args.out is not None:
            config = config.replace(out=args.out)
        out_dir = config.out
        os.makedirs(out_dir, exist_ok=True)
        return COMMANDS[args.command](config, out_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MissingInputError as exc:
        print(f"missing input: {exc}", file=sys.stderr)
        return EXIT_MISSING_INPUT


if __name__ == "__main__":
    sys.exit(main())
