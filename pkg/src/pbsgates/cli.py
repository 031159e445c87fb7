"""Command-line entry point: ``pbsgates {truth-table,scan,sweep-visibility,oracle-check}``."""

from __future__ import annotations

import argparse
import itertools
import json
import logging
import sys
from pathlib import Path

import numpy as np
from scipy.stats import unitary_group

from pbsgates.devices import DEVICES, coherence_scan, device_inputs, fit_malus, simulate
from pbsgates.fock import PhotonicState, SingleParticleUnitary, apply_unitary, transition_amplitude_oracle
from pbsgates.imperfections import VisibilityModel, error_report, run_with_visibility
from pbsgates.io import (
    SCHEMA_VERSION,
    ConfigError,
    ExperimentConfig,
    InvariantViolation,
    RunRecord,
    load_config,
    parse_config,
    to_csv,
)
from pbsgates.qubit import QubitState

log = logging.getLogger("pbsgates")

EXIT_OK, EXIT_CONFIG, EXIT_INVARIANT = 0, 2, 3
PROB_TOL = 1e-9


def _check_probability(p: float, what: str) -> None:
    if not -PROB_TOL <= p <= 1 + PROB_TOL:
        raise InvariantViolation(f"{what} = {p!r} is not a probability")


def _counts(expected: list[float], sample: bool, rng: np.random.Generator) -> list[float]:
    if not sample:
        return expected
    return [int(rng.poisson(max(e, 0.0))) for e in expected]


def truth_table_rows(cfg: ExperimentConfig, sample: bool = False, seed: int = 0) -> tuple[list[str], list[list]]:
    rng = np.random.default_rng(seed)
    two_qubit = cfg.device == "cnot"
    columns = ["in_control", "in_target", "p_out0", "p_out1", "success_prob", "synthetic_counts_0", "synthetic_counts_1"]
    if two_qubit:
        columns += ["p_out00", "p_out01", "p_out10", "p_out11"]
    rows = []
    for c, t in itertools.product((0, 1), repeat=2):
        inputs = device_inputs(cfg.device, QubitState.basis(c), QubitState.basis(t))
        if cfg.device == "cnot":
            out = simulate("cnot", inputs, cfg.policy, leak=cfg.extinction.leak)
        else:
            out = run_with_visibility(cfg.device, inputs, cfg.visibility, cfg.policy, cfg.extinction)
        dist = out.output_distribution()
        p = out.success_probability
        _check_probability(p, f"success probability for inputs ({c}, {t})")
        if p > 0 and abs(sum(dist.values()) - 1.0) > PROB_TOL:
            raise InvariantViolation(f"output distribution for inputs ({c}, {t}) sums to {sum(dist.values())!r}")
        if two_qubit:
            p0, p1 = dist["00"] + dist["10"], dist["01"] + dist["11"]
        else:
            p0, p1 = dist["0"], dist["1"]
        counts = _counts([cfg.pair_rate * p * p0, cfg.pair_rate * p * p1], sample, rng)
        row = [c, t, p0, p1, p, *counts]
        if two_qubit:
            row += [dist[k] for k in ("00", "01", "10", "11")]
        rows.append(row)
    return columns, rows


def scan_rows(cfg: ExperimentConfig, sample: bool = False, seed: int = 0) -> tuple[list[str], list[list], dict]:
    angles = cfg.scan.angles()
    # the scan always runs the parity check: q1 = target role, q2 = control role
    curve = coherence_scan(cfg.target, cfg.control, angles, cfg.policy, leak=cfg.extinction.leak)
    for a, p in curve:
        _check_probability(p, f"coincidence probability at {a} deg")
    counts = _counts([cfg.pair_rate * p for _, p in curve], sample, np.random.default_rng(seed))
    rows = [[a, p, n] for (a, p), n in zip(curve, counts)]
    fit = fit_malus([a for a, _ in curve], [p for _, p in curve])
    return ["theta_deg", "coincidence_prob", "synthetic_counts"], rows, fit


def sweep_rows(cfg: ExperimentConfig) -> tuple[list[str], list[list]]:
    if cfg.device == "cnot":
        raise ConfigError("sweep-visibility supports the two-photon devices (parity, dcnot)")
    rows = []
    for v in cfg.visibilities:
        rep = error_report(cfg.device, VisibilityModel(v), cfg.policy, cfg.extinction, cfg.n_random, cfg.seed)
        rows.append([v, rep.worst_case_error, rep.mean_error])
    return ["v", "worst_case_error", "mean_error"], rows


def oracle_check(trials: int = 100, seed: int = 0, max_modes: int = 4, max_photons: int = 3) -> float:
    """Largest |lifted amplitude - permanent amplitude| over random unitaries and Fock inputs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        m = int(rng.integers(1, max_modes + 1))
        n = int(rng.integers(1, max_photons + 1))
        u = SingleParticleUnitary(unitary_group.rvs(m, random_state=rng) if m > 1 else np.exp(1j * rng.uniform(0, 6.3)) * np.eye(1))
        # lift a random occupation pattern over an m-mode register (paths carry two modes each)
        n_modes = m + (m % 2)
        full = np.eye(n_modes, dtype=complex)
        full[:m, :m] = u.matrix
        occ_in = np.zeros(n_modes, dtype=int)
        for k in rng.integers(0, m, size=n):
            occ_in[k] += 1
        paths = tuple(range(n_modes // 2))
        state = PhotonicState(paths, {tuple(occ_in): 1.0}, n)
        lifted = apply_unitary(state, SingleParticleUnitary(full))
        for occ_out in _occupations(m, n):
            full_out = tuple(occ_out) + (0,) * (n_modes - m)
            got = lifted.amplitudes.get(full_out, 0.0)
            want = transition_amplitude_oracle(u, occ_in[:m], occ_out)
            worst = max(worst, abs(got - want))
    return worst


def _occupations(m: int, n: int):
    for combo in itertools.combinations_with_replacement(range(m), n):
        occ = [0] * m
        for k in combo:
            occ[k] += 1
        yield occ


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _config_from_args(args) -> ExperimentConfig:
    data = {"schema_version": SCHEMA_VERSION}
    if args.config:
        cfg = load_config(args.config)
        data = dict(cfg.raw)
    if getattr(args, "device", None):
        data["device"] = args.device
    if getattr(args, "policy", None):
        data["policy"] = args.policy
    if args.format:
        data["format"] = args.format
    if getattr(args, "start", None) is not None or getattr(args, "stop", None) is not None or getattr(args, "step", None) is not None:
        scan = dict(data.get("scan", {}))
        for key, value in (("start_deg", args.start), ("stop_deg", args.stop), ("step_deg", args.step)):
            if value is not None:
                scan[key] = value
        data["scan"] = scan
    if getattr(args, "v", None):
        data["visibilities"] = args.v
    return parse_config(data)


def _write(cmd: str, cfg: ExperimentConfig, columns, rows, out, extra=None) -> None:
    if cfg.format == "json":
        _emit(RunRecord(cmd, cfg.raw, columns, rows, extra or {}).to_json(), out)
        return
    _emit(to_csv(columns, rows), out)
    if extra:
        sidecar = f"{out}.fit.json" if out not in (None, "-") else None
        if sidecar:
            Path(sidecar).write_text(json.dumps(extra, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        else:
            sys.stderr.write(json.dumps(extra, sort_keys=True) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pbsgates", description="Post-selected polarization-qubit logic simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--out", help="output file (default: stdout)")
        p.add_argument("--format", choices=["csv", "json"])
        p.add_argument("--seed", type=int, default=0, help="seed for sampled counts")
        p.add_argument("--policy", choices=["strict", "feedforward"])

    p = sub.add_parser("truth-table", help="basis-input truth table of a device")
    common(p)
    p.add_argument("--device", choices=DEVICES)
    p.add_argument("--sample-counts", action="store_true", help="emit Poisson-sampled integer counts")

    p = sub.add_parser("scan", help="parity-check coherence scan over the output analyzer angle")
    common(p)
    p.add_argument("--start", type=float)
    p.add_argument("--stop", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--sample-counts", action="store_true")

    p = sub.add_parser("sweep-visibility", help="worst-case and mean error versus visibility")
    common(p)
    p.add_argument("--device", choices=["parity", "dcnot"])
    p.add_argument("--v", type=float, nargs="+", help="visibility values")

    p = sub.add_parser("oracle-check", help="compare lifted amplitudes with the permanent oracle")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-10)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "oracle-check":
            worst = oracle_check(args.trials, args.seed)
            print(f"oracle-check: {args.trials} trials, max deviation {worst:.3e}")
            if worst > args.tol:
                raise InvariantViolation(f"lifted amplitudes deviate from the permanent oracle by {worst:.3e}")
            return EXIT_OK
        cfg = _config_from_args(args)
        if args.command == "truth-table":
            columns, rows = truth_table_rows(cfg, args.sample_counts, args.seed)
            _write("truth-table", cfg, columns, rows, args.out)
        elif args.command == "scan":
            columns, rows, fit = scan_rows(cfg, args.sample_counts, args.seed)
            _write("scan", cfg, columns, rows, args.out, fit)
        elif args.command == "sweep-visibility":
            columns, rows = sweep_rows(cfg)
            _write("sweep-visibility", cfg, columns, rows, args.out)
    except ConfigError as exc:
        print(f"pbsgates: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"pbsgates: invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
