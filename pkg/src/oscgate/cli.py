"""
Batch experiment runner.

    oscgate <experiment> --config <path> --out <dir> [--format csv|json] [--seed <int>]

Every run writes ``report.json`` plus curve tables and matrix dumps into
``--out``. On failure a JSON error object is printed to stderr, written to
``error.json`` when the output directory is usable, and the exit status is
nonzero.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import BACKEND
from .config import Config, load_config
from .errors import ConfigError, ConstraintInfeasibleError, IllConditionedError, OscgateError
from .gatelib import GATE_NAMES, GateTarget, embed_gate, gate_from_params
from .io import write_curve, write_json, write_matrix

EXPERIMENTS = ("field-1d", "em-3d", "genmatch", "iontrap", "oracle-check")

EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_THRESHOLD = 4
EXIT_OTHER = 1

RESIDUAL_TOL = 1e-8


def thread_cap() -> int:
    """Worker count for sweeps, capped by ``OSCGATE_THREADS``."""
    raw = os.environ.get("OSCGATE_THREADS", "").strip()
    default = min(4, os.cpu_count() or 1)
    if not raw:
        return default
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"OSCGATE_THREADS must be a positive integer, got {raw!r}", field="OSCGATE_THREADS")
    if n < 1:
        raise ConfigError(f"OSCGATE_THREADS must be a positive integer, got {raw!r}", field="OSCGATE_THREADS")
    return n


def _pmap(fn, items):
    items = list(items)
    workers = min(thread_cap(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def default_target(dim: int) -> GateTarget:
    """Fiftieth root of the three-qubit Hadamard, padded to ``dim`` levels."""
    return embed_gate(gate_from_params("frac", {"base": "Hr", "r": "3", "k": "50"}), dim)


def load_target(cfg: Config, dim: int | None) -> GateTarget | None:
    """
    Gate from ``target.name`` plus its ``target.*`` parameters, or from
    ``target.file``. Smaller gates are padded with identity up to ``dim``.
    """
    params = cfg.section("target")
    name = params.pop("name", None)
    path = params.pop("file", None)
    if name is not None and path is not None:
        raise ConfigError("give either target.name or target.file, not both", field="target.file")
    if name is None and path is None:
        return None
    if path is not None:
        from .io import read_matrix

        try:
            M = read_matrix(path)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"target.file: {exc}", field="target.file") from None
        target = GateTarget(M, Path(path).name)
    else:
        if name not in GATE_NAMES:
            raise ConfigError(f"target.name: unknown gate {name!r}; expected one of {list(GATE_NAMES)}",
                              line=cfg.lines.get("target.name"), field="target.name")
        try:
            target = gate_from_params(name, params)
        except ValueError as exc:
            raise ConfigError(f"target: {exc}", line=cfg.lines.get("target.name"), field="target.name") from None
    if dim is not None:
        target = embed_gate(target, dim)
    return target


# ---------------------------------------------------------------- experiments


def run_field_1d(cfg: Config, seed: int, fmt: str, out: Path) -> dict:
    from .dyson1d import nsr_sweep
    from .oscillator import TruncationSpec

    N = cfg.get_int("truncation.N", 8, minimum=2)
    spec = TruncationSpec(N)
    T = cfg.get_float("grid.T", 1.0, positive=True)
    M = cfg.get_int("grid.M", 32, minimum=2)
    alpha = cfg.get_float("constraint.alpha_diss", 1.0, positive=True)
    e_diss = cfg.get_float("constraint.e_diss", 0.1, nonneg=True)
    eps = cfg.get_float("physics.eps", 0.1)
    charge = cfg.get_float("physics.charge", 1.0)
    Ts = cfg.get_list("sweep.T", float, default=[T], increasing=True)
    target = load_target(cfg, N) or default_target(N)
    if target.dim != N:
        raise ConfigError(f"target dimension {target.dim} exceeds truncation {N}", field="truncation.N")

    pts = nsr_sweep(target.matrix, spec, Ts, M, alpha, e_diss, charge, eps)
    rows = [[p.T, p.M, p.nsr, p.nsr_opt, p.lam, p.residual, p.energy, p.source_T] for p in pts]
    write_curve(out / "nsr_vs_T.csv", ["T", "M", "nsr", "nsr_opt", "lambda", "residual", "energy", "source_T"],
                rows, fmt)
    last = pts[-1]
    f = last.field
    write_curve(out / "field.csv", ["t", "E"], zip(f.times, f.samples), fmt)
    write_matrix(out / "target.csv", target.matrix)
    checks = []
    for p in pts:
        if p.residual > RESIDUAL_TOL:
            checks.append(f"stationarity residual {p.residual:.3e} at T={p.T}")
        if e_diss > 0 and abs(p.energy - e_diss) > 1e-8 * e_diss:
            checks.append(f"dissipation constraint off by {abs(p.energy - e_diss):.3e} at T={p.T}")
    return {
        "points": [
            {"T": p.T, "M": p.M, "nsr": p.nsr, "nsr_opt": p.nsr_opt, "lambda": p.lam, "residual": p.residual,
             "energy": p.energy, "source_T": p.source_T}
            for p in pts
        ],
        "target": target.label,
        "failed_checks": checks,
    }


def run_em_3d(cfg: Config, seed: int, fmt: str, out: Path) -> dict:
    from .dyson1d import nsr
    from .em3d import em_dyson_gate, em_error_terms, em_kernels, em_optimal_field, target_residual
    from .oscillator import TruncationSpec, energy_spectrum

    N = cfg.get_int("truncation.N", 3, minimum=2)
    spec = TruncationSpec(N, 3)
    T = cfg.get_float("grid.T", 1.0, positive=True)
    M = cfg.get_int("grid.M", 16, minimum=2)
    charge = cfg.get_float("physics.charge", 0.1)
    eps0 = cfg.get_float("constraint.eps0", 0.5, nonneg=True)
    target = load_target(cfg, spec.dim) or default_target(spec.dim)
    if target.dim != spec.dim:
        raise ConfigError(f"target dimension {target.dim} exceeds flat truncation {spec.dim}", field="truncation.N")

    # the configured gate is the dressed target; the lab target carries the free phase
    energies = energy_spectrum(spec).energies
    lab = GateTarget(np.exp(-1j * energies * T)[:, None] * target.matrix, target.label)
    kern = em_kernels(spec, (T, M))
    alpha_vec, beta = em_error_terms(lab, spec, (T, M), charge, kern)
    design = em_optimal_field(alpha_vec, beta, T / M, eps0, t_end=T)
    gate = em_dyson_gate(design.xi_opt, spec, charge, kern)
    value = nsr(lab, gate.U)
    baseline = float(np.sum(np.abs(target_residual(lab, spec, T)) ** 2) / np.sum(np.abs(lab.matrix) ** 2))
    rng = np.random.default_rng(seed)
    gram = kern.gram() * charge ** 2
    psd_min = min(float(x @ gram @ x) for x in rng.standard_normal((100, 6 * M)))
    xi = design.xi_opt
    write_curve(out / "xi.csv", ["t", "B1", "E1", "B2", "E2", "B3", "E3"],
                [[t, *row] for t, row in zip(xi.times, xi.xi)], fmt)
    write_matrix(out / "achieved_W.csv", gate.W)
    checks = []
    if design.residual > RESIDUAL_TOL:
        checks.append(f"stationarity residual {design.residual:.3e}")
    if eps0 > 0 and abs(design.constraint_value - eps0) > 1e-6 * eps0:
        checks.append(f"constraint value {design.constraint_value:.6g} vs {eps0:.6g}")
    if psd_min < -1e-12:
        checks.append(f"first-order quadratic form negative ({psd_min:.3e})")
    return {
        "lambda": design.lam, "residual": design.residual, "constraint_value": design.constraint_value,
        "nsr": value, "nsr_zero_field": baseline, "psd_min": psd_min, "hard_case": design.hard_case,
        "target": target.label, "failed_checks": checks,
    }


def run_genmatch(cfg: Config, seed: int, fmt: str, out: Path) -> dict:
    from .genmatch import (
        GeneratorPair,
        anharmonic_generator,
        fourier_design,
        nser,
        realized_generator,
        stationarity_residuals,
    )
    from .matrixcore import expm_hermitian, hermitian_generator
    from .oscillator import TruncationSpec, q_power_matrix

    N = cfg.get_int("truncation.N", 8, minimum=2)
    Ns = cfg.get_list("sweep.N", int, default=[N], increasing=True)
    mu = cfg.get_float("physics.mu", 0.5)
    T = cfg.get_float("grid.T", 1.0, positive=True)
    energy = cfg.get_float("constraint.energy", 1.0, positive=True)
    mode = cfg.get_str("constraint.mode", "budget", choices=("budget", "equality"))
    coupling = cfg.get_str("physics.coupling", "q3", choices=("q", "q2", "q3"))
    power = {"q": 1, "q2": 2, "q3": 3}[coupling]
    has_gate = "target.name" in cfg or "target.file" in cfg
    gate_raw = load_target(cfg, None) if has_gate else None

    def one(n):
        spec = TruncationSpec(n)
        if gate_raw is not None:
            if gate_raw.dim > n:
                raise ConfigError(f"target dimension {gate_raw.dim} exceeds truncation {n}", field="truncation.N")
            Hg = hermitian_generator(embed_gate(gate_raw, n).matrix)
        else:
            Hg = anharmonic_generator(spec, mu, T)
        pair = GeneratorPair(Hg, q_power_matrix(spec, power))
        d = fourier_design(pair, energy, mode=mode)
        return n, pair, d

    results = _pmap(one, Ns)
    rows, points, checks = [], [], []
    for n, pair, d in results:
        res = float(stationarity_residuals(pair, d).max())
        v = nser(pair, d)
        rows.append([n, v, d.lam, d.energy, d.active, res])
        points.append({"N": n, "nser": v, "lambda": d.lam, "energy": d.energy, "active": d.active, "residual": res})
        if d.active and abs(d.energy - energy) > 1e-8 * energy:
            checks.append(f"energy constraint off at N={n}")
    write_curve(out / "nser_vs_N.csv", ["N", "nser", "lambda", "energy", "active", "residual"], rows, fmt)
    n, pair, d = results[-1]
    write_curve(out / "phi_hat.csv", ["k", "omega", "re", "im"],
                [[k, k * pair.omega0, d.phi_hat[k].real, d.phi_hat[k].imag] for k in range(d.K + 1)], fmt)
    Hphi = realized_generator(d, pair)
    write_matrix(out / "realized_generator.csv", Hphi)
    report = {"points": points, "failed_checks": checks, "coupling": coupling}
    if gate_raw is not None:
        write_matrix(out / "target.csv", gate_raw.matrix)
        report["target"] = {"label": gate_raw.label, "matrix": gate_raw.matrix,
                            "matrix_real_4dp": np.round(gate_raw.matrix.real, 4)}
        report["realized_gate_error"] = float(np.linalg.norm(expm_hermitian(Hphi) - embed_gate(gate_raw, n).matrix))
    else:
        report["target"] = {"label": "anharmonic", "mu": mu, "T": T}
    return report


def run_iontrap(cfg: Config, seed: int, fmt: str, out: Path) -> dict:
    from .iontrap import (
        IonTrapBasis,
        coupling_block,
        design_residual_projections,
        iontrap_design,
        iontrap_generator,
    )
    from .matrixcore import hermitian_generator

    N = cfg.get_int("truncation.N", 6, minimum=2)
    basis = IonTrapBasis(N, cfg.get_float("physics.omega0", 1.0), cfg.get_float("physics.omega0p", 0.1))
    T = cfg.get_float("grid.T", 1.0, positive=True)
    target = load_target(cfg, N) if ("target.name" in cfg or "target.file" in cfg) else None
    if target is not None:
        C = hermitian_generator(target.matrix)
        label = target.label
    else:
        rng = np.random.default_rng(seed)
        X = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
        C = 0.5 * (X + X.conj().T)
        label = f"random-hermitian(seed={seed})"
    design = iontrap_design(C, basis)
    proj = design_residual_projections(C, design, basis)
    # dense least squares over all samples at once
    a = coupling_block(N)
    ks = sorted(design)
    Amat = np.zeros((N * N, len(ks)), dtype=complex)
    for col, k in enumerate(ks):
        for m in range(N):
            n = m + k
            if 0 <= n < N:
                Amat[n * N + m, col] = 0.5 * a[n, m]
    sol, *_ = np.linalg.lstsq(Amat, C.reshape(-1), rcond=None)
    dense_gap = float(max(abs(sol[i] - design[k]) for i, k in enumerate(ks)))
    G = iontrap_generator(design, basis, T)
    write_curve(out / "omega_hat.csv", ["k", "frequency", "re", "im", "projection"],
                [[k, basis.flip_frequency(k), design[k].real, design[k].imag, proj[k]] for k in ks], fmt)
    write_matrix(out / "generator.csv", G)
    checks = []
    if dense_gap > 1e-10:
        checks.append(f"per-diagonal design differs from dense least squares by {dense_gap:.3e}")
    if max(proj.values()) > 1e-12 * max(1.0, float(np.abs(C).max())):
        checks.append("residual not orthogonal to the design direction")
    return {"target": label, "dense_gap": dense_gap, "max_projection": max(proj.values()),
            "design": {str(k): design[k] for k in ks}, "failed_checks": checks}


def run_oracle_check(cfg: Config, seed: int, fmt: str, out: Path) -> dict:
    from .matrixcore import expm_hermitian
    from .oracle import propagate_samples

    kind = cfg.get_str("oracle.hamiltonian", "zero", choices=("zero", "constant", "random", "switching"))
    dim = cfg.get_int("oracle.dim", 2, minimum=1)
    T = cfg.get_float("grid.T", 1.0, positive=True)
    steps = cfg.get_int("oracle.steps", 1000, minimum=1)
    rng = np.random.default_rng(seed)
    if kind == "zero":
        H0 = np.zeros((dim, dim), dtype=complex)
    elif kind == "constant":
        H0 = np.diag(np.arange(dim) + 0.5).astype(complex)
    else:
        X = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        H0 = 0.5 * (X + X.conj().T)
    H = np.repeat(H0[None], steps, axis=0)
    if kind == "switching":
        Y = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        H[steps // 2:] = 0.5 * (Y + Y.conj().T)
    res = propagate_samples(H, T / steps)
    exact = None
    if kind in ("zero", "constant", "random"):
        exact = float(np.linalg.norm(res.U - expm_hermitian(H0, T)))
    write_matrix(out / "U.csv", res.U)
    checks = []
    if res.max_unitarity_defect > 1e-12 * steps:
        checks.append(f"unitarity defect {res.max_unitarity_defect:.3e}")
    return {"hamiltonian": kind, "dim": dim, "steps": steps, "max_unitarity_defect": res.max_unitarity_defect,
            "error_vs_closed_form": exact, "identity": bool(np.allclose(res.U, np.eye(dim), atol=1e-13)),
            "U": res.U, "failed_checks": checks}


RUNNERS = {
    "field-1d": run_field_1d,
    "em-3d": run_em_3d,
    "genmatch": run_genmatch,
    "iontrap": run_iontrap,
    "oracle-check": run_oracle_check,
}


def run_experiment(experiment: str, cfg: Config, out: Path, fmt: str = "csv", seed: int | None = None) -> dict:
    if experiment not in RUNNERS:
        raise ConfigError(f"unknown experiment {experiment!r}; expected one of {list(EXPERIMENTS)}")
    declared = cfg.get_str("experiment")
    if declared is not None and declared != experiment:
        raise ConfigError(f"config declares experiment {declared!r} but {experiment!r} was requested",
                          line=cfg.lines.get("experiment"), field="experiment")
    if seed is None:
        seed = cfg.get_int("seed", 0)
    else:
        cfg.used.add("seed")
    t0 = time.perf_counter()
    body = RUNNERS[experiment](cfg, seed, fmt, out)
    unknown = sorted(set(cfg.values) - cfg.used)
    if unknown:
        k = unknown[0]
        raise ConfigError(f"unrecognised key {k!r} for {experiment}", line=cfg.lines.get(k), field=k)
    checks = body.pop("failed_checks", [])
    report = {
        "experiment": experiment,
        "status": "FAILED" if checks else "ok",
        "failed_checks": checks,
        "seed": seed,
        "config": dict(sorted(cfg.values.items())),
        "results": body,
        "runtime_s": time.perf_counter() - t0,
        "backend": BACKEND,
        "version": __version__,
    }
    write_json(out / "report.json", report)
    return report


def _error_object(exc: BaseException) -> dict:
    code = getattr(exc, "code", "internal")
    obj = {"error": {"code": code, "type": type(exc).__name__, "message": str(exc)}}
    for attr in ("line", "field", "missing", "smallest_singular_value"):
        v = getattr(exc, attr, None)
        if v is not None:
            obj["error"][attr] = v
    return obj


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oscgate", description="Perturbative gate-synthesis experiments.")
    p.add_argument("experiment", choices=EXPERIMENTS)
    p.add_argument("--config", required=True, help="flat key = value config file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="curve table format")
    p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out)
    try:
        cfg = load_config(args.config)
        report = run_experiment(args.experiment, cfg, out, args.format, args.seed)
    except Exception as exc:  # report every failure as a machine-readable object
        obj = _error_object(exc)
        if isinstance(exc, ConfigError):
            status = EXIT_CONFIG
        elif isinstance(exc, (ConstraintInfeasibleError, IllConditionedError)):
            status = EXIT_SOLVER
        elif isinstance(exc, OscgateError):
            status = EXIT_SOLVER
        else:
            status = EXIT_OTHER
        print(json.dumps(obj, default=str), file=sys.stderr)
        try:
            write_json(out / "error.json", obj)
        except OSError:
            pass
        return status
    if report["status"] != "ok":
        obj = {"error": {"code": "threshold", "type": "ThresholdFailure", "message": "; ".join(report["failed_checks"])}}
        print(json.dumps(obj), file=sys.stderr)
        return EXIT_THRESHOLD
    print(json.dumps({"experiment": report["experiment"], "status": "ok", "out": str(out)}))
    return 0


if __name__ == "__main__":
    sys.exit(main())
