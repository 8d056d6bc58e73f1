"""Command-line front end.

Every run reads one structured config document (YAML or JSON), optionally
starting from a named preset, writes its tables into ``--out`` and a
``summary.json`` with the outcome of each enabled check.  The exit status is
0 when all checks pass, 1 when one fails and 2 for invalid configuration.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path
from typing import Any, Callable

import numpy as np
import scipy
import yaml
from scipy.stats import norm

from . import __version__
from . import io as fmt
from .measures import (
    DivergentMomentError,
    MeasureError,
    ProbabilityMeasure,
    ScalarMeasure,
    convolve,
    example1_build,
    example1_slice_absolute_integral,
    integrate,
    moment,
)
from .operators import MAX_DIM, OperatorError, max_entry, random_density, random_hermitian
from .phasespace import (
    PhaseSpaceGrid,
    build_phase_space_povm,
    coherent_vector,
    fock_state,
    marginal_convolution_check,
    marginal_moment_operator,
    pure_state,
    squeezed_vacuum_vector,
)
from .sampling import (
    SamplingError,
    empirical_moment,
    empirical_moment_stderr,
    predicted_moment,
    sample,
)
from .semispectral import (
    binned_spectral_measure,
    moment_operator_binomial,
    moment_operator_direct,
    smear,
    spectral_measure_of,
)

MAX_GRID = 256


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------- presets

HEAVY_TAIL_RADII = [1e2, 1e3, 1e4, 1e5, 1e6]

PRESETS: dict[str, dict[str, dict[str, Any]]] = {
    "convolve": {
        "point-masses": {"mu": {"point": 1.0}, "nu": {"point": 2.0}, "kmax": 2},
        "example1": {"example1": {"cutoff": 20}, "kmax": 0},
        "gaussian": {"mu": {"gaussian": {"mean": 0.0, "var": 1.0, "half_width": 12, "step": 0.01}},
                     "nu": {"gaussian": {"mean": 0.0, "var": 2.0, "half_width": 12, "step": 0.01}},
                     "kmax": 2, "radii": [6, 12, 24]},
    },
    "moments": {
        "heavy-tail": {"measure": {"heavy_tail": {"half_width": 1e6, "step": 1.0}},
                       "kmax": 2, "radii": HEAVY_TAIL_RADII},
        "gaussian": {"measure": {"gaussian": {"mean": 0.0, "var": 1.0, "half_width": 12,
                                              "step": 0.01}},
                     "kmax": 4, "radii": [3, 6, 12]},
    },
    "example1": {
        "default": {"cutoff": 20},
    },
    "smear": {
        "identity": {"A": {"random": 6}, "mu": {"point": 0.0}, "kmax": 4, "tol": 1e-10},
        "random": {"A": {"random": 8}, "mu": {"random_atoms": 12}, "kmax": 5, "tol": 1e-8},
        "heavy-tail": {"A": {"diag": [0.0, 1.0]},
                       "mu": {"heavy_tail": {"half_width": 1e6, "step": 1.0}},
                       "kmax": 2, "radii": HEAVY_TAIL_RADII, "tol": None,
                       "edges": {"linspace": [-10, 10, 81]}},
    },
    "phasespace": {
        "vacuum": {"state": "vacuum", "N": 40, "L": 6, "m": 48, "order": 3, "kmax": 2,
                   "sweep_N": [20, 40, 60], "conv_tol": 5e-3, "moment_block": None,
                   "moment_tol": None, "write_effects": False},
    },
    "sample": {
        "eigenstate": {"povm": {"spectral": {"diag": [0.0, 1.0]}}, "rho": {"fock": 0},
                       "n": 10000, "kmax": 2},
        "vacuum-marginal": {"povm": {"marginal_x": {"N": 40, "L": 6, "m": 48}},
                            "rho": "vacuum", "n": 100000, "kmax": 2},
    },
}


# ---------------------------------------------------------------- config plumbing


def load_config(path: str | None, command: str, preset: str | None) -> dict:
    cfg: dict[str, Any] = {}
    if preset is not None:
        table = PRESETS.get(command, {})
        if preset not in table:
            raise ConfigError(f"unknown preset {preset!r} for {command}; "
                              f"choose from {sorted(table)}")
        cfg.update(json.loads(json.dumps(table[preset])))
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {path}")
        doc = yaml.safe_load(p.read_text(encoding="utf-8")) or {}
        if not isinstance(doc, dict):
            raise ConfigError("config must be a mapping")
        cfg.update(doc)
    return cfg


def config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, default=str)
    return hashlib.sha256(canon.encode()).hexdigest()


def provenance(cfg: dict, command: str) -> dict:
    return {"tool": "convpovm", "version": __version__, "command": command,
            "config_sha256": config_hash(cfg), "numpy": np.__version__,
            "scipy": scipy.__version__}


def _comments(prov: dict) -> list[str]:
    return [" ".join(f"{k}={prov[k]}" for k in sorted(prov))]


def _need(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f"missing config key {key!r}")
    return cfg[key]


def _int(cfg: dict, key: str, default=None, lo: int = 0, hi: int | None = None) -> int:
    v = cfg.get(key, default)
    if v is None:
        raise ConfigError(f"missing config key {key!r}")
    if isinstance(v, bool) or int(v) != v:
        raise ConfigError(f"{key} must be an integer")
    v = int(v)
    if v < lo or (hi is not None and v > hi):
        raise ConfigError(f"{key}={v} outside [{lo}, {hi}]")
    return v


def _rng(cfg: dict) -> np.random.Generator:
    return np.random.default_rng(int(cfg.get("seed", 0)))


def build_measure(spec, cfg: dict, base: Path, probability: bool = True) -> ScalarMeasure:
    """Measure from a file path or an inline description."""
    if isinstance(spec, str):
        p = (base / spec) if not Path(spec).is_absolute() else Path(spec)
        if not p.is_file():
            raise ConfigError(f"measure file not found: {spec}")
        return fmt.measure_from_json(fmt.read_json(p), probability=probability)
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ConfigError(f"cannot interpret measure {spec!r}")
    (kind, arg), = spec.items()
    if kind == "point":
        return ProbabilityMeasure.point(float(arg))
    if kind == "atoms":
        locs = [a[0] for a in arg]
        w = [a[1] for a in arg]
        cls = ProbabilityMeasure if probability else ScalarMeasure
        return cls.from_atoms(locs, w)
    if kind == "gaussian":
        mean, sd = float(arg.get("mean", 0.0)), math.sqrt(float(arg.get("var", 1.0)))
        hw, step = float(arg.get("half_width", 12)), float(arg.get("step", 0.01))
        return ProbabilityMeasure.from_cdf(lambda x: norm.cdf(x, mean, sd), -hw + mean,
                                           hw + mean, step)
    if kind == "uniform":
        lo, hi = float(arg.get("lo", 0.0)), float(arg.get("hi", 1.0))
        step = float(arg.get("step", 0.01))
        return ProbabilityMeasure.from_cdf(lambda x: np.clip((x - lo) / (hi - lo), 0, 1),
                                           lo, hi, step)
    if kind == "heavy_tail":
        return heavy_tail_measure(float(arg.get("half_width", 1e6)), float(arg.get("step", 1.0)))
    if kind == "random_atoms":
        rng = _rng(cfg)
        n = int(arg)
        w = rng.random(n)
        return ProbabilityMeasure.from_atoms(np.round(rng.uniform(-2, 2, n), 6), w / w.sum())
    raise ConfigError(f"unknown measure kind {kind!r}")


def heavy_tail_measure(half_width: float = 1e6, step: float = 1.0) -> ProbabilityMeasure:
    """Density ``(1 + |x|)^-3`` (normalized) discretized by exact cell masses."""
    def cdf(x):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        neg = x < 0
        out[neg] = 0.5 / (1 - x[neg]) ** 2
        out[~neg] = 1 - 0.5 / (1 + x[~neg]) ** 2
        return out
    return ProbabilityMeasure.from_cdf(cdf, -half_width, half_width, step)


def build_operator(spec, cfg: dict, base: Path) -> np.ndarray:
    if isinstance(spec, str):
        p = (base / spec) if not Path(spec).is_absolute() else Path(spec)
        if not p.is_file():
            raise ConfigError(f"operator file not found: {spec}")
        m = fmt.operator_from_json(fmt.read_json(p))
    elif isinstance(spec, dict) and len(spec) == 1:
        (kind, arg), = spec.items()
        if kind == "diag":
            m = np.diag(np.asarray(arg, dtype=float)).astype(complex)
        elif kind == "random":
            m = random_hermitian(int(arg), _rng(cfg), scale=2.0)
        else:
            raise ConfigError(f"unknown operator kind {kind!r}")
    else:
        raise ConfigError(f"cannot interpret operator {spec!r}")
    if m.shape[0] > MAX_DIM:
        raise ConfigError(f"operator dimension {m.shape[0]} exceeds {MAX_DIM}")
    return m


def build_state(spec, n: int, cfg: dict, base: Path) -> np.ndarray:
    if spec == "vacuum":
        return fock_state(0, n)
    if spec == "maximally_mixed":
        return np.eye(n, dtype=complex) / n
    if isinstance(spec, str):
        m = build_operator(spec, cfg, base)
        return m
    if isinstance(spec, dict) and len(spec) == 1:
        (kind, arg), = spec.items()
        if kind == "fock":
            return fock_state(int(arg), n)
        if kind == "coherent":
            return pure_state(coherent_vector(float(arg[0]), float(arg[1]), n))
        if kind == "squeezed":
            return pure_state(squeezed_vacuum_vector(float(arg), n))
        if kind == "random":
            return random_density(n, _rng(cfg), int(arg) if arg else None)
    raise ConfigError(f"cannot interpret state {spec!r}")


# ---------------------------------------------------------------- commands


class Run:
    """Collects outputs and check results for one command invocation."""

    def __init__(self, command: str, cfg: dict, out: Path):
        self.command = command
        self.cfg = cfg
        self.out = out
        self.prov = provenance(cfg, command)
        self.checks: dict[str, bool] = {}
        self.info: dict[str, Any] = {}
        out.mkdir(parents=True, exist_ok=True)

    def csv(self, name: str, header: list[str], rows) -> None:
        (self.out / name).write_text(fmt.csv_text(header, rows, _comments(self.prov)),
                                     encoding="utf-8")

    def json(self, name: str, doc: dict) -> None:
        doc = dict(doc)
        doc["provenance"] = self.prov
        fmt.write_json(self.out / name, doc)

    def check(self, name: str, ok: bool) -> None:
        self.checks[name] = bool(ok)

    def finish(self) -> int:
        ok = all(self.checks.values())
        self.json("summary.json", {"checks": self.checks, "info": self.info, "ok": ok,
                                   "config": self.cfg})
        return 0 if ok else 1


def _moment_tables(run: Run, mu: ScalarMeasure, kmax: int, radii, prefix: str) -> None:
    rows = []
    for k in range(kmax + 1):
        rep = moment(mu, k, radii)
        (run.out / f"{prefix}_k{k}.csv").write_text(
            fmt.moment_report_csv(rep, _comments(run.prov)), encoding="utf-8")
        rows.append((k, rep.value.real, rep.value.imag, rep.verdict.value))
        run.info[f"{prefix}_k{k}"] = {"value": [rep.value.real, rep.value.imag],
                                      "verdict": rep.verdict.value}
    run.csv(f"{prefix}_summary.csv", ["k", "re", "im", "verdict"], rows)


def _example1_tables(run: Run, cutoff: int) -> None:
    ex = example1_build(cutoff=cutoff)
    lam = convolve(ex.mu, ex.nu)
    run.json("convolution.json", fmt.measure_to_json(lam))
    rows, worst_even, worst_slice = [], 0.0, 0.0
    top = 2 * cutoff
    for x, w in lam.atoms:
        n = int(round(x))
        if abs(n) > top:
            continue
        sl = ""
        if n % 2 == 0:
            worst_even = max(worst_even, abs(w))
            s = example1_slice_absolute_integral(ex.mu, ex.nu, n, ex.f)
            worst_slice = max(worst_slice, abs(s - 1))
            sl = s
        rows.append((n, w.real, w.imag, sl))
    run.csv("example1.csv", ["n", "re", "im", "slice_integral"], rows)
    fint = integrate(ex.f, lam)
    run.info["integral_f_lambda"] = [fint.real, fint.imag]
    run.check("even_atoms_vanish", worst_even <= 1e-12)
    run.check("integral_f_vanishes", abs(fint) <= 1e-10)
    run.check("slice_integrals_one", worst_slice <= 1e-9)


def cmd_convolve(run: Run, base: Path) -> None:
    cfg = run.cfg
    if "example1" in cfg:
        _example1_tables(run, _int(cfg["example1"], "cutoff", 20, lo=1))
        return
    mu = build_measure(_need(cfg, "mu"), cfg, base, probability=False)
    nu = build_measure(_need(cfg, "nu"), cfg, base, probability=False)
    lam = convolve(mu, nu, max_cells=int(cfg.get("max_cells", 10_000_000)))
    run.json("convolution.json", fmt.measure_to_json(lam))
    kmax = _int(cfg, "kmax", 4)
    radii = cfg.get("radii") or [lam.extent() or 1.0, 2 * (lam.extent() or 1.0)]
    _moment_tables(run, lam, kmax, radii, "moments")
    run.check("mass_multiplicative", abs(lam.mass() - mu.mass() * nu.mass()) <= 1e-12)


def cmd_moments(run: Run, base: Path) -> None:
    cfg = run.cfg
    mu = build_measure(_need(cfg, "measure"), cfg, base, probability=False)
    radii = _need(cfg, "radii")
    _moment_tables(run, mu, _int(cfg, "kmax", 4), radii, "moments")


def cmd_example1(run: Run, base: Path) -> None:
    _example1_tables(run, _int(run.cfg, "cutoff", 20, lo=1))


def _auto_edges(mu: ScalarMeasure, points: np.ndarray) -> np.ndarray:
    locs = np.unique(np.round(np.add.outer(points, mu.locations).ravel(), 12))
    if len(locs) == 1:
        return np.array([locs[0] - 0.5, locs[0] + 0.5])
    return 0.5 * (locs[:-1] + locs[1:])


def _edges(spec, mu, points) -> np.ndarray:
    if spec is None or spec == "auto":
        if mu.density is not None:
            raise ConfigError("edges must be given for measures with a density part")
        return _auto_edges(mu, points)
    if isinstance(spec, dict) and "linspace" in spec:
        lo, hi, n = spec["linspace"]
        return np.linspace(float(lo), float(hi), int(n))
    return np.asarray(spec, dtype=float)


def cmd_smear(run: Run, base: Path) -> None:
    cfg = run.cfg
    a = build_operator(_need(cfg, "A"), cfg, base)
    mu = build_measure(_need(cfg, "mu"), cfg, base, probability=True)
    e = spectral_measure_of(a)
    edges = _edges(cfg.get("edges"), mu, e.points)
    povm = smear(mu, e, edges)
    run.json("povm.json", fmt.povm_to_json(povm))
    run.info["min_effect_eigenvalue"] = povm.min_effect_eigenvalue()
    run.check("effects_positive", povm.min_effect_eigenvalue() >= -1e-9)
    run.check("normalized", povm.normalization_error() <= 1e-8)
    tol = cfg.get("tol", 1e-8)
    radii = cfg.get("radii")
    rows = []
    for k in range(_int(cfg, "kmax", 4) + 1):
        direct = moment_operator_direct(povm, k)
        try:
            binom = moment_operator_binomial(mu, a, k, radii=radii)
        except DivergentMomentError as exc:
            rows.append((k, "", "refused", exc.report.verdict.value))
            run.json(f"divergence_k{k}.json", {
                "order": exc.report.order, "verdict": exc.report.verdict.value,
                "radii": exc.report.radii.tolist(), "partial_abs": exc.report.partial_abs.tolist()})
            run.info[f"k{k}"] = "refused"
            continue
        dist = max_entry(direct - binom)
        status = "ok"
        if tol is not None:
            status = "ok" if dist <= tol else "fail"
            run.check(f"moment_k{k}", dist <= tol)
        rows.append((k, dist, status, "converged"))
        run.info[f"k{k}"] = dist
    run.csv("moment_comparison.csv", ["k", "max_entry_distance", "status", "mu_moment_verdict"],
            rows)


def _grid(cfg: dict) -> PhaseSpaceGrid:
    m = _int(cfg, "m", 48, lo=2, hi=MAX_GRID)
    return PhaseSpaceGrid(float(cfg.get("L", 6.0)), m)


def cmd_phasespace(run: Run, base: Path) -> None:
    cfg = run.cfg
    n = _int(cfg, "N", 40, lo=2, hi=MAX_DIM)
    grid = _grid(cfg)
    order = _int(cfg, "order", 3, lo=1, hi=12)
    state_spec = cfg.get("state", "vacuum")
    t = build_state(state_spec, n, cfg, base)
    probe = build_state(cfg.get("probe", "vacuum"), n, cfg, base)
    povm = build_phase_space_povm(t, grid, order)
    mx, my = povm.marginal("x"), povm.marginal("y")

    pdir = run.out / "povm"
    pdir.mkdir(exist_ok=True)
    fmt.write_json(pdir / "grid.json", {"half_width": grid.half_width, "points": grid.points,
                                        "cell_area": grid.cell_area, "order": order, "N": n,
                                        "provenance": run.prov})
    if cfg.get("write_effects", False):
        for i in range(grid.points):
            fmt.write_json(pdir / f"row_{i:03d}.json",
                           {"row": i, "effects": [fmt.operator_to_json(povm.effect(i, j))
                                                  for j in range(grid.points)]})
    px, py = mx.probabilities(probe), my.probabilities(probe)
    lo = np.concatenate([[-np.inf], mx.edges])
    hi = np.concatenate([mx.edges, [np.inf]])
    (pdir / "marginals.csv").write_text(fmt.csv_text(
        ["bin", "lo", "hi", "rep", "mass_x", "mass_y"],
        zip(range(mx.n_bins), lo, hi, mx.reps, px, py), _comments(run.prov)), encoding="utf-8")

    run.info["captured_mass"] = povm.captured_mass()
    run.info["captured_mass_in_probe"] = povm.captured_mass_in(probe)
    run.info["excess"] = povm.excess()

    sweep = cfg.get("sweep_N") or [n]
    state_fn = (lambda k: build_state(state_spec, k, cfg, base))
    rep = marginal_convolution_check(state_fn, grid, sweep, cfg.get("block"), "x", order)
    run.csv("convolution_check.csv", ["N", "block", "bin", "distance"],
            [(r.n, r.block, b, d) for r in rep.rows for b, d in enumerate(r.bin_distances)])
    run.csv("convolution_check_summary.csv",
            ["N", "block", "max_distance", "vacuum_mass_distance", "captured_mass"],
            [(r.n, r.block, r.max_distance, r.vacuum_mass_distance, r.captured_mass)
             for r in rep.rows])
    conv_tol = cfg.get("conv_tol")
    if conv_tol is not None:
        at_n = [r for r in rep.rows if r.n == n] or rep.rows[-1:]
        run.check("marginal_is_convolution", at_n[0].max_distance <= float(conv_tol))
    if len(sweep) > 1:
        run.check("distance_monotone_in_N", rep.monotone)

    block = cfg.get("moment_block") or n // 2
    mtol = cfg.get("moment_tol")
    rows = []
    for k in range(_int(cfg, "kmax", 2) + 1):
        for axis, marg in (("x", mx), ("y", my)):
            direct = moment_operator_direct(marg, k)
            formula = marginal_moment_operator(t, k, axis=axis)
            dist = max_entry(direct[:block, :block] - formula[:block, :block])
            ev_d = float(np.einsum("ij,ji->", probe, direct).real)
            ev_f = float(np.einsum("ij,ji->", probe, formula).real)
            rows.append((k, axis, block, dist, ev_d, ev_f))
            if k == 0:
                run.check(f"k0_identity_{axis}", max_entry(direct - np.eye(n)) <= 1e-6)
            elif mtol is not None:
                run.check(f"moment_k{k}_{axis}", dist <= float(mtol))
    run.csv("moment_table.csv",
            ["k", "axis", "block", "max_entry_distance", "probe_direct", "probe_formula"], rows)


def _povm_from(spec, cfg: dict, base: Path, n_hint: int | None = None):
    if isinstance(spec, str):
        p = (base / spec) if not Path(spec).is_absolute() else Path(spec)
        if not p.is_file():
            raise ConfigError(f"POVM file not found: {spec}")
        return fmt.povm_from_json(fmt.read_json(p))
    if isinstance(spec, dict) and len(spec) == 1:
        (kind, arg), = spec.items()
        if kind == "spectral":
            a = build_operator(arg, cfg, base)
            e = spectral_measure_of(a)
            return binned_spectral_measure(e, _auto_edges(ProbabilityMeasure.point(0.0), e.points))
        if kind == "marginal_x":
            n = _int(arg, "N", 40, lo=2, hi=MAX_DIM)
            grid = _grid(arg)
            t = build_state(arg.get("state", "vacuum"), n, cfg, base)
            return build_phase_space_povm(t, grid, _int(arg, "order", 3, lo=1)).marginal("x")
    raise ConfigError(f"cannot interpret POVM {spec!r}")


def cmd_sample(run: Run, base: Path) -> None:
    cfg = run.cfg
    povm = _povm_from(_need(cfg, "povm"), cfg, base)
    rho = build_state(cfg.get("rho", "vacuum"), povm.dim, cfg, base)
    n = _int(cfg, "n", 10000, lo=2)
    seed = int(cfg.get("seed", 0))
    s = sample(povm, rho, n, seed, shards=_int(cfg, "shards", 1, lo=1))
    (run.out / "samples.csv").write_text(fmt.sample_csv(s, _comments(run.prov)), encoding="utf-8")
    meta = fmt.sample_metadata(s)
    run.json("samples.json", meta)
    rows = []
    zmax = float(cfg.get("z_max", 5.0))
    for k in range(_int(cfg, "kmax", 2) + 1):
        emp = empirical_moment(s, k)
        pred = predicted_moment(povm, rho, k)
        se = empirical_moment_stderr(s, k)
        z = (emp - pred) / se if se > 0 else (0.0 if abs(emp - pred) < 1e-12 else math.inf)
        rows.append((k, emp, pred, se, z))
        run.check(f"z_k{k}", abs(z) < zmax)
    mean = empirical_moment(s, 1)
    var = float(np.var(s.outcomes, ddof=1))
    run.info["sample_variance"] = var
    run.info["sample_mean"] = mean
    run.csv("moment_comparison.csv", ["k", "empirical", "predicted", "stderr", "z"], rows)


COMMANDS: dict[str, tuple[Callable[[Run, Path], None], str]] = {
    "convolve": (cmd_convolve, "convolve two measures and tabulate moments"),
    "moments": (cmd_moments, "windowed moments with divergence verdicts"),
    "example1": (cmd_example1, "measures whose convolution vanishes on even integers"),
    "smear": (cmd_smear, "smear a spectral measure and compare moment operators"),
    "phasespace": (cmd_phasespace, "phase-space observable, marginals and moment tables"),
    "sample": (cmd_sample, "sample outcomes and compare empirical with predicted moments"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="convpovm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"convpovm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, helptext) in COMMANDS.items():
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="YAML or JSON config document")
        p.add_argument("--out", default=f"out/{name}", help="output directory")
        p.add_argument("--seed", type=int, help="64-bit seed (overrides config)")
        p.add_argument("--preset", help=f"start from a preset: {', '.join(PRESETS.get(name, {}))}")
    return parser


def _error(kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": kind, "message": message}, sort_keys=True) + "\n")
    return 2


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.command, args.preset)
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise ConfigError("seed must be an unsigned 64-bit integer")
            cfg["seed"] = args.seed
        base = Path(args.config).parent if args.config else Path.cwd()
        run = Run(args.command, cfg, Path(args.out))
        COMMANDS[args.command][0](run, base)
        return run.finish()
    except ConfigError as exc:
        return _error("config", str(exc))
    except (MeasureError, OperatorError, SamplingError, ValueError, KeyError, TypeError) as exc:
        return _error(type(exc).__name__, str(exc))


if __name__ == "__main__":
    sys.exit(main())
