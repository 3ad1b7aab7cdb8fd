"""Experiment runner: config parsing, trace recording, plots, rate studies.

Config files are line-based `section.key = value` text. Every run is fully
deterministic given (config, seed): trace CSVs and SVG plots are
byte-identical across repeats. Wall-clock timing is opt-in
(run.record_wall) because it necessarily breaks byte-determinism.
"""

from __future__ import annotations

import itertools
import os
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .core import ConfigError, HyperSchedule, ProblemConstants, schedule_hcmm1, \
    schedule_hcmm2
from .libsvm import load_dataset
from .optimizers import (Hcmm1, Hcmm2, OptimizerKind, Sagda, StormGda,
                         iterate_steps)
from .oracle import MinimaxProblem, evaluate_P, metric_ci
from .problems import PlToyProblem, QuadraticMinimaxProblem, RobustLogisticProblem

TRACE_COLUMNS = ["iter", "p_x", "grad_p_norm", "metric_ci", "m_x_norm",
                 "m_y_norm", "clipped_x", "clipped_y", "wall_ns"]

OPTIMIZER_LABELS = {"hcmm1": Hcmm1, "hcmm2": Hcmm2,
                    "storm_gda": StormGda, "sagda": Sagda}


def optimizer_label(kind: OptimizerKind) -> str:
    for label, cls in OPTIMIZER_LABELS.items():
        if isinstance(kind, cls):
            return label
    raise TypeError(f"unknown optimizer kind {kind!r}")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    problem_kind: str                      # robust_logistic | quadratic | pl_toy
    problem_params: Dict[str, str]
    optimizer: OptimizerKind
    project_y: bool
    schedule_kind: str                     # explicit | theorem1 | theorem2
    schedule_params: Dict[str, float]
    constants: ProblemConstants
    T: int
    seeds: Tuple[int, ...]
    eval_every: int
    output_dir: str
    inner_tol: float
    record_wall: bool = False
    grid: Dict[str, Tuple[float, ...]] = field(default_factory=dict)
    raw: Dict[str, str] = field(default_factory=dict)


def parse_config_text(text: str) -> Dict[str, str]:
    """Parse `key = value` lines (dotted keys, # comments) into a flat map."""
    mapping: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected `key = value`, got {raw!r}")
        key, value = line.split("=", 1)
        mapping[key.strip()] = value.strip()
    return mapping


def _floats(value: str) -> Tuple[float, ...]:
    return tuple(float(tok) for tok in value.split(",") if tok.strip())


def _ints(value: str) -> Tuple[int, ...]:
    return tuple(int(tok) for tok in value.split(",") if tok.strip())


def validate_config(mapping: Dict[str, str]) -> List[str]:
    """Return every violation found (empty list means valid)."""
    issues: List[str] = []
    kind = mapping.get("problem.kind")
    if kind not in ("robust_logistic", "quadratic", "pl_toy"):
        issues.append(f"problem.kind must be robust_logistic|quadratic|pl_toy, "
                      f"got {kind!r}")
    if kind == "robust_logistic" and not mapping.get("problem.dataset_path"):
        issues.append("robust_logistic requires problem.dataset_path")
    opt = mapping.get("optimizer.kind")
    if opt not in OPTIMIZER_LABELS:
        issues.append(f"optimizer.kind must be one of {sorted(OPTIMIZER_LABELS)}, "
                      f"got {opt!r}")
    sched = mapping.get("schedule.kind", "explicit")
    if sched not in ("explicit", "theorem1", "theorem2"):
        issues.append(f"schedule.kind must be explicit|theorem1|theorem2, got {sched!r}")
    try:
        if int(mapping.get("run.T", "0")) < 1:
            issues.append("run.T must be >= 1")
    except ValueError:
        issues.append(f"run.T is not an integer: {mapping.get('run.T')!r}")
    try:
        if int(mapping.get("run.eval_every", "10")) < 1:
            issues.append("run.eval_every must be >= 1")
    except ValueError:
        issues.append(f"run.eval_every is not an integer: "
                      f"{mapping.get('run.eval_every')!r}")
    try:
        if not _ints(mapping.get("run.seeds", "")):
            issues.append("run.seeds must list at least one seed")
    except ValueError:
        issues.append(f"run.seeds is not an integer list: {mapping.get('run.seeds')!r}")
    for key, value in mapping.items():
        if key.startswith(("schedule.", "constants.", "grid.")) \
                and key != "schedule.kind":
            try:
                _floats(value)
            except ValueError:
                issues.append(f"{key} is not numeric: {value!r}")
    return issues


def build_config(mapping: Dict[str, str]) -> ExperimentConfig:
    issues = validate_config(mapping)
    if issues:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(issues))

    opt_name = mapping["optimizer.kind"]
    if opt_name == "hcmm1":
        optimizer: OptimizerKind = Hcmm1(
            update_from_clipped=mapping.get("optimizer.update_from_clipped",
                                            "false").lower() == "true")
    elif opt_name == "hcmm2":
        optimizer = Hcmm2(norm_floor=float(
            mapping.get("optimizer.norm_floor", "1e-12")))
    elif opt_name == "storm_gda":
        optimizer = StormGda()
    else:
        optimizer = Sagda()

    constants = ProblemConstants(
        L_f=float(mapping.get("constants.L_f", "0")),
        L_h=float(mapping.get("constants.L_h", "0")),
        nu=float(mapping.get("constants.nu", "0")),
        delta=float(mapping.get("constants.delta", "0")),
        sigma=float(mapping.get("constants.sigma", "0")),
        sigma_h=float(mapping.get("constants.sigma_h", "0")),
        G=float(mapping.get("constants.G", "0")))

    schedule_params = {k.split(".", 1)[1]: float(v) for k, v in mapping.items()
                       if k.startswith("schedule.") and k != "schedule.kind"}
    problem_params = {k.split(".", 1)[1]: v for k, v in mapping.items()
                      if k.startswith("problem.") and k != "problem.kind"}
    grid = {k.split(".", 1)[1]: _floats(v) for k, v in mapping.items()
            if k.startswith("grid.")}

    return ExperimentConfig(
        problem_kind=mapping["problem.kind"],
        problem_params=problem_params,
        optimizer=optimizer,
        project_y=mapping.get("optimizer.project_y", "true").lower() == "true",
        schedule_kind=mapping.get("schedule.kind", "explicit"),
        schedule_params=schedule_params,
        constants=constants,
        T=int(mapping["run.T"]),
        seeds=_ints(mapping["run.seeds"]),
        eval_every=int(mapping.get("run.eval_every", "10")),
        output_dir=mapping.get("run.output_dir", "out"),
        inner_tol=float(mapping.get("run.inner_tol", "1e-6")),
        record_wall=mapping.get("run.record_wall", "false").lower() == "true",
        grid=grid,
        raw=dict(mapping))


def load_config(path: str) -> ExperimentConfig:
    return build_config(parse_config_text(Path(path).read_text()))


# ---------------------------------------------------------------------------
# problem / schedule construction
# ---------------------------------------------------------------------------

def resolve_dataset_path(path: str) -> str:
    if os.path.isabs(path) or os.path.exists(path):
        return path
    root = os.environ.get("MINIMAX_DATA_DIR")
    if root:
        candidate = os.path.join(root, path)
        if os.path.exists(candidate):
            return candidate
    return path


def build_problem(config: ExperimentConfig) -> Tuple[MinimaxProblem, np.ndarray,
                                                     np.ndarray]:
    """Construct the problem and its default initial point (x0, y0)."""
    p = config.problem_params
    if config.problem_kind == "robust_logistic":
        ds = load_dataset(
            resolve_dataset_path(p["dataset_path"]),
            subsample=int(p["subsample"]) if "subsample" in p else None,
            seed=int(p.get("seed", "0")))
        problem: MinimaxProblem = RobustLogisticProblem(
            ds.X, ds.labels,
            lambda1=float(p["lambda1"]) if "lambda1" in p else None,
            lambda2=float(p.get("lambda2", "0.001")),
            rho=float(p.get("rho", "10")))
        x0 = np.zeros(problem.dim_x)
        y0 = np.full(problem.dim_y, 1.0 / problem.dim_y)
    elif config.problem_kind == "quadratic":
        d = int(p.get("d", "10"))
        m = int(p.get("m", str(d)))
        seed = int(p.get("seed", "0"))
        lo, hi = (float(t) for t in p.get("spectrum", "-0.5,0.5").split(",")[:2])
        problem = QuadraticMinimaxProblem.random(
            d, m, nu=float(p.get("nu", "1.0")),
            noise_sigma=float(p.get("noise_sigma", "0")),
            seed=seed, a_eigs=(lo, hi),
            b_scale=float(p.get("b_scale", "0.5")))
        rng = np.random.default_rng(seed + 1)
        v = rng.standard_normal(d)
        x0 = float(p.get("x0_scale", "1.0")) * v / np.linalg.norm(v)
        y0 = np.zeros(m)
    elif config.problem_kind == "pl_toy":
        d = int(p.get("d", "6"))
        m = int(p.get("m", "6"))
        seed = int(p.get("seed", "0"))
        rank = int(p.get("rank", str(max(1, m // 2))))
        rng = np.random.default_rng(seed)
        Qm, _ = np.linalg.qr(rng.standard_normal((m, m)))
        evals = np.zeros(m)
        evals[:rank] = np.linspace(float(p.get("c_min", "0.5")),
                                   float(p.get("c_max", "1.5")), rank)
        C = Qm @ np.diag(evals) @ Qm.T
        C = 0.5 * (C + C.T)
        Ad = rng.standard_normal((d, d))
        A = 0.1 * (Ad + Ad.T) / 2.0
        # coupling built inside range(C)
        B = (C @ rng.standard_normal((m, d))).T * 0.3
        problem = PlToyProblem(A, B, C,
                               noise_sigma=float(p.get("noise_sigma", "0")))
        rng2 = np.random.default_rng(seed + 1)
        v = rng2.standard_normal(d)
        x0 = float(p.get("x0_scale", "1.0")) * v / np.linalg.norm(v)
        y0 = np.zeros(m)
    else:
        raise ConfigError(f"unknown problem kind {config.problem_kind!r}")

    if "run.x0" in config.raw:
        x0 = np.array(_floats(config.raw["run.x0"]))
    if "run.y0" in config.raw:
        y0 = np.array(_floats(config.raw["run.y0"]))
    return problem, x0, y0


def build_schedule(config: ExperimentConfig, T: Optional[int] = None,
                   overrides: Optional[Dict[str, float]] = None) -> HyperSchedule:
    T = config.T if T is None else T
    params = dict(config.schedule_params)
    if overrides:
        params.update(overrides)
    if config.schedule_kind == "theorem1":
        return schedule_hcmm1(T, config.constants,
                              N1=params.get("N1", 1.0), N=params.get("N"))
    if config.schedule_kind == "theorem2":
        return schedule_hcmm2(T, config.constants)
    needs_clip = isinstance(config.optimizer, Hcmm1)
    return HyperSchedule(
        mu_x=params["mu_x"], mu_y=params["mu_y"],
        beta_x=params.get("beta_x", 1.0), beta_y=params.get("beta_y", 1.0),
        horizon_T=T,
        clip_threshold=params.get("N") if needs_clip or "N" in params else None,
        clip_norm=params.get("N1") if needs_clip or "N1" in params else None,
        constants=config.constants)


# ---------------------------------------------------------------------------
# trace recording
# ---------------------------------------------------------------------------

def _fmt_float(x: Optional[float]) -> str:
    if x is None:
        return ""
    return repr(float(x))


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="\n")
    os.replace(tmp, path)


def run_single(config: ExperimentConfig, seed: int,
               problem: Optional[MinimaxProblem] = None,
               x0: Optional[np.ndarray] = None, y0: Optional[np.ndarray] = None,
               schedule: Optional[HyperSchedule] = None,
               collect_rows: bool = True):
    """Run one (config, seed) pair; returns (rows, final diagnostics)."""
    if problem is None:
        problem, x0, y0 = build_problem(config)
    if schedule is None:
        schedule = build_schedule(config)
    synthetic = problem.has_closed_form()
    is_hcmm1 = isinstance(config.optimizer, Hcmm1)

    rows: List[List[str]] = []
    last_p: Optional[float] = None
    x_last, y_last = np.asarray(x0), np.asarray(y0)
    t0 = time.monotonic_ns()
    for out in iterate_steps(config.optimizer, problem, schedule, x0, y0,
                             config.T, seed, project_y=config.project_y):
        i = out.next_state.iter
        x_i, y_i = out.next_state.x_curr, out.next_state.y_curr
        p_x = grad_p = m_ci = None
        if (i - 1) % config.eval_every == 0:
            if synthetic:
                p_x = problem.p_value(x_i)
                grad_p = float(np.linalg.norm(problem.grad_p(x_i)))
                mc = out.next_momentum.m_x_clipped if is_hcmm1 \
                    else out.next_momentum.m_x
                m_ci = metric_ci(problem, x_i, y_i, mc)
            else:
                rep = evaluate_P(problem, x_i, tol=config.inner_tol,
                                 max_iters=2000, y0=y_i)
                p_x = rep.p_value
            last_p = p_x
        if collect_rows:
            wall = str(time.monotonic_ns() - t0) if config.record_wall else ""
            d = out.diagnostics
            rows.append([str(i), _fmt_float(p_x), _fmt_float(grad_p),
                         _fmt_float(m_ci), _fmt_float(d["m_x_norm"]),
                         _fmt_float(d["m_y_norm"]),
                         "1" if d["clipped_x"] else "0",
                         "1" if d["clipped_y"] else "0", wall])
        x_last, y_last = x_i, y_i
    return rows, {"final_x": x_last, "final_y": y_last, "last_p": last_p}


def final_p(config: ExperimentConfig, problem: MinimaxProblem,
            x: np.ndarray, y: np.ndarray) -> float:
    if problem.has_closed_form():
        return problem.p_value(x)
    return evaluate_P(problem, x, tol=config.inner_tol,
                      max_iters=5000, y0=y).p_value


def run_experiment(config: ExperimentConfig) -> Dict[str, float]:
    """Run every seed; write one trace CSV per seed plus a summary CSV.

    Returns {seed: final P(x)} keyed by the seed as a string, plus
    'mean'/'std' aggregate keys.
    """
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    problem, x0, y0 = build_problem(config)
    schedule = build_schedule(config)
    label = optimizer_label(config.optimizer)

    finals: Dict[str, float] = {}
    for seed in config.seeds:
        rows, info = run_single(config, seed, problem, x0, y0, schedule)
        text = ",".join(TRACE_COLUMNS) + "\n" + \
            "\n".join(",".join(r) for r in rows) + "\n"
        _write_atomic(out_dir / f"trace_{label}_seed{seed}.csv", text)
        finals[str(seed)] = final_p(config, problem, info["final_x"],
                                    info["final_y"])

    values = np.array([finals[str(s)] for s in config.seeds])
    finals["mean"] = float(values.mean())
    finals["std"] = float(values.std())
    lines = ["optimizer,seed,final_p_x"]
    for seed in config.seeds:
        lines.append(f"{label},{seed},{_fmt_float(finals[str(seed)])}")
    lines.append(f"{label},mean,{_fmt_float(finals['mean'])}")
    lines.append(f"{label},std,{_fmt_float(finals['std'])}")
    _write_atomic(out_dir / f"summary_{label}.csv", "\n".join(lines) + "\n")
    _write_atomic(out_dir / f"config_{label}.echo",
                  "".join(f"{k} = {v}\n" for k, v in sorted(config.raw.items())))
    return finals


def read_trace(path: str) -> Dict[str, list]:
    """Round-trip reader for trace CSVs; empty fields become None."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    header = lines[0].split(",")
    if header != TRACE_COLUMNS:
        raise ValueError(f"{path}: unexpected columns {header}")
    cols: Dict[str, list] = {c: [] for c in header}
    for line in lines[1:]:
        parts = line.split(",")
        for c, v in zip(header, parts):
            if c == "iter":
                cols[c].append(int(v))
            elif c in ("clipped_x", "clipped_y"):
                cols[c].append(v == "1")
            elif c == "wall_ns":
                cols[c].append(int(v) if v else None)
            else:
                cols[c].append(float(v) if v else None)
    return cols


# ---------------------------------------------------------------------------
# grid search
# ---------------------------------------------------------------------------

def grid_search(config: ExperimentConfig) -> Tuple[Dict[str, float], List[dict]]:
    """Cross-product search over grid.* value lists.

    Selects the combo with the lowest final mean P(x) over seeds; emits a
    leaderboard CSV. Returns (best_overrides, leaderboard_rows).
    """
    if not config.grid:
        raise ConfigError("grid search needs at least one grid.* key")
    problem, x0, y0 = build_problem(config)
    keys = sorted(config.grid)
    leaderboard: List[dict] = []
    for combo in itertools.product(*(config.grid[k] for k in keys)):
        overrides = dict(zip(keys, combo))
        schedule = build_schedule(config, overrides=overrides)
        finals = []
        for seed in config.seeds:
            _, info = run_single(config, seed, problem, x0, y0, schedule,
                                 collect_rows=False)
            finals.append(final_p(config, problem, info["final_x"],
                                  info["final_y"]))
        leaderboard.append({**overrides,
                            "mean_final_p": float(np.mean(finals)),
                            "std_final_p": float(np.std(finals))})
    leaderboard.sort(key=lambda r: r["mean_final_p"])

    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    label = optimizer_label(config.optimizer)
    header = keys + ["mean_final_p", "std_final_p"]
    lines = [",".join(header)]
    for row in leaderboard:
        lines.append(",".join(_fmt_float(row[k]) for k in header))
    _write_atomic(out_dir / f"leaderboard_{label}.csv", "\n".join(lines) + "\n")
    best = {k: leaderboard[0][k] for k in keys}
    return best, leaderboard


# ---------------------------------------------------------------------------
# rate study
# ---------------------------------------------------------------------------

def time_averaged_grad_p(config: ExperimentConfig, problem: MinimaxProblem,
                         x0: np.ndarray, y0: np.ndarray,
                         schedule: HyperSchedule, T: int,
                         seed: int) -> Tuple[float, float]:
    """(time-averaged, final) closed-form ||grad P(x_i)|| along one run."""
    total = 0.0
    last = 0.0
    for out in iterate_steps(config.optimizer, problem, schedule, x0, y0, T,
                             seed, project_y=config.project_y):
        last = float(np.linalg.norm(problem.grad_p(out.next_state.x_curr)))
        total += last
    return total / T, last


@dataclass(frozen=True)
class RateReport:
    T_values: Tuple[int, ...]
    averaged_norms: Tuple[float, ...]
    slope: float


def rate_study(config: ExperimentConfig, T_values: Sequence[int]) -> RateReport:
    """Theorem-schedule runs over a geometric T ladder; log-log slope fit."""
    if len(T_values) < 3:
        raise ConfigError("rate study needs at least 3 horizon values")
    problem, x0, y0 = build_problem(config)
    if not problem.has_closed_form():
        raise ConfigError("rate study needs a problem with closed-form grad P")
    averages = []
    for T in T_values:
        schedule = build_schedule(config, T=T)
        per_seed = [time_averaged_grad_p(config, problem, x0, y0, schedule,
                                         T, seed)[0]
                    for seed in config.seeds]
        averages.append(float(np.mean(per_seed)))
    slope = float(np.polyfit(np.log10(np.asarray(T_values, dtype=float)),
                             np.log10(averages), 1)[0])
    out_dir = Path(config.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = ["T,mean_time_avg_grad_p"]
    for T, avg in zip(T_values, averages):
        lines.append(f"{T},{_fmt_float(avg)}")
    lines.append(f"slope,{_fmt_float(slope)}")
    _write_atomic(out_dir / f"rate_{optimizer_label(config.optimizer)}.csv",
                  "\n".join(lines) + "\n")
    return RateReport(tuple(int(t) for t in T_values), tuple(averages), slope)


# ---------------------------------------------------------------------------
# plotting (deterministic SVG)
# ---------------------------------------------------------------------------

_PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]


def _collect_series(trace_dir: str) -> Dict[str, Tuple[List[int], np.ndarray,
                                                       np.ndarray]]:
    """Group trace files by optimizer label; mean/std of p_x over seeds."""
    files = sorted(Path(trace_dir).glob("trace_*_seed*.csv"))
    if not files:
        raise FileNotFoundError(f"no trace_*_seed*.csv files under {trace_dir}")
    groups: Dict[str, List[Tuple[List[int], List[float]]]] = {}
    for f in files:
        label = f.stem[len("trace_"):f.stem.rindex("_seed")]
        cols = read_trace(str(f))
        iters = [i for i, p in zip(cols["iter"], cols["p_x"]) if p is not None]
        ps = [p for p in cols["p_x"] if p is not None]
        if not iters:
            raise ValueError(f"{f}: trace has no p_x column values")
        groups.setdefault(label, []).append((iters, ps))
    series = {}
    for label, runs in sorted(groups.items()):
        iters = runs[0][0]
        mat = np.array([r[1] for r in runs])
        series[label] = (iters, mat.mean(axis=0), mat.std(axis=0))
    return series


def _svg_num(x: float) -> str:
    return f"{x:.3f}".rstrip("0").rstrip(".")


def emit_plot(trace_dir: str, out_path: str, title: str = "worst-case objective",
              width: int = 640, height: int = 440) -> None:
    """Render mean P(x) curves (one per optimizer) with +/-1 std bands.

    Output bytes are a pure function of the input traces.
    """
    series = _collect_series(trace_dir)
    ml, mr, mt, mb = 60, 16, 28, 42
    pw, ph = width - ml - mr, height - mt - mb
    x_min = min(min(s[0]) for s in series.values())
    x_max = max(max(s[0]) for s in series.values())
    y_lo = min(float((m - s).min()) for _, m, s in series.values())
    y_hi = max(float((m + s).max()) for _, m, s in series.values())
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    pad = 0.05 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad
    span_x = max(x_max - x_min, 1)

    def sx(v):
        return ml + pw * (v - x_min) / span_x

    def sy(v):
        return mt + ph * (1.0 - (v - y_lo) / (y_hi - y_lo))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{ml}" y="18" font-family="sans-serif" font-size="13">'
        f'{title}</text>',
    ]
    # axes + ticks
    parts.append(f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" '
                 f'stroke="black"/>')
    parts.append(f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" '
                 f'stroke="black"/>')
    for k in range(5):
        xv = x_min + span_x * k / 4
        yv = y_lo + (y_hi - y_lo) * k / 4
        parts.append(f'<text x="{_svg_num(sx(xv))}" y="{mt + ph + 16}" '
                     f'font-family="sans-serif" font-size="10" '
                     f'text-anchor="middle">{xv:.4g}</text>')
        parts.append(f'<text x="{ml - 6}" y="{_svg_num(sy(yv) + 3)}" '
                     f'font-family="sans-serif" font-size="10" '
                     f'text-anchor="end">{yv:.4g}</text>')
    parts.append(f'<text x="{ml + pw // 2}" y="{height - 8}" '
                 f'font-family="sans-serif" font-size="11" '
                 f'text-anchor="middle">iteration</text>')

    for idx, (label, (iters, mean, std)) in enumerate(series.items()):
        color = _PALETTE[idx % len(_PALETTE)]
        band = " ".join(f"{_svg_num(sx(i))},{_svg_num(sy(v))}"
                        for i, v in zip(iters, mean + std))
        band += " " + " ".join(
            f"{_svg_num(sx(i))},{_svg_num(sy(v))}"
            for i, v in zip(reversed(iters), (mean - std)[::-1]))
        parts.append(f'<polygon points="{band}" fill="{color}" '
                     f'fill-opacity="0.15" stroke="none"/>')
        pts = " ".join(f"{_svg_num(sx(i))},{_svg_num(sy(v))}"
                       for i, v in zip(iters, mean))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" '
                     f'stroke-width="1.5"/>')
        ly = mt + 14 + 14 * idx
        parts.append(f'<line x1="{ml + pw - 120}" y1="{ly - 4}" '
                     f'x2="{ml + pw - 96}" y2="{ly - 4}" stroke="{color}" '
                     f'stroke-width="1.5"/>')
        parts.append(f'<text x="{ml + pw - 90}" y="{ly}" '
                     f'font-family="sans-serif" font-size="11">{label}</text>')
    parts.append("</svg>")
    _write_atomic(Path(out_path), "\n".join(parts) + "\n")
