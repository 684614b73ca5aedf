"""Sweeps over (N, seed), scaling-law fits and CSV/JSON export."""

from __future__ import annotations

import csv
import json
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from metabio.evolution import (SamplerCapExceeded, Scenario, ScenarioSpec, run_cumulative,
                               run_exhaustive, run_intelligent_design)
from metabio.oracle import OracleError, RandomOmegaOracle
from metabio.quantum import (QuantumRegime, run_q_cumulative, run_q_exhaustive,
                             run_q_intelligent_design)

SCHEMA_VERSION = 1
CSV_HEADER = ("N", "trials", "mean_T", "std_T")
FIT_HEADER = ("model", "slope", "intercept", "normalized_residual", "chosen")
MODELS = ("Linear", "Power", "Exponential", "DoubleExponential")
TIE_TOL = 1e-12


class FitError(ValueError):
    pass


class SweepError(RuntimeError):
    pass


@dataclass(frozen=True)
class ScalingSample:
    N: int
    trials: int
    mean_T: float
    std_T: float
    seeds: tuple[int, ...] = ()
    analytic: bool = False


@dataclass(frozen=True)
class ModelFit:
    """Least-squares line ``y = slope * x + intercept`` in the model's coordinates."""

    slope: float
    intercept: float
    normalized_residual: float


@dataclass(frozen=True)
class FitResult:
    chosen: str
    fits: dict[str, ModelFit]

    @property
    def residuals(self) -> dict[str, float]:
        return {m: f.normalized_residual for m, f in self.fits.items()}

    @property
    def parameter(self) -> float:
        """Slope, exponent, or rate of the chosen model."""
        return self.fits[self.chosen].slope

    def exponent(self) -> float:
        return self.fits["Power"].slope

    def rate(self) -> float:
        return self.fits["Exponential"].slope


# -- running ------------------------------------------------------------------


def _regime(model: str) -> QuantumRegime | None:
    return {"classical": None, "q-sep": QuantumRegime.SEPARABLE,
            "q-ent": QuantumRegime.ENTANGLED}[model]


def run_once(spec: ScenarioSpec, seed: int) -> tuple[int, bool]:
    """Evolution time for one seeded run, and whether it is an analytic count."""
    oracle = RandomOmegaOracle(seed)
    regime = _regime(spec.model)
    N = spec.N
    if spec.scenario is Scenario.EXHAUSTIVE:
        if regime is None:
            return run_exhaustive(N, oracle), False
        res = run_q_exhaustive(N, oracle)
        return res.T, res.analytic
    if spec.scenario is Scenario.INTELLIGENT_DESIGN:
        if regime is None:
            return run_intelligent_design(N, oracle).T, False
        return run_q_intelligent_design(N, regime, oracle).T, False
    if regime is None:
        return run_cumulative(N, oracle, seed, spec.mode).T, False
    return run_q_cumulative(N, regime, oracle, seed, spec.mode).T, False


def _task(args):
    spec, seed = args
    try:
        return run_once(spec, seed), None
    except (OracleError, SamplerCapExceeded) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _design_times(spec: ScenarioSpec, Ns: Sequence[int], seed: int) -> dict[int, int]:
    """Intelligent design is prefix-consistent: one run to max(N) yields every T_N."""
    oracle = RandomOmegaOracle(seed)
    regime = _regime(spec.model)
    top = max(Ns)
    if regime is None:
        trace = run_intelligent_design(top, oracle)
    else:
        trace = run_q_intelligent_design(top, regime, oracle)
    return {n: trace.T_at(n) for n in Ns}


def sweep(spec: ScenarioSpec, Ns: Iterable[int], seeds: Iterable[int], jobs: int = 1,
          progress=None) -> list[ScalingSample]:
    """Run every (N, seed) pair and aggregate per N, in N-sorted order.

    Results do not depend on ``jobs``.  Aborted runs are dropped with a
    warning; an N whose runs all abort raises :class:`SweepError`.
    """
    Ns = sorted(set(Ns))
    seeds = list(seeds)
    if not Ns or not seeds:
        raise ValueError("need at least one N and one seed")
    results: dict[int, list] = {n: [] for n in Ns}
    if spec.scenario is Scenario.INTELLIGENT_DESIGN:
        for seed in seeds:
            for n, T in _design_times(spec, Ns, seed).items():
                results[n].append(((T, False), None))
    else:
        tasks = [(replace(spec, N=n), s) for n in Ns for s in seeds]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                outs = list(pool.map(_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
        else:
            outs = []
            for i, t in enumerate(tasks):
                outs.append(_task(t))
                if progress:
                    progress(i + 1, len(tasks))
        for (task_spec, _), out in zip(tasks, outs):
            results[task_spec.N].append(out)
    samples = []
    for n in Ns:
        good = [(s, r) for s, (r, err) in zip(seeds, results[n]) if r is not None]
        errors = [err for r, err in results[n] if r is None]
        if errors:
            warnings.warn(f"N={n}: {len(errors)} run(s) aborted ({errors[0]})", RuntimeWarning)
        if not good:
            raise SweepError(f"every run at N={n} aborted")
        samples.append(aggregate(n, [t for _, (t, _) in good], tuple(s for s, _ in good),
                                 analytic=any(a for _, (_, a) in good)))
    return samples


def aggregate(N: int, Ts: Sequence[int], seeds: tuple[int, ...] = (), analytic: bool = False) -> ScalingSample:
    vals = [float(t) for t in Ts]
    m = len(vals)
    mean = math.fsum(vals) / m
    std = math.sqrt(math.fsum((v - mean) ** 2 for v in vals) / (m - 1)) if m > 1 else 0.0
    return ScalingSample(N, m, mean, std, seeds, analytic)


# -- fitting ------------------------------------------------------------------


def _transform(model: str, N: np.ndarray, T: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if model == "Linear":
        return N, T
    if model == "Power":
        return np.log2(N), np.log2(T)
    if model == "Exponential":
        return N, np.log2(T)
    return N, np.log2(np.log2(T))


def _line_fit(x: np.ndarray, y: np.ndarray) -> ModelFit | None:
    if not np.all(np.isfinite(y)):
        return None
    with np.errstate(over="ignore"):
        var = float(np.var(y))
    if not math.isfinite(var) or var == 0.0:
        return None  # raw values too large for a raw-space fit, or constant
    slope, intercept = np.polyfit(x, y, 1)
    mse = float(np.mean((y - (slope * x + intercept)) ** 2))
    return ModelFit(float(slope), float(intercept), mse / var)


def fit_scaling(samples: Sequence[ScalingSample] | Sequence[tuple[float, float]]) -> FitResult:
    """Fit all four families in their linearizing coordinates and pick the best.

    Power and exponential slopes are base-2: ``T ~ N**slope`` and
    ``T ~ 2**(slope * N)``; the double exponential is ``T ~ 2**(2**(slope * N))``
    up to constants.
    """
    pts = [(s.N, s.mean_T) if isinstance(s, ScalingSample) else tuple(s) for s in samples]
    N = np.array([p[0] for p in pts], dtype=float)
    T = np.array([p[1] for p in pts], dtype=float)
    if len(pts) < 4 or len(set(N.tolist())) < len(N):
        raise FitError("need at least 4 samples with distinct N")
    if np.any(T <= 0) or np.any(N <= 0):
        raise FitError("N and T must be positive")
    if np.ptp(T) == 0:
        raise FitError("constant data has no scaling law")
    fits: dict[str, ModelFit] = {}
    for model in MODELS:
        if model == "DoubleExponential" and np.any(T < 4):
            continue
        fit = _line_fit(*_transform(model, N, T))
        if fit is not None:
            fits[model] = fit
    best = None
    for model in MODELS:  # listed from simplest to most complex
        if model in fits and (best is None or
                              fits[model].normalized_residual < fits[best].normalized_residual - TIE_TOL):
            best = model
    return FitResult(best, fits)


# -- export -------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def export_csv(items: Sequence[ScalingSample] | FitResult, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if isinstance(items, FitResult):
            w.writerow(FIT_HEADER)
            for model, f in items.fits.items():
                w.writerow([model, _fmt(f.slope), _fmt(f.intercept), _fmt(f.normalized_residual),
                            int(model == items.chosen)])
            return
        w.writerow(CSV_HEADER)
        for s in items:
            w.writerow([s.N, s.trials, _fmt(s.mean_T), _fmt(s.std_T)])


def import_csv(path: str | Path) -> list[ScalingSample]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"{path}: expected header {','.join(CSV_HEADER)}")
    return [ScalingSample(int(r[0]), int(r[1]), float(r[2]), float(r[3])) for r in rows[1:]]


def export_long_csv(series: dict[str, Sequence[ScalingSample]], path: str | Path) -> None:
    """One row per (series, N, statistic) for external plotting tools."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("series", "N", "stat", "value"))
        for name, samples in series.items():
            for s in samples:
                w.writerow((name, s.N, "mean_T", _fmt(s.mean_T)))
                w.writerow((name, s.N, "std_T", _fmt(s.std_T)))


def _json_value(x, indent: int) -> str:
    pad = "  " * indent
    if x is None:
        return "null"
    if isinstance(x, str):
        return json.dumps(x)
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return _fmt(x) if math.isfinite(x) else "null"
    if isinstance(x, dict):
        if not x:
            return "{}"
        inner = ",\n".join(f"{pad}  {json.dumps(str(k))}: {_json_value(v, indent + 1)}" for k, v in x.items())
        return "{\n" + inner + "\n" + pad + "}"
    if isinstance(x, (list, tuple)):
        if not x:
            return "[]"
        inner = ",\n".join(f"{pad}  {_json_value(v, indent + 1)}" for v in x)
        return "[\n" + inner + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(payload: dict) -> str:
    """JSON with a schema version and every float written to 17 significant digits."""
    return _json_value({"schema_version": SCHEMA_VERSION, **payload}, 0) + "\n"


def samples_payload(samples: Sequence[ScalingSample]) -> dict:
    return {"samples": [{"N": s.N, "trials": s.trials, "mean_T": s.mean_T, "std_T": s.std_T,
                         "seeds": list(s.seeds), "analytic": s.analytic} for s in samples]}


def fit_payload(fit: FitResult) -> dict:
    return {"fit": {"chosen": fit.chosen,
                    "models": {m: {"slope": f.slope, "intercept": f.intercept,
                                   "normalized_residual": f.normalized_residual}
                               for m, f in fit.fits.items()}}}


def export_json(items: Sequence[ScalingSample] | FitResult, path: str | Path) -> None:
    payload = fit_payload(items) if isinstance(items, FitResult) else samples_payload(items)
    Path(path).write_text(dumps(payload))


def import_json(path: str | Path) -> list[ScalingSample] | FitResult:
    data = json.loads(Path(path).read_text())
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported schema version {data.get('schema_version')}")
    if "fit" in data:
        f = data["fit"]
        fits = {m: ModelFit(v["slope"], v["intercept"], v["normalized_residual"])
                for m, v in f["models"].items()}
        return FitResult(f["chosen"], fits)
    return [ScalingSample(d["N"], d["trials"], d["mean_T"], d["std_T"], tuple(d["seeds"]), d["analytic"])
            for d in data["samples"]]
