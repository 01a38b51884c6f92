"""Seeded parameter sweeps over a distribution family.

A sweep runs every compatible (model, algorithm) pair on every grid point
and seed, and appends one CSV row per run as soon as its grid point is
done. Grid points are independent, so they can run in worker processes;
results are written by a single writer in grid order, which keeps the
output byte-identical whatever the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
import tomli
from scipy import stats

from .. import discriminators as disc
from ..adversary import complexity_bound, lower_bound_certificate, optimal_weights
from ..distributions import generate, make_rng, metrics, sample
from ..oracles import GarbageSpec, frequency_string, iid_string, lift_string_oracle, prepare_oracle
from .render import COLUMNS, append_rows, write_header

ALGORITHM_MODELS = {
    "amplify": ("iii",),
    "witness": ("i", "ii", "iv"),
    "standard": ("iv",),
    "classical": (),
}
MODELS = ("i", "ii", "iii", "iv")
SAMPLING_MODEL = "sampling"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep description.

    ``family`` is called as ``generate(family, *fixed, value)`` for each
    ``value`` in ``grid``.
    """

    family: str
    grid: tuple
    fixed: tuple = ()
    models: tuple = ("iii", "iv")
    algorithms: tuple = ("amplify", "witness", "classical")
    seeds: tuple = (0,)
    error_target: float = 0.1
    epsilon: float = 0.5
    garbage: str = "trivial"
    garbage_dim: int = 1
    string_length: int = 20
    workers: int = 1
    csv_path: Optional[str] = None
    svg_path: Optional[str] = None

    def __post_init__(self):
        if not self.grid:
            raise ConfigError("parameter grid is empty")
        if not self.seeds:
            raise ConfigError("seed list is empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        bad = [m for m in self.models if m not in MODELS]
        if bad:
            raise ConfigError(f"unknown models {bad}; choose from {list(MODELS)}")
        for a in self.algorithms:
            if a not in ALGORITHM_MODELS:
                raise ConfigError(f"unknown algorithm {a!r}; choose from {sorted(ALGORITHM_MODELS)}")
            if ALGORITHM_MODELS[a] and not set(ALGORITHM_MODELS[a]) & set(self.models):
                raise ConfigError(f"algorithm {a!r} needs one of the models {ALGORITHM_MODELS[a]}")
        if not 0 < self.error_target < 0.5:
            raise ConfigError("error_target must lie in (0, 1/2)")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def runs(self) -> list:
        """(model, algorithm) pairs in output order."""
        out = []
        for a in self.algorithms:
            if a == "classical":
                out.append((SAMPLING_MODEL, a))
            else:
                out.extend((m, a) for m in self.models if m in ALGORITHM_MODELS[a])
        return out


def _seed_list(raw) -> tuple:
    if isinstance(raw, dict):
        try:
            return tuple(range(int(raw["start"]), int(raw["start"]) + int(raw["count"])))
        except KeyError as exc:
            raise ConfigError("seed range needs 'start' and 'count'") from exc
    return tuple(int(s) for s in raw)


def config_from_dict(data: dict, base_dir: Union[str, Path, None] = None) -> ExperimentConfig:
    known = {
        "models", "algorithms", "seeds", "error_target", "epsilon", "garbage",
        "garbage_dim", "string_length", "workers", "family", "output",
    }
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown configuration keys {sorted(unknown)}")
    fam = data.get("family")
    if not isinstance(fam, dict) or "kind" not in fam or "grid" not in fam:
        raise ConfigError("[family] table with 'kind' and 'grid' is required")
    out = data.get("output", {})

    def resolve(p):
        if p is None:
            return None
        p = Path(p)
        return str(p if p.is_absolute() or base_dir is None else Path(base_dir) / p)

    kw = {k: data[k] for k in ("error_target", "epsilon", "garbage", "garbage_dim", "string_length", "workers") if k in data}
    return ExperimentConfig(
        family=str(fam["kind"]),
        grid=tuple(fam["grid"]),
        fixed=tuple(fam.get("fixed", ())),
        models=tuple(data.get("models", ("iii", "iv"))),
        algorithms=tuple(data.get("algorithms", ("amplify", "witness", "classical"))),
        seeds=_seed_list(data.get("seeds", [0])),
        csv_path=resolve(out.get("csv")),
        svg_path=resolve(out.get("svg")),
        **kw,
    )


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        data = tomli.loads(path.read_text())
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data, base_dir=path.parent)


# --------------------------------------------------------------------------


def _hidden_label(seed: int) -> str:
    return "P" if make_rng(seed, 101).random() < 0.5 else "Q"


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return "" if math.isnan(x) else format(x, ".12g")
    return str(x)


def _single_run(cfg: ExperimentConfig, p, q, model: str, algo: str, seed: int, label: str, cache: dict):
    """Return ``(decision, cost)`` for one run."""
    truth = p if label == "P" else q
    rng = make_rng(seed, 202)
    if algo == "classical":
        if "n" not in cache:
            cache["n"] = disc.calibrate_sample_size(p, q, cfg.error_target)
        out = disc.classical_discriminate(
            p, q, lambda n: sample(truth, make_rng(seed, 303), n), n=cache["n"], rng=rng
        )
        return out["decision"], out["samples_used"]
    if model == "iii":
        oracle = prepare_oracle("iii", truth, label=label)
        res = disc.discriminate_model3(disc.DiscriminationInstance(p, q, oracle), rng)
        return res.decision, res.queries_used
    if model == "iv":
        spec = GarbageSpec(cfg.garbage, cfg.garbage_dim, seed)
        oracle = prepare_oracle("iv", truth, garbage=spec, label=label)
    elif model == "i":
        oracle = lift_string_oracle(frequency_string(truth, cfg.string_length), truth.size, label, model="i")
    else:
        oracle = lift_string_oracle(iid_string(truth, cfg.string_length, seed), truth.size, label, model="ii")
    inst = disc.DiscriminationInstance(p, q, oracle)
    if algo == "standard":
        res = disc.standard_method(inst, rng=rng)
    else:
        if "walk" not in cache:
            cache["walk"] = disc.WalkData.from_pair(p, q)
        res = disc.discriminate_model4(inst, disc.AlgoParams(epsilon=cfg.epsilon), rng, data=cache["walk"])
    return res.decision, res.queries_used


def run_grid_point(cfg: ExperimentConfig, value) -> list:
    """All rows for one grid value, as lists of strings in column order."""
    rows = []
    base = {"family": cfg.family, "param": _fmt(value)}
    try:
        p, q = generate(cfg.family, *cfg.fixed, value)
        m = metrics(p, q)
        base.update(d_H=_fmt(m.hellinger), alpha=_fmt(m.angle))
        base["witness_T"] = _fmt(complexity_bound(p, q, optimal_weights(p, q)))
        cert = lower_bound_certificate(p, q)
        base["cert_ratio"] = _fmt(cert.norm_G_offdiag / cert.sin_bound)
        point_error = ""
    except (ValueError, TypeError) as exc:
        p = q = None
        point_error = f"{type(exc).__name__}: {exc}"
    cache: dict = {}
    for model, algo in cfg.runs():
        for seed in cfg.seeds:
            label = _hidden_label(seed)
            row = dict(base, model=model, algorithm=algo, seed=str(seed), label=label, error=point_error)
            if not point_error:
                try:
                    decision, cost = _single_run(cfg, p, q, model, algo, seed, label, cache)
                    row.update(decision=decision, correct=str(int(decision == label)), queries_or_samples=str(cost))
                except (ValueError, RuntimeError) as exc:
                    row["error"] = f"{type(exc).__name__}: {exc}"
            rows.append([row.get(c, "") for c in COLUMNS])
    return rows


def _run_point_star(args):
    return run_grid_point(*args)


def run_experiment(cfg: ExperimentConfig, csv_path: Union[str, Path, None] = None, workers: Optional[int] = None) -> list:
    """Run the sweep; returns records as dicts keyed by column name.

    With a CSV path the file is truncated, then each grid point's rows are
    appended and flushed as soon as that point (and all earlier ones) are
    finished.
    """
    csv_path = csv_path or cfg.csv_path
    workers = workers or cfg.workers
    if csv_path is not None:
        write_header(csv_path)
    jobs = [(cfg, v) for v in cfg.grid]
    records = []

    def collect(rows):
        if csv_path is not None:
            append_rows(csv_path, rows)
        records.extend(dict(zip(COLUMNS, r)) for r in rows)

    if workers == 1:
        for job in jobs:
            collect(_run_point_star(job))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for rows in pool.map(_run_point_star, jobs):
                collect(rows)
    return records


# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    r2: float
    points: int

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept, "r2": self.r2, "points": self.points}


def fit_power_law(x, y, min_points: int = 4, min_span: float = 4.0) -> ScalingFit:
    """Least-squares line through ``(log x, log y)``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be equal-length 1-d arrays")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("log-log fit needs positive values")
    if np.unique(x).size < min_points:
        raise ValueError(f"need at least {min_points} distinct x values, got {np.unique(x).size}")
    if x.max() / x.min() < min_span:
        raise ValueError(f"x spans only {x.max() / x.min():.3g}x; need {min_span}x")
    res = stats.linregress(np.log(x), np.log(y))
    return ScalingFit(float(res.slope), float(res.intercept), float(res.rvalue**2), int(x.size))


def scaling_points(records, algorithm: str, model: Optional[str] = None) -> tuple[np.ndarray, np.ndarray]:
    """Mean cost per grid point against ``1/d_H``, skipping failed rows."""
    groups: dict = {}
    for r in records:
        if r["algorithm"] != algorithm or r["error"] or (model is not None and r["model"] != model):
            continue
        groups.setdefault(float(r["d_H"]), []).append(float(r["queries_or_samples"]))
    d = np.array(sorted(groups))
    return 1 / d, np.array([np.mean(groups[k]) for k in d])


def fit_scaling(records, algorithm: str, model: Optional[str] = None) -> ScalingFit:
    x, y = scaling_points(records, algorithm, model)
    return fit_power_law(x, y)
