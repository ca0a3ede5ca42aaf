"""Seeded experiment sweeps over (N, seed, method) with CSV/JSON output."""
import csv
import json
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from probmat.estimator import (
    EstimatorParams,
    baseline_naive,
    baseline_scaled,
    l1_error,
    numerical_rank,
    recover,
)
from probmat.hmm import emission_error, hmm_learn
from probmat.models import (
    HmmModel,
    generate_sbm_model,
    generate_topic_model,
    hmm_sample_sequence,
    sample_batches,
    uniform_disjoint_hmm,
)
from probmat.spectral import spectral_norm

CSV_HEADER = ["N", "seed", "method", "l1", "spec", "excluded_mass", "runtime_ms", "status"]
MATRIX_METHODS = ("recover", "naive", "scaled")
METHOD_ORDER = {"recover": 0, "naive": 1, "scaled": 2, "hmm_learn": 3}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    """One sweep.

    ``family`` is ``sbm``, ``topic`` (count-matrix recovery) or ``hmm``
    (sequence learning, where ``N_grid`` holds sequence lengths). ``model``
    holds generator arguments; ``estimator`` holds EstimatorParams fields.
    """

    family: str
    model: dict
    N_grid: list
    seeds: list
    estimator: dict = field(default_factory=dict)
    methods: list | None = None
    scheme: str = "poisson"
    seed: int = 0
    timeout_s: float | None = None
    record_runtime: bool = True
    workers: int = 1
    out_csv: str | None = None
    out_summary: str | None = None

    def __post_init__(self):
        if self.family not in ("sbm", "topic", "hmm"):
            raise ConfigError(f"unknown family {self.family!r}")
        if not self.N_grid or not self.seeds:
            raise ConfigError("N_grid and seeds must be nonempty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        if self.methods is None:
            self.methods = ["hmm_learn"] if self.family == "hmm" else list(MATRIX_METHODS)
        allowed = ("hmm_learn",) if self.family == "hmm" else MATRIX_METHODS
        bad = [m for m in self.methods if m not in allowed]
        if bad:
            raise ConfigError(f"methods {bad} not valid for family {self.family!r}")
        try:
            self.params()
        except (TypeError, ValueError) as err:
            raise ConfigError(f"bad estimator params: {err}") from err

    def params(self):
        kw = dict(self.estimator)
        kw.setdefault("R", 2 if self.family == "hmm" else self.model.get("R", 2))
        return EstimatorParams(**kw)

    @classmethod
    def from_dict(cls, doc):
        try:
            return cls(**doc)
        except TypeError as err:
            raise ConfigError(str(err)) from err


def load_config(path):
    try:
        with open(path) as f:
            doc = json.load(f)
    except (OSError, json.JSONDecodeError) as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    return ExperimentConfig.from_dict(doc)


@dataclass
class ExperimentResult:
    rows: list
    config: ExperimentConfig

    @property
    def failed(self):
        return [r for r in self.rows if r["status"] != "ok"]

    def summary(self):
        out = {}
        for N, method, vals in _groups(self.rows):
            q25, med, q75 = np.percentile(vals, [25, 50, 75]) if vals else (math.nan,) * 3
            out.setdefault(str(N), {})[method] = {
                "median_l1": float(med), "q25": float(q25), "q75": float(q75), "ok_cells": len(vals),
            }
        return out


def _cell_seed(top, seed):
    return int(np.random.SeedSequence([int(top), int(seed)]).generate_state(1)[0])


def build_model(config, seed):
    kw = dict(config.model)
    if config.family == "sbm":
        return generate_sbm_model(kw["M"], kw.get("R", 2), kw["alpha"], kw["beta"])
    if config.family == "topic":
        R = kw.get("R", 2)
        mixing = kw.get("mixing", [1.0 / R] * R)
        return generate_topic_model(kw["M"], R, mixing, kw.get("concentration", 1.0),
                                    seed=kw.get("seed", _cell_seed(config.seed, seed)))
    if "p" in kw:
        return HmmModel(kw["t"], kw["p"], kw["q"])
    return uniform_disjoint_hmm(kw["M"], kw["t"])


def _matrix_cell(config, N, seed):
    model = build_model(config, seed)
    B = model.B
    params = config.params()
    C1, C2, C3 = sample_batches(model, N, 3, config.scheme, _cell_seed(config.seed, seed))
    rows = []
    for method in config.methods:
        t0 = time.perf_counter()
        row = {"N": N, "seed": seed, "method": method}
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                if method == "recover":
                    est = recover(C1, C2, C3, params)
                elif method == "naive":
                    est = baseline_naive(C1, params.R)
                else:
                    est = baseline_scaled(C1, C2, params.R)
            Bh = est.dense()
            row.update(
                l1=l1_error(Bh, B), spec=spectral_norm(Bh - B),
                excluded_mass=est.report.get("excluded_mass", 0.0), status="ok",
                rank=numerical_rank(Bh),
                excluded_zero=bool(np.all(Bh[est.excluded] == 0) and np.all(Bh[:, est.excluded] == 0)),
            )
        except Exception as err:  # cell isolation
            row.update(l1=math.nan, spec=math.nan, excluded_mass=math.nan,
                       status=f"error:{type(err).__name__}")
        row["runtime_ms"] = (time.perf_counter() - t0) * 1000.0
        rows.append(row)
    return rows


def _hmm_cell(config, N, seed):
    h = build_model(config, seed)
    seq = hmm_sample_sequence(h, int(N), _cell_seed(config.seed, seed))
    t0 = time.perf_counter()
    row = {"N": N, "seed": seed, "method": "hmm_learn"}
    try:
        est = hmm_learn(seq, h.M, config.params())
        if est.ok:
            row.update(l1=emission_error(est.p_hat, est.q_hat, h.p, h.q), spec=abs(est.t_hat - h.t),
                       excluded_mass=est.diagnostics["delta"].get("excluded_mass", 0.0), status="ok")
        else:
            row.update(l1=math.nan, spec=math.nan, excluded_mass=math.nan, status=est.status)
    except Exception as err:
        row.update(l1=math.nan, spec=math.nan, excluded_mass=math.nan,
                   status=f"error:{type(err).__name__}")
    row["runtime_ms"] = (time.perf_counter() - t0) * 1000.0
    return [row]


def _run_cell(config, N, seed):
    rows = _hmm_cell(config, N, seed) if config.family == "hmm" else _matrix_cell(config, N, seed)
    for row in rows:
        if config.timeout_s is not None and row["runtime_ms"] > 1000.0 * config.timeout_s:
            row["status"] = "timeout"
        if not config.record_runtime:
            row["runtime_ms"] = 0.0
    return rows


def _sort_key(row):
    return (row["N"], row["seed"], METHOD_ORDER.get(row["method"], 99))


def _fmt(x):
    if isinstance(x, float):
        return "nan" if math.isnan(x) else repr(x)
    return str(x)


def write_csv(rows, path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_HEADER)
        for row in rows:
            w.writerow([_fmt(row[k]) for k in CSV_HEADER])


def run_sweep(config):
    """Run every (N, seed) cell; failed cells become rows with an error status.

    Rows are returned (and written) in canonical (N, seed, method) order. With
    ``out_csv`` set, finished cells are appended as they complete and the file
    is rewritten in canonical order at the end.
    """
    cells = [(N, s) for N in config.N_grid for s in config.seeds]
    rows = []
    handle = open(config.out_csv, "w", newline="") if config.out_csv else None
    try:
        writer = csv.writer(handle) if handle else None
        if writer:
            writer.writerow(CSV_HEADER)

        def collect(cell_rows):
            rows.extend(cell_rows)
            if writer:
                for row in cell_rows:
                    writer.writerow([_fmt(row[k]) for k in CSV_HEADER])
                handle.flush()

        if config.workers > 1:
            with ThreadPoolExecutor(config.workers) as pool:
                for cell_rows in pool.map(lambda c: _run_cell(config, *c), cells):
                    collect(cell_rows)
        else:
            for N, s in cells:
                collect(_run_cell(config, N, s))
    finally:
        if handle:
            handle.close()
    rows.sort(key=_sort_key)
    result = ExperimentResult(rows, config)
    if config.out_csv:
        write_csv(rows, config.out_csv)
    if config.out_summary:
        with open(config.out_summary, "w") as f:
            json.dump({"config": asdict(config), "summary": result.summary(),
                       "failed_cells": len(result.failed)}, f, indent=1)
    return result


def _groups(rows):
    keys = sorted({(r["N"], r["method"]) for r in rows},
                  key=lambda k: (k[0], METHOD_ORDER.get(k[1], 99)))
    for N, method in keys:
        vals = [r["l1"] for r in rows
                if r["N"] == N and r["method"] == method and r["status"] == "ok"]
        yield N, method, vals


def emit_plot_data(result, path=None):
    """Per (N, method): median and quartiles of l1 over successful cells."""
    rows = result.rows if isinstance(result, ExperimentResult) else result
    out = []
    for N, method, vals in _groups(rows):
        if not vals:
            continue
        q25, med, q75 = np.percentile(vals, [25, 50, 75])
        out.append({"N": N, "method": method, "median_l1": float(med),
                    "q25": float(q25), "q75": float(q75)})
    if path:
        with open(path, "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=["N", "method", "median_l1", "q25", "q75"])
            w.writeheader()
            w.writerows(out)
    return out
