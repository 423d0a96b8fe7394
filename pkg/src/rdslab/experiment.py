"""Scenario grid runner.

Work is split into cells ``(scenario, sampler, size)``. Each finished cell is
cached as an ``.npz`` file and listed in ``manifest.json``, so a rerun only
computes what is missing. Tables are rebuilt from the cache every time:

* ``mare.csv``      - one row per (scenario, approximation, size)
* ``rmse.csv``      - one row per (scenario, sampler, size)
* ``estimates.csv`` - long format, one Hajek estimate per replicate
* ``failures.csv``  - cells that could not be run

Seeds: ``derive_seed(base, scenario_idx, sampler_idx, size_idx, rep)``
chains splitmix64 over the parts, so any replicate can be regenerated on
its own.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .blockmodel import ScenarioConfig, generate_block_network, table1_grid
from .errors import InputError, RdsLabError, UndefinedWeightError
from .estimators import hajek, inclusion_from_samples, mare, rmse
from .network import PartiallyDirectedNetwork, read_network, write_network
from .samplers import draw_sample

log = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1
APPROXIMATIONS = ("WRPI", "SS_IN", "SS_PI", "SS_PA")
SAMPLER_INDEX = {"RDS": 0, "WRPI": 1, "SS_IN": 2, "SS_PI": 3, "SS_PA": 4}
NETWORK_STREAM = 0xFFFF
DEFAULT_SIZES = (200, 500, 750, 1125)


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def derive_seed(base: int, *parts: int) -> int:
    h = splitmix64(base & MASK64)
    for p in parts:
        h = splitmix64(h ^ (p & MASK64))
    return h


@dataclass
class ExperimentPlan:
    scenarios: list[ScenarioConfig] = field(default_factory=list)
    sizes: list[int] = field(default_factory=lambda: list(DEFAULT_SIZES))
    reps_approx: int = 500
    reps_rds: int = 1000
    base_seed: int = 0
    out_dir: str = "results"
    samplers: list[str] = field(default_factory=lambda: list(APPROXIMATIONS))
    networks: dict[str, str] = field(default_factory=dict)
    n_seeds: int = 10
    n_coupons: int = 2
    hajek_on: str = "rds"

    def __post_init__(self):
        self.samplers = [s.upper().replace("-", "_") for s in self.samplers]
        for s in self.samplers:
            if s not in APPROXIMATIONS:
                raise InputError(f"unknown approximation {s!r}")
        if self.hajek_on not in ("rds", "own"):
            raise InputError("hajek_on must be 'rds' or 'own'")
        if self.reps_approx < 1 or self.reps_rds < 1:
            raise InputError("replicate counts must be positive")
        ids = self.scenario_ids()
        if len(set(ids)) != len(ids):
            raise InputError("scenario ids must be unique")

    def scenario_ids(self) -> list[str]:
        return [c.scenario_id for c in self.scenarios] + list(self.networks)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["scenarios"] = [c.to_dict() for c in self.scenarios]
        return d

    @classmethod
    def from_dict(cls, obj: dict) -> "ExperimentPlan":
        obj = dict(obj)
        obj["scenarios"] = [ScenarioConfig.from_dict(c) for c in obj.get("scenarios", [])]
        try:
            return cls(**obj)
        except TypeError as exc:
            raise InputError(f"bad plan: {exc}") from None

    @classmethod
    def load(cls, path) -> "ExperimentPlan":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def build_default_plan(scale: float = 1.0, base_seed: int = 0, out_dir: str = "results") -> ExperimentPlan:
    """Full 36-network grid; replicate counts shrink with ``scale`` (floor, at least 10)."""
    if not 0 < scale <= 1:
        raise InputError("scale must lie in (0, 1]")
    grid = [_reseed(c, derive_seed(base_seed, i, NETWORK_STREAM))
            for i, c in enumerate(table1_grid())]
    return ExperimentPlan(
        scenarios=grid,
        reps_approx=max(10, math.floor(500 * scale + 1e-9)),
        reps_rds=max(10, math.floor(1000 * scale + 1e-9)),
        base_seed=base_seed,
        out_dir=out_dir,
    )


def _reseed(cfg: ScenarioConfig, seed: int) -> ScenarioConfig:
    return ScenarioConfig.from_dict({**cfg.to_dict(), "seed": seed})


# ---------------------------------------------------------------------------
# cells

def cell_key(scenario_id: str, sampler: str, size: int) -> str:
    return f"{scenario_id}/{sampler}_n{size}"


def run_cell(net: PartiallyDirectedNetwork, sampler: str, size: int, seeds: list[int],
             n_seeds: int = 10, n_coupons: int = 2) -> dict:
    """Draw one sample per seed; returns arrays ready for ``np.savez``."""
    samples = np.empty((len(seeds), size), dtype=np.int64)
    extra = np.zeros(len(seeds), dtype=np.int64)
    for r, s in enumerate(seeds):
        rec = draw_sample(net, sampler, size, seed=s, n_seeds=n_seeds, n_coupons=n_coupons)
        samples[r] = rec.nodes
        extra[r] = rec.reseeds or rec.restarts
    return {"samples": samples, "seeds": np.array(seeds, dtype=np.uint64), "resets": extra}


def _cell_job(args):
    net, sampler, size, seeds, n_seeds, n_coupons = args
    try:
        return run_cell(net, sampler, size, seeds, n_seeds, n_coupons), None
    except RdsLabError as exc:
        return None, f"{type(exc).__name__}: {exc}"


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class _Manifest:
    def __init__(self, path: Path, plan: ExperimentPlan):
        self.path = path
        if path.exists():
            self.data = json.loads(path.read_text(encoding="utf-8"))
        else:
            self.data = {"plan": plan.to_dict(), "cells": {}, "scenarios": {}}

    def done(self, key: str, root: Path) -> bool:
        entry = self.data["cells"].get(key)
        if not entry or entry.get("status") != "done":
            return False
        f = root / entry["file"]
        return f.exists() and _sha256(f) == entry["sha256"]

    def save(self):
        tmp = self.path.with_suffix(".tmp")
        tmp.write_text(json.dumps(self.data, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        os.replace(tmp, self.path)


@dataclass
class ResultBundle:
    out_dir: Path
    mare_rows: list[dict]
    rmse_rows: list[dict]
    estimate_rows: list[dict]
    failures: list[dict]
    computed: int

    def mare_table(self) -> dict[tuple[str, str, int], float]:
        return {(r["scenario_id"], r["sampler"], r["n"]): r["mare"] for r in self.mare_rows}


def _load_networks(plan: ExperimentPlan, root: Path, manifest: _Manifest):
    nets: dict[str, PartiallyDirectedNetwork] = {}
    failed: dict[str, str] = {}
    (root / "networks").mkdir(parents=True, exist_ok=True)
    for cfg in plan.scenarios:
        sid = cfg.scenario_id
        path = root / "networks" / f"{sid}.json"
        try:
            net = generate_block_network(cfg)
        except RdsLabError as exc:
            failed[sid] = f"{type(exc).__name__}: {exc}"
            log.warning("scenario %s failed: %s", sid, failed[sid])
            continue
        if not path.exists():
            write_network(net, path)
        nets[sid] = net
    for sid, p in plan.networks.items():
        try:
            nets[sid] = read_network(p)
        except RdsLabError as exc:
            failed[sid] = f"{type(exc).__name__}: {exc}"
    manifest.data["scenarios"] = {sid: ("failed: " + failed[sid]) if sid in failed else "ok"
                                  for sid in plan.scenario_ids()}
    return nets, failed


def run_plan(plan: ExperimentPlan, jobs: int = 1) -> ResultBundle:
    """Run (or resume) every cell of the plan and rebuild the tables."""
    root = Path(plan.out_dir)
    root.mkdir(parents=True, exist_ok=True)
    manifest = _Manifest(root / "manifest.json", plan)
    nets, failed = _load_networks(plan, root, manifest)

    all_samplers = ["RDS", *plan.samplers]
    sids = plan.scenario_ids()
    todo = []
    for si, sid in enumerate(sids):
        if sid not in nets:
            continue
        for sampler in all_samplers:
            for zi, size in enumerate(plan.sizes):
                key = cell_key(sid, sampler, size)
                if manifest.done(key, root):
                    continue
                reps = plan.reps_rds if sampler == "RDS" else plan.reps_approx
                seeds = [derive_seed(plan.base_seed, si, SAMPLER_INDEX[sampler], zi, r)
                         for r in range(reps)]
                todo.append((key, (nets[sid], sampler, size, seeds, plan.n_seeds, plan.n_coupons)))

    def record(key, result, err):
        if err is not None:
            manifest.data["cells"][key] = {"status": "failed", "error": err}
            log.warning("cell %s failed: %s", key, err)
        else:
            rel = Path("cells") / f"{key}.npz"
            dest = root / rel
            dest.parent.mkdir(parents=True, exist_ok=True)
            buf = io.BytesIO()
            np.savez(buf, **result)
            dest.write_bytes(buf.getvalue())
            manifest.data["cells"][key] = {"status": "done", "file": rel.as_posix(),
                                           "sha256": _sha256(dest)}
        manifest.save()

    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for (key, _), (result, err) in zip(todo, pool.map(_cell_job, [a for _, a in todo])):
                record(key, result, err)
    else:
        for key, args in todo:
            log.info("running cell %s", key)
            record(key, *_cell_job(args))
    manifest.save()
    bundle = aggregate(plan, nets, manifest, root, failed)
    bundle.computed = len(todo)
    return bundle


def _load_cell(root: Path, manifest: _Manifest, key: str):
    entry = manifest.data["cells"].get(key)
    if not entry or entry.get("status") != "done":
        return None
    with np.load(root / entry["file"]) as f:
        return {k: f[k] for k in f.files}


def _fmt(x) -> str:
    if isinstance(x, float):
        return "" if math.isnan(x) else repr(x)
    return str(x)


def _write_csv(path: Path, header: list[str], rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(header)
        for r in rows:
            wr.writerow([_fmt(r.get(h, "")) for h in header])


def _scenario_cols(plan: ExperimentPlan, sid: str) -> dict:
    for c in plan.scenarios:
        if c.scenario_id == sid:
            return {"h": c.h, "m": c.m, "w": c.w, "alpha": c.alpha}
    return {"h": "", "m": "", "w": "", "alpha": ""}


def aggregate(plan, nets, manifest, root, failed_scenarios) -> ResultBundle:
    """Compute MARE / Hajek / RMSE tables from the cached cells."""
    mare_rows, rmse_rows, est_rows, failures = [], [], [], []
    for sid, err in failed_scenarios.items():
        failures.append({"scenario_id": sid, "sampler": "", "n": "", "error": err})
    sids = plan.scenario_ids()
    for si, sid in enumerate(sids):
        if sid not in nets:
            continue
        net = nets[sid]
        mu = net.n1 / net.n
        cols = _scenario_cols(plan, sid)
        for zi, size in enumerate(plan.sizes):
            cells = {}
            for sampler in ["RDS", *plan.samplers]:
                key = cell_key(sid, sampler, size)
                entry = manifest.data["cells"].get(key, {})
                if entry.get("status") == "failed":
                    failures.append({"scenario_id": sid, "sampler": sampler, "n": size,
                                     "error": entry["error"]})
                    continue
                data = _load_cell(root, manifest, key)
                if data is not None:
                    cells[sampler] = data
            pis = {s: inclusion_from_samples(d["samples"], net.n, s) for s, d in cells.items()}
            for sampler in plan.samplers:
                if sampler not in pis or "RDS" not in pis:
                    continue
                res = mare(pis[sampler], pis["RDS"])
                pi_sum = float(pis[sampler].pi.sum())
                row = {"scenario_id": sid, **cols, "sampler": sampler, "n": size,
                       "reps": pis[sampler].n_samp, "rds_reps": pis["RDS"].n_samp,
                       "mare": res.value, "n_prime": res.n_prime, "pi_sum": pi_sum,
                       "seed": derive_seed(plan.base_seed, si, SAMPLER_INDEX[sampler], zi)}
                if sampler != "WRPI":
                    row["mass_ok"] = abs(pi_sum - size) <= 3 * math.sqrt(size)
                mare_rows.append(row)
            for sampler in ["RDS", *plan.samplers]:
                if sampler not in pis:
                    continue
                src = "RDS" if plan.hajek_on == "rds" else sampler
                if src not in cells:
                    continue
                vals = []
                for r, (nodes, seed) in enumerate(zip(cells[src]["samples"], cells[src]["seeds"])):
                    try:
                        mu_hat = hajek(nodes, pis[sampler], net.status)
                    except UndefinedWeightError:
                        mu_hat = float("nan")
                    vals.append(mu_hat)
                    est_rows.append({"scenario_id": sid, "sampler": sampler, "n": size,
                                     "replicate": r, "seed": int(seed), "sample_from": src,
                                     "mu_hat": mu_hat})
                vals = np.array(vals)
                ok = vals[~np.isnan(vals)]
                rmse_rows.append({
                    "scenario_id": sid, **cols, "sampler": sampler, "n": size,
                    "sample_from": src, "mu": mu,
                    "rmse": rmse(ok, mu) if ok.size else float("nan"),
                    "bias": float(ok.mean() - mu) if ok.size else float("nan"),
                    "n_valid": int(ok.size), "n_failed": int(vals.size - ok.size),
                })
    _write_csv(root / "mare.csv", ["scenario_id", "h", "m", "w", "alpha", "sampler", "n", "reps",
                                   "rds_reps", "mare", "n_prime", "pi_sum", "mass_ok", "seed"],
               mare_rows)
    _write_csv(root / "rmse.csv", ["scenario_id", "h", "m", "w", "alpha", "sampler", "n",
                                   "sample_from", "mu", "rmse", "bias", "n_valid", "n_failed"],
               rmse_rows)
    _write_csv(root / "estimates.csv", ["scenario_id", "sampler", "n", "replicate", "seed",
                                        "sample_from", "mu_hat"], est_rows)
    _write_csv(root / "failures.csv", ["scenario_id", "sampler", "n", "error"], failures)
    return ResultBundle(root, mare_rows, rmse_rows, est_rows, failures, 0)
