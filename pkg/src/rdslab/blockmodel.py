"""Two-block network generator for the simulation grid.

Block budgets come from (N, N1, lambda, h, m, w); a directed share ``alpha``
then decides how many adjacency entries are reciprocated. Edges are placed
at exact counts, so the realized block totals equal the rounded budgets.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, replace
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import DataError, InfeasibleAlphaError, InfeasibleConfigError, InputError
from .network import PartiallyDirectedNetwork


@dataclass(frozen=True)
class ScenarioConfig:
    n: int
    n1: int
    lam: float
    h: float
    m: float
    w: float
    alpha: float
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.n1 < self.n:
            raise InputError("need 0 < n1 < n")
        if not self.lam > 0:
            raise InputError("lambda must be positive")
        for name in ("h", "m", "w"):
            if not getattr(self, name) > 0:
                raise InputError(f"{name} must be positive")
        if not 0 <= self.alpha <= 1:
            raise InputError("alpha must lie in [0, 1]")

    @property
    def n0(self) -> int:
        return self.n - self.n1

    @property
    def scenario_id(self) -> str:
        return f"h{self.h:g}_m{self.m:g}_w{self.w:g}_a{self.alpha:g}"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_dict(cls, obj: dict) -> "ScenarioConfig":
        obj = dict(obj)
        if "lambda" in obj:
            obj["lam"] = obj.pop("lambda")
        try:
            return cls(**obj)
        except TypeError as exc:
            raise InputError(f"bad scenario config: {exc}") from None

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        try:
            return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: invalid JSON ({exc})") from None


@dataclass(frozen=True)
class EdgeBudget:
    """Adjacency-entry targets per block.

    ``e*s`` are the real-valued block targets. The remaining fields are filled
    in by :func:`split_directed_undirected`: ``te``/``de``/``ue`` are integer
    totals and ``ue11``/``ue00``/``ue10`` the even undirected entry counts
    (``ue10`` spans both cross blocks, half in each).
    """

    e11s: float
    e10s: float
    e01s: float
    e00s: float
    te: float
    de: int | None = None
    ue: int | None = None
    pue: float | None = None
    ue11: int = 0
    ue00: int = 0
    ue10: int = 0

    def rounded(self) -> dict[str, int]:
        return {k: round(getattr(self, f"e{k}s")) for k in ("11", "10", "01", "00")}

    def directed_entries(self) -> dict[str, int]:
        r = self.rounded()
        half = self.ue10 // 2
        return {"11": r["11"] - self.ue11, "00": r["00"] - self.ue00,
                "10": r["10"] - half, "01": r["01"] - half}


def _q(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(str(x))


def target_block_edges(cfg: ScenarioConfig, exact: bool = False) -> EdgeBudget:
    """Block budgets; the four of them always sum to ``lambda * N``.

    Arithmetic is done in rationals (decimal-exact parameters); ``exact=True``
    keeps the Fractions instead of converting to float.
    """
    n, n1, n0 = Fraction(cfg.n), Fraction(cfg.n1), Fraction(cfg.n0)
    lam, h, m, w = _q(cfg.lam), _q(cfg.h), _q(cfg.m), _q(cfg.w)
    big_h = h * (n1 - 1) / (2 * n0)
    phi = n1 / n0
    total = lam * n
    if big_h == 0:
        raise InfeasibleConfigError("homophily term is zero (need n1 >= 2)")
    e00 = (1 / (1 + phi * m) + 1 / (1 + phi * w) + 1 / (1 + 1 / big_h) - 1) \
        * (total * (big_h + 1) / (2 * big_h + 1))
    e11 = (total - e00) / (1 + 1 / big_h)
    e10 = total / (1 + phi * m) - e00
    e01 = total / (1 + phi * w) - e00
    for name, v in (("E11", e11), ("E10", e10), ("E01", e01), ("E00", e00)):
        if v < 0:
            raise InfeasibleConfigError(f"negative edge budget for block {name} ({float(v):.3f})")
    te = e11 + e10 + e01 + e00
    conv = (lambda x: x) if exact else float
    return EdgeBudget(conv(e11), conv(e10), conv(e01), conv(e00), conv(te))


def edge_probabilities(cfg: ScenarioConfig, budget: EdgeBudget) -> np.ndarray:
    """``p[k, l]``: tie probability from a status-k node to a status-l node."""
    n1, n0 = cfg.n1, cfg.n0
    p = np.zeros((2, 2))
    for (k, l), e, cap in (((0, 0), budget.e00s, n0 * (n0 - 1)),
                            ((1, 1), budget.e11s, n1 * (n1 - 1)),
                            ((1, 0), budget.e10s, n1 * n0),
                            ((0, 1), budget.e01s, n1 * n0)):
        e = float(e)
        if e < 0:
            raise InfeasibleConfigError(f"negative budget for block {k}{l}")
        if e == 0:
            continue
        if cap == 0 or e > cap:
            raise InfeasibleConfigError(
                f"block {k}{l} needs {e:.1f} entries but only {cap} ordered pairs exist")
        p[k, l] = e / cap
    return p


def _floor_even(x: float) -> int:
    f = math.floor(x)
    return f - (f % 2)


def split_directed_undirected(budget: EdgeBudget, alpha: float) -> EdgeBudget:
    """Decide how many entries are directed and spread the undirected ones over blocks."""
    if not 0 <= alpha <= 1:
        raise InputError("alpha must lie in [0, 1]")
    rounded = budget.rounded()
    te = sum(rounded.values())
    de = round(alpha * te)
    ue = te - de
    e11, e10, e01, e00 = (float(budget.e11s), float(budget.e10s),
                          float(budget.e01s), float(budget.e00s))
    cross = 2 * min(e10, e01)
    pue = e11 + e00 + cross
    if ue == 0:
        return replace(budget, te=te, de=de, ue=0, pue=pue, ue11=0, ue00=0, ue10=0)
    if not pue > ue:
        need = math.floor(te - pue) + 1
        min_alpha = min(1.0, need / te)
        raise InfeasibleAlphaError(
            f"alpha={alpha:g} leaves {ue} undirected entries but at most {pue:.1f} fit; "
            f"minimal feasible alpha is {min_alpha:.6g}", min_alpha)
    scale = ue / pue
    return replace(budget, te=te, de=de, ue=ue, pue=pue,
                   ue11=_floor_even(scale * e11),
                   ue00=_floor_even(scale * e00),
                   ue10=_floor_even(scale * cross))


def _choose_pairs(total_pairs: int, k: int, rng: np.random.Generator, what: str) -> np.ndarray:
    if k > total_pairs:
        raise InfeasibleConfigError(f"{what}: {k} edges requested but only {total_pairs} pairs exist")
    if k == 0:
        return np.empty(0, dtype=np.int64)
    return rng.choice(total_pairs, size=k, replace=False)


def _place_within(members: np.ndarray, n_und: int, n_dir: int, rng, what: str):
    k = len(members)
    rows, cols = np.triu_indices(k, 1)
    picks = _choose_pairs(len(rows), n_und + n_dir, rng, what)
    a, b = members[rows[picks]], members[cols[picks]]
    und = np.stack([a[:n_und], b[:n_und]], axis=1)
    flip = rng.integers(2, size=n_dir).astype(bool)
    da, db = a[n_und:], b[n_und:]
    directed = np.stack([np.where(flip, db, da), np.where(flip, da, db)], axis=1)
    return directed, und


def _place_cross(inf: np.ndarray, uninf: np.ndarray, n_und: int, n10: int, n01: int, rng):
    picks = _choose_pairs(len(inf) * len(uninf), n_und + n10 + n01, rng, "cross blocks")
    a, b = inf[picks // len(uninf)], uninf[picks % len(uninf)]
    und = np.stack([a[:n_und], b[:n_und]], axis=1)
    d10 = np.stack([a[n_und:n_und + n10], b[n_und:n_und + n10]], axis=1)
    d01 = np.stack([b[n_und + n10:], a[n_und + n10:]], axis=1)
    return np.concatenate([d10, d01]), und


def generate_block_network(cfg: ScenarioConfig, rng: np.random.Generator | None = None
                           ) -> PartiallyDirectedNetwork:
    """Place exactly the budgeted number of entries in every block.

    Within a block, distinct unordered pairs are drawn uniformly; the first
    ``ue/2`` become undirected and the rest directed with a random
    orientation, so no anti-parallel pair can arise. Cross blocks draw
    distinct infected/uninfected pairs the same way.
    """
    budget = target_block_edges(cfg)
    edge_probabilities(cfg, budget)
    budget = split_directed_undirected(budget, cfg.alpha)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    status = np.zeros(cfg.n, dtype=np.int8)
    status[:cfg.n1] = 1
    inf = np.arange(cfg.n1)
    uninf = np.arange(cfg.n1, cfg.n)
    dirs = budget.directed_entries()
    d11, u11 = _place_within(inf, budget.ue11 // 2, dirs["11"], rng, "block 11")
    d00, u00 = _place_within(uninf, budget.ue00 // 2, dirs["00"], rng, "block 00")
    dx, ux = _place_cross(inf, uninf, budget.ue10 // 2, dirs["10"], dirs["01"], rng)
    return PartiallyDirectedNetwork(
        cfg.n, status,
        np.concatenate([d11, d00, dx]),
        np.concatenate([u11, u00, ux]),
    )


TABLE1_M = (0.8, 1.0, 2.0)
TABLE1_W = (0.8, 1.0, 2.0)
TABLE1_H = (1.0, 5.0)
TABLE1_ALPHA = (0.2, 0.8)


def table1_grid(n: int = 1500, n1: int = 300, lam: float = 10.0, seed: int = 0) -> list[ScenarioConfig]:
    """The 36 scenario configurations of the simulation grid."""
    return [ScenarioConfig(n=n, n1=n1, lam=lam, h=h, m=m, w=w, alpha=a, seed=seed)
            for h in TABLE1_H for a in TABLE1_ALPHA for m in TABLE1_M for w in TABLE1_W]
