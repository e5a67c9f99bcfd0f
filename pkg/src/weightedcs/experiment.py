"""Randomized verification campaigns for the weighted error bound."""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import asdict, dataclass, field

import numpy as np

from .dictionary import (
    Dictionary,
    coherence,
    orthonormal_basis,
    random_dictionary,
    simplex_dictionary,
    two_ortho_dictionary,
)
from .l1solver import SolverConfig, verify_recovery

CSV_COLUMNS = [
    "trial", "seed", "s", "mu", "eps", "eta", "e0", "observed", "bound", "cai_bound",
    "applicable", "satisfied", "hypothesis_ok", "converged",
]

_GENERATORS = {
    "two_ortho": (two_ortho_dictionary, {"n": int, "seed": int, "lo": float, "hi": float}),
    "simplex": (simplex_dictionary, {"n": int, "seed": int, "lo": float, "hi": float}),
    "random": (random_dictionary, {"n": int, "N": int, "seed": int, "lo": float, "hi": float}),
    "identity": (orthonormal_basis, {"n": int}),
}


def parse_dict_source(src: str) -> Dictionary:
    """Load a dictionary from a JSON path or a ``gen:NAME:key=value,...`` spec.

    Generators: ``two_ortho`` and ``simplex`` (n, seed, lo, hi), ``random`` (n, N, seed,
    lo, hi) and ``identity`` (n).
    """
    if not src.startswith("gen:"):
        return Dictionary.load(src)
    m = re.fullmatch(r"gen:(\w+)(?::(.*))?", src)
    if not m or m.group(1) not in _GENERATORS:
        raise ValueError(f"unknown generator spec {src!r}; choose from {sorted(_GENERATORS)}")
    func, types = _GENERATORS[m.group(1)]
    params = {}
    for item in filter(None, (m.group(2) or "").split(",")):
        key, sep, val = item.partition("=")
        key = key.strip()
        if not sep or key not in types:
            raise ValueError(f"bad generator parameter {item!r} for {m.group(1)}")
        params[key] = types[key](val)
    if "n" not in params:
        raise ValueError("generator spec needs n=<int>")
    lo, hi = params.pop("lo", None), params.pop("hi", None)
    if m.group(1) in ("two_ortho", "simplex"):
        kw = {"weight_seed": params.pop("seed", None)}
        if lo is not None or hi is not None:
            kw["weight_range"] = (lo or 0.5, hi or 2.0)
        return func(params["n"], **kw)
    if m.group(1) == "random":
        if "N" not in params:
            raise ValueError("random generator needs N=<int>")
        return func(params["n"], params["N"], weight_range=(lo or 0.5, hi or 2.0), seed=params.get("seed"))
    return func(params["n"])


@dataclass
class ExperimentConfig:
    """One campaign: ``trials`` runs for every (s, eps/eta pair) cell.

    ``eps`` and ``eta`` grids are paired elementwise; an omitted ``eta``
    grid means ``eta = eps``.  ``rescale`` multiplies every atom by a fresh
    factor from [0.5, 2] in each trial; ``tail`` adds a dense Gaussian
    component of that amplitude so that ``e0 > 0``.
    """

    dictionary: str
    trials: int = 100
    s: list[int] = field(default_factory=lambda: [1])
    eps: list[float] = field(default_factory=lambda: [0.0])
    eta: list[float] | None = None
    seed: int = 0
    rescale: bool = False
    tail: float = 0.0
    solver: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.eta is None:
            self.eta = list(self.eps)
        self.validate()

    def validate(self):
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ValueError("trials must be a positive integer")
        if not self.s or not self.eps or not self.eta:
            raise ValueError("s, eps and eta grids must be nonempty")
        if any(not isinstance(k, int) or k < 1 for k in self.s):
            raise ValueError("sparsity levels must be positive integers")
        if len(self.eps) != len(self.eta):
            raise ValueError("eps and eta grids must have the same length")
        for e, h in zip(self.eps, self.eta):
            if not (0 <= e <= h) or not math.isfinite(h):
                raise ValueError(f"need 0 <= eps <= eta, got eps={e}, eta={h}")
        if self.tail < 0:
            raise ValueError("tail must be >= 0")
        SolverConfig(**self.solver)

    @classmethod
    def from_dict(cls, obj) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ValueError("experiment config must be a JSON object")
        unknown = set(obj) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown experiment config fields: {sorted(unknown)}")
        return cls(**obj)

    def cells(self):
        for s in self.s:
            for e, h in zip(self.eps, self.eta):
                yield s, float(e), float(h)


def trial_seed(seed: int, counter: int) -> int:
    """Sub-seed for trial ``counter``; independent of the total trial count."""
    return int(np.random.SeedSequence([seed, counter]).generate_state(1)[0])


def sparse_vector(N, s, rng, tail=0.0) -> np.ndarray:
    c = np.zeros(N)
    if tail > 0:
        c = tail * rng.standard_normal(N)
    S = rng.choice(N, size=s, replace=False)
    c[S] = rng.choice([-1.0, 1.0], size=s) * rng.uniform(1.0, 2.0, size=s)
    return c


def run_experiment(cfg: ExperimentConfig, D: Dictionary | None = None) -> dict:
    """Run every trial sequentially and return ``{"rows": [...], "summary": {...}}``."""
    if D is None:
        D = parse_dict_source(cfg.dictionary)
    solver = SolverConfig(**cfg.solver)
    mu = coherence(D)
    rows = []
    counter = 0
    for s, eps, eta in cfg.cells():
        if s > D.N:
            raise ValueError(f"s={s} exceeds the atom count {D.N}")
        for _ in range(cfg.trials):
            sub = trial_seed(cfg.seed, counter)
            rng = np.random.default_rng(sub)
            Dt = D.rescaled(rng.uniform(0.5, 2.0, D.N)) if cfg.rescale else D
            c = sparse_vector(D.N, s, rng, cfg.tail)
            rep = verify_recovery(Dt, c, s, eps, eta, solver, rng=rng, mu=mu)
            rows.append({
                "trial": counter,
                "seed": sub,
                "s": s,
                "mu": mu,
                "eps": eps,
                "eta": eta,
                "e0": rep.e0,
                "observed": rep.observed,
                "bound": rep.bound_value,
                "cai_bound": rep.cai_bound,
                "applicable": rep.applicable,
                "satisfied": rep.satisfied,
                "hypothesis_ok": rep.extra["hypothesis_ok"],
                "converged": rep.extra["converged"],
            })
            counter += 1
    return {"rows": rows, "summary": summarize(rows)}


def summarize(rows) -> dict:
    app = [r for r in rows if r["applicable"]]
    sat = sum(1 for r in app if r["satisfied"])
    return {
        "trials": len(rows),
        "applicable": len(app),
        "satisfied": sat,
        "satisfied_rate": sat / len(app) if app else None,
        "violations": len(app) - sat,
        "hypothesis_ok_rate": sum(r["hypothesis_ok"] for r in rows) / len(rows) if rows else None,
        "converged_rate": sum(r["converged"] for r in rows) / len(rows) if rows else None,
        "max_observed_over_bound": max(
            (r["observed"] / r["bound"] for r in app if r["bound"] > 0), default=None
        ),
    }


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def to_csv(result) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in result["rows"]:
        writer.writerow([_fmt(row[k]) for k in CSV_COLUMNS])
    return buf.getvalue()


def to_json(result, cfg: ExperimentConfig | None = None) -> str:
    out = dict(result)
    if cfg is not None:
        out = {"config": asdict(cfg), **out}
    return json.dumps(out, indent=1) + "\n"
