"""Command-line harness: single runs, seeded sweeps to CSV, and rate plots.

Configuration is a flat ``key=value`` text file; command-line flags override
file keys.  Instance parameters use an ``instance.`` prefix, for example
``instance=glm`` with ``instance.w_star=1,1,1``.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import AbstainError, InvalidConfig

ALGOS = ("algo1", "algo2", "algo3", "adaptive", "passive", "glm")
COLUMNS = ("run_id", "algo", "model", "n", "m", "seed", "excess_risk", "abstain_rate",
           "feasible", "labels_used", "wall_ms")
OUT_DIR_ENV = "ABSTAIN_AL_OUT_DIR"
NEEDS_LAMBDA = {"algo1", "adaptive", "glm"}
NEEDS_DELTA = {"algo2", "algo3"}
MEMBERSHIP_ONLY = {"adaptive", "glm"}


@dataclass
class ExperimentConfig:
    algos: tuple = ("algo1",)
    model: str = "membership"
    instance: dict = field(default_factory=lambda: {"kind": "linear1d"})
    n_grid: tuple = (128, 256, 512)
    replicates: int = 1
    seed: int = 0
    lam: Optional[float] = None
    delta: Optional[float] = None
    L: Optional[float] = None
    beta: Optional[float] = None
    c1: Optional[float] = None
    de_params: Optional[tuple] = None
    c_prime: float = 4.0
    pool_cap: int = 2 * 10 ** 6
    n_mc: int = 10 ** 6
    out: str = "sweep.csv"
    jobs: int = 1
    timing: bool = True

    def validate(self) -> "ExperimentConfig":
        bad = [a for a in self.algos if a not in ALGOS]
        if not self.algos or bad:
            raise InvalidConfig(f"unknown algo(s) {bad or '(none)'}; choose from {', '.join(ALGOS)}")
        if self.model not in ("membership", "pool", "stream"):
            raise InvalidConfig(f"unknown model {self.model!r}")
        if not self.n_grid or any(n < 1 for n in self.n_grid):
            raise InvalidConfig("n_grid must be a non-empty list of positive budgets")
        if list(self.n_grid) != sorted(set(self.n_grid)):
            raise InvalidConfig("n_grid must be strictly ascending")
        if self.replicates < 1 or self.jobs < 1:
            raise InvalidConfig("replicates and jobs must be >= 1")
        for a in self.algos:
            if a in NEEDS_LAMBDA and self.lam is None:
                raise InvalidConfig(f"{a} needs lambda")
            if a in NEEDS_DELTA and self.delta is None:
                raise InvalidConfig(f"{a} needs delta")
            if a == "passive" and self.lam is None and self.delta is None:
                raise InvalidConfig("passive needs lambda or delta")
            if a in MEMBERSHIP_ONLY and self.model != "membership":
                raise InvalidConfig(f"{a} runs with membership queries only")
            if a == "glm" and self.instance.get("kind") != "glm":
                raise InvalidConfig("glm needs instance=glm")
        if self.lam is not None and not 0.0 < self.lam < 0.5:
            raise InvalidConfig(f"lambda must lie in (0, 1/2), got {self.lam}")
        if self.delta is not None and not 0.0 < self.delta < 1.0:
            raise InvalidConfig(f"delta must lie in (0, 1), got {self.delta}")
        from .problems import instance_from_spec

        instance_from_spec(self.instance)
        return self


# ------------------------------------------------------------ config parsing

def parse_kv(text: str) -> dict:
    """Parse ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfig(f"line {no}: expected key=value, got {raw!r}")
        k, v = line.split("=", 1)
        out[k.strip().replace("-", "_")] = v.strip()
    return out


def _num(kv, key, cast, default=None):
    if key not in kv or kv[key] in ("", None):
        return default
    try:
        return cast(kv[key])
    except ValueError as exc:
        raise InvalidConfig(f"bad value for {key}: {kv[key]!r}") from exc


def config_from_kv(kv: dict) -> ExperimentConfig:
    known = {"algo", "model", "instance", "n_grid", "replicates", "seed", "lambda", "delta", "L",
             "beta", "c1", "de_C2", "de_alpha2", "c_prime", "pool_cap", "n_mc", "out", "jobs",
             "timing"}
    unknown = [k for k in kv if k not in known and not k.startswith("instance.")]
    if unknown:
        raise InvalidConfig(f"unknown config key(s): {', '.join(sorted(unknown))}")
    inst = {"kind": kv.get("instance", "linear1d")}
    inst.update({k.split(".", 1)[1]: v for k, v in kv.items() if k.startswith("instance.")})
    de = None
    if "de_C2" in kv or "de_alpha2" in kv:
        de = (_num(kv, "de_C2", float, 1.0), _num(kv, "de_alpha2", float, 1.0))
    grid = kv.get("n_grid", "128,256,512")
    try:
        n_grid = tuple(int(float(v)) for v in str(grid).split(",") if v.strip())
    except ValueError as exc:
        raise InvalidConfig(f"bad n_grid {grid!r}") from exc
    return ExperimentConfig(
        algos=tuple(a.strip() for a in kv.get("algo", "algo1").split(",") if a.strip()),
        model=kv.get("model", "membership"),
        instance=inst,
        n_grid=n_grid,
        replicates=_num(kv, "replicates", int, 1),
        seed=_num(kv, "seed", int, 0),
        lam=_num(kv, "lambda", float),
        delta=_num(kv, "delta", float),
        L=_num(kv, "L", float),
        beta=_num(kv, "beta", float),
        c1=_num(kv, "c1", float),
        de_params=de,
        c_prime=_num(kv, "c_prime", float, 4.0),
        pool_cap=_num(kv, "pool_cap", int, 2 * 10 ** 6),
        n_mc=_num(kv, "n_mc", int, 10 ** 6),
        out=kv.get("out", "sweep.csv"),
        jobs=_num(kv, "jobs", int, 1),
        timing=str(kv.get("timing", "1")).lower() not in ("0", "false", "no"),
    )


def resolve_out(path: str) -> str:
    base = os.environ.get(OUT_DIR_ENV)
    if base and not os.path.isabs(path):
        os.makedirs(base, exist_ok=True)
        return os.path.join(base, path)
    return path


# ------------------------------------------------------------ single runs

def run_one(cfg: ExperimentConfig, algo: str, n: int, rep: int) -> dict:
    """One (algo, n, replicate) run; replicate r uses seed + r.  Failures become an error row."""
    from .algo_fixed_cost import run_algorithm1
    from .algo_known_marginal import run_algorithm2
    from .algo_unlabelled import run_algorithm3
    from .adaptive import run_adaptive
    from .estimation import SmoothnessParams
    from .evaluation import passive_plugin, risk_of
    from .glm import recover_direction
    from .oracles import make_oracle
    from .problems import instance_from_spec

    seed = cfg.seed + rep
    rng = np.random.default_rng(seed)
    inst = instance_from_spec(cfg.instance)
    p = None
    if cfg.L is not None or cfg.beta is not None:
        p = SmoothnessParams(cfg.L if cfg.L is not None else inst.desc.L,
                             cfg.beta if cfg.beta is not None else inst.desc.beta)
    row = {"run_id": f"{algo}-{cfg.model}-n{n}-r{rep}", "algo": algo, "model": cfg.model, "n": n,
           "m": 0, "seed": seed}
    t0 = time.perf_counter()
    try:
        if algo == "glm":
            D = inst.D
            rd = recover_direction(inst, max(1, n // (D - 1)), cfg.lam, rng, p=p)
            w = np.asarray([float(v) for v in str(inst.spec["w_star"]).split(",")])
            row.update(excess_risk=float(np.linalg.norm(rd.w_hat - w)), abstain_rate=0.0,
                       feasible=1, labels_used=rd.labels_used)
        else:
            bounded = algo in NEEDS_DELTA or (algo == "passive" and cfg.lam is None)
            mode = "bounded" if bounded else "fixed"
            oracle = None if algo == "passive" else make_oracle(cfg.model, n, inst, rng, cfg.pool_cap)
            if algo == "algo1":
                clf, _ = run_algorithm1(inst, oracle, n, cfg.lam, p=p)
            elif algo == "algo2":
                clf, _ = run_algorithm2(inst, oracle, n, cfg.delta, p=p)
            elif algo == "algo3":
                clf, _, m = run_algorithm3(inst, oracle, n, cfg.delta, p=p, de_params=cfg.de_params,
                                           c_prime=cfg.c_prime)
                row["m"] = m
            elif algo == "adaptive":
                clf, _ = run_adaptive(inst, oracle, n, cfg.lam, c1=cfg.c1)
            else:
                clf = passive_plugin(inst, n, mode, lam=cfg.lam, delta=cfg.delta,
                                     beta=p.beta if p else None, rng=rng)
            rep_ = risk_of(inst, clf, mode, lam=cfg.lam, delta=cfg.delta, n_mc=cfg.n_mc,
                           rng=np.random.default_rng(seed + 10 ** 6))
            feasible = 1 if mode == "fixed" or rep_.abstain_rate <= cfg.delta + 1e-9 else 0
            row.update(excess_risk=rep_.excess, abstain_rate=rep_.abstain_rate, feasible=feasible,
                       labels_used=n if oracle is None else oracle.used)
    except (AbstainError, FloatingPointError) as exc:
        print(f"warning: {row['run_id']} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        row.update(excess_risk=math.nan, abstain_rate=math.nan, feasible=0, labels_used=0)
    row["wall_ms"] = int(round((time.perf_counter() - t0) * 1000)) if cfg.timing else 0
    return row


def _run_task(args):
    return run_one(*args)


def run_sweep(cfg: ExperimentConfig) -> list:
    """All (algo, n, replicate) runs, sorted by (n, replicate, algo) whatever the job count."""
    cfg.validate()
    tasks = [(cfg, a, n, r) for n in cfg.n_grid for r in range(cfg.replicates) for a in cfg.algos]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            rows = list(ex.map(_run_task, tasks))
    else:
        rows = [_run_task(t) for t in tasks]
    order = {a: j for j, a in enumerate(cfg.algos)}
    rows.sort(key=lambda r: (r["n"], r["seed"] - cfg.seed, order[r["algo"]]))
    return rows


def _fmt(v) -> str:
    if isinstance(v, (float, np.floating)):
        return "nan" if math.isnan(v) else repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def summary_lines(rows: list) -> list:
    """'#'-prefixed per-n medians and fitted slopes per algo."""
    from .evaluation import fit_rate

    lines = ["# summary", "# algo,n,median_excess_risk,runs,errors"]
    slopes = []
    for algo in dict.fromkeys(r["algo"] for r in rows):
        ns, meds = [], []
        for n in sorted({r["n"] for r in rows if r["algo"] == algo}):
            vals = [float(r["excess_risk"]) for r in rows if r["algo"] == algo and r["n"] == n]
            ok = [v for v in vals if not math.isnan(v)]
            med = float(np.median(ok)) if ok else math.nan
            lines.append(f"# {algo},{n},{_fmt(med)},{len(vals)},{len(vals) - len(ok)}")
            ns.append(n)
            meds.append(med)
        try:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                s = fit_rate(ns, meds)
            slopes.append(f"# slope,{algo},{s:.6g}")
        except InvalidConfig:
            slopes.append(f"# slope,{algo},nan")
    return lines + slopes


def write_csv(rows: list, path: str) -> None:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(r[k]) for k in COLUMNS})
    for line in summary_lines(rows):
        buf.write(line + "\n")
    d = os.path.dirname(path)
    if d:
        os.makedirs(d, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def read_csv(path: str) -> list:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#") and ln.strip()]
    if not lines:
        raise InvalidConfig(f"{path} has no data")
    rows = list(csv.DictReader(lines))
    missing = [c for c in ("algo", "n", "excess_risk") if c not in (rows[0] if rows else {})]
    if not rows or missing:
        raise InvalidConfig(f"{path} lacks rows or columns {missing}")
    return rows


# ------------------------------------------------------------ plotting

def emit_plot(csv_path: str, out: str) -> str:
    """Log-log median excess risk against n, one line per algo, slopes in the legend."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ext = os.path.splitext(out)[1].lower()
    if ext not in (".svg", ".pdf"):
        raise InvalidConfig(f"plot output must be .svg or .pdf, got {out!r}")
    rows = read_csv(csv_path)
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for algo in dict.fromkeys(r["algo"] for r in rows):
        pts = {}
        for r in rows:
            if r["algo"] == algo:
                v = float(r["excess_risk"])
                if math.isfinite(v) and v > 0:
                    pts.setdefault(int(r["n"]), []).append(v)
        if not pts:
            continue
        ns = np.array(sorted(pts))
        med = np.array([np.median(pts[n]) for n in ns])
        label = algo
        if ns.size >= 2:
            slope = np.polyfit(np.log(ns), np.log(med), 1)[0]
            label = f"{algo} (slope {slope:.2f})"
        ax.loglog(ns, med, "o-", label=label)
    ax.set_xlabel("label budget n")
    ax.set_ylabel("median excess risk")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out)
    plt.close(fig)
    return out


# ------------------------------------------------------------ entry point

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="abstain-al", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    def common(p):
        p.add_argument("--config", help="key=value file; flags override its keys")
        p.add_argument("--algo", help="comma list of " + ",".join(ALGOS))
        p.add_argument("--model", choices=("membership", "pool", "stream"))
        p.add_argument("--instance", help="instance kind (linear1d, holder, constant, lower_bound, glm)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="any other config key, repeatable")
        p.add_argument("--lambda", dest="lambda_", type=float)
        p.add_argument("--delta", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--no-timing", action="store_true", help="write wall_ms=0 for byte-stable files")

    r = sub.add_parser("run", help="one run, record printed as CSV")
    common(r)
    r.add_argument("--n", type=int, required=True)
    s = sub.add_parser("sweep", help="replicates x n_grid runs written to CSV")
    common(s)
    s.add_argument("--n-grid")
    s.add_argument("--replicates", type=int)
    s.add_argument("--jobs", type=int)
    pl = sub.add_parser("plot", help="log-log rate figure from a sweep CSV")
    pl.add_argument("csv")
    pl.add_argument("--out", required=True)
    return ap


def config_from_args(args) -> ExperimentConfig:
    kv = {}
    if args.config:
        with open(args.config) as fh:
            kv = parse_kv(fh.read())
    for item in args.set:
        kv.update(parse_kv(item))
    flags = {"algo": args.algo, "model": args.model, "instance": args.instance,
             "lambda": args.lambda_, "delta": args.delta, "seed": args.seed, "out": args.out,
             "n_grid": getattr(args, "n_grid", None), "replicates": getattr(args, "replicates", None),
             "jobs": getattr(args, "jobs", None)}
    if getattr(args, "n", None) is not None:
        flags["n_grid"] = str(args.n)
    kv.update({k: str(v) for k, v in flags.items() if v is not None})
    if args.no_timing:
        kv["timing"] = "0"
    return config_from_kv(kv)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "plot":
            print(emit_plot(args.csv, resolve_out(args.out)))
            return 0
        cfg = config_from_args(args).validate()
        if args.cmd == "run":
            cfg = replace(cfg, replicates=1)
            rows = run_sweep(cfg)
            w = csv.DictWriter(sys.stdout, fieldnames=COLUMNS, lineterminator="\n")
            w.writeheader()
            for row in rows:
                w.writerow({k: _fmt(row[k]) for k in COLUMNS})
            return 0
        rows = run_sweep(cfg)
        out = resolve_out(cfg.out)
        write_csv(rows, out)
        print(out)
        return 0
    except (InvalidConfig, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
