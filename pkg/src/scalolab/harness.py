"""Experiment orchestration: mode dispatch, Monte Carlo sweeps, artifacts.

Every report embeds the full configuration, the root seed, and the package
version, so rerunning from a report's embedded config reproduces its
numbers exactly.  All randomness flows from the root seed through named
Philox substreams; replicate r of schedule row s uses stream index
(s << 32) | r, so aggregate statistics cannot depend on execution order.
"""

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import __version__
from .config import ExperimentConfig, ingest
from .errors import PreconditionError
from .exponents import critical_exponent_report, delta, rank_profile
from .hermite import hermite_rank
from .inference import estimate_d0, limit_constants, run_test
from .synthesis import apply_G, integrate_K, sample_gaussian, export_path
from .wavelet import FilterBank, build_bank, n_coeffs, scalogram

_bank_cache: dict = {}


def _bank_for(cfg: ExperimentConfig) -> FilterBank:
    key = (cfg.bank_family, cfg.bank_jmax)
    if key not in _bank_cache:
        _bank_cache[key] = build_bank(*key)
    return _bank_cache[key]


def _meta(cfg: ExperimentConfig) -> dict:
    return {"config": cfg.raw, "seed": cfg.seed, "version": __version__}


class _Artifacts:
    """Track written files so a failed run leaves no partial output."""

    def __init__(self, out_dir):
        self.out_dir = out_dir
        self.paths = []
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        p = os.path.join(self.out_dir, name)
        self.paths.append(p)
        return p

    def cleanup(self):
        for p in self.paths:
            for q in (p, p + ".json"):
                if os.path.exists(q):
                    os.unlink(q)


def _simulate_series(cfg: ExperimentConfig, stream_index: int = 0) -> np.ndarray:
    x = sample_gaussian(cfg.model, cfg.n, cfg.seed, stream_index)
    if cfg.g is not None:
        y = apply_G(cfg.g.centered_callable(), x)
    else:
        y = x
    return integrate_K(y, cfg.model.K)


def _load_or_simulate(cfg: ExperimentConfig) -> tuple[np.ndarray, dict]:
    if cfg.input_csv:
        return ingest(cfg.input_csv)
    series = _simulate_series(cfg)
    return series, {"simulated": True, "n": cfg.n, "seed": cfg.seed}


def run(cfg: ExperimentConfig) -> list:
    """Dispatch one experiment; returns the list of artifact paths written."""
    art = _Artifacts(cfg.out_dir)
    try:
        if cfg.mode == "simulate":
            return _run_simulate(cfg, art)
        if cfg.mode == "analyze":
            return _run_analyze(cfg, art)
        if cfg.mode == "estimate":
            return _run_estimate(cfg, art)
        if cfg.mode == "test":
            return _run_test_mode(cfg, art)
        if cfg.mode == "nu-c":
            return _run_nuc(cfg, art)
        if cfg.mode == "mc-experiment":
            return _run_mc(cfg, art)
        raise ValueError(f"unhandled mode {cfg.mode}")
    except BaseException:
        art.cleanup()
        raise


def _run_simulate(cfg, art):
    series = _simulate_series(cfg)
    p = art.path("path.csv")
    export_path(series, p, sidecar=_meta(cfg))
    return art.paths


def _run_analyze(cfg, art):
    series, prov = _load_or_simulate(cfg)
    bank = _bank_for(cfg)
    rows = []
    for j in range(cfg.j0, cfg.j0 + cfg.p + 1):
        s = scalogram(series, bank, j)
        rows.append((j, s.n, s.sigma2))
    cp = art.path("scalogram.csv")
    with open(cp, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["j", "n_j", "sigma2"])
        wr.writerows(rows)
    rp = art.path("analyze_report.json")
    with open(rp, "w") as fh:
        json.dump({**_meta(cfg), "input": prov, "table": rows}, fh, indent=2, default=float)
    return art.paths


def _run_estimate(cfg, art):
    series, prov = _load_or_simulate(cfg)
    bank = _bank_for(cfg)
    kwargs = {}
    if cfg.g is not None and cfg.model is not None:
        q0, _ = hermite_rank(cfg.g.expansion())
        kwargs = {"params": cfg.model.params, "q0": q0}
    report = estimate_d0(series, bank, cfg.j0, cfg.p, **kwargs)
    rp = art.path("estimate_report.json")
    with open(rp, "w") as fh:
        json.dump({**_meta(cfg), "input": prov, "estimate": report.to_dict()},
                  fh, indent=2, default=float)
    return art.paths


def _run_test_mode(cfg, art):
    series, prov = _load_or_simulate(cfg)
    bank = _bank_for(cfg)
    expansion = cfg.g.expansion()
    cache = os.path.join(cfg.out_dir, "quantile_cache.json")
    report = run_test(
        series, bank, cfg.d0_star, cfg.alpha, cfg.k_bar, expansion,
        cfg.j0, cfg.p, beta_smooth=cfg.model.beta_smooth,
        quantile_reps=cfg.quantile_reps, quantile_seed=cfg.seed + 7,
        quantile_n_internal=cfg.quantile_n_internal, quantile_cache=cache,
    )
    enforce = cfg.enforce_preconditions or {}
    if enforce:
        red_max = enforce.get("reduction_max")
        bias_max = enforce.get("bias_max")
        if red_max is not None and report.reduction_ratio is not None and report.reduction_ratio > red_max:
            raise PreconditionError(
                f"reduction ratio {report.reduction_ratio:.3g} exceeds {red_max}"
            )
        if bias_max is not None and report.bias_ratio > bias_max:
            raise PreconditionError(
                f"bias ratio {report.bias_ratio:.3g} exceeds {bias_max}"
            )
    rp = art.path("test_report.json")
    with open(rp, "w") as fh:
        json.dump({**_meta(cfg), "input": prov, "test": report.to_dict()},
                  fh, indent=2, default=float)
    return art.paths


def _run_nuc(cfg, art):
    expansion = cfg.g.expansion()
    indices = expansion.nonzero_indices()
    ds = list(cfg.d_values) or [cfg.model.d]
    reports = []
    for d in ds:
        profile = rank_profile(indices, d)
        rep = critical_exponent_report(profile, d)
        reports.append({
            "d": d,
            "q_indices": list(profile.q_indices),
            "gap_sets": {str(r): sorted(s) for r, s in profile.gap_sets.items()},
            "ell_markers": {str(r): l for r, l in profile.ell_markers.items()},
            "Q_set": sorted(profile.Q_set),
            "Jd_set": sorted(profile.Jd_set),
            "branch": rep.branch,
            "branch_inputs": rep.inputs,
            "candidates": [[str(lbl), v] for lbl, v in rep.candidates],
            "nu_c": None if rep.nu_c.is_infinite else rep.nu_c.value,
            "nu_c_infinite": rep.nu_c.is_infinite,
        })
        print(json.dumps(reports[-1], indent=2, default=float))
    rp = art.path("nu_c_report.json")
    with open(rp, "w") as fh:
        json.dump({**_meta(cfg), "reports": reports}, fh, indent=2, default=float)
    return art.paths


# --- Monte Carlo sweeps ----------------------------------------------------


@dataclass
class _Row:
    n: int
    j0: int
    p: int
    replicates: int
    index: int
    regime: str = ""
    gap_scales: tuple = ()


def _schedule(cfg: ExperimentConfig, bank: FilterBank) -> list:
    rows = []
    base = {"n": cfg.n, "j0": cfg.j0, "p": cfg.p, "replicates": cfg.replicates}
    if cfg.schedule:
        for i, entry in enumerate(cfg.schedule):
            merged = {**base, **{("j0" if k == "j" else k): v for k, v in entry.items()}}
            rows.append(_Row(merged["n"], merged["j0"], merged["p"], merged["replicates"], i))
    elif cfg.preset in ("large-scale", "small-scale"):
        d = cfg.model.d
        expansion = cfg.g.expansion()
        profile = rank_profile(expansion.nonzero_indices(), d)
        nu = critical_exponent_report(profile, d).nu_c
        js = []
        for j in range(2, bank.jmax - 1):
            try:
                nj = n_coeffs(cfg.n, bank.T, j + 1)
            except Exception:
                continue
            if nj < 32:
                continue
            if nu.is_infinite:
                ratio = 0.0
            else:
                ratio = cfg.n * 2.0**-j / 2.0 ** (j * nu.value)
            if cfg.preset == "large-scale" and ratio <= 0.25:
                js.append(j)
            elif cfg.preset == "small-scale" and ratio >= 4.0:
                js.append(j)
        if not js:
            raise PreconditionError(
                f"no scales satisfy the {cfg.preset} regime for n={cfg.n}; adjust n"
            )
        pick = js[-3:] if cfg.preset == "large-scale" else js[:3]
        regime = "large-scale" if cfg.preset == "large-scale" else "exploratory-small-scale"
        rows.append(_Row(cfg.n, min(pick), cfg.p, cfg.replicates, 0,
                         regime=regime, gap_scales=tuple(pick)))
    else:
        rows.append(_Row(cfg.n, cfg.j0, cfg.p, cfg.replicates, 0,
                         regime="slope" if cfg.preset == "slope" else ""))
    return rows


def _mc_replicate(args):
    """One replicate of one schedule row (top-level for pickling)."""
    raw, row_dict, r = args
    from .config import parse_config

    cfg = parse_config(raw)
    row = _Row(**row_dict)
    bank = _bank_for(cfg)
    stream_index = (row.index << 32) | r
    x = sample_gaussian(cfg.model, row.n, cfg.seed, stream_index)
    g_call = cfg.g.centered_callable() if cfg.g is not None else (lambda v: v)
    y = integrate_K(apply_G(g_call, x), cfg.model.K)
    est = estimate_d0(y, bank, row.j0, row.p)
    out = {"r": r, "d0_hat": est.d0_hat}
    if row.gap_scales:
        expansion = cfg.g.expansion()
        q0, _ = hermite_rank(expansion)
        cq0 = expansion.coeffs[q0]
        lead = integrate_K((cq0 / math.factorial(q0)) * _hermite_path(q0, x), cfg.model.K)
        gaps = {}
        for j in row.gap_scales:
            sG = scalogram(y, bank, j).sigma2
            sL = scalogram(lead, bank, j).sigma2
            gaps[j] = (sG, sL)
        out["gaps"] = gaps
    if cfg.d0_star is not None and cfg.alpha is not None:
        law = limit_constants(bank, cfg.model.params, _target_rank(cfg), row.p)
        rep = run_test(
            y, bank, cfg.d0_star, cfg.alpha, cfg.k_bar, cfg.g.expansion(),
            row.j0, row.p, beta_smooth=cfg.model.beta_smooth,
            quantile_reps=cfg.quantile_reps,
            quantile_n_internal=cfg.quantile_n_internal, law=law,
        )
        out["reject"] = bool(rep.decision)
    return out


def _target_rank(cfg) -> int:
    q0, _ = hermite_rank(cfg.g.expansion())
    return q0


def _hermite_path(q0: int, x: np.ndarray) -> np.ndarray:
    from .hermite import hermite_eval

    return hermite_eval(q0, x)


def _run_mc(cfg, art):
    bank = _bank_for(cfg)
    rows = _schedule(cfg, bank)
    expansion = cfg.g.expansion()
    q0, _ = hermite_rank(expansion)
    d0_true = cfg.model.K + delta(q0, cfg.model.d)

    results = []
    for row in rows:
        tasks = [(cfg.raw, row.__dict__, r) for r in range(row.replicates)]
        if cfg.workers > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
                recs = list(ex.map(_mc_replicate, tasks, chunksize=8))
        else:
            recs = [_mc_replicate(t) for t in tasks]
        recs.sort(key=lambda rec: rec["r"])
        d0s = np.array([rec["d0_hat"] for rec in recs])
        from scipy import stats

        agg = {
            "row": row.index, "n": row.n, "j0": row.j0, "p": row.p,
            "replicates": row.replicates, "regime": row.regime,
            "d0_true": d0_true,
            "mean_d0": float(d0s.mean()), "bias": float(d0s.mean() - d0_true),
            "sd": float(d0s.std(ddof=1)) if len(d0s) > 1 else 0.0,
            "rmse": float(np.sqrt(np.mean((d0s - d0_true) ** 2))),
            "slope": float(2.0 * d0s.mean()),
            "skewness": float(stats.skew(d0s)) if len(d0s) > 2 else 0.0,
            "normality_p": float(stats.normaltest(d0s).pvalue) if len(d0s) >= 20 else float("nan"),
        }
        if any("reject" in rec for rec in recs):
            agg["rejection_rate"] = float(np.mean([rec["reject"] for rec in recs]))
        if row.gap_scales:
            for j in row.gap_scales:
                sG = np.array([rec["gaps"][j][0] for rec in recs])
                sL = np.array([rec["gaps"][j][1] for rec in recs])
                gap = np.sqrt(np.mean((sG - sG.mean() - (sL - sL.mean())) ** 2))
                lead = np.sqrt(np.mean((sL - sL.mean()) ** 2))
                agg[f"rel_gap_j{j}"] = float(gap / lead)
        results.append(agg)

    cp = art.path("mc_results.csv")
    keys = sorted({k for row in results for k in row})
    with open(cp, "w", newline="") as fh:
        wr = csv.DictWriter(fh, fieldnames=keys)
        wr.writeheader()
        wr.writerows(results)
    rp = art.path("mc_report.json")
    with open(rp, "w") as fh:
        json.dump({**_meta(cfg), "results": results}, fh, indent=2, default=float)
    return art.paths
