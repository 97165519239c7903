"""Experiment configuration: JSON schema, transform menu, and ingestion.

A configuration is a flat JSON object; see README for the field table.
Validation errors carry the offending field path.
"""

import hashlib
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import ConfigError
from .exponents import MemoryParams, check_off_boundary
from .hermite import (
    DEFAULT_QMAX,
    DEFAULT_QUAD_ORDER,
    HermiteExpansion,
    expand,
    expansion_from_coeffs,
    hermite_eval,
    hermite_series,
)
from .spectral import ShortRangeSpec, SpectralModel

_BUILTIN_KINDS = ("hermite", "polynomial", "exp-centered", "sign", "abs-centered", "hermite-coeffs")


def _normal_moment(n: int) -> float:
    """E[X^n] for X standard normal: 0 for odd n, (n-1)!! for even n."""
    if n % 2:
        return 0.0
    out = 1.0
    for k in range(n - 1, 0, -2):
        out *= k
    return out


@dataclass(frozen=True)
class GSpec:
    """Declarative transform: a named builtin, a polynomial in x with
    rational coefficients, or an explicit Hermite coefficient map."""

    kind: str
    q: Optional[int] = None
    poly_coeffs: tuple = ()
    hermite_coeffs: tuple = ()  # ((q, c), ...)

    def centered_callable(self):
        """Vectorised, exactly centered version of the transform."""
        if self.kind == "hermite":
            q = self.q

            return lambda x: hermite_eval(q, x)
        if self.kind == "polynomial":
            coeffs = np.array(self.poly_coeffs, dtype=float)
            mean = sum(c * _normal_moment(n) for n, c in enumerate(coeffs))

            def poly(x):
                return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), coeffs) - mean

            return poly
        if self.kind == "exp-centered":
            return lambda x: np.exp(np.asarray(x, dtype=float) / 2.0) - math.exp(0.125)
        if self.kind == "sign":
            return lambda x: np.sign(x)
        if self.kind == "abs-centered":
            return lambda x: np.abs(x) - math.sqrt(2.0 / math.pi)
        if self.kind == "hermite-coeffs":
            coeffs = dict(self.hermite_coeffs)

            return lambda x: hermite_series(coeffs, x)
        raise ConfigError("g.kind", f"unknown transform kind {self.kind!r}")

    def expansion(self, qmax: int = DEFAULT_QMAX, quad_order: int = DEFAULT_QUAD_ORDER) -> HermiteExpansion:
        """Hermite expansion; exact (no quadrature) where the menu allows it."""
        if self.kind == "hermite":
            return expansion_from_coeffs({self.q: float(math.factorial(self.q))}, qmax=qmax)
        if self.kind == "hermite-coeffs":
            return expansion_from_coeffs(dict(self.hermite_coeffs), qmax=qmax)
        return expand(self.centered_callable(), qmax=qmax, quad_order=quad_order)


def parse_g_spec(obj, path: str = "g") -> GSpec:
    """Accept 'hermite:3'-style shorthand or a {'kind': ...} mapping."""
    if isinstance(obj, str):
        if obj.startswith("hermite:"):
            return GSpec("hermite", q=int(obj.split(":", 1)[1]))
        if obj in ("exp-centered", "sign", "abs-centered"):
            return GSpec(obj)
        raise ConfigError(path, f"unknown transform shorthand {obj!r}")
    if not isinstance(obj, dict):
        raise ConfigError(path, "must be a string shorthand or an object")
    kind = obj.get("kind")
    if kind not in _BUILTIN_KINDS:
        raise ConfigError(f"{path}.kind", f"must be one of {_BUILTIN_KINDS}")
    if kind == "hermite":
        q = obj.get("q")
        if not isinstance(q, int) or q < 1:
            raise ConfigError(f"{path}.q", "hermite transform needs a positive integer rank")
        return GSpec("hermite", q=q)
    if kind == "polynomial":
        raw = obj.get("coeffs")
        if not isinstance(raw, (list, tuple)) or not raw:
            raise ConfigError(f"{path}.coeffs", "polynomial needs a coefficient list (a0, a1, ...)")
        try:
            coeffs = tuple(float(Fraction(str(c))) for c in raw)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{path}.coeffs", f"unparsable coefficient: {exc}") from None
        return GSpec("polynomial", poly_coeffs=coeffs)
    if kind == "hermite-coeffs":
        raw = obj.get("coeffs")
        if not isinstance(raw, dict) or not raw:
            raise ConfigError(f"{path}.coeffs", "hermite-coeffs needs a {rank: value} map")
        try:
            items = tuple(sorted((int(k), float(Fraction(str(v)))) for k, v in raw.items()))
        except ValueError as exc:
            raise ConfigError(f"{path}.coeffs", f"unparsable entry: {exc}") from None
        if any(q < 1 for q, _ in items):
            raise ConfigError(f"{path}.coeffs", "ranks must be >= 1")
        return GSpec("hermite-coeffs", hermite_coeffs=items)
    return GSpec(kind)


def parse_model(obj, path: str = "model") -> SpectralModel:
    if not isinstance(obj, dict):
        raise ConfigError(path, "must be an object")
    try:
        d = float(obj["d"])
    except (KeyError, TypeError, ValueError):
        raise ConfigError(f"{path}.d", "memory parameter d (real in (0, 1/2)) is required") from None
    K = obj.get("K", 0)
    if not isinstance(K, int) or K < 0:
        raise ConfigError(f"{path}.K", "integration order must be a nonnegative integer")
    sr_obj = obj.get("short_range", {"kind": "constant", "value": 1.0 / (2.0 * math.pi)})
    kind = sr_obj.get("kind", "constant")
    try:
        if kind == "constant":
            sr = ShortRangeSpec("constant", float(sr_obj.get("value", 1.0 / (2.0 * math.pi))))
        elif kind == "ma":
            sr = ShortRangeSpec(
                "ma",
                float(sr_obj.get("scale", 1.0 / (2.0 * math.pi))),
                tuple(float(c) for c in sr_obj.get("coeffs", (1.0,))),
            )
        else:
            raise ConfigError(f"{path}.short_range.kind", f"unknown kind {kind!r}")
        beta = float(obj.get("beta", 2.0))
        try:
            params = MemoryParams(d, K)
        except ValueError as exc:
            raise ConfigError(f"{path}.d", str(exc)) from None
        return SpectralModel(params, sr, beta)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}.short_range", str(exc)) from None


_MODES = ("simulate", "analyze", "estimate", "test", "mc-experiment", "nu-c")


@dataclass
class ExperimentConfig:
    """Validated experiment description (see README for the JSON schema)."""

    mode: str
    model: Optional[SpectralModel] = None
    g: Optional[GSpec] = None
    bank_family: str = "db2"
    bank_jmax: int = 10
    n: Optional[int] = None
    j0: Optional[int] = None
    p: Optional[int] = None
    replicates: int = 1
    seed: int = 0
    out_dir: str = "."
    alpha: Optional[float] = None
    d0_star: Optional[float] = None
    k_bar: int = 0
    input_csv: Optional[str] = None
    schedule: list = field(default_factory=list)
    preset: Optional[str] = None
    d_values: list = field(default_factory=list)
    enforce_preconditions: Optional[dict] = None
    workers: int = 1
    quantile_reps: int = 10_000
    quantile_n_internal: int = 2**14
    raw: dict = field(default_factory=dict)


def _require(cfg: dict, key: str, mode: str):
    if cfg.get(key) is None:
        raise ConfigError(key, f"required for mode {mode!r}")


def parse_config(obj: dict) -> ExperimentConfig:
    if not isinstance(obj, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    mode = obj.get("mode")
    if mode not in _MODES:
        raise ConfigError("mode", f"must be one of {_MODES}")

    model = parse_model(obj["model"]) if obj.get("model") is not None else None
    g = parse_g_spec(obj["g"]) if obj.get("g") is not None else None

    bank_obj = obj.get("bank", {})
    family = bank_obj.get("family", "db2")
    jmax = bank_obj.get("jmax", 10)
    if not isinstance(jmax, int) or jmax < 1:
        raise ConfigError("bank.jmax", "must be a positive integer")

    cfg = ExperimentConfig(
        mode=mode, model=model, g=g, bank_family=family, bank_jmax=jmax,
        n=obj.get("n"), j0=obj.get("j"), p=obj.get("p"),
        replicates=obj.get("replicates", 1), seed=obj.get("seed", 0),
        out_dir=obj.get("out", "."), alpha=obj.get("alpha"),
        d0_star=obj.get("d0_star"), k_bar=obj.get("k_bar", 0),
        input_csv=obj.get("input_csv"), schedule=obj.get("schedule", []),
        preset=obj.get("preset"), d_values=obj.get("d_values", []),
        enforce_preconditions=obj.get("enforce_preconditions"),
        workers=obj.get("workers", 1),
        quantile_reps=obj.get("quantile_reps", 10_000),
        quantile_n_internal=obj.get("quantile_n_internal", 2**14),
        raw=obj,
    )

    if not isinstance(cfg.seed, int) or cfg.seed < 0 or cfg.seed > 2**64 - 1:
        raise ConfigError("seed", "must be an unsigned 64-bit integer")
    if mode == "nu-c":
        if g is None:
            raise ConfigError("g", "required for mode 'nu-c'")
        if not cfg.d_values and model is None:
            raise ConfigError("d_values", "nu-c needs d_values or a model with d")
    else:
        _require(obj, "model", mode)
        try:
            check_off_boundary(model.d)
        except ValueError as exc:
            raise ConfigError("model.d", str(exc)) from None
    if mode == "simulate":
        _require(obj, "n", mode)
    if mode in ("analyze", "estimate", "test"):
        if cfg.input_csv is None and cfg.n is None:
            raise ConfigError("input_csv", f"mode {mode!r} needs input_csv or n (to simulate)")
        _require(obj, "j", mode)
        _require(obj, "p", mode)
    if mode == "test":
        _require(obj, "d0_star", mode)
        _require(obj, "alpha", mode)
        if g is None:
            raise ConfigError("g", "the test requires a known transform")
        if not (0.0 < cfg.alpha <= 1.0):
            raise ConfigError("alpha", "must lie in (0, 1]")
    if mode == "mc-experiment":
        _require(obj, "n", mode)
        _require(obj, "j", mode)
        _require(obj, "p", mode)
        if g is None:
            raise ConfigError("g", "required for mode 'mc-experiment'")
        if cfg.preset not in (None, "slope", "large-scale", "small-scale"):
            raise ConfigError("preset", "must be one of slope, large-scale, small-scale")
    if cfg.n is not None and (not isinstance(cfg.n, int) or cfg.n < 64):
        raise ConfigError("n", "sample length must be an integer >= 64")
    if cfg.input_csv is not None and mode in ("analyze", "estimate", "test"):
        import os

        if not os.path.exists(cfg.input_csv):
            raise ConfigError("input_csv", f"file not found: {cfg.input_csv}")
    if cfg.workers < 1:
        raise ConfigError("workers", "must be >= 1")
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("<config>", f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("<config>", f"invalid JSON: {exc}") from None
    return parse_config(obj)


def ingest(csv_path) -> tuple[np.ndarray, dict]:
    """Load a single-column numeric CSV; returns (series, provenance).

    A single non-numeric header row is skipped; any other unparsable or
    non-finite row raises with its 1-based row number.  At least 64 rows
    of data are required.
    """
    values = []
    hasher = hashlib.sha256()
    with open(csv_path, "rb") as fh:
        raw = fh.read()
    hasher.update(raw)
    lines = raw.decode("utf-8").splitlines()
    start = 0
    if lines:
        try:
            float(lines[0].split(",")[0])
        except ValueError:
            start = 1  # header row
    for i, line in enumerate(lines[start:], start=start + 1):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 1:
            raise ConfigError("input_csv", f"row {i}: expected a single column, got {len(fields)}")
        try:
            v = float(fields[0])
        except ValueError:
            raise ConfigError("input_csv", f"row {i}: cannot parse {fields[0]!r}") from None
        if not math.isfinite(v):
            raise ConfigError("input_csv", f"row {i}: non-finite value {fields[0]!r}")
        values.append(v)
    if len(values) < 64:
        raise ConfigError("input_csv", f"need at least 64 rows, found {len(values)}")
    provenance = {
        "path": str(csv_path),
        "sha256": hasher.hexdigest(),
        "rows": len(values),
        "header_skipped": bool(start),
    }
    return np.asarray(values), provenance
