"""Dyadic wavelet filter banks, wavelet coefficients, and scalograms.

Filters come from compactly supported orthonormal (Daubechies-type) mirror
pairs with M vanishing moments, extended to coarser scales by the pyramidal
cascade: the scale-(j+1) filter is the twice-upsampled scale-j filter
convolved with the scaling filter.  This is exactly the family whose
transfer functions, rescaled by gamma_j^(1/2), converge to a limit shape;
the bank records numeric diagnostics for finite support, the smoothness
envelope, and that convergence.

The deliberately narrow surface computes W_{j,k} = sum_t g_j(2^j k - t) Y_t
with interior taps only, and per-scale averages of squared coefficients.
"""

import csv
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.signal import fftconvolve

from .errors import FilterValidationError, ScaleTooCoarseError

_MOMENT_TOL = 1e-8


def daubechies_scaling(M: int) -> np.ndarray:
    """Orthonormal scaling filter with M vanishing moments (length 2M).

    Built by spectral factorisation: the roots of the moment polynomial
    P(y) = sum_{k<M} C(M-1+k, k) y^k are mapped to the z-plane through
    y = (2 - z - 1/z)/4 and the minimum-phase half is kept alongside the
    (1+z)^M binomial factor.  Normalised so the taps sum to sqrt(2).
    """
    if M < 1:
        raise ValueError("need at least one vanishing moment")
    if M == 1:
        return np.array([1.0, 1.0]) / math.sqrt(2.0)
    pc = [math.comb(M - 1 + k, k) for k in range(M)]
    yroots = np.roots(pc[::-1])
    poly = np.poly1d([1.0])
    for y in yroots:
        b = 2.0 - 4.0 * y
        disc = np.sqrt(complex(b * b - 4.0))
        z1, z2 = (b + disc) / 2.0, (b - disc) / 2.0
        z = z1 if abs(z1) < 1.0 else z2
        poly = poly * np.poly1d([1.0, -z])
    poly = poly * np.poly1d([1.0, 1.0]) ** M
    h = np.real(poly.coeffs)
    return h * (math.sqrt(2.0) / h.sum())


def mirror_highpass(h: np.ndarray) -> np.ndarray:
    """Quadrature mirror of the scaling filter: g[n] = (-1)^n h[L-1-n]."""
    n = np.arange(len(h))
    return ((-1.0) ** n) * h[::-1]


@dataclass
class WValidation:
    """Numeric diagnostics for the bank's admissibility assumptions."""

    support_bound: float  # measured A with supp(g_j) within gamma_j * [-A, A]
    max_moment_residual: float  # worst normalised moment below order M
    envelope_alpha: float  # fitted decay exponent (> 1 required)
    envelope_constant: float  # fitted envelope constant across scales
    envelope_table: dict = field(default_factory=dict)
    limit_gaps: list = field(default_factory=list)  # sup-norm gaps across last scales
    notes: str = ""


@dataclass
class FilterBank:
    """Immutable family of per-scale filters g_j, j = 1..jmax, gamma_j = 2^j."""

    family: str
    M: int
    jmax: int
    scaling: np.ndarray
    highpass: np.ndarray
    filters: list  # filters[j-1] holds the taps of g_j, support starting at 0
    T: int  # support length of the base pair (2M)
    validation: Optional[WValidation] = None

    def gamma(self, j: int) -> int:
        return 2**j

    def taps(self, j: int) -> np.ndarray:
        if not (1 <= j <= self.jmax):
            raise ScaleTooCoarseError(f"scale {j} outside built range 1..{self.jmax}")
        return self.filters[j - 1]

    def transfer(self, j: int, lams) -> np.ndarray:
        """DFT of g_j at the given frequencies."""
        taps = self.taps(j)
        lams = np.atleast_1d(np.asarray(lams, dtype=float))
        t = np.arange(len(taps))
        out = np.empty(len(lams), dtype=complex)
        block = max(1, 2**22 // max(len(taps), 1))
        for s in range(0, len(lams), block):
            chunk = lams[s : s + block]
            out[s : s + block] = np.exp(-1j * np.outer(chunk, t)) @ taps
        return out

    def asymptotic_transfer(self, lams, j: Optional[int] = None) -> np.ndarray:
        """Limit shape estimate gamma_j^(-1/2) g_j-hat(gamma_j^(-1) lam) at the
        deepest built scale (or at j if given)."""
        jj = self.jmax if j is None else j
        g = float(self.gamma(jj))
        return self.transfer(jj, np.asarray(lams, dtype=float) / g) / math.sqrt(g)

    def describe(self) -> dict:
        return {
            "family": self.family,
            "vanishing_moments": self.M,
            "jmax": self.jmax,
            "base_support": self.T,
            "filter_lengths": [len(f) for f in self.filters],
            "filter_l2_norms": [float(np.linalg.norm(f)) for f in self.filters],
            "support_bound": None if self.validation is None else self.validation.support_bound,
        }

    def save_description(self, path):
        with open(path, "w") as fh:
            json.dump(self.describe(), fh, indent=2, sort_keys=True)


def _cascade(g1: np.ndarray, h: np.ndarray, jmax: int) -> list:
    filts = [np.asarray(g1, dtype=float)]
    for _ in range(1, jmax):
        prev = filts[-1]
        up = np.zeros(2 * len(prev) - 1)
        up[::2] = prev
        filts.append(np.convolve(up, h))
    return filts


def _parse_family(family: str) -> int:
    fam = family.lower().strip()
    if fam in ("haar", "db1"):
        return 1
    if fam.startswith("db"):
        try:
            M = int(fam[2:])
        except ValueError:
            raise FilterValidationError(f"cannot parse family {family!r}") from None
        if M < 1:
            raise FilterValidationError("vanishing-moment order must be >= 1")
        return M
    raise FilterValidationError(f"unknown filter family {family!r}")


def _validate_bank(filters, M, jmax) -> WValidation:
    # finite support: measured A (always finite for compactly supported taps)
    A = max(len(filters[j - 1]) / 2.0**j for j in range(1, jmax + 1))

    # vanishing moments up to order M-1, normalised by the moment scale
    worst = 0.0
    for j in range(1, jmax + 1):
        taps = filters[j - 1]
        t = np.arange(len(taps), dtype=float)
        for m in range(M):
            num = abs(float(np.dot(t**m, taps)))
            den = float(np.dot(t**m, np.abs(taps))) + 1.0
            worst = max(worst, num / den)
    if worst > _MOMENT_TOL:
        raise FilterValidationError(
            f"vanishing moments: normalised moment residual {worst:.2e} exceeds "
            f"{_MOMENT_TOL:.0e} (uniform-smoothness envelope cannot hold at order {M})"
        )

    # smoothness envelope |g_j-hat(lam)| <= C gamma^(1/2)|gamma lam|^M / (1+gamma|lam|)^(alpha+M)
    lam_grid = np.concatenate([
        np.geomspace(1e-4, 0.1, 120), np.linspace(0.1, math.pi, 240)
    ])
    js = list(range(1, jmax + 1))
    table = {}
    best_alpha, best_C = None, None
    for alpha in (3.0, 2.5, 2.0, 1.5, 1.25, 1.05):
        Cs = []
        for j in js:
            taps = filters[j - 1]
            t = np.arange(len(taps))
            tf = np.exp(-1j * np.outer(lam_grid, t)) @ taps
            gam = 2.0**j
            env = gam**0.5 * np.abs(gam * lam_grid) ** M / (1.0 + gam * lam_grid) ** (alpha + M)
            Cs.append(float(np.max(np.abs(tf) / env)))
        stable = Cs[-1] <= 1.5 * max(Cs[:-1] or Cs)
        table[alpha] = Cs
        if stable and best_alpha is None:
            best_alpha, best_C = alpha, max(Cs)
    if best_alpha is None:
        best_alpha, best_C = 1.05, max(table[1.05])
        warnings.warn("smoothness envelope constant grows across scales; recorded anyway")

    # locally uniform convergence of the rescaled transfer moduli
    gaps = []
    lam_w = np.linspace(-8.0 * math.pi, 8.0 * math.pi, 1024)
    prev = None
    for j in range(max(1, jmax - 3), jmax + 1):
        taps = filters[j - 1]
        gam = 2.0**j
        t = np.arange(len(taps))
        tf = np.exp(-1j * np.outer(lam_w / gam, t)) @ taps / math.sqrt(gam)
        cur = np.abs(tf)
        if prev is not None:
            gaps.append(float(np.max(np.abs(cur - prev))))
        prev = cur
    return WValidation(
        support_bound=A,
        max_moment_residual=worst,
        envelope_alpha=best_alpha,
        envelope_constant=best_C,
        envelope_table=table,
        limit_gaps=gaps,
        notes="phase of the limit shape not tracked; modulus convergence only",
    )


def build_bank(family: str = "db2", jmax: int = 10, validate: bool = True) -> FilterBank:
    """Construct the per-scale filters of a Daubechies-type family.

    Raises FilterValidationError naming the violated assumption when the
    structural checks fail.  Envelope and limit-shape diagnostics are
    advisory at build time; consumers that need a specific moment order
    check M themselves.
    """
    if jmax < 1:
        raise ValueError("jmax must be >= 1")
    M = _parse_family(family)
    h = daubechies_scaling(M)
    g1 = mirror_highpass(h)
    filters = _cascade(g1, h, jmax)
    validation = _validate_bank(filters, M, jmax) if validate else None
    return FilterBank(
        family=family.lower(), M=M, jmax=jmax, scaling=h, highpass=g1,
        filters=filters, T=2 * M, validation=validation,
    )


def n_coeffs(N: int, T: int, j: int) -> int:
    """Number of wavelet coefficients at scale j from N observations with a
    base support of length T: floor(2^-j (N - T + 1) - T + 1).

    Raises ScaleTooCoarseError when fewer than one coefficient remains.
    """
    if N < 1 or T < 1 or j < 0:
        raise ValueError("N, T must be positive and j >= 0")
    n = math.floor(2.0 ** (-j) * (N - T + 1) - T + 1)
    if n < 1:
        raise ScaleTooCoarseError(
            f"scale {j} leaves {n} coefficient(s) for N={N}, T={T}"
        )
    return n


def _interior_coeffs(series: np.ndarray, taps: np.ndarray, gamma: int) -> tuple[int, np.ndarray]:
    """All decimated filter outputs whose every tap hits observed data.

    Returns (k_min, values) with values[i] = W at location k_min + i on the
    absolute k-lattice: W_k = sum_t taps(gamma k - t) series_t.
    """
    N = len(series)
    L = len(taps)
    if L > N:
        raise ScaleTooCoarseError(f"filter length {L} exceeds series length {N}")
    conv = fftconvolve(series, taps, mode="valid")  # conv[i] = sum_r taps[r] y[i + L - 1 - r]... see below
    # np 'valid' convolution: conv[s] = sum_r taps[r] * series[s + (L-1) - r], s = 0..N-L
    # so conv[s] equals the filter output at absolute time s + L - 1
    k_min = math.ceil((L - 1) / gamma)
    first = k_min * gamma - (L - 1)
    vals = conv[first::gamma]
    return k_min, vals


def wavelet_coeffs(series, bank: FilterBank, j: int) -> np.ndarray:
    """The first n_j interior coefficients W_{j, k} at scale j (dyadic lattice).

    The k-range starts at the smallest interior location; no padding is ever
    applied, matching the interior-only coefficient count.
    """
    series = np.asarray(series, dtype=float)
    taps = bank.taps(j)
    N = len(series)
    if len(taps) > N // 4:
        raise ScaleTooCoarseError(
            f"scale {j} filter ({len(taps)} taps) too long for N={N} (cap N/4)"
        )
    n = n_coeffs(N, bank.T, j)
    _, vals = _interior_coeffs(series, taps, bank.gamma(j))
    if len(vals) < n:
        raise ScaleTooCoarseError(
            f"only {len(vals)} interior coefficients available at scale {j}, need {n}"
        )
    return vals[:n]


def filter_decimate(series, taps, gamma: int) -> np.ndarray:
    """General-decimation variant (non-dyadic gamma), interior taps only."""
    series = np.asarray(series, dtype=float)
    taps = np.asarray(taps, dtype=float)
    _, vals = _interior_coeffs(series, taps, int(gamma))
    return vals


@dataclass
class ScalogramSummary:
    """Per-scale second-moment summary of the wavelet coefficients."""

    j: int
    n: int
    sigma2: float
    k_start: int = 0
    coeffs: Optional[np.ndarray] = None
    centered: Optional[float] = None  # sigma2 minus a supplied theoretical mean


def scalogram(
    series,
    bank: FilterBank,
    j: int,
    keep_coeffs: bool = False,
    theoretical_mean: Optional[float] = None,
) -> ScalogramSummary:
    """Average of squared wavelet coefficients at scale j."""
    w = wavelet_coeffs(series, bank, j)
    s2 = float(np.mean(w * w))
    return ScalogramSummary(
        j=j,
        n=len(w),
        sigma2=s2,
        k_start=math.ceil((len(bank.taps(j)) - 1) / bank.gamma(j)),
        coeffs=w if keep_coeffs else None,
        centered=None if theoretical_mean is None else s2 - theoretical_mean,
    )


@dataclass
class MultiscaleScalogram:
    """Joint scalogram of the p scales j, j-1, ..., j-p+1 on a shared lattice.

    Entries are indexed by ell = 2^u + v (u = scale offset below j,
    v = sub-position): entry ell holds the coefficients W_{j-u, 2^u k + v}
    for k in the shared range, which coincide exactly with the scale-(j-u)
    coefficients at those locations.
    """

    j: int
    p: int
    count: int
    k_start: int
    entries: dict  # ell -> ScalogramSummary (with u, v derivable from ell)
    scale_sigma2: dict  # scale -> pooled average of squares across its entries

    def sigma2_at_offset(self, u: int) -> float:
        return self.scale_sigma2[self.j - u]


def multiscale_scalogram(series, bank: FilterBank, j: int, p: int, keep_coeffs: bool = False) -> MultiscaleScalogram:
    """Scalograms of the p scales at and directly below the coarsest scale j.

    All entries are sampled on the absolute coefficient lattice of scale j,
    so the identity W_{ell, j, k} = W_{j-u, 2^u k + v} holds exactly; counts
    at finer scales differ from their standalone values only through the
    shared-boundary convention.
    """
    series = np.asarray(series, dtype=float)
    if p < 1:
        raise ValueError("need at least one scale")
    if j - (p - 1) < 1:
        raise ScaleTooCoarseError(f"p={p} scales below j={j} fall under scale 1")
    n_shared = n_coeffs(len(series), bank.T, j)
    interiors = {}
    for u in range(p):
        k_min, vals = _interior_coeffs(series, bank.taps(j - u), bank.gamma(j - u))
        interiors[u] = (k_min, vals)
    k0 = interiors[0][0]
    # clip the shared range so every (u, v) entry stays interior
    kmax = k0 + n_shared - 1
    for u in range(p):
        k_min_u, vals_u = interiors[u]
        upper = (k_min_u + len(vals_u) - 1 - (2**u - 1)) // 2**u
        kmax = min(kmax, upper)
    count = kmax - k0 + 1
    if count < 1:
        raise ScaleTooCoarseError("shared interior range is empty")

    entries = {}
    scale_acc: dict[int, list] = {}
    ks = np.arange(k0, k0 + count)
    for u in range(p):
        k_min_u, vals_u = interiors[u]
        for v in range(2**u):
            ell = 2**u + v
            idx = (2**u) * ks + v - k_min_u
            w = vals_u[idx]
            entries[ell] = ScalogramSummary(
                j=j - u, n=count, sigma2=float(np.mean(w * w)), k_start=k0,
                coeffs=w if keep_coeffs else None,
            )
            scale_acc.setdefault(j - u, []).append(w)
    scale_sigma2 = {
        sc: float(np.mean(np.concatenate(ws) ** 2)) for sc, ws in scale_acc.items()
    }
    return MultiscaleScalogram(j=j, p=p, count=count, k_start=k0, entries=entries, scale_sigma2=scale_sigma2)


def dump_coeffs_csv(path, bank: FilterBank, series, scales) -> None:
    """Write (j, k, value) rows for the requested scales."""
    series = np.asarray(series, dtype=float)
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["j", "k", "value"])
        for j in scales:
            w = wavelet_coeffs(series, bank, j)
            k0 = math.ceil((len(bank.taps(j)) - 1) / bank.gamma(j))
            for i, v in enumerate(w):
                wr.writerow([j, k0 + i, f"{v:.17g}"])
