"""Estimators for the low-SNR on-off machinery and the typical-set check.

Stochastic estimators return an :class:`EstimateReport` whose standard error
is the sample standard deviation of the per-trial values over ``sqrt(trials)``.
Trials run in fixed-size chunks with seeds derived from the master seed, so
results are reproducible and independent of ``workers``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .bounds import fb_upper, lowsnr_slope_terms, unit_cost
from .channel import NoiseModel, interference
from .errors import ConfigInconsistent, DimensionMismatch, InvalidParams, SingularCovariance
from .profiles import HeatProfile, alpha_subsampled, alpha_sum
from .seeding import DEFAULT_CHUNK, derive_seed, run_chunked

__all__ = [
    "EstimateReport",
    "OnOffConfig",
    "gaussian_kl",
    "onoff_covariances",
    "mixture_kl_mc",
    "onoff_mi",
    "mi_lower_onoff",
    "slope_estimate",
    "ConcentrationReport",
    "typical_means",
    "concentration_check",
]


@dataclass
class EstimateReport:
    estimate: float
    stderr: float
    trials: int
    seed: int
    config: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    @classmethod
    def from_samples(cls, values: np.ndarray, seed: int, config: dict, **extras) -> "EstimateReport":
        values = np.asarray(values, dtype=float)
        n = values.size
        se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf
        return cls(float(values.mean()), se, n, seed, dict(config), extras)


@dataclass(frozen=True)
class OnOffConfig:
    """Blockwise on-off input: each length-``L`` block is ``(xi, 0, ..., 0)``
    with probability ``delta`` and all-zero otherwise."""

    xi: float
    delta: float
    L: int
    sigma2: float
    profile: HeatProfile

    def __post_init__(self):
        if not 0 < self.delta <= 1:
            raise InvalidParams(f"delta must lie in (0, 1], got {self.delta}")
        if self.L < 1 or not self.sigma2 > 0:
            raise InvalidParams("need L >= 1 and sigma2 > 0")

    @property
    def xi2_over_sigma2(self) -> float:
        return self.xi**2 / self.sigma2

    @classmethod
    def from_snr(cls, profile, sigma2, L, xi2_over_sigma2, snr) -> "OnOffConfig":
        """Pick ``delta`` so that ``(xi**2/sigma2) delta = L snr``."""
        delta = L * snr / xi2_over_sigma2
        if not 0 < delta <= 1:
            raise ConfigInconsistent(
                f"delta = L*snr/(xi^2/sigma2) = {delta:g} is outside (0, 1]"
            )
        return cls(math.sqrt(xi2_over_sigma2 * sigma2), delta, L, sigma2, profile)


# -- relative entropies -----------------------------------------------------


def _diag(K, name) -> np.ndarray:
    K = np.asarray(K, dtype=float)
    if K.ndim == 2:
        if K.shape[0] != K.shape[1]:
            raise DimensionMismatch(f"{name} is not square")
        d = np.diag(K).copy()
        if np.any(K - np.diag(d)):
            raise InvalidParams(f"{name} must be diagonal")
        K = d
    if K.ndim != 1:
        raise DimensionMismatch(f"{name} must be a vector of variances or a diagonal matrix")
    if np.any(~(K > 0)) or np.any(~np.isfinite(K)):
        raise SingularCovariance(f"{name} has a nonpositive variance")
    return K


def gaussian_kl(mu1, K1, mu2, K2) -> float:
    """``D(N(mu1, K1) || N(mu2, K2))`` for diagonal covariances.

    ``K1``/``K2`` may be given as variance vectors or diagonal matrices.
    """
    mu1 = np.atleast_1d(np.asarray(mu1, dtype=float))
    mu2 = np.atleast_1d(np.asarray(mu2, dtype=float))
    k1, k2 = _diag(K1, "K1"), _diag(K2, "K2")
    if not (mu1.shape == mu2.shape == k1.shape == k2.shape):
        raise DimensionMismatch(
            f"shapes differ: mu1 {mu1.shape}, K1 {k1.shape}, mu2 {mu2.shape}, K2 {k2.shape}"
        )
    r = k1 / k2
    # r - 1 - log r computed without cancellation for r near 1
    per = (r - 1.0) - np.log1p(r - 1.0) + (mu1 - mu2) ** 2 / k2
    return float(0.5 * np.sum(per))


def onoff_covariances(cfg: OnOffConfig, past=None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(mean1, var1, var0)`` of the on and off block output laws.

    ``past`` lists on-symbol amplitudes of earlier blocks, most recent first
    (block ``-1``, ``-2``, ...); each sits at the first position of its block.
    With no past, ``var1 = (s2, s2 + a_1 xi^2, ..., s2 + a_{L-1} xi^2)`` and
    ``var0 = s2``.
    """
    L = cfg.L
    base = np.full(L, cfg.sigma2)
    if past is not None:
        past = np.asarray(past, dtype=float)
        for j, s in enumerate(past, start=1):
            if s != 0:
                base += cfg.profile.alpha(j * L + np.arange(L)) * s * s
    a = np.concatenate([[0.0], cfg.profile.coefficients(L - 1)])
    mean1 = np.zeros(L)
    mean1[0] = cfg.xi
    return mean1, base + a * cfg.xi**2, base


def mixture_kl_mc(
    delta: float,
    xi: float,
    L: int,
    profile: HeatProfile,
    sigma2: float,
    trials: int,
    seed: int,
    past=None,
    workers: int = 1,
    chunk: int = DEFAULT_CHUNK,
) -> EstimateReport:
    """Monte Carlo ``D(delta P1 + (1 - delta) P0 || P0)`` for the on-off block laws.

    Each trial draws one sample from each component and scores
    ``delta log t(Y1) + (1 - delta) log t(Y0)`` with
    ``t = 1 - delta + delta dP1/dP0``.  When ``dP1/dP0`` has finite variance
    under ``P0`` the zero-mean control variate ``-(1 - delta)(t(Y0) - 1)`` is
    added.
    """
    cfg = OnOffConfig(xi, delta, L, sigma2, profile)
    mean1, v1, v0 = onoff_covariances(cfg, past)
    sd1, sd0 = np.sqrt(v1), np.sqrt(v0)
    log_det = 0.5 * float(np.sum(np.log(v1 / v0)))
    log_d, log_1md = math.log(delta), (math.log1p(-delta) if delta < 1 else -math.inf)
    use_cv = bool(np.all(v1 < 2.0 * v0)) and delta < 1

    def log_ratio(y):
        return -log_det - 0.5 * np.sum((y - mean1) ** 2 / v1, axis=-1) + 0.5 * np.sum(y * y / v0, axis=-1)

    def log_t(y):
        return np.logaddexp(log_1md, log_d + log_ratio(y))

    def chunk_fn(rng, count):
        y1 = mean1 + sd1 * rng.standard_normal((count, L))
        y0 = sd0 * rng.standard_normal((count, L))
        lt0 = log_t(y0)
        v = delta * log_t(y1)
        if delta < 1:
            v = v + (1.0 - delta) * lt0
        if use_cv:
            v = v - (1.0 - delta) * np.expm1(lt0)
        return v

    vals = run_chunked(chunk_fn, trials, seed, "mixture_kl", chunk, workers)
    conf = {"delta": delta, "xi": xi, "L": L, "sigma2": sigma2, "profile": profile.label()}
    return EstimateReport.from_samples(vals, seed, conf, control_variate=use_cv)


# -- memoryless on-off rate -------------------------------------------------


def onoff_mi(xi: float, delta: float, sigma2: float, epsabs: float = 1e-12) -> float:
    """Mutual information of on-off keying ``{0: 1-delta, xi: delta}`` over AWGN.

    Written as ``delta D(p1 || f) + (1 - delta) D(p0 || f)`` with ``f`` the
    output mixture, which equals ``h(Y) - 0.5 log(2 pi e sigma2)`` but avoids
    the cancellation.  Each term is integrated adaptively over 12 noise
    standard deviations around its component mean.
    """
    if not sigma2 > 0:
        raise InvalidParams("sigma2 must be positive")
    if not 0 <= delta <= 1:
        raise InvalidParams("delta must lie in [0, 1]")
    if xi == 0 or delta == 0 or delta == 1:
        return 0.0
    s = math.sqrt(sigma2)
    log_d, log_1md = math.log(delta), math.log1p(-delta)

    def log_f(y):
        return np.logaddexp(log_1md - 0.5 * (y / s) ** 2, log_d - 0.5 * ((y - xi) / s) ** 2)

    def term(mu, log_w):
        def integrand(y):
            q = -0.5 * ((y - mu) / s) ** 2
            return math.exp(q) / (s * math.sqrt(2 * math.pi)) * (q - log_f(y))

        val, _ = integrate.quad(
            integrand, mu - 12 * s, mu + 12 * s, epsabs=epsabs, epsrel=1e-12, limit=200
        )
        return val

    return max(0.0, delta * term(xi, log_d) + (1 - delta) * term(0.0, log_1md))


# -- block on-off lower bound ------------------------------------------------


def mi_lower_onoff(
    cfg: OnOffConfig,
    snr: float,
    trials: int,
    seed: int,
    workers: int = 1,
    alpha: float | None = None,
) -> EstimateReport:
    """Lower bound on the mutual information rate of the block on-off input.

    ``term1 - term2 - term3`` where
    ``term1 = 0.5 snr sum_{i=1}^{L} alpha_{i-1} / (1 + alpha L snr)``,
    ``term2 = 0.5 snr sum_{i=2}^{L} log(1 + alpha_{i-1} x) / x`` with
    ``x = xi**2/sigma2``, and ``term3`` is the zero-past mixture divergence
    over ``L``.  Negative values are clamped to 0 (``extras["clamped"]``).

    Raises:
        ConfigInconsistent: ``x delta`` differs from ``L snr`` by more than
            ``1e-12`` (relative).
    """
    x = cfg.xi2_over_sigma2
    if abs(x * cfg.delta - cfg.L * snr) > 1e-12 * max(1.0, cfg.L * snr):
        raise ConfigInconsistent(
            f"power constraint violated: (xi^2/sigma2)*delta = {x * cfg.delta:.15g} != L*snr = {cfg.L * snr:.15g}"
        )
    if alpha is None:
        alpha = alpha_sum(cfg.profile)
    gain, penalty = lowsnr_slope_terms(cfg.profile, cfg.L, x)
    t1 = snr * gain / (1.0 + alpha * cfg.L * snr)
    t2 = snr * penalty
    kl = mixture_kl_mc(cfg.delta, cfg.xi, cfg.L, cfg.profile, cfg.sigma2, trials, seed, workers=workers)
    t3 = kl.estimate / cfg.L
    raw = t1 - t2 - t3
    conf = {
        "xi": cfg.xi,
        "delta": cfg.delta,
        "L": cfg.L,
        "sigma2": cfg.sigma2,
        "snr": snr,
        "profile": cfg.profile.label(),
    }
    return EstimateReport(
        max(raw, 0.0),
        kl.stderr / cfg.L,
        trials,
        seed,
        conf,
        {"raw": raw, "clamped": raw < 0, "term1": t1, "term2": t2, "term3": t3, "alpha": alpha},
    )


def slope_estimate(
    profile: HeatProfile,
    sigma2: float,
    snr_grid,
    L: int,
    xi2_over_sigma2: float,
    trials: int,
    seed: int,
    workers: int = 1,
) -> EstimateReport:
    """Capacity-per-unit-cost lower estimate: max over the grid of bound/snr.

    ``extras`` holds the per-point reports and the brackets ``unit_cost`` and
    ``fb_upper(snr)/snr``.
    """
    grid = [float(s) for s in snr_grid]
    if not grid or any(not 0 < s <= 0.1 for s in grid):
        raise InvalidParams("snr grid must lie in (0, 0.1]")
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise InvalidParams("snr grid must be strictly decreasing")
    alpha = alpha_sum(profile)
    points = []
    for j, snr in enumerate(grid):
        cfg = OnOffConfig.from_snr(profile, sigma2, L, xi2_over_sigma2, snr)
        rep = mi_lower_onoff(cfg, snr, trials, derive_seed(seed, "slope", j), workers, alpha=alpha)
        points.append(rep)
    ratios = [p.estimate / s for p, s in zip(points, grid)]
    best = int(np.argmax(ratios))
    gain, penalty = lowsnr_slope_terms(profile, L, xi2_over_sigma2)
    conf = {"profile": profile.label(), "sigma2": sigma2, "L": L, "xi2_over_sigma2": xi2_over_sigma2, "snr_grid": grid}
    return EstimateReport(
        ratios[best],
        points[best].stderr / grid[best],
        trials,
        seed,
        conf,
        {
            "unit_cost": unit_cost(alpha),
            "fb_upper_over_snr": [fb_upper(s, alpha) / s for s in grid],
            "best_snr": grid[best],
            "points": points,
            "ratios": ratios,
            "gain_minus_penalty": gain - penalty,
        },
    )


# -- typical-set concentration ---------------------------------------------


def typical_means(profile: HeatProfile, P: float, sigma2: float, L: int, n: int) -> tuple[float, float]:
    """Exact finite-``n`` means of ``|Y|^2/m`` and ``|Z|^2/m`` on the grid, ``m = n // L``:
    ``sigma2 + P + (P/m) sum_{k=1}^{m-1} sum_{l=1}^{k} alpha_{lL}`` (and without ``P``)."""
    m = n // L
    if m < 1:
        raise InvalidParams("need n >= L")
    ell = np.arange(1, m)
    extra = P / m * float(np.sum((m - ell) * profile.alpha(ell * L))) if m > 1 else 0.0
    return sigma2 + P + extra, sigma2 + extra


@dataclass
class ConcentrationReport:
    empirical_prob: float
    stderr: float
    exact_mean_y: float
    exact_mean_z: float
    limit_mean_y: float
    limit_mean_z: float
    sample_mean_y: float
    sample_mean_y_stderr: float
    sample_mean_z: float
    sample_mean_z_stderr: float
    n: int
    m: int
    eps: float
    trials: int
    seed: int


def _grid_noise(noise: NoiseModel, L: int) -> NoiseModel:
    # noise sampled every L steps of an AR(1) process is AR(1) with a**L
    return noise if noise.kind == "iid" else NoiseModel.ar1(noise.a**L)


def concentration_check(
    profile: HeatProfile,
    P: float,
    sigma2: float,
    L: int,
    n: int,
    eps: float,
    trials: int,
    seed: int,
    noise: NoiseModel | None = None,
    workers: int = 1,
) -> ConcentrationReport:
    """Fraction of trials whose grid energies land within ``eps`` of their
    asymptotic means ``sigma2 + P + alpha^(L) P`` and ``sigma2 + alpha^(L) P``.

    Inputs are Gaussian(0, P) on the grid ``1, L+1, ...`` and zero elsewhere,
    so only grid outputs are simulated: on the grid the channel acts with
    coefficients ``alpha_{jL}``.
    """
    if n < L or not eps > 0:
        raise InvalidParams("need n >= L and eps > 0")
    m = n // L
    grid_prof = HeatProfile.explicit(profile.alpha(np.arange(1, m) * L)) if m > 1 else HeatProfile.zero()
    if profile.is_geometric:
        r = profile.rho**L
        grid_prof = HeatProfile.geometric(r, profile.scale) if r > 0 else HeatProfile.zero()
    gnoise = _grid_noise(noise or NoiseModel.iid(), L)
    aL = alpha_subsampled(profile, L)
    lim_y, lim_z = sigma2 + P + aL * P, sigma2 + aL * P
    rows = max(1, min(DEFAULT_CHUNK, (1 << 22) // m))

    def chunk_fn(rng, count):
        x = math.sqrt(P) * rng.standard_normal((count, m))
        theta = np.sqrt(sigma2 + interference(grid_prof, x * x))
        z = theta * gnoise.sample(rng, (count, m))
        ey = np.sum((x + z) ** 2, axis=1) / m
        ez = np.sum(z * z, axis=1) / m
        return np.stack([ey, ez], axis=1)

    e = run_chunked(chunk_fn, trials, seed, "concentration", rows, workers)
    inside = (np.abs(e[:, 0] - lim_y) < eps) & (np.abs(e[:, 1] - lim_z) < eps)
    ex_y, ex_z = typical_means(profile, P, sigma2, L, n)
    t = len(e)
    se = lambda v: float(v.std(ddof=1) / math.sqrt(t)) if t > 1 else math.inf  # noqa: E731
    return ConcentrationReport(
        float(inside.mean()),
        se(inside.astype(float)),
        ex_y,
        ex_z,
        lim_y,
        lim_z,
        float(e[:, 0].mean()),
        se(e[:, 0]),
        float(e[:, 1].mean()),
        se(e[:, 1]),
        n,
        m,
        eps,
        t,
        seed,
    )
