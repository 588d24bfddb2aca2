"""Random Gaussian grid codes, nearest-neighbour decoding and block error rates.

Codewords are nonzero only at the grid positions ``start, start+L, ...``
(1-based), with independent Gaussian(0, P) entries there.  The receiver keeps
only the grid outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy import stats

from .channel import NoiseModel, simulate
from .errors import BadMessage, InvalidParams, TooManyMessages
from .estimate import EstimateReport
from .profiles import HeatProfile
from .seeding import derive_seed, run_chunked

__all__ = [
    "Codebook",
    "build_codebook",
    "encode",
    "nn_decode",
    "grid_positions",
    "ncx2_logcdf",
    "ensemble_error_prob",
    "bler_sim",
    "MAX_MESSAGES",
]

MAX_MESSAGES = 2**20


def grid_positions(n: int, L: int, start: int = 1) -> np.ndarray:
    """0-based indices of the ``n // L`` grid positions."""
    if L < 1 or n < L:
        raise InvalidParams("need L >= 1 and n >= L")
    if not 1 <= start <= L:
        raise InvalidParams(f"grid start must lie in [1, L], got {start}")
    return start - 1 + L * np.arange(n // L)


def _num_messages(rate_nats: float, n: int, max_messages: int) -> int:
    if not rate_nats > 0:
        raise InvalidParams("rate must be positive")
    log_m = rate_nats * n
    if log_m > math.log(max_messages) + 1:
        raise TooManyMessages(f"|M| = exp({log_m:.4g}) exceeds the cap {max_messages}")
    M = round(math.exp(log_m))
    if M < 2:
        raise InvalidParams(f"rate {rate_nats} with n={n} gives fewer than 2 messages")
    if M > max_messages:
        raise TooManyMessages(f"|M| = {M} exceeds the cap {max_messages}")
    return M


@dataclass(frozen=True, eq=False)
class Codebook:
    """``num_messages`` codewords of length ``n``; ``grid[m-1]`` holds the
    grid entries of message ``m``."""

    num_messages: int
    n: int
    L: int
    P: float
    seed: int
    start: int
    grid: np.ndarray = field(repr=False)
    tie_rng: np.random.Generator = field(repr=False)

    @property
    def rate(self) -> float:
        """Realized rate ``log|M| / n`` in nats."""
        return math.log(self.num_messages) / self.n

    @property
    def positions(self) -> np.ndarray:
        return grid_positions(self.n, self.L, self.start)


def _make_codebook(M, n, L, P, seed, start, rng) -> Codebook:
    m = n // L
    grid = math.sqrt(P) * rng.standard_normal((M, m))
    grid.setflags(write=False)
    tie = np.random.default_rng(derive_seed(seed, "tie", 0))
    return Codebook(M, n, L, float(P), seed, start, grid, tie)


def build_codebook(
    rate_nats: float,
    n: int,
    L: int,
    P: float,
    seed: int,
    start: int = 1,
    max_messages: int = MAX_MESSAGES,
) -> Codebook:
    """Random grid codebook with ``round(exp(rate_nats * n))`` messages.

    Raises:
        TooManyMessages: the message count exceeds ``max_messages``.
    """
    if not P > 0:
        raise InvalidParams("P must be positive")
    grid_positions(n, L, start)
    M = _num_messages(rate_nats, n, max_messages)
    return _make_codebook(M, n, L, P, seed, start, np.random.default_rng(derive_seed(seed, "codebook", 0)))


def encode(cb: Codebook, m: int) -> np.ndarray:
    """Length-``n`` input sequence of message ``m`` (1-based)."""
    if not (isinstance(m, (int, np.integer)) and 1 <= m <= cb.num_messages):
        raise BadMessage(f"message index {m!r} outside 1..{cb.num_messages}")
    x = np.zeros(cb.n)
    x[cb.positions] = cb.grid[m - 1]
    return x


def nn_decode(cb: Codebook, y_grid, rng: np.random.Generator | None = None) -> int:
    """Message (1-based) whose grid codeword is closest to ``y_grid``.

    Ties are broken uniformly at random with ``rng`` (the codebook's own
    tie-breaking generator by default).
    """
    y = np.asarray(y_grid, dtype=float)
    if y.shape != (cb.grid.shape[1],):
        raise InvalidParams(f"expected {cb.grid.shape[1]} grid samples, got shape {y.shape}")
    d = np.sum((cb.grid - y) ** 2, axis=1)
    best = np.flatnonzero(d == d.min())
    if best.size == 1:
        return int(best[0]) + 1
    return int((rng or cb.tie_rng).choice(best)) + 1


# -- random-coding ensemble -------------------------------------------------


def ncx2_logcdf(x: float, df: float, nc: float, dps: int = 40) -> float:
    """``log P(chi2'(df, nc) <= x)`` from the Poisson mixture, in high precision."""
    with mpmath.workdps(dps):
        x, lam = mpmath.mpf(x) / 2, mpmath.mpf(nc) / 2
        total = mpmath.mpf(0)
        j = 0
        jmax = int(float(lam) + 40 * math.sqrt(float(lam) + 1) + 200)
        while j <= jmax:
            w = mpmath.exp(-lam + j * mpmath.log(lam) - mpmath.loggamma(j + 1)) if lam > 0 else (1 if j == 0 else 0)
            term = w * mpmath.gammainc(df / 2 + j, 0, x, regularized=True)
            total += term
            if j > lam and term < total * mpmath.mpf(10) ** (-dps + 5):
                break
            j += 1
        return float(mpmath.log(total)) if total > 0 else -math.inf


def ensemble_error_prob(y_grid, z_grid, P: float, M: int) -> float:
    """Error probability of nearest-neighbour decoding averaged over the
    competing codewords, given the received grid vector and the noise.

    A competitor ``x' ~ N(0, P I)`` wins when ``|y - x'|^2 <= |z|^2``;
    ``|y - x'|^2 / P`` is noncentral chi-square with ``m`` degrees of freedom
    and noncentrality ``|y|^2 / P``.  With ``M - 1`` independent competitors
    the error probability is ``1 - (1 - p)**(M-1)``.
    """
    m = len(y_grid)
    x = float(np.sum(np.square(z_grid))) / P
    nc = float(np.sum(np.square(y_grid))) / P
    p = float(stats.ncx2.cdf(x, m, nc))
    if p >= 1.0:
        return 1.0
    if p > 1e-250:
        return float(-math.expm1((M - 1) * math.log1p(-p)))
    logp = ncx2_logcdf(x, m, nc)
    s = logp + math.log(M - 1)
    return math.exp(s) if s < -30 else float(-math.expm1(-(M - 1) * math.exp(logp)))


def bler_sim(
    profile: HeatProfile,
    sigma2: float,
    P: float,
    L: int,
    n: int,
    rate_nats: float,
    trials: int,
    seed: int,
    *,
    method: str = "exhaustive",
    codebook: str = "fresh",
    start: int = 1,
    noise: NoiseModel | None = None,
    max_messages: int = MAX_MESSAGES,
    workers: int = 1,
) -> EstimateReport:
    """Block error rate of the random grid code with nearest-neighbour decoding.

    ``method="exhaustive"`` draws a codebook (fresh per trial, or one fixed
    codebook with ``codebook="fixed"``), sends a uniform message through the
    channel and decodes by full search.  ``method="ensemble"`` sends a random
    codeword and scores the exact conditional error probability over the
    competing codewords of a fresh codebook (:func:`ensemble_error_prob`);
    it handles message counts far beyond any searchable codebook.

    Codewords are sent as drawn; ``extras["power_violation_fraction"]`` is the
    fraction whose empirical power ``(1/n) sum x**2`` exceeds ``P``.
    """
    if method not in ("exhaustive", "ensemble"):
        raise InvalidParams(f"unknown method {method!r}")
    if codebook not in ("fresh", "fixed"):
        raise InvalidParams(f"unknown codebook mode {codebook!r}")
    if method == "ensemble" and codebook == "fixed":
        raise InvalidParams("the ensemble method averages over codebooks; use codebook='fresh'")
    if not (P > 0 and sigma2 > 0):
        raise InvalidParams("P and sigma2 must be positive")
    pos = grid_positions(n, L, start)
    m = pos.size
    if method == "exhaustive":
        M = _num_messages(rate_nats, n, max_messages)
    else:
        if not rate_nats > 0:
            raise InvalidParams("rate must be positive")
        M = round(math.exp(rate_nats * n)) if rate_nats * n < 700 else math.exp(rate_nats * n)
        if M < 2:
            raise InvalidParams("fewer than 2 messages")
    fixed = None
    if codebook == "fixed":
        fixed = build_codebook(rate_nats, n, L, P, seed, start, max_messages)
    noise = noise or NoiseModel.iid()

    def chunk_fn(rng, count):
        out = np.empty((count, 2))
        for t in range(count):
            if method == "ensemble":
                xg = math.sqrt(P) * rng.standard_normal(m)
            else:
                cb = fixed or _make_codebook(M, n, L, P, seed, start, rng)
                msg = int(rng.integers(1, M + 1))
                xg = cb.grid[msg - 1]
            x = np.zeros(n)
            x[pos] = xg
            y, _ = simulate(profile, sigma2, x, rng, noise)
            yg = y[pos]
            if method == "ensemble":
                out[t, 0] = ensemble_error_prob(yg, yg - xg, P, M)
            else:
                out[t, 0] = float(nn_decode(cb, yg, rng) != msg)
            out[t, 1] = float(np.mean(x * x) > P)
        return out

    vals = run_chunked(chunk_fn, trials, seed, f"bler/{method}", 256, workers)
    conf = {
        "profile": profile.label(),
        "sigma2": sigma2,
        "P": P,
        "L": L,
        "n": n,
        "rate": rate_nats,
        "start": start,
        "method": method,
        "codebook": codebook,
    }
    rep = EstimateReport.from_samples(vals[:, 0], seed, conf)
    rep.extras.update(
        power_violation_fraction=float(vals[:, 1].mean()),
        num_messages=float(M),
        realized_rate=math.log(M) / n,
    )
    return rep
