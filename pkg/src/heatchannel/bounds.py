"""Closed-form bounds and constants for the heating-up channel.

All rates are in nats per channel use.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateProfile, InvalidParams, NotSummable, PremiseViolated
from .profiles import HeatProfile, alpha_subsampled, alpha_sum, alpha_tail

__all__ = [
    "fb_upper",
    "unit_cost",
    "ach_limit",
    "ach_rate",
    "BetaTilde",
    "beta_tilde",
    "leakage_bound",
    "lowsnr_slope_terms",
    "BoundReport",
    "bound_report",
]


def fb_upper(snr: float, alpha: float) -> float:
    """Converse (feedback) capacity bound ``0.5 log(1 + (1 + alpha) snr)``."""
    if snr < 0 or alpha < 0:
        raise InvalidParams("snr and alpha must be nonnegative")
    return 0.5 * math.log1p((1.0 + alpha) * snr)


def unit_cost(alpha: float) -> float:
    """Capacity per unit cost ``(1 + alpha) / 2``."""
    if alpha < 0 or not math.isfinite(alpha):
        raise InvalidParams(f"alpha must be finite and nonnegative, got {alpha}")
    return 0.5 * (1.0 + alpha)


def ach_limit(L: int, alphaL: float) -> float:
    """High-power limit of the grid-scheme rate, ``log(1 + 1/alphaL) / (2L)``.

    Raises:
        DegenerateProfile: ``alphaL == 0``; the rate grows without bound and
            the exception's ``value`` is ``inf``.
    """
    if L < 1:
        raise InvalidParams("L must be >= 1")
    if alphaL < 0:
        raise InvalidParams("alphaL must be nonnegative")
    if alphaL == 0:
        raise DegenerateProfile("subsampled coefficient sum is zero; rate is unbounded")
    return math.log1p(1.0 / alphaL) / (2.0 * L)


def ach_rate(P: float, sigma2: float, L: int, alphaL: float, eps: float | None = None) -> float:
    """Rate below which the random grid code with nearest-neighbour decoding
    has vanishing error probability, at finite power.

    Evaluates the Chernoff exponent at ``s = -1 / (2 (1 + alphaL snr))`` in
    units where the ambient variance is one (``snr = P / sigma2``, ``eps``
    scaled by ``sigma2``).  ``eps`` defaults to ``1e-3 * sigma2``.
    """
    if not (P > 0 and sigma2 > 0):
        raise InvalidParams("P and sigma2 must be positive")
    if L < 1 or alphaL < 0:
        raise InvalidParams("need L >= 1 and alphaL >= 0")
    if eps is None:
        eps = 1e-3 * sigma2
    if not 0 <= eps < sigma2 + P:
        raise InvalidParams("eps must lie in [0, sigma2 + P)")
    snr = P / sigma2
    e = eps / sigma2
    a = 1.0 + alphaL * snr
    t1 = -(1.0 + alphaL * snr + e) / (2.0 * L * a)
    t2 = math.log1p(snr / a) / (2.0 * L)
    t3 = (1.0 + snr + alphaL * snr - e) / (2.0 * L * (a + snr))
    return t1 + t2 + t3


@dataclass(frozen=True)
class BetaTilde:
    """The scale constant and its certificate.

    ``neg_log`` is ``-log(beta)``, the leading term of the high-SNR capacity
    ceiling (up to an additive noise-dependent constant).
    """

    beta: float
    neg_log: float
    ell0: int
    rho: float
    horizon: int


def _log_alpha0(profile: HeatProfile, ell: np.ndarray) -> np.ndarray:
    # alpha_0 = 1 by convention
    out = np.zeros(ell.shape)
    pos = ell >= 1
    out[pos] = profile.log_alpha(ell[pos])
    return out


def beta_tilde(
    profile: HeatProfile, ell0: int, rho: float, horizon: int = 200, rtol: float = 1e-12
) -> BetaTilde:
    """Scale constant for profiles whose ratios stay above ``rho`` from ``ell0`` on.

    ``beta = min(rho**(ell0-1) alpha_ell0 / max_{l<ell0} alpha_l, alpha_ell0, rho**ell0)``
    with ``alpha_0 = 1``.  The premise (``alpha_ell0 > 0`` and
    ``alpha_{l+1} >= rho alpha_l`` for ``ell0 <= l < ell0 + horizon``) and the
    result (``0 < beta < 1`` and ``beta alpha_l <= alpha_{l+ell0}`` for
    ``0 <= l <= horizon``) are both checked in the log domain.

    Raises:
        PremiseViolated: either check fails.
    """
    if ell0 < 1:
        raise InvalidParams("ell0 must be >= 1")
    if not 0 < rho < 1:
        raise InvalidParams("rho must lie in (0, 1)")
    slack = math.log1p(rtol)
    lr = math.log(rho)
    ells = np.arange(ell0, ell0 + horizon + 1)
    la = profile.log_alpha(ells)
    if not np.isfinite(la[0]):
        raise PremiseViolated(f"alpha_{ell0} = 0")
    steps = np.diff(la)
    bad = np.flatnonzero(~(steps >= lr - slack))
    if bad.size:
        ell = int(ells[bad[0]])
        raise PremiseViolated(f"alpha_{ell + 1} / alpha_{ell} < rho={rho:g}")

    la0 = float(la[0])
    log_max_prev = float(np.max(_log_alpha0(profile, np.arange(0, ell0))))
    log_beta = min((ell0 - 1) * lr + la0 - log_max_prev, la0, ell0 * lr)
    if not log_beta < 0:
        raise PremiseViolated(f"beta = {math.exp(log_beta):g} is not below 1")

    ell = np.arange(0, horizon + 1)
    lhs = log_beta + _log_alpha0(profile, ell)
    rhs = _log_alpha0(profile, ell + ell0)
    ok = (lhs == -np.inf) | (lhs <= rhs + slack)
    if not np.all(ok):
        first = int(ell[~ok][0])
        raise PremiseViolated(f"beta alpha_{first} exceeds alpha_{first + ell0}")
    return BetaTilde(math.exp(log_beta), -log_beta, ell0, rho, horizon)


def leakage_bound(b: int, L: int, snr: float, profile: HeatProfile, tol: float = 1e-12) -> float:
    """Information leaked through coefficients beyond lag ``b``:
    ``(L/2) log(1 + L snr sum_{l>b} alpha_l)``."""
    if b < 0 or L < 1 or snr < 0:
        raise InvalidParams("need b >= 0, L >= 1, snr >= 0")
    if snr == 0:
        return 0.0
    return 0.5 * L * math.log1p(L * snr * alpha_tail(profile, b, tol))


def lowsnr_slope_terms(profile: HeatProfile, L: int, xi2_over_sigma2: float) -> tuple[float, float]:
    """``(gain, penalty)`` of the on-off slope bound.

    ``gain = 0.5 * sum_{i=1}^{L} alpha_{i-1}`` (``alpha_0 = 1``) and
    ``penalty = 0.5 * sum_{i=2}^{L} log(1 + alpha_{i-1} x) / x``.
    """
    if L < 1 or not xi2_over_sigma2 > 0:
        raise InvalidParams("need L >= 1 and xi2_over_sigma2 > 0")
    a = profile.coefficients(L - 1)
    x = float(xi2_over_sigma2)
    gain = 0.5 * (1.0 + float(a.sum()))
    penalty = 0.5 * float(np.sum(np.log1p(a * x))) / x
    return gain, penalty


@dataclass
class BoundReport:
    profile: str
    snr: float
    L: int
    alpha: float
    alpha_L: float
    fb_upper: float
    unit_cost: float
    ach_limit: float
    ach_rate: float
    neg_log_beta_tilde: float
    notes: list[str] = field(default_factory=list)


def bound_report(
    profile: HeatProfile,
    snr: float,
    L: int,
    sigma2: float = 1.0,
    eps: float | None = None,
    ell0: int = 1,
    tol: float = 1e-12,
) -> BoundReport:
    """Every closed-form quantity for one ``(profile, snr, L)`` point.

    Quantities that do not exist for the profile are reported as ``nan``
    (or ``inf`` for an unbounded limit) with a note.
    """
    notes = []
    try:
        a = alpha_sum(profile, tol)
    except NotSummable as exc:
        a = math.nan
        notes.append(f"alpha: {exc}")
    try:
        aL = alpha_subsampled(profile, L, tol)
    except NotSummable as exc:
        aL = math.nan
        notes.append(f"alpha_L: {exc}")
    fb = fb_upper(snr, a) if math.isfinite(a) else math.nan
    uc = unit_cost(a) if math.isfinite(a) else math.nan
    if math.isnan(aL):
        lim = rate = math.nan
    else:
        try:
            lim = ach_limit(L, aL)
        except DegenerateProfile as exc:
            lim = exc.value
        rate = ach_rate(snr * sigma2, sigma2, L, aL, eps) if snr > 0 else 0.0
    diag_rho = _ratio_floor(profile, ell0)
    nlb = math.nan
    if diag_rho is not None:
        try:
            nlb = beta_tilde(profile, ell0, diag_rho).neg_log
        except PremiseViolated as exc:
            notes.append(f"beta_tilde: {exc}")
    else:
        notes.append("beta_tilde: ratios have no positive floor")
    return BoundReport(profile.label(), snr, L, a, aL, fb, uc, lim, rate, nlb, notes)


def _ratio_floor(profile: HeatProfile, ell0: int, horizon: int = 200) -> float | None:
    """Smallest ratio ``alpha_{l+1}/alpha_l`` for ``l >= ell0`` over the horizon, if in (0, 1)."""
    la = profile.log_alpha(np.arange(ell0, ell0 + horizon + 1))
    if not np.all(np.isfinite(la)):
        return None
    r = float(np.exp(np.min(np.diff(la))))
    if not 0 < r < 1:
        return None
    return r
