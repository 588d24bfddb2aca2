"""Simulator for the heating-up channel ``Y_k = x_k + theta_k U_k`` where
``theta_k**2 = sigma2 + sum_{l<k} alpha_{k-l} x_l**2``.

:class:`HeatingChannel` is the streaming, step-by-step reference.
:func:`simulate` is the vectorized batch path used by the Monte Carlo code;
both agree to rounding error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .errors import InvalidParams, ModeMismatch
from .profiles import HeatProfile, Kind

__all__ = [
    "NoiseModel",
    "HeatingChannel",
    "Transmission",
    "direct_horizon",
    "interference",
    "simulate",
    "TRUNCATION_REL",
]

# Direct mode keeps enough history that the neglected coefficient mass is
# below TRUNCATION_REL * sigma2 (per unit input power).
TRUNCATION_REL = 1e-9


@dataclass(frozen=True)
class NoiseModel:
    """Zero-mean, unit-variance stationary Gaussian noise.

    ``kind="iid"`` draws independent standard normals.  ``kind="ar1"`` draws
    ``U_k = a U_{k-1} + sqrt(1 - a**2) W_k`` started from the stationary law.
    """

    kind: str = "iid"
    a: float = 0.0

    def __post_init__(self):
        if self.kind not in ("iid", "ar1"):
            raise InvalidParams(f"unknown noise kind {self.kind!r}")
        if self.kind == "ar1" and not 0.0 <= self.a < 1.0:
            raise InvalidParams(f"AR(1) coefficient must lie in [0, 1), got {self.a}")
        if self.kind == "iid" and self.a != 0.0:
            raise InvalidParams("iid noise takes no coefficient")

    @classmethod
    def iid(cls) -> "NoiseModel":
        return cls("iid")

    @classmethod
    def ar1(cls, a: float) -> "NoiseModel":
        return cls("ar1", float(a))

    @property
    def innovation_std(self) -> float:
        return math.sqrt(1.0 - self.a**2) if self.kind == "ar1" else 1.0

    def next(self, rng: np.random.Generator, prev: float | None) -> float:
        w = rng.standard_normal()
        if self.kind == "iid" or prev is None:
            return w
        return self.a * prev + self.innovation_std * w

    def sample(self, rng: np.random.Generator, shape) -> np.ndarray:
        """Noise paths along the last axis; same draws as repeated :meth:`next`."""
        w = rng.standard_normal(shape)
        if self.kind == "iid" or self.a == 0.0:
            return w
        w[..., 1:] *= self.innovation_std
        return signal.lfilter([1.0], [1.0, -self.a], w, axis=-1)


def direct_horizon(profile: HeatProfile, sigma2: float, rel: float = TRUNCATION_REL) -> int | None:
    """History length for Direct mode, or ``None`` for full history.

    Explicit and zero profiles are exact at their list length.  Profiles with
    a geometric majorant ``(c, q)`` keep ``H`` lags with
    ``c q**(H+1) / (1-q) <= rel * sigma2``; the neglected part of
    ``theta**2`` is then at most that times ``max x**2``.
    """
    if profile.kind is Kind.ZERO:
        return 0
    if profile.kind is Kind.EXPLICIT:
        return len(profile.values)
    maj = profile.geometric_majorant
    if maj is None:
        return None
    c, q = maj
    target = rel * sigma2 * (1.0 - q) / c
    if target >= q:
        return 0
    return max(0, math.ceil(math.log(target) / math.log(q)) - 1)


@dataclass
class Transmission:
    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray

    @property
    def mean_power(self) -> float:
        return float(np.mean(self.x**2)) if self.x.size else 0.0

    def power_ok(self, P: float) -> bool:
        """Per-message average-power check ``(1/n) sum x_k**2 <= P``."""
        return self.mean_power <= P


class HeatingChannel:
    """Streaming channel state.

    Args:
        profile: heat-dissipation coefficients.
        sigma2: ambient noise variance, > 0.
        noise: unit-variance noise process.
        seed: seed for the noise generator.
        history: ``"recursive"`` (geometric profiles only, O(1) per step),
            ``"direct"`` (explicit sum over a ring buffer), or ``"auto"``.
        horizon: Direct-mode history length; defaults to
            :func:`direct_horizon`, ``None`` there meaning full history.
    """

    def __init__(
        self,
        profile: HeatProfile,
        sigma2: float,
        noise: NoiseModel | None = None,
        seed: int = 0,
        history: str = "auto",
        horizon: int | None = None,
    ):
        if not sigma2 > 0:
            raise InvalidParams(f"sigma2 must be positive, got {sigma2}")
        if history == "auto":
            history = "recursive" if profile.is_geometric else "direct"
        if history == "recursive" and not profile.is_geometric:
            raise ModeMismatch(f"recursive history needs a geometric profile, got {profile.label()}")
        if history not in ("recursive", "direct"):
            raise InvalidParams(f"unknown history mode {history!r}")
        self.profile = profile
        self.sigma2 = float(sigma2)
        self.noise = noise or NoiseModel.iid()
        self.seed = seed
        self.history = history
        self.rng = np.random.default_rng(seed)
        self.k = 1
        self._prev_u: float | None = None
        self._acc = 0.0
        if history == "direct":
            self.horizon = direct_horizon(profile, sigma2) if horizon is None else int(horizon)
            if self.horizon is None:
                self._past: list[float] = []  # x_{k-1}^2, x_{k-2}^2, ... grows
                self._coef = np.zeros(0)
            else:
                self._buf = np.zeros(self.horizon)
                self._coef = profile.coefficients(self.horizon)
        else:
            self.horizon = None

    def noise_std(self) -> float:
        """``theta_k`` for the inputs fed so far."""
        return math.sqrt(self.sigma2 + self._interference())

    def _interference(self) -> float:
        if self.history == "recursive":
            return self._acc
        if self.horizon is None:
            n = len(self._past)
            if n == 0:
                return 0.0
            if self._coef.size < n:
                self._coef = self.profile.coefficients(max(2 * n, 64))
            return float(np.dot(self._coef[:n], self._past[::-1]))
        return float(np.dot(self._coef, self._buf))

    def _push(self, x2: float) -> None:
        if self.history == "recursive":
            self._acc = self.profile.rho * (self._acc + self.profile.scale * x2)
        elif self.horizon is None:
            self._past.append(x2)
        elif self.horizon > 0:
            self._buf[1:] = self._buf[:-1]
            self._buf[0] = x2

    def step(self, x: float, u: float | None = None) -> tuple[float, float]:
        """Send one symbol; returns ``(y, theta)``.

        ``u`` injects the noise sample instead of drawing it (test hook); the
        noise process state still advances to ``u``.
        """
        theta = self.noise_std()
        if u is None:
            u = self.noise.next(self.rng, self._prev_u)
        self._prev_u = float(u)
        x = float(x)
        self._push(x * x)
        self.k += 1
        return x + theta * self._prev_u, theta

    def transmit(self, xs, us=None) -> Transmission:
        """Send a block in order; identical to repeated :meth:`step`."""
        xs = np.asarray(xs, dtype=float).ravel()
        y = np.empty_like(xs)
        th = np.empty_like(xs)
        for i, x in enumerate(xs):
            y[i], th[i] = self.step(x, None if us is None else us[i])
        return Transmission(xs, y, th)


def interference(profile: HeatProfile, x2: np.ndarray) -> np.ndarray:
    """``sum_{l<k} alpha_{k-l} x2_l`` for every ``k``, along the last axis."""
    x2 = np.asarray(x2, dtype=float)
    n = x2.shape[-1]
    if n == 0 or profile.kind is Kind.ZERO:
        return np.zeros_like(x2)
    if profile.is_geometric:
        r = profile.rho
        return signal.lfilter([0.0, profile.scale * r], [1.0, -r], x2, axis=-1)
    kernel = np.concatenate([[0.0], profile.coefficients(n - 1)])
    last = np.flatnonzero(kernel)
    if last.size == 0:
        return np.zeros_like(x2)
    kernel = kernel[: last[-1] + 1]
    shape = (1,) * (x2.ndim - 1) + (kernel.size,)
    out = signal.convolve(x2, kernel.reshape(shape), mode="full")[..., :n]
    return np.maximum(out, 0.0)


def simulate(
    profile: HeatProfile,
    sigma2: float,
    xs,
    rng: np.random.Generator,
    noise: NoiseModel | None = None,
    u=None,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized channel: returns ``(y, theta)`` for inputs along the last axis.

    Accepts a batch of sequences (shape ``(trials, n)``).  Noise is drawn
    from ``rng`` unless ``u`` is supplied.
    """
    xs = np.asarray(xs, dtype=float)
    theta = np.sqrt(sigma2 + interference(profile, xs * xs))
    if u is None:
        u = (noise or NoiseModel.iid()).sample(rng, xs.shape)
    return xs + theta * u, theta
