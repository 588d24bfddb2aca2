"""Heat-dissipation profiles: the coefficient sequences that couple past input
power to the present noise variance.

A profile is an immutable description of a nonnegative sequence
``alpha_1, alpha_2, ...``.  Built-in kinds carry exact metadata (closed-form
sums, supremum, decay class); explicit lists follow a zero-tail rule and may
carry a geometric majorant that certifies the size of the unseen tail.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import ConfigError, InvalidParams, NotSummable

__all__ = [
    "Kind",
    "HeatProfile",
    "ThermalParams",
    "DecayDiagnostics",
    "Verdict",
    "Classification",
    "alpha",
    "alpha_sum",
    "alpha_subsampled",
    "alpha_tail",
    "decay_diagnostics",
    "classify",
    "profile_from_physics",
    "profile_from_spec",
    "temperature_trace",
]

# Upper limit on the number of terms summed when certifying a tail numerically.
MAX_TERMS = 10_000_000


class Kind(str, enum.Enum):
    GEOMETRIC = "geometric"
    SUBGEOMETRIC = "subgeometric"
    EVEN_ONES = "even_ones"
    ODD_ONES = "odd_ones"
    ZERO = "zero"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class HeatProfile:
    """Coefficient sequence ``alpha_l``, ``l >= 1``.

    Use the classmethod constructors rather than the raw initializer.

    Attributes:
        kind: which family the sequence belongs to.
        rho: ratio for geometric / base for sub-geometric profiles.
        kappa: exponent of sub-geometric profiles (``alpha_l = rho**(l**kappa)``).
        scale: multiplier of geometric profiles (``alpha_l = scale * rho**l``).
        values: listed coefficients of an explicit profile.
        majorant: ``(c, q)`` with ``alpha_l <= c * q**l`` for every ``l`` past
            the listed values (explicit) or for all ``l`` (built-ins).
    """

    kind: Kind
    rho: float | None = None
    kappa: float | None = None
    scale: float = 1.0
    values: tuple[float, ...] = ()
    majorant: tuple[float, float] | None = field(default=None)

    def __post_init__(self):
        k = self.kind
        if k in (Kind.GEOMETRIC, Kind.SUBGEOMETRIC):
            if self.rho is None or not 0.0 < self.rho < 1.0:
                raise InvalidParams(f"{k.value} profile needs 0 < rho < 1, got {self.rho}")
        if k is Kind.GEOMETRIC and not (self.scale > 0 and math.isfinite(self.scale)):
            raise InvalidParams(f"geometric scale must be positive, got {self.scale}")
        if k is Kind.SUBGEOMETRIC and (self.kappa is None or not self.kappa > 1.0):
            raise InvalidParams(f"subgeometric profile needs kappa > 1, got {self.kappa}")
        if k is Kind.EXPLICIT:
            vals = np.asarray(self.values, dtype=float)
            if vals.ndim != 1 or np.any(~np.isfinite(vals)) or np.any(vals < 0):
                raise InvalidParams("explicit coefficients must be finite and nonnegative")
        if self.majorant is not None:
            c, q = self.majorant
            if not (c >= 0 and 0 < q < 1):
                raise InvalidParams(f"majorant needs c >= 0 and 0 < q < 1, got {self.majorant}")

    # -- constructors -----------------------------------------------------

    @classmethod
    def geometric(cls, rho: float, scale: float = 1.0) -> "HeatProfile":
        return cls(Kind.GEOMETRIC, rho=float(rho), scale=float(scale))

    @classmethod
    def subgeometric(cls, rho: float, kappa: float) -> "HeatProfile":
        return cls(Kind.SUBGEOMETRIC, rho=float(rho), kappa=float(kappa))

    @classmethod
    def even_ones(cls) -> "HeatProfile":
        """``alpha_l = 1`` for even ``l``, ``0`` for odd ``l``."""
        return cls(Kind.EVEN_ONES)

    @classmethod
    def odd_ones(cls) -> "HeatProfile":
        """``alpha_l = 1`` for odd ``l``, ``0`` for even ``l``."""
        return cls(Kind.ODD_ONES)

    @classmethod
    def zero(cls) -> "HeatProfile":
        return cls(Kind.ZERO)

    @classmethod
    def explicit(cls, values, tail_majorant=None) -> "HeatProfile":
        vals = tuple(float(v) for v in values)
        maj = None if tail_majorant is None else (float(tail_majorant[0]), float(tail_majorant[1]))
        return cls(Kind.EXPLICIT, values=vals, majorant=maj)

    # -- evaluation -------------------------------------------------------

    def log_alpha(self, ell) -> np.ndarray:
        """Natural log of ``alpha_l`` (``-inf`` where the coefficient is zero)."""
        ell = np.asarray(ell)
        if np.any(ell < 1):
            raise ValueError("coefficient index must be >= 1")
        lf = ell.astype(float)
        k = self.kind
        with np.errstate(divide="ignore"):
            if k is Kind.GEOMETRIC:
                return math.log(self.scale) + lf * math.log(self.rho)
            if k is Kind.SUBGEOMETRIC:
                return lf**self.kappa * math.log(self.rho)
            return np.log(self.alpha(ell))

    def alpha(self, ell) -> np.ndarray | float:
        """Coefficient(s) ``alpha_l``; vectorized over integer arrays."""
        scalar = np.ndim(ell) == 0
        ell = np.asarray(ell, dtype=np.int64)
        if np.any(ell < 1):
            raise ValueError("coefficient index must be >= 1")
        k = self.kind
        if k is Kind.GEOMETRIC:
            out = self.scale * np.power(self.rho, ell.astype(float))
        elif k is Kind.SUBGEOMETRIC:
            out = np.exp(self.log_alpha(ell))
        elif k is Kind.EVEN_ONES:
            out = (ell % 2 == 0).astype(float)
        elif k is Kind.ODD_ONES:
            out = (ell % 2 == 1).astype(float)
        elif k is Kind.ZERO:
            out = np.zeros(ell.shape)
        else:
            vals = np.asarray(self.values, dtype=float)
            out = np.zeros(ell.shape)
            inside = ell <= len(vals)
            out[inside] = vals[ell[inside] - 1]
        return float(out) if scalar else out

    def coefficients(self, n: int) -> np.ndarray:
        """``alpha_1, ..., alpha_n`` as an array."""
        if n <= 0:
            return np.zeros(0)
        return self.alpha(np.arange(1, n + 1))

    # -- metadata ---------------------------------------------------------

    @property
    def sup(self) -> float:
        """Exact ``sup_l alpha_l`` (for explicit profiles, including the majorant)."""
        k = self.kind
        if k is Kind.GEOMETRIC:
            return self.scale * self.rho
        if k is Kind.SUBGEOMETRIC:
            return self.rho
        if k in (Kind.EVEN_ONES, Kind.ODD_ONES):
            return 1.0
        if k is Kind.ZERO:
            return 0.0
        listed = max(self.values, default=0.0)
        if self.majorant is not None:
            c, q = self.majorant
            listed = max(listed, c * q ** (len(self.values) + 1))
        return listed

    @property
    def support(self) -> int | None:
        """Index of the last nonzero coefficient for finite-support profiles, else None."""
        if self.kind is Kind.ZERO:
            return 0
        if self.kind is Kind.EXPLICIT and self.majorant is None:
            nz = np.flatnonzero(np.asarray(self.values) > 0)
            return int(nz[-1]) + 1 if nz.size else 0
        return None

    @property
    def geometric_majorant(self) -> tuple[float, float] | None:
        """``(c, q)`` with ``alpha_l <= c q**l`` for all ``l`` beyond the known part."""
        k = self.kind
        if k is Kind.GEOMETRIC:
            return (self.scale, self.rho)
        if k is Kind.SUBGEOMETRIC:
            # l**kappa >= l for l >= 1
            return (1.0, self.rho)
        if k is Kind.EXPLICIT:
            return self.majorant
        return None

    @property
    def is_geometric(self) -> bool:
        return self.kind is Kind.GEOMETRIC

    @property
    def has_closed_form(self) -> bool:
        return self.kind in (Kind.GEOMETRIC, Kind.ZERO)

    @property
    def decay_class(self) -> str:
        k = self.kind
        if k is Kind.GEOMETRIC:
            return "geometric"
        if k is Kind.SUBGEOMETRIC:
            return "faster-than-geometric"
        if self.support is not None:
            return "finite-support"
        return "indeterminate"

    def to_spec(self) -> dict:
        """Inverse of :func:`profile_from_spec`."""
        k = self.kind
        if k is Kind.GEOMETRIC:
            d = {"type": "geometric", "rho": self.rho}
            if self.scale != 1.0:
                d["scale"] = self.scale
            return d
        if k is Kind.SUBGEOMETRIC:
            return {"type": "subgeometric", "rho": self.rho, "kappa": self.kappa}
        if k is Kind.EXPLICIT:
            d = {"type": "explicit", "coefficients": list(self.values)}
            if self.majorant is not None:
                d["tail_majorant"] = {"c": self.majorant[0], "q": self.majorant[1]}
            return d
        return {"type": k.value}

    def label(self) -> str:
        k = self.kind
        if k is Kind.GEOMETRIC:
            return f"geometric(rho={self.rho:g}" + (f",scale={self.scale:g})" if self.scale != 1 else ")")
        if k is Kind.SUBGEOMETRIC:
            return f"subgeometric(rho={self.rho:g},kappa={self.kappa:g})"
        if k is Kind.EXPLICIT:
            return f"explicit(len={len(self.values)})"
        return k.value


def alpha(profile: HeatProfile, ell: int) -> float:
    """Coefficient ``alpha_ell`` for ``ell >= 1``."""
    if int(ell) != ell or ell < 1:
        raise ValueError(f"ell must be a positive integer, got {ell}")
    return profile.alpha(int(ell))


# -- sums -----------------------------------------------------------------


def _strided_sum(profile: HeatProfile, start: int, stride: int, tol: float) -> float:
    """Sum of ``alpha_{start + j*stride}``, ``j >= 0``, to absolute error ``tol``."""
    k = profile.kind
    if k is Kind.ZERO:
        return 0.0
    if k is Kind.GEOMETRIC:
        c, r = profile.scale, profile.rho
        return c * r**start / (1.0 - r**stride)

    if k in (Kind.EVEN_ONES, Kind.ODD_ONES) and stride % 2 == 0:
        # every summed index shares the parity of start
        zero_parity = 1 if k is Kind.EVEN_ONES else 0
        if start % 2 == zero_parity:
            return 0.0

    if k is Kind.EXPLICIT:
        vals = np.asarray(profile.values, dtype=float)
        s = float(vals[start - 1 :: stride].sum()) if start <= len(vals) else 0.0
        if profile.majorant is None:
            return s
        c, q = profile.majorant
        n = len(vals)
        # first unseen index on the stride grid
        first = start if start > n else start + ((n - start) // stride + 1) * stride
        bound = c * q**first / (1.0 - q**stride)
        if bound > tol:
            raise NotSummable(
                f"explicit tail certified only to {bound:.3g} > tol={tol:g}; extend the list"
            )
        return s

    maj = profile.geometric_majorant
    if maj is None:
        raise NotSummable(f"{profile.label()} has no summable tail")
    c, q = maj
    total = 0.0
    done = 0  # number of strided terms already summed
    chunk = 64
    while True:
        idx = start + stride * np.arange(done, done + chunk, dtype=np.int64)
        total += float(np.sum(profile.alpha(idx)))
        done += chunk
        nxt = start + stride * done
        if c * q**nxt / (1.0 - q**stride) < tol:
            return total
        if done >= MAX_TERMS:
            raise NotSummable(f"tail of {profile.label()} not below tol={tol:g} after {done} terms")
        chunk = min(chunk * 2, 1 << 20)


def alpha_sum(profile: HeatProfile, tol: float = 1e-12) -> float:
    """Total coefficient sum ``sum_{l>=1} alpha_l`` to absolute error ``tol``.

    Raises:
        NotSummable: the tail cannot be certified (e.g. ``even_ones``).
    """
    return _strided_sum(profile, 1, 1, tol)


def alpha_subsampled(profile: HeatProfile, L: int, tol: float = 1e-12) -> float:
    """Subsampled sum ``sum_{l>=1} alpha_{l L}``."""
    if L < 1:
        raise ValueError("L must be a positive integer")
    return _strided_sum(profile, int(L), int(L), tol)


def alpha_tail(profile: HeatProfile, b: int, tol: float = 1e-12) -> float:
    """Tail sum ``sum_{l > b} alpha_l``."""
    if b < 0:
        raise ValueError("b must be nonnegative")
    return _strided_sum(profile, int(b) + 1, 1, tol)


# -- decay diagnostics ----------------------------------------------------


@dataclass(frozen=True)
class DecayDiagnostics:
    """Finite-horizon view of the ratio and log-rate sequences.

    ``ratios[i]`` is ``alpha_{l+1}/alpha_l`` for ``l = i + 1`` with the
    conventions ``a/0 = inf`` (``a > 0``) and ``0/0 = 0``; ``log_rates[i]`` is
    ``(1/l) log(1/alpha_l)``.  ``tail_min[i]`` / ``tail_max[i]`` are the min /
    max of ``ratios[i:]``.
    """

    horizon: int
    ratios: np.ndarray
    log_rates: np.ndarray
    tail_min: np.ndarray
    tail_max: np.ndarray


def decay_diagnostics(profile: HeatProfile, horizon: int) -> DecayDiagnostics:
    if horizon < 2:
        raise ValueError("horizon must be >= 2")
    ell = np.arange(1, horizon + 2)
    la = np.asarray(profile.log_alpha(ell), dtype=float)
    cur, nxt = la[:-1], la[1:]
    pos_cur, pos_nxt = np.isfinite(cur), np.isfinite(nxt)
    ratios = np.zeros(horizon)
    both = pos_cur & pos_nxt
    with np.errstate(over="ignore"):
        ratios[both] = np.exp(nxt[both] - cur[both])
    ratios[~pos_cur & pos_nxt] = np.inf
    # alpha_l > 0, alpha_{l+1} = 0 and 0/0 both give 0, already set
    log_rates = np.full(horizon, np.inf)
    log_rates[pos_cur] = -cur[pos_cur] / ell[:-1][pos_cur]
    tail_min = np.minimum.accumulate(ratios[::-1])[::-1]
    tail_max = np.maximum.accumulate(ratios[::-1])[::-1]
    return DecayDiagnostics(horizon, ratios, log_rates, tail_min, tail_max)


class Verdict(str, enum.Enum):
    BOUNDED = "bounded"
    UNBOUNDED = "unbounded"
    INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class Classification:
    verdict: Verdict
    heuristic: bool
    reason: str
    evidence: DecayDiagnostics
    annotation: Verdict | None = None


HEURISTIC_LOW = 1e-6
HEURISTIC_HIGH = 1e-6


def classify(profile: HeatProfile, horizon: int = 200) -> Classification:
    """High-SNR capacity verdict for a profile.

    Built-in kinds get the exact answer from their analytic form.  Explicit
    profiles get a heuristic verdict from the last quarter of the ratio
    series: min above ``HEURISTIC_LOW`` reads as a positive liminf (bounded),
    max below ``HEURISTIC_HIGH`` as a vanishing limsup (unbounded).
    """
    diag = decay_diagnostics(profile, horizon)
    k = profile.kind
    if k is Kind.GEOMETRIC:
        return Classification(Verdict.BOUNDED, False, "ratio is constant rho > 0", diag)
    if k is Kind.SUBGEOMETRIC:
        return Classification(
            Verdict.UNBOUNDED, False, "ratio rho**((l+1)**kappa - l**kappa) tends to 0", diag
        )
    if k is Kind.ZERO:
        return Classification(
            Verdict.UNBOUNDED, False, "coefficients vanish; interference-free after a finite wait", diag
        )
    if k is Kind.EVEN_ONES:
        return Classification(
            Verdict.INDETERMINATE,
            False,
            "limsup ratio = inf, liminf = 0; even and odd times form two sub-channels "
            "with constant coefficients, so capacity is bounded",
            diag,
            annotation=Verdict.BOUNDED,
        )
    if k is Kind.ODD_ONES:
        return Classification(
            Verdict.INDETERMINATE,
            False,
            "limsup ratio = inf, liminf = 0; silencing odd-time inputs makes even-time "
            "outputs interference-free, so capacity is unbounded",
            diag,
            annotation=Verdict.UNBOUNDED,
        )

    window = diag.ratios[-max(1, horizon // 4) :]
    lo, hi = float(window.min()), float(window.max())
    if lo > HEURISTIC_LOW:
        verdict = Verdict.BOUNDED
    elif hi < HEURISTIC_HIGH:
        verdict = Verdict.UNBOUNDED
    else:
        verdict = Verdict.INDETERMINATE
    reason = f"heuristic over l in ({horizon - len(window)}, {horizon}]: ratio min={lo:.3g}, max={hi:.3g}"
    return Classification(verdict, True, reason, diag)


# -- physics ----------------------------------------------------------------


@dataclass(frozen=True)
class ThermalParams:
    """Lumped thermal model of the chip.

    Attributes:
        tau: clock period [s].
        c_h: heat capacity [J/K].
        rho_th: thermal resistance to the environment [K/W].
        t_e: ambient temperature [K].
        lambda_w: noise variance per kelvin (proportionality constant times bandwidth).
        eta: heat power produced per unit squared input symbol.
    """

    tau: float
    c_h: float
    rho_th: float
    t_e: float
    lambda_w: float
    eta: float

    def __post_init__(self):
        for name in ("tau", "c_h", "rho_th", "t_e", "lambda_w", "eta"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InvalidParams(f"{name} must be a positive finite number, got {v!r}")

    @property
    def decay(self) -> float:
        """Per-step temperature retention ``exp(-tau / (rho_th c_h))``."""
        return math.exp(-self.tau / (self.rho_th * self.c_h))


def profile_from_physics(params: ThermalParams) -> tuple[HeatProfile, float]:
    """Map lumped thermal parameters to ``(profile, sigma2)``.

    The profile is geometric with ratio ``exp(-tau/(rho_th c_h))`` and scale
    ``eta * lambda_w * tau / c_h``; the ambient noise variance is
    ``lambda_w * t_e``.
    """
    rho = params.decay
    if not 0.0 < rho < 1.0:
        raise InvalidParams(f"thermal decay {rho} outside (0, 1); check tau / (rho_th c_h)")
    scale = params.eta * params.lambda_w * params.tau / params.c_h
    return HeatProfile.geometric(rho, scale=scale), params.lambda_w * params.t_e


def temperature_trace(params: ThermalParams, heat) -> np.ndarray:
    """Sampled chip temperature ``T_1..T_n`` for heat inputs ``E_1..E_n``.

    Direct evaluation of the discretized lumped solution (quadratic cost).
    """
    heat = np.asarray(heat, dtype=float)
    n = heat.size
    t = np.full(n, params.t_e)
    g = params.tau / (params.rho_th * params.c_h)
    for k in range(1, n + 1):
        for ell in range(1, k):
            t[k - 1] += params.tau / params.c_h * math.exp(-g * (k - ell)) * heat[ell - 1]
    return t


# -- config grammar -------------------------------------------------------


def _num(spec: Mapping, key: str, ctx: str) -> float:
    if key not in spec:
        raise ConfigError("missing required key", field=f"{ctx}.{key}")
    v = spec[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"expected a number, got {v!r}", field=f"{ctx}.{key}")
    return float(v)


def profile_from_spec(spec: Mapping, ctx: str = "profile") -> tuple[HeatProfile, float | None]:
    """Parse a profile config mapping.

    Returns ``(profile, sigma2)`` where ``sigma2`` is only set by the
    ``physics`` type (ambient noise variance), otherwise ``None``.
    """
    if not isinstance(spec, Mapping):
        raise ConfigError("expected a mapping", field=ctx)
    kind = spec.get("type")
    try:
        if kind == "geometric":
            return HeatProfile.geometric(_num(spec, "rho", ctx), spec.get("scale", 1.0)), None
        if kind == "subgeometric":
            return HeatProfile.subgeometric(_num(spec, "rho", ctx), _num(spec, "kappa", ctx)), None
        if kind == "even_ones":
            return HeatProfile.even_ones(), None
        if kind == "odd_ones":
            return HeatProfile.odd_ones(), None
        if kind == "zero":
            return HeatProfile.zero(), None
        if kind == "explicit":
            coeffs = spec.get("coefficients")
            if not isinstance(coeffs, (list, tuple)):
                raise ConfigError("expected a list of numbers", field=f"{ctx}.coefficients")
            maj = spec.get("tail_majorant")
            if maj is not None:
                maj = (_num(maj, "c", f"{ctx}.tail_majorant"), _num(maj, "q", f"{ctx}.tail_majorant"))
            return HeatProfile.explicit(coeffs, maj), None
        if kind == "physics":
            params = ThermalParams(
                *(_num(spec, key, ctx) for key in ("tau", "c_h", "rho_th", "t_e", "lambda_w", "eta"))
            )
            return profile_from_physics(params)
    except InvalidParams as exc:
        raise ConfigError(str(exc), field=ctx) from exc
    raise ConfigError(f"unknown profile type {kind!r}", field=f"{ctx}.type")
