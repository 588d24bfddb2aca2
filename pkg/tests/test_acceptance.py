"""Acceptance gate: one PASS/FAIL line per criterion at the stated tolerances."""

import math

import numpy as np
import pytest

from conftest import VERDICTS
from heatchannel.bounds import ach_limit, fb_upper, leakage_bound, unit_cost
from heatchannel.channel import HeatingChannel
from heatchannel.codec import Codebook, bler_sim, nn_decode
from heatchannel.estimate import (
    concentration_check,
    gaussian_kl,
    mixture_kl_mc,
    onoff_covariances,
    OnOffConfig,
    slope_estimate,
    typical_means,
)
from heatchannel.profiles import HeatProfile, ThermalParams, alpha_subsampled, alpha_sum, profile_from_physics

GEOM = HeatProfile.geometric(0.5)
SUBGEOM = HeatProfile.subgeometric(0.5, 2.0)
ZERO = HeatProfile.zero()
SNR_GRID = [1e-2, 1e-3, 1e-4]
HIGH_SNR = 1e4


def verdict(num, ok, detail):
    line = f"criterion {num}: {'PASS' if ok else 'FAIL'} | {detail}"
    print(line)
    VERDICTS.append(line)
    assert ok, line


# -- shared runs ---------------------------------------------------------------


@pytest.fixture(scope="module")
def slope_runs():
    return {
        p.label(): slope_estimate(p, 1.0, SNR_GRID, 64, 1e4, 100_000, seed=2024)
        for p in (GEOM, ZERO)
    }


def _bler(profile, L, R, seed):
    return bler_sim(profile, 1.0, HIGH_SNR, L, 120, R, 500, seed, method="ensemble")


@pytest.fixture(scope="module")
def dichotomy_runs():
    lim_g1 = ach_limit(1, alpha_subsampled(GEOM, 1))
    lim_g4 = ach_limit(4, alpha_subsampled(GEOM, 4))
    lim_s4 = ach_limit(4, alpha_subsampled(SUBGEOM, 4))
    mid = 0.5 * (lim_g4 + lim_s4)
    return {
        "lim_g1": lim_g1,
        "lim_g4": lim_g4,
        "lim_s4": lim_s4,
        "mid": mid,
        "a_low": (GEOM, _bler(GEOM, 1, 0.6 * lim_g1, 31)),
        "a_high": (GEOM, _bler(GEOM, 1, 3.0, 32)),
        "b_sub": (SUBGEOM, _bler(SUBGEOM, 4, mid, 33)),
        "b_geom": (GEOM, _bler(GEOM, 4, mid, 34)),
    }


@pytest.fixture(scope="module")
def sweep_runs():
    out = []
    lim = ach_limit(1, alpha_subsampled(GEOM, 1))
    for i, f in enumerate((0.2, 0.4, 0.8, 1.2)):
        out.append((GEOM, _bler(GEOM, 1, f * lim, 40 + i)))
    for i, R in enumerate((0.5, 1.0)):
        out.append((SUBGEOM, _bler(SUBGEOM, 4, R, 50 + i)))
    return out


# -- criteria ----------------------------------------------------------------------


def test_criterion_1_unit_cost_slope(slope_runs):
    g, z = slope_runs[GEOM.label()], slope_runs[ZERO.label()]
    in_band = 0.85 <= g.estimate <= 1.0
    below_cost = g.estimate <= unit_cost(1.0) + 3 * g.stderr
    control = 0.45 <= z.estimate <= 0.5
    verdict(
        1,
        in_band and below_cost and control,
        f"geometric estimate {g.estimate:.4g} (se {g.stderr:.2g}) in [0.85, 1]: {in_band}; "
        f"<= unit_cost + 3se: {below_cost}; zero-profile control {z.estimate:.4g} in [0.45, 0.5]: {control}; "
        f"deterministic gain - penalty {g.extras['gain_minus_penalty']:.4g}",
    )


def test_criterion_2_converse_dominance(slope_runs, dichotomy_runs, sweep_runs):
    checks = []
    for label, rep in slope_runs.items():
        a = rep.extras["points"][0].extras["alpha"]
        for snr, pt in zip(SNR_GRID, rep.extras["points"]):
            checks.append((f"{label}@snr={snr:g}", pt.estimate, pt.stderr, fb_upper(snr, a)))
    bler = [dichotomy_runs[k] for k in ("a_low", "a_high", "b_sub", "b_geom")] + sweep_runs
    for prof, rep in bler:
        # operational rate: realized rate times success probability
        R = rep.extras["realized_rate"]
        checks.append(
            (f"{prof.label()} L={rep.config['L']} R={R:.3g}", R * (1 - rep.estimate), R * rep.stderr,
             fb_upper(HIGH_SNR, alpha_sum(prof)))
        )
    bad = [c[0] for c in checks if not c[1] <= c[3] + 3 * c[2]]
    worst = max(c[1] / c[3] for c in checks)
    verdict(2, len(checks) >= 12 and not bad, f"{len(checks)} configs, violations {bad}, max estimate/bound {worst:.3g}")


def test_criterion_3_high_snr_dichotomy(dichotomy_runs):
    d = dichotomy_runs
    lim_ok = abs(d["lim_g1"] - 0.5 * math.log(2)) < 1e-12
    a_low, a_high = d["a_low"][1].estimate, d["a_high"][1].estimate
    b_sub, b_geom = d["b_sub"][1].estimate, d["b_geom"][1].estimate
    ok = lim_ok and a_low < 0.3 and a_high > 0.9 and d["lim_s4"] > d["lim_g4"] and b_sub < 0.3 and b_geom > 0.6
    verdict(
        3,
        ok,
        f"(a) ach_limit {d['lim_g1']:.5f}, BLER {a_low:.3g} at R=0.6*limit, {a_high:.3g} at R=3; "
        f"(b) limits {d['lim_g4']:.4f} < {d['lim_s4']:.4f}, R={d['mid']:.4f}: BLER sub {b_sub:.3g}, geom {b_geom:.3g}",
    )


def test_criterion_4_concentration():
    P, L = 4.0, 2
    target = 1.0 + P + alpha_subsampled(GEOM, L) * P
    mean_y, _ = typical_means(GEOM, P, 1.0, L, 100_000)
    eps = 0.05 * target
    runs = [concentration_check(GEOM, P, 1.0, L, n, eps, 200, seed=7) for n in (1_000, 10_000, 100_000)]
    freqs = [r.empirical_prob for r in runs]
    mono = all(b.empirical_prob >= a.empirical_prob - 2 * math.hypot(a.stderr, b.stderr) for a, b in zip(runs, runs[1:]))
    ok = abs(target - 19 / 3) < 1e-14 and abs(mean_y - 19 / 3) < 1e-3 and freqs[-1] >= 0.99 and mono
    verdict(4, ok, f"exact mean at n=1e5 {mean_y:.7f} vs 19/3; frequencies {freqs}; nondecreasing within 2se: {mono}")


def _kl_oracle(mu1, v1, mu2, v2, n, rng):
    y = mu1 + np.sqrt(v1) * rng.standard_normal((n, len(mu1)))
    d = 0.5 * np.sum(np.log(v2 / v1) + (y - mu2) ** 2 / v2 - (y - mu1) ** 2 / v1, axis=1)
    return d.mean(), d.std(ddof=1) / math.sqrt(n)


def test_criterion_5_oracles():
    # (a) recursive update vs direct convolution
    xs = np.random.default_rng(0).normal(0, 2, 10_000)
    rec = HeatingChannel(GEOM, 1.0, seed=1, history="recursive").transmit(xs).theta
    full = HeatingChannel(GEOM, 1.0, seed=1, history="direct", horizon=10_000).transmit(xs).theta
    rel_a = float(np.max(np.abs(rec - full) / full))

    # (b) closed-form KL vs density-ratio Monte Carlo
    rng = np.random.default_rng(1)
    zs = []
    for _ in range(20):
        k = int(rng.integers(1, 6))
        mu1, mu2 = rng.normal(size=k), rng.normal(size=k)
        v1, v2 = rng.uniform(0.3, 3.0, k), rng.uniform(0.3, 3.0, k)
        est, se = _kl_oracle(mu1, v1, mu2, v2, 1_000_000, rng)
        zs.append(abs(gaussian_kl(mu1, v1, mu2, v2) - est) / se)
    ok_b = max(zs) < 3

    # (c) decoder vs exhaustive argmin; ties checked by frequency
    rng = np.random.default_rng(2)
    mismatches, tie_hits, tie_draws, tie_outside = 0, 0, 0, 0
    for i in range(1_000):
        M, m = int(rng.integers(2, 65)), int(rng.integers(1, 7))
        grid = rng.normal(size=(M, m))
        y = rng.normal(size=m)
        d = np.sum((grid - y) ** 2, axis=1)
        j = int(np.argmin(d))
        tie = i % 10 == 0
        if tie:
            other = (j + 1 + int(rng.integers(0, M - 1))) % M
            grid[other] = grid[j]
        cb = Codebook(M, m, 1, 1.0, i, 1, grid, np.random.default_rng(i))
        if not tie:
            mismatches += nn_decode(cb, y) != j + 1
            continue
        lo = min(j, other) + 1
        picks = np.array([nn_decode(cb, y) for _ in range(200)])
        tie_outside += int(np.sum((picks != j + 1) & (picks != other + 1)))
        tie_hits += int(np.sum(picks == lo))
        tie_draws += picks.size
    freq = tie_hits / tie_draws
    ok_c = mismatches == 0 and tie_outside == 0 and abs(freq - 0.5) < 3 * math.sqrt(0.25 / tie_draws)

    # (d) thermal model vs discrete convolution of the lumped response
    params = ThermalParams(tau=1e-3, c_h=2e-3, rho_th=0.9, t_e=290.0, lambda_w=0.01, eta=0.7)
    prof, sigma2 = profile_from_physics(params)
    x = np.random.default_rng(3).normal(0, 3, 200)
    theta2 = HeatingChannel(prof, sigma2, history="direct", horizon=200).transmit(x).theta ** 2
    g = params.tau / (params.rho_th * params.c_h)
    kernel = params.tau / params.c_h * np.exp(-g * np.arange(1, 200))
    temps = params.t_e + np.concatenate([[0.0], np.convolve(params.eta * x**2, kernel)[:199]])
    rel_d = float(np.max(np.abs(theta2 - params.lambda_w * temps) / (params.lambda_w * temps)))

    ok = rel_a <= 1e-10 and ok_b and ok_c and rel_d <= 1e-12
    verdict(
        5,
        ok,
        f"(a) rel err {rel_a:.2g}; (b) max |z| {max(zs):.2f} over 20; (c) {mismatches} mismatches, "
        f"tie frequency {freq:.4f} over {tie_draws}; (d) rel err {rel_d:.2g}",
    )


def test_criterion_6_leakage():
    vals = [leakage_bound(b, 2, 1.0, GEOM) for b in range(0, 61)]
    mono = all(b <= a for a, b in zip(vals, vals[1:]))
    verdict(6, mono and vals[60] < 1e-6, f"bound at b=60 {vals[60]:.3g} nats; nonincreasing over b=0..60: {mono}")


def test_criterion_7_mixture_trend():
    L, xi = 4, 1.0
    cfg = OnOffConfig(xi, 1.0, L, 1.0, GEOM)
    mean1, var1, var0 = onoff_covariances(cfg)
    kl = gaussian_kl(mean1, var1, np.zeros(L), var0)
    deltas = [1e-1, 1e-2, 1e-3, 1e-4]
    reps = [mixture_kl_mc(d, xi, L, GEOM, 1.0, 1_000_000, seed=70 + i) for i, d in enumerate(deltas)]
    ratio = [r.estimate / d for r, d in zip(reps, deltas)]
    se = [r.stderr / d for r, d in zip(reps, deltas)]
    dec = all(b < a for a, b in zip(ratio, ratio[1:]))
    small = ratio[-1] + 3 * se[-1] < 0.05 * kl
    verdict(7, dec and small, f"D/delta {[f'{r:.4g}' for r in ratio]}, last se {se[-1]:.2g}, 0.05*KL {0.05 * kl:.4g}")
