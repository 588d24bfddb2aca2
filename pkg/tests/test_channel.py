import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heatchannel.channel import HeatingChannel, NoiseModel, direct_horizon, interference, simulate
from heatchannel.errors import InvalidParams, ModeMismatch
from heatchannel.profiles import HeatProfile, ThermalParams, profile_from_physics


def theta2_oracle(profile, sigma2, xs):
    """Full-history double loop."""
    xs = np.asarray(xs, dtype=float)
    out = np.empty(len(xs))
    for k in range(len(xs)):
        s = sigma2
        for l in range(k):
            s += profile.alpha(k - l) * xs[l] ** 2
        out[k] = s
    return out


class TestNoiseStd:
    def test_initial_is_sigma(self):
        ch = HeatingChannel(HeatProfile.geometric(0.5), 2.0)
        assert ch.noise_std() == pytest.approx(math.sqrt(2.0))

    def test_one_past_symbol(self):
        ch = HeatingChannel(HeatProfile.geometric(0.5), 1.0)
        ch.step(2.0)
        assert ch.noise_std() == pytest.approx(math.sqrt(3.0), rel=1e-15)

    def test_silent_inputs(self):
        ch = HeatingChannel(HeatProfile.subgeometric(0.5, 2.0), 1.5, seed=3)
        tx = ch.transmit(np.zeros(50))
        np.testing.assert_allclose(tx.theta, math.sqrt(1.5))

    def test_even_ones_skips_odd_lag(self):
        ch = HeatingChannel(HeatProfile.even_ones(), 1.0)
        ch.step(1.0)
        assert ch.noise_std() == 1.0
        ch.step(0.0)
        assert ch.noise_std() == pytest.approx(math.sqrt(2.0))

    def test_sigma2_must_be_positive(self):
        with pytest.raises(InvalidParams):
            HeatingChannel(HeatProfile.zero(), 0.0)


class TestModes:
    def test_recursive_needs_geometric(self):
        with pytest.raises(ModeMismatch):
            HeatingChannel(HeatProfile.even_ones(), 1.0, history="recursive")

    def test_auto_picks_recursive_for_geometric(self):
        assert HeatingChannel(HeatProfile.geometric(0.3), 1.0).history == "recursive"
        assert HeatingChannel(HeatProfile.odd_ones(), 1.0).history == "direct"

    def test_recursive_matches_full_history(self):
        rng = np.random.default_rng(0)
        xs = rng.normal(0, 3, 10_000)
        prof = HeatProfile.geometric(0.8, scale=1.7)
        rec = HeatingChannel(prof, 1.0, seed=1, history="recursive").transmit(xs)
        full = HeatingChannel(prof, 1.0, seed=1, history="direct", horizon=10_000).transmit(xs)
        np.testing.assert_allclose(rec.theta, full.theta, rtol=1e-10)

    @pytest.mark.parametrize(
        "profile",
        [HeatProfile.even_ones(), HeatProfile.odd_ones(), HeatProfile.explicit([0.4, 0.0, 0.3]), HeatProfile.subgeometric(0.7, 1.5)],
        ids=lambda p: p.label(),
    )
    def test_direct_matches_oracle(self, profile):
        rng = np.random.default_rng(5)
        xs = rng.normal(0, 2, 120)
        tx = HeatingChannel(profile, 0.7, seed=2).transmit(xs)
        np.testing.assert_allclose(tx.theta**2, theta2_oracle(profile, 0.7, xs), rtol=1e-12)

    @pytest.mark.parametrize("H", [0, 1, 3, 8, 15])
    def test_truncation_bound(self, H):
        c, q = 1.3, 0.6
        prof = HeatProfile.geometric(q, scale=c)
        rng = np.random.default_rng(H)
        xs = rng.uniform(-2, 2, 60)
        trunc = HeatingChannel(prof, 1.0, history="direct", horizon=H).transmit(xs).theta ** 2
        full = theta2_oracle(prof, 1.0, xs)
        bound = c * q ** (H + 1) / (1 - q) * np.max(xs**2)
        assert np.all(np.abs(trunc - full) <= bound + 1e-12)

    def test_default_horizon_certifies_tolerance(self):
        prof = HeatProfile.geometric(0.9)
        H = direct_horizon(prof, 1.0)
        assert 0.9 ** (H + 1) / 0.1 <= 1e-9
        assert 0.9 ** H / 0.1 > 1e-9

    def test_full_history_for_alternating_profiles(self):
        assert direct_horizon(HeatProfile.even_ones(), 1.0) is None
        assert direct_horizon(HeatProfile.zero(), 1.0) == 0


class TestStep:
    def test_injected_noise(self):
        ch = HeatingChannel(HeatProfile.geometric(0.5), 1.0)
        y1, th1 = ch.step(2.0, u=0.3)
        y2, th2 = ch.step(0.0, u=-1.1)
        assert (y1, th1) == pytest.approx((2.3, 1.0))
        assert y2 == pytest.approx(-1.1 * math.sqrt(3.0), rel=1e-15)

    def test_silent_transmitter_is_white(self):
        ch = HeatingChannel(HeatProfile.geometric(0.5), 2.0, seed=11)
        y = ch.transmit(np.zeros(100_000)).y
        n = y.size
        assert abs(y.mean()) < 3 * math.sqrt(2.0 / n)
        # var of the sample variance of N(0, s2) is 2 s2^2 / n
        assert abs(y.var() - 2.0) < 3 * math.sqrt(2 * 4.0 / n)

    def test_zero_profile_is_awgn(self):
        xs = np.linspace(-1, 1, 200)
        tx = HeatingChannel(HeatProfile.zero(), 0.5, seed=42).transmit(xs)
        ref = xs + math.sqrt(0.5) * np.random.default_rng(42).standard_normal(200)
        np.testing.assert_allclose(tx.y, ref, rtol=0, atol=1e-15)

    def test_same_seed_same_outputs(self):
        xs = np.random.default_rng(1).normal(size=100)
        a = HeatingChannel(HeatProfile.odd_ones(), 1.0, seed=9).transmit(xs)
        b = HeatingChannel(HeatProfile.odd_ones(), 1.0, seed=9).transmit(xs)
        np.testing.assert_array_equal(a.y, b.y)


class TestTransmit:
    def test_empty(self):
        tx = HeatingChannel(HeatProfile.zero(), 1.0).transmit([])
        assert tx.y.size == 0 and tx.mean_power == 0.0

    def test_matches_repeated_step(self):
        xs = np.random.default_rng(2).normal(0, 2, 1000)
        a = HeatingChannel(HeatProfile.geometric(0.7), 1.0, noise=NoiseModel.ar1(0.4), seed=5).transmit(xs)
        ch = HeatingChannel(HeatProfile.geometric(0.7), 1.0, noise=NoiseModel.ar1(0.4), seed=5)
        b = np.array([ch.step(x) for x in xs])
        np.testing.assert_array_equal(a.y, b[:, 0])
        np.testing.assert_array_equal(a.theta, b[:, 1])

    def test_power_check(self):
        tx = HeatingChannel(HeatProfile.zero(), 1.0).transmit([1.0, 3.0])
        assert tx.mean_power == 5.0
        assert tx.power_ok(5.0) and not tx.power_ok(4.9)


class TestMonotonicity:
    @settings(max_examples=40, deadline=None)
    @given(
        xs=st.lists(st.floats(-5, 5), min_size=2, max_size=30),
        extra=st.floats(0.1, 5),
        pos=st.integers(0, 29),
    )
    def test_theta_nondecreasing_in_past_power(self, xs, extra, pos):
        pos = pos % len(xs)
        prof = HeatProfile.explicit([0.3, 0.0, 0.8, 0.1])
        base = theta2_oracle(prof, 1.0, xs)
        bumped = list(xs)
        bumped[pos] = math.copysign(abs(bumped[pos]) + extra, bumped[pos] or 1.0)
        more = theta2_oracle(prof, 1.0, bumped)
        assert np.all(more >= base - 1e-12)
        assert np.all(base >= 1.0)


class TestNoiseModel:
    def test_ar1_coefficient_range(self):
        with pytest.raises(InvalidParams):
            NoiseModel.ar1(1.0)

    def test_iid_unit_variance(self):
        u = NoiseModel.iid().sample(np.random.default_rng(0), 1_000_000)
        assert abs(u.var() - 1) < 3 * math.sqrt(2 / u.size)

    def test_ar1_unit_variance_and_autocorrelation(self):
        a = 0.6
        n = 1_000_000
        u = NoiseModel.ar1(a).sample(np.random.default_rng(1), n)
        # AR(1) long-run variance inflation for the mean of u^2: (1 + a^2)/(1 - a^2)
        se_var = math.sqrt(2 * (1 + a**2) / (1 - a**2) / n)
        assert abs(u.var() - 1) < 3 * se_var
        r1 = np.mean(u[1:] * u[:-1]) / np.mean(u * u)
        se_r = math.sqrt((1 - a**2) / n)
        assert abs(r1 - a) < 3 * se_r

    def test_vector_and_scalar_draws_agree(self):
        m = NoiseModel.ar1(0.3)
        v = m.sample(np.random.default_rng(4), 20)
        rng = np.random.default_rng(4)
        prev = None
        s = []
        for _ in range(20):
            prev = m.next(rng, prev)
            s.append(prev)
        np.testing.assert_allclose(v, s, rtol=1e-13)


class TestSimulate:
    @pytest.mark.parametrize(
        "profile",
        [HeatProfile.geometric(0.5, 2.0), HeatProfile.odd_ones(), HeatProfile.subgeometric(0.6, 1.5), HeatProfile.zero()],
        ids=lambda p: p.label(),
    )
    def test_matches_streaming_channel(self, profile):
        xs = np.random.default_rng(3).normal(0, 2, 500)
        y, th = simulate(profile, 1.3, xs, np.random.default_rng(8), NoiseModel.ar1(0.5))
        tx = HeatingChannel(profile, 1.3, NoiseModel.ar1(0.5), seed=8, history="direct", horizon=500).transmit(xs)
        np.testing.assert_allclose(th, tx.theta, rtol=1e-10)
        np.testing.assert_allclose(y, tx.y, rtol=1e-9, atol=1e-12)

    def test_batched_rows(self):
        xs = np.random.default_rng(0).normal(size=(4, 50))
        prof = HeatProfile.even_ones()
        got = interference(prof, xs**2)
        for row, x in zip(got, xs):
            np.testing.assert_allclose(row + 1.0, theta2_oracle(prof, 1.0, x), rtol=1e-12)


class TestPhysicsOracle:
    def test_theta_matches_temperature_convolution(self):
        params = ThermalParams(tau=1e-3, c_h=2e-3, rho_th=0.9, t_e=290.0, lambda_w=0.01, eta=0.7)
        prof, sigma2 = profile_from_physics(params)
        x = np.random.default_rng(12).normal(0, 3, 64)
        theta2 = HeatingChannel(prof, sigma2, history="direct", horizon=64).transmit(x).theta ** 2
        heat = params.eta * x**2
        temps = np.empty(64)
        for k in range(64):
            t = params.t_e
            for l in range(k):
                t += params.tau / params.c_h * math.exp(-params.tau * (k - l) / (params.rho_th * params.c_h)) * heat[l]
            temps[k] = t
        np.testing.assert_allclose(theta2, params.lambda_w * temps, rtol=1e-12)
