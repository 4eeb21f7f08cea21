"""Mean/noise formulas of the eight synthetic settings."""

import numpy as np
import pytest

from confselect import ContractError, DgpSetting, generate
from confselect.dgps import mean_function, noise_scale


def covariate_row(**coords):
    x = np.zeros((1, 20))
    for name, value in coords.items():
        x[0, int(name[1:]) - 1] = value
    return x


def test_mean_setting_1():
    # positive gate: 4 * 0.5 * max(0.5, 0.1) = 1.0
    x = covariate_row(x1=0.5, x2=0.3, x3=0.1)
    assert mean_function(DgpSetting(1), x)[0] == pytest.approx(1.0)
    # negative gate: 4 * 0.5 * min(0.1, -0.5) = -1.0
    x = covariate_row(x1=0.5, x2=-0.3, x3=0.1)
    assert mean_function(DgpSetting(1), x)[0] == pytest.approx(-1.0)


def test_mean_setting_2():
    # 5 * (0.4*0.5 + exp(0)) = 5 * 1.2 = 6.0
    x = covariate_row(x1=0.4, x2=0.5, x4=1.0)
    assert mean_function(DgpSetting(2), x)[0] == pytest.approx(6.0)


def test_mean_setting_5():
    x = covariate_row(x1=0.8, x2=0.5, x4=0.75)
    assert mean_function(DgpSetting(5), x)[0] == pytest.approx(0.8 * 1.0)
    x = covariate_row(x1=0.8, x2=0.5, x4=0.25)  # gate closed
    assert mean_function(DgpSetting(5), x)[0] == 0.0


def test_mean_setting_6():
    # 2 * (0 + 1 + exp(0) - 1) = 2.0
    x = covariate_row(x1=0.5, x2=0.0, x3=1.0, x4=1.0)
    assert mean_function(DgpSetting(6), x)[0] == pytest.approx(2.0)


def test_settings_2_to_4_share_mean_and_6_to_8_share_mean():
    rng = np.random.default_rng(0)
    x = rng.uniform(-1, 1, (50, 20))
    m2 = mean_function(DgpSetting(2), x)
    for sid in (3, 4):
        np.testing.assert_array_equal(mean_function(DgpSetting(sid), x), m2)
    m6 = mean_function(DgpSetting(6), x)
    for sid in (7, 8):
        np.testing.assert_array_equal(mean_function(DgpSetting(sid), x), m6)


def test_noise_scale_variance_reading():
    mu = np.zeros(3)
    assert noise_scale(DgpSetting(1, sigma=2.0), mu)[0] == 2.0
    assert noise_scale(DgpSetting(2, sigma=2.0), mu)[0] == 3.0  # sqrt(2.25*4)
    assert noise_scale(DgpSetting(5, sigma=2.0), mu)[0] == 2.0
    assert noise_scale(DgpSetting(6, sigma=2.0), mu)[0] == 3.0


def test_noise_scale_literal_reading_switch():
    mu = np.zeros(1)
    assert noise_scale(DgpSetting(1, 2.0, squared_entries_as_sd=True), mu)[0] == 4.0
    assert noise_scale(DgpSetting(2, 2.0, squared_entries_as_sd=True), mu)[0] == 9.0
    # unsquared entries unaffected by the switch
    assert noise_scale(DgpSetting(6, 2.0, squared_entries_as_sd=True), mu)[0] == 3.0


def test_noise_scale_mean_dependent():
    setting = DgpSetting(3, sigma=1.0)
    assert noise_scale(setting, np.array([1.5]))[0] == pytest.approx((5.5 - 1.5) / 2)
    assert noise_scale(setting, np.array([-2.0]))[0] == pytest.approx((5.5 - 2.0) / 2)


def test_noise_scale_overlapping_indicators_sum():
    # on 1 <= |mu| < 2 both terms of settings 4/8 are active, as written
    setting = DgpSetting(4, sigma=1.0)
    assert noise_scale(setting, np.array([1.5]))[0] == pytest.approx(
        0.25 * 1.5**2 + 0.5 * 1.5
    )
    assert noise_scale(setting, np.array([0.5]))[0] == pytest.approx(0.25 * 0.25)
    assert noise_scale(setting, np.array([3.0]))[0] == pytest.approx(1.5)
    np.testing.assert_allclose(
        noise_scale(setting, np.array([1.5, 0.5, 3.0])),
        noise_scale(DgpSetting(8, sigma=1.0), np.array([1.5, 0.5, 3.0])),
    )


def test_generate_shapes_and_support():
    x, mu, y = generate(DgpSetting(2, 1.0), 500, seed=4)
    assert x.shape == (500, 20)
    assert mu.shape == (500,) and y.shape == (500,)
    assert np.all((x >= -1) & (x <= 1))
    np.testing.assert_array_equal(mu, mean_function(DgpSetting(2), x))


def test_generate_noise_magnitude():
    # homoscedastic setting: residual spread matches the configured scale
    _, mu, y = generate(DgpSetting(1, sigma=0.7), 40_000, seed=8)
    assert np.std(y - mu) == pytest.approx(0.7, rel=0.03)


def test_generate_reproducible_and_seed_sensitive():
    a = generate(DgpSetting(3, 1.0), 100, seed=11)
    b = generate(DgpSetting(3, 1.0), 100, seed=11)
    c = generate(DgpSetting(3, 1.0), 100, seed=12)
    for left, right in zip(a, b):
        np.testing.assert_array_equal(left, right)
    assert np.any(a[0] != c[0])


def test_mu_override():
    _, mu, y = generate(DgpSetting(1, 1.0), 200, seed=1, mu_override=-5.0)
    assert np.all(mu == -5.0)
    assert np.mean(y > 0) < 0.01


def test_setting_validation():
    with pytest.raises(ContractError):
        DgpSetting(9)
    with pytest.raises(ContractError):
        DgpSetting(1, sigma=0.0)
    with pytest.raises(ContractError):
        generate(DgpSetting(1), 0, seed=1)
