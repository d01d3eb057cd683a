import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

import wave_checks
from dualqr.dual_core import DualMatrix
from dualqr.real_backend import qr_real
from dualqr.waves import (
    WaveField,
    WaveMode,
    WaveParams,
    gaussian_mode,
    identify,
    noise_floor,
    params_from_dict,
    params_to_dict,
    preset,
    range_residual,
    simulate,
    to_dual_series,
    with_noise,
)


def sv_ratios(x):
    s = np.linalg.svd(x, compute_uv=False)
    return s / s[0]


def run(params, k=8):
    d = to_dual_series(simulate(params))
    return identify(d, min(k, *d.shape), grid=params.grid, seed=params.seed)


# gaussian_mode


def test_gaussian_peak_and_symmetry():
    g = gaussian_mode((50, 100), (25, 50), 3.0).reshape(50, 100)
    assert g[25, 50] == 1.0
    for delta in (1, 4, 9):
        assert g[25 + delta, 50] == g[25 - delta, 50]
        assert g[25, 50 + delta] == g[25, 50 - delta]


def test_gaussian_integral():
    sigma = 3.0
    total = gaussian_mode((50, 100), (25, 50), sigma).sum()
    assert total == pytest.approx(2 * math.pi * sigma**2, rel=0.01)


def test_gaussian_rejects_outside_center():
    with pytest.raises(ValueError):
        gaussian_mode((10, 10), (10, 3), 1.0)


# parameters


@pytest.mark.parametrize(
    "bad",
    [
        dict(modes=(WaveMode((1, 1), (1, 1), sigma=0.0),)),
        dict(frames=1),
        dict(modes=(WaveMode((1, 1), (50, 1), sigma=1.0),)),
    ],
)
def test_params_validation(bad):
    base = dict(grid=(10, 10), modes=(WaveMode((1, 1), (1, 1), sigma=1.0),), frames=10)
    base.update(bad)
    with pytest.raises(ValueError):
        WaveParams(**base)


def test_params_dict_round_trip():
    p = preset("combo", noise_peak=1e-3, seed=4)
    assert params_from_dict(params_to_dict(p)) == p
    with pytest.raises(ValueError):
        params_from_dict({"grid": [3, 3]})


# simulate


def test_first_frame_is_twice_weighted_sum():
    p = preset("combo", noise_peak=0.0)
    x = simulate(p).ensemble
    want = sum(2 * m.weight * gaussian_mode(p.grid, m.center_c, m.sigma) for m in p.modes)
    assert np.array_equal(x[:, 0], want)


def test_rank_dichotomy():
    standing = simulate(preset("standing", noise_peak=0.0)).ensemble
    assert sv_ratios(standing)[1] <= 1e-10
    r = sv_ratios(simulate(preset("traveling", noise_peak=0.0)).ensemble)
    assert r[1] >= 0.1 and r[2] <= 1e-10


def test_noise_is_seeded():
    a = simulate(preset("standing", 1e-3, 3)).ensemble
    b = simulate(preset("standing", 1e-3, 3)).ensemble
    c = simulate(preset("standing", 1e-3, 4)).ensemble
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    noise = a - simulate(preset("standing", 0.0)).ensemble
    assert noise.std() == pytest.approx(1e-3, rel=0.02)


def test_damping_envelope():
    p = WaveParams((5, 5), (WaveMode((2, 2), (2, 2), 1.0, omega=0.0, gamma=-0.1),), frames=4)
    x = simulate(p).ensemble
    assert_allclose(x[12], 2 * np.exp(-0.1 * np.arange(4)))


# to_dual_series


def test_constant_field_has_zero_derivative():
    d = to_dual_series(WaveField(np.ones((6, 5)), 1.0, (2, 3)))
    assert np.array_equal(d.infinitesimal, np.zeros((6, 5)))


@pytest.mark.parametrize("frames", [2, 3, 7])
def test_linear_ramp_derivative(frames):
    v = np.arange(6.0) - 2.5
    dt = 0.5
    x = np.outer(v, np.arange(frames) * dt)
    d = to_dual_series(WaveField(x, dt, (2, 3)))
    assert_allclose(d.infinitesimal, np.repeat(v[:, None], frames, axis=1), atol=1e-12)


def test_too_few_frames():
    with pytest.raises(ValueError):
        to_dual_series(WaveField(np.ones((4, 1)), 1.0, (2, 2)))


def test_derivative_is_second_order():
    grid, omega, span = (10, 12), 1.3, 4.0
    c = gaussian_mode(grid, (4, 3), 2.0)
    d = gaussian_mode(grid, (5, 8), 2.0)

    def max_error(dt):
        frames = int(round(span / dt)) + 1
        p = WaveParams(grid, (WaveMode((4, 3), (5, 8), 2.0, omega=omega),), frames, dt=dt)
        t = np.arange(frames) * dt
        exact = 2 * omega * (-np.outer(c, np.sin(omega * t)) - np.outer(d, np.cos(omega * t)))
        return np.abs(to_dual_series(simulate(p)).infinitesimal - exact).max()

    ratio = max_error(0.1) / max_error(0.05)
    assert 3.5 <= ratio <= 4.5


# range_residual


def test_range_residual_examples(rng):
    x = simulate(preset("traveling", 0.0)).ensemble
    assert range_residual(DualMatrix(x), 2) == 0.0
    assert range_residual(to_dual_series(WaveField(x, 1.0, (50, 100))), 2) <= 1e-8
    assert range_residual(DualMatrix(x, rng.standard_normal(x.shape)), 2) >= 0.5
    with pytest.raises(ValueError):
        range_residual(DualMatrix(x), 101)


# identify


def test_standing_preset():
    rep = run(preset("standing", 1e-3, 0))
    assert wave_checks.match_report(rep, *wave_checks.EXPECTED["standing"]) == []
    assert rep.backend == "dqrcp"
    # a traveling mode rotates at omega = 2 pi / 100 per frame, so ||Q_i|| = omega there
    assert np.linalg.norm(rep.modes.infinitesimal[:, 0]) <= 0.1 * 2 * math.pi / 100


def test_traveling_preset_noiseless_pairing():
    rep = run(preset("traveling", 0.0))
    assert wave_checks.match_report(rep, *wave_checks.EXPECTED["traveling"]) == []
    m = rep.pairing
    assert m.shape == (2, 2)
    assert abs(m[0, 1] + m[1, 0]) <= 1e-6
    assert abs(m[0, 0]) <= 1e-6 and abs(m[1, 1]) <= 1e-6
    ((a, b),) = wave_checks.pair_cosines(rep)
    assert min(abs(a), abs(b)) >= 0.9 and np.sign(a) == -np.sign(b)


def test_pairs_reference_each_other():
    rep = run(preset("traveling", 1e-3, 2))
    for c in rep.components:
        if c.kind == "traveling":
            mate = rep.components[c.partner]
            assert mate.partner == c.index
            assert np.sign(c.pairing_cosine) == -np.sign(mate.pairing_cosine)


def test_zero_field_gives_empty_report():
    d = to_dual_series(WaveField(np.zeros((50, 10)), 1.0, (5, 10)))
    rep = identify(d, 4, grid=(5, 10))
    assert rep.components == []
    assert rep.as_dict()["components"] == []


def test_identify_argument_checks():
    d = to_dual_series(simulate(preset("standing", 0.0)))
    with pytest.raises(ValueError):
        identify(d, 0, grid=(50, 100))
    with pytest.raises(ValueError):
        identify(d, 101, grid=(50, 100))
    with pytest.raises(ValueError):
        identify(d, 2, grid=(10, 10))


def small_mixture(order):
    modes = [
        WaveMode((6, 6), (6, 6), 1.5, omega=2 * math.pi / 40, weight=4.0),
        WaveMode((6, 20), (14, 20), 1.5, omega=2 * math.pi * 2 / 40, weight=16.0),
        WaveMode((15, 6), (15, 6), 1.5, omega=2 * math.pi * 3 / 40, weight=1.0),
    ]
    return WaveParams((20, 26), tuple(modes[i] for i in order), frames=40)


def kinds_and_peaks(rep):
    return sorted((c.kind, c.peak) for c in rep.components)


def test_permutation_stable():
    base = kinds_and_peaks(run(small_mixture([0, 1, 2])))
    assert sum(k == "traveling" for k, _ in base) == 2
    for order in ([2, 1, 0], [1, 2, 0]):
        assert kinds_and_peaks(run(small_mixture(order))) == base


def test_noise_floor_tracks_noise_level():
    # one strong localized mode plus white noise of known level
    sigma = 0.01
    p = with_noise(preset("standing", 0.0), sigma, 3)
    x = simulate(p).ensemble
    f = qr_real(x, pivot=True, thin=True)
    floor = noise_floor(x, f.q, f.r, f.perm, 1)
    # projection onto a noisy pivot column inflates the residual by <= sqrt(2)
    assert 1.0 <= floor / (sigma * math.sqrt(x.shape[0])) <= 1.5
    assert noise_floor(x, f.q, f.r, f.perm, x.shape[1]) == 0.0


def test_noise_floor_ignores_unexplained_localized_signal():
    p = with_noise(preset("traveling", 0.0), 1e-3, 4)
    x = simulate(p).ensemble
    f = qr_real(x, pivot=True, thin=True)
    # k = 1 leaves the second traveling direction in the residual
    assert noise_floor(x, f.q, f.r, f.perm, 1) < 3e-3 * math.sqrt(x.shape[0])


@pytest.mark.parametrize("noise", [1e-3, 1e-2])
def test_noise_columns_are_dropped(noise):
    rep = run(preset("standing", noise, 5))
    assert len(rep.components) == 1
    rep = run(preset("traveling", noise, 5))
    assert len(rep.components) == 2


def test_snr_threshold_controls_cutoff():
    d = to_dual_series(simulate(preset("traveling", 1e-3, 0)))
    assert len(identify(d, 8, grid=(50, 100), snr=1e9).components) == 0
    assert len(identify(d, 8, grid=(50, 100), snr=0.0).components) == 8


def test_with_noise_replaces_fields():
    p = with_noise(preset("standing", 0.0), 1e-2, 9)
    assert p.noise_peak == 1e-2 and p.seed == 9


@pytest.mark.slow
def test_combo_preset_large_backend():
    rep = run(preset("combo", 1e-3, 0))
    assert rep.backend == "rdqrcp"
    assert wave_checks.match_report(rep, *wave_checks.EXPECTED["combo"]) == []
