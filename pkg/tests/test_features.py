import numpy as np
import pytest

from simvib.errors import InvalidInputError
from simvib.features import (
    FeatureKind,
    StftConfig,
    TIME_FEATURE_NAMES,
    fft_features,
    hann_window,
    stft_features,
    time_features,
)
from simvib.signals import Segment


def seg(x, rate=12000.0):
    return Segment(np.asarray(x, dtype=float), rate)


def naive_dft_magnitude(x):
    """O(N^2) DFT magnitude oracle at the non-negative bins."""
    n = len(x)
    k = np.arange(n // 2 + 1)
    basis = np.exp(-2j * np.pi * np.outer(k, np.arange(n)) / n)
    return np.abs(basis @ x)


def rel_err(a, b):
    return np.max(np.abs(a - b)) / np.max(np.abs(b))


class TestTimeFeatures:
    def test_fourteen_values_in_contract_order(self):
        fv = time_features(seg(np.random.default_rng(0).standard_normal(100)))
        assert fv.kind is FeatureKind.TIME
        assert len(fv) == len(TIME_FEATURE_NAMES) == 14

    def test_constant_segment_closed_forms(self):
        c = 3.0
        fv = time_features(seg(np.full(64, c)))
        named = dict(zip(TIME_FEATURE_NAMES, fv.values))
        assert named["mean"] == c
        assert named["std"] == 0.0
        assert named["rms"] == pytest.approx(c)
        assert named["peak"] == c
        assert named["peak_to_peak"] == 0.0
        assert named["crest_factor"] == pytest.approx(1.0)
        assert named["waveform_length"] == 0.0
        assert named["zero_crossings"] == 0.0
        assert named["mean_abs"] == pytest.approx(c)

    def test_unit_sine_whole_periods(self):
        n = 2000
        x = np.sin(2 * np.pi * 8 * np.arange(n) / n)
        named = dict(zip(TIME_FEATURE_NAMES, time_features(seg(x)).values))
        assert named["rms"] == pytest.approx(1 / np.sqrt(2), abs=1e-4)
        assert named["crest_factor"] == pytest.approx(np.sqrt(2), abs=1e-3)

    def test_gaussian_moments_near_zero(self):
        x = np.random.default_rng(1).standard_normal(200_000)
        named = dict(zip(TIME_FEATURE_NAMES, time_features(seg(x)).values))
        assert abs(named["kurtosis"]) < 0.2
        assert abs(named["skewness"]) < 0.1

    def test_zero_segment_ratios_are_zero_and_flagged(self):
        fv = time_features(seg(np.zeros(32)))
        named = dict(zip(TIME_FEATURE_NAMES, fv.values))
        assert fv.meta["degenerate"] is True
        for name in ("crest_factor", "shape_factor", "impulse_factor", "clearance_factor"):
            assert named[name] == 0.0
        assert np.all(np.isfinite(fv.values))

    def test_scale_equivariance(self):
        x = np.random.default_rng(2).standard_normal(512)
        a, b = (
            dict(zip(TIME_FEATURE_NAMES, time_features(seg(x)).values)),
            dict(zip(TIME_FEATURE_NAMES, time_features(seg(2.5 * x)).values)),
        )
        assert b["rms"] == pytest.approx(2.5 * a["rms"], rel=1e-12)
        assert b["crest_factor"] == pytest.approx(a["crest_factor"], rel=1e-12)
        assert b["shape_factor"] == pytest.approx(a["shape_factor"], rel=1e-12)

    def test_zero_crossings_counts_sign_changes(self):
        named = dict(
            zip(
                TIME_FEATURE_NAMES,
                time_features(seg([1.0, -1.0, 1.0, 1.0, -2.0])).values,
            )
        )
        assert named["zero_crossings"] == 3.0


class TestFftFeatures:
    def test_zero_segment_gives_1001_zeros(self):
        fv = fft_features(seg(np.zeros(2000)))
        assert len(fv) == 1001
        assert np.all(fv.values == 0.0)

    def test_cosine_concentrates_at_its_bin(self):
        n, k = 2000, 50
        x = np.cos(2 * np.pi * k * np.arange(n) / n)
        mags = fft_features(seg(x)).values
        assert mags[k] == pytest.approx(n / 2, rel=1e-12)
        others = np.delete(mags, k)
        assert np.max(others) <= 1e-6

    def test_matches_naive_dft_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            x = rng.standard_normal(2000)
            assert rel_err(fft_features(seg(x)).values, naive_dft_magnitude(x)) < 1e-9

    @pytest.mark.parametrize("n", [7, 16, 255, 1001])
    def test_output_length_is_half_plus_one(self, n):
        assert len(fft_features(seg(np.ones(n)))) == n // 2 + 1

    def test_parseval_identity(self):
        x = np.random.default_rng(4).standard_normal(2000)
        mags = fft_features(seg(x)).values
        spectral = (mags[0] ** 2 + 2 * np.sum(mags[1:-1] ** 2) + mags[-1] ** 2) / 2000
        assert spectral == pytest.approx(float(np.sum(x**2)), rel=1e-8)

    def test_circular_shift_leaves_magnitudes_unchanged(self):
        x = np.random.default_rng(5).standard_normal(2000)
        a = fft_features(seg(x)).values
        b = fft_features(seg(np.roll(x, 137))).values
        assert np.max(np.abs(a - b)) / np.max(np.abs(a)) < 1e-9


class TestStftFeatures:
    def test_default_shape_for_2000_samples(self):
        fv = stft_features(seg(np.zeros(2000)))
        assert len(fv) == 14 * 129 == 1806
        assert np.all(fv.values == 0.0)
        assert fv.meta["n_frames"] == 14

    def test_stationary_sine_has_constant_dominant_bin(self):
        n = 2000
        x = np.sin(2 * np.pi * 1000.0 * np.arange(n) / 12000.0)
        fv = stft_features(seg(x))
        frames = fv.values.reshape(14, 129)
        dominant = np.argmax(frames, axis=1)
        assert np.all(dominant == dominant[0])

    def test_frames_match_independent_windowed_dfts(self):
        cfg = StftConfig()
        x = np.random.default_rng(6).standard_normal(2000)
        fv = stft_features(seg(x), cfg)
        frames = fv.values.reshape(-1, cfg.nfft // 2 + 1)
        window = hann_window(cfg.window_len)
        for f in range(frames.shape[0]):
            chunk = x[f * cfg.hop : f * cfg.hop + cfg.window_len] * window
            oracle = np.abs(np.fft.rfft(chunk, n=cfg.nfft))
            assert rel_err(frames[f], oracle) < 1e-9

    def test_window_longer_than_segment_rejected(self):
        with pytest.raises(InvalidInputError):
            stft_features(seg(np.ones(100)), StftConfig(window_len=256, hop=128))

    def test_nfft_zero_padding(self):
        cfg = StftConfig(window_len=64, hop=32, nfft=128)
        fv = stft_features(seg(np.random.default_rng(7).standard_normal(256)), cfg)
        assert fv.meta["nfft"] == 128
        assert len(fv) == ((256 - 64) // 32 + 1) * 65

    def test_config_validation(self):
        with pytest.raises(InvalidInputError):
            StftConfig(window_len=64, hop=65)
        with pytest.raises(InvalidInputError):
            StftConfig(window_len=64, hop=32, nfft=32)
        with pytest.raises(InvalidInputError):
            StftConfig(window="hamming")

    def test_hann_window_is_periodic(self):
        w = hann_window(8)
        assert w[0] == 0.0
        assert w[4] == pytest.approx(1.0)
        # periodic form: w[k] = 0.5 - 0.5 cos(2 pi k / 8), so no trailing zero
        assert w[-1] > 0.0
