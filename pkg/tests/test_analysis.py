"""Analysis tests: drift algebra, response and gain tables, and exact CSV
round-trips."""

import numpy as np
import pytest

from gaborfe.analysis import (
    drift_report,
    gain_curve_table,
    gaussian_response_table,
    read_drift_csv,
    read_gain_curve_csv,
    read_gaussian_response_csv,
    write_drift_csv,
    write_gain_curve_csv,
    write_gaussian_response_csv,
)
from gaborfe.filterbank import GaussianPoolParams
from gaborfe.frontend import default_frontend
from gaborfe.pcen import PcenParams, gain_curve

DELTA_FIELDS = (
    "centre_freq",
    "centre_freq_hz",
    "fwhm",
    "fwhm_hz",
    "pool_sigma",
    "pcen_s",
    "pcen_alpha",
    "pcen_delta",
    "pcen_gamma",
)


def perturbed_frontend(seed=0, n_channels=8):
    fe = default_frontend(n_channels)
    rng = np.random.default_rng(seed)
    fe.bank.centre_freq = fe.bank.centre_freq + rng.normal(0, 1e-3, n_channels)
    fe.bank.fwhm = fe.bank.fwhm + rng.normal(0, 5e-4, n_channels)
    fe.pool.sigma = fe.pool.sigma + rng.normal(0, 1e-2, n_channels)
    fe.pcen.s = fe.pcen.s + rng.normal(0, 5e-3, n_channels)
    fe.pcen.alpha = fe.pcen.alpha + rng.normal(0, 1e-2, n_channels)
    fe.pcen.delta = fe.pcen.delta + rng.normal(0, 1e-1, n_channels)
    fe.pcen.gamma = fe.pcen.gamma + rng.normal(0, 1e-1, n_channels)
    return fe


class TestDriftReport:
    def test_self_drift_is_zero(self):
        fe = default_frontend(6)
        report = drift_report(fe, fe.copy())
        for name in DELTA_FIELDS:
            np.testing.assert_array_equal(report.deltas[name], np.zeros(6))
        assert report.group_relnorm == {"filters": 0.0, "pooling": 0.0, "pcen": 0.0}

    def test_swapping_arguments_negates_deltas(self):
        init = default_frontend(8)
        trained = perturbed_frontend()
        fwd = drift_report(init, trained)
        rev = drift_report(trained, init)
        for name in DELTA_FIELDS:
            np.testing.assert_allclose(rev.deltas[name], -fwd.deltas[name], rtol=1e-15)

    def test_deltas_are_trained_minus_initial(self):
        init = default_frontend(8)
        trained = perturbed_frontend()
        report = drift_report(init, trained)
        np.testing.assert_array_equal(
            report.deltas["centre_freq"], trained.bank.centre_freq - init.bank.centre_freq
        )
        np.testing.assert_array_equal(
            report.deltas["pcen_gamma"], trained.pcen.gamma - init.pcen.gamma
        )

    def test_hz_columns_scale_with_sample_rate(self):
        init = default_frontend(8)
        trained = perturbed_frontend()
        report = drift_report(init, trained)
        np.testing.assert_allclose(
            report.deltas["centre_freq_hz"], report.deltas["centre_freq"] * 16000.0,
            rtol=1e-15,
        )
        np.testing.assert_allclose(
            report.deltas["fwhm_hz"], report.deltas["fwhm"] * 16000.0, rtol=1e-15
        )

    def test_group_relnorm_formula(self):
        init = default_frontend(8)
        trained = perturbed_frontend()
        report = drift_report(init, trained)
        d = report.deltas
        num = np.sqrt(np.sum(d["centre_freq"] ** 2) + np.sum(d["fwhm"] ** 2))
        den = np.sqrt(np.sum(init.bank.centre_freq**2) + np.sum(init.bank.fwhm**2))
        assert report.group_relnorm["filters"] == pytest.approx(num / den, rel=1e-12)
        num = np.sqrt(
            sum(np.sum(d[f"pcen_{k}"] ** 2) for k in ("s", "alpha", "delta", "gamma"))
        )
        den = np.sqrt(
            sum(
                np.sum(getattr(init.pcen, k) ** 2)
                for k in ("s", "alpha", "delta", "gamma")
            )
        )
        assert report.group_relnorm["pcen"] == pytest.approx(num / den, rel=1e-12)

    def test_single_group_change_isolated(self):
        init = default_frontend(8)
        only_pcen = init.copy()
        only_pcen.pcen.s = only_pcen.pcen.s * 1.5
        report = drift_report(init, only_pcen)
        assert report.group_relnorm["filters"] == 0.0
        assert report.group_relnorm["pooling"] == 0.0
        assert report.group_relnorm["pcen"] > 0.0

    def test_mismatched_inputs_rejected(self):
        with pytest.raises(ValueError, match="channel"):
            drift_report(default_frontend(8), default_frontend(10))
        with pytest.raises(ValueError, match="sample rate"):
            drift_report(default_frontend(8, 16000.0), default_frontend(8, 8000.0))


class TestGaussianResponseTable:
    def test_dc_magnitude_is_one(self):
        pool = GaussianPoolParams(np.array([0.2, 0.4, 0.8]), 101, 80)
        table = gaussian_response_table(pool, [0.0])
        np.testing.assert_allclose(table[:, 0], 1.0, rtol=1e-12)

    def test_matches_direct_dtft(self):
        pool = GaussianPoolParams(np.array([0.3, 0.6]), 101, 80)
        grid = np.linspace(0.0, 0.5, 11)
        table = gaussian_response_table(pool, grid)
        from gaborfe.filterbank import pool_kernels

        kernels = pool_kernels(pool)
        t = np.arange(101) - 50.0
        for c in range(2):
            for j, f in enumerate(grid):
                direct = abs(np.sum(kernels[c] * np.exp(-2j * np.pi * t * f)))
                assert table[c, j] == pytest.approx(direct, rel=1e-12)

    def test_main_lobe_decreases_then_stopband_small(self):
        # strictly decreasing over the main lobe; past it only truncation
        # ripple (a few percent) remains
        pool = GaussianPoolParams(np.array([0.5]), 401, 160)
        lobe = gaussian_response_table(pool, np.linspace(0.0, 0.0025, 12))[0]
        assert np.all(np.diff(lobe) < 0.0)
        stop = gaussian_response_table(pool, np.linspace(0.01, 0.05, 25))[0]
        assert np.max(stop) < 0.06

    def test_wider_sigma_passes_less_high_frequency(self):
        # sigma scales the kernel width in units of the stride
        pool = GaussianPoolParams(np.array([0.2, 0.9]), 401, 160)
        probe = gaussian_response_table(pool, [0.01])
        assert probe[1, 0] < probe[0, 0]

    def test_grid_validation(self):
        pool = GaussianPoolParams(np.array([0.4]), 101, 80)
        with pytest.raises(ValueError, match="0, 0.5"):
            gaussian_response_table(pool, [0.6])
        with pytest.raises(ValueError, match="0, 0.5"):
            gaussian_response_table(pool, [-0.1])
        with pytest.raises(ValueError):
            gaussian_response_table(pool, [])


class TestGainCurveTable:
    def test_rows_match_single_channel_function(self):
        pcen = PcenParams(
            s=np.array([0.04, 0.1]),
            alpha=np.array([0.96, 0.5]),
            delta=np.array([2.0, 1.0]),
            gamma=np.array([2.0, 0.8]),
        )
        grid = np.logspace(-6, 2, 9)
        gains, gains_db = gain_curve_table(pcen, grid)
        for c in range(2):
            _, g, gdb = gain_curve(pcen, c, grid)
            np.testing.assert_array_equal(gains[c], g)
            np.testing.assert_array_equal(gains_db[c], gdb)

    def test_db_column_uses_power_convention(self):
        # the gain scales energy (power) values, so dB is 10*log10
        pcen = PcenParams(np.array([0.04]), np.array([0.96]), np.array([2.0]), np.array([2.0]))
        grid = np.logspace(-4, 1, 7)
        gains, gains_db = gain_curve_table(pcen, grid)
        np.testing.assert_allclose(gains_db, 10.0 * np.log10(gains), rtol=1e-12)


class TestCsvRoundTrips:
    def test_drift_round_trip_exact(self, tmp_path):
        report = drift_report(default_frontend(8), perturbed_frontend())
        path = tmp_path / "drift.csv"
        write_drift_csv(report, path)
        back = read_drift_csv(path)
        for name in DELTA_FIELDS:
            np.testing.assert_array_equal(back.deltas[name], report.deltas[name])
        assert back.group_relnorm == report.group_relnorm

    def test_drift_write_is_deterministic(self, tmp_path):
        report = drift_report(default_frontend(5), perturbed_frontend(n_channels=5))
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_drift_csv(report, a)
        write_drift_csv(report, b)
        assert a.read_bytes() == b.read_bytes()

    def test_drift_rejects_malformed(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("not,a,drift,header\n")
        with pytest.raises(ValueError, match="header"):
            read_drift_csv(path)
        path.write_text("kind,channel,field,value\nwat,0,x,1.0\n")
        with pytest.raises(ValueError, match="unknown drift row"):
            read_drift_csv(path)
        path.write_text("kind,channel,field,value\ndelta,0,centre_freq,0.5\n")
        with pytest.raises(ValueError, match="missing"):
            read_drift_csv(path)

    def test_response_round_trip_exact(self, tmp_path):
        pool = GaussianPoolParams(np.array([0.25, 0.4, 0.7]), 101, 80)
        grid = np.linspace(0.0, 0.5, 17)
        path = tmp_path / "resp.csv"
        write_gaussian_response_csv(pool, grid, path)
        back_grid, back_table = read_gaussian_response_csv(path)
        np.testing.assert_array_equal(back_grid, grid)
        np.testing.assert_array_equal(back_table, gaussian_response_table(pool, grid))

    def test_gain_round_trip_exact(self, tmp_path):
        pcen = PcenParams(
            np.array([0.04, 0.2]), np.array([0.96, 0.5]),
            np.array([2.0, 0.7]), np.array([2.0, 1.3]),
        )
        grid = np.logspace(-6, 2, 13)
        path = tmp_path / "gain.csv"
        write_gain_curve_csv(pcen, grid, path)
        back_grid, back_g, back_db = read_gain_curve_csv(path)
        gains, gains_db = gain_curve_table(pcen, grid)
        np.testing.assert_array_equal(back_grid, grid)
        np.testing.assert_array_equal(back_g, gains)
        np.testing.assert_array_equal(back_db, gains_db)

    def test_response_rejects_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("frequency,magnitude\n")
        with pytest.raises(ValueError, match="header"):
            read_gaussian_response_csv(path)
        with pytest.raises(ValueError, match="header"):
            path.write_text("channel,energy,gain\n")
            read_gain_curve_csv(path)
