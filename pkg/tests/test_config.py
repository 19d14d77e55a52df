"""Config parsing tests: defaults, typed conversion, strict unknown-key
rejection, and derived-object construction."""

import numpy as np
import pytest

from gaborfe.audio_io import ParseError
from gaborfe.config import RunConfig, load_config, parse_config


class TestDefaults:
    def test_empty_text_gives_library_defaults(self):
        cfg = parse_config("")
        assert cfg.n_channels == 40
        assert cfg.sample_rate == 16000.0
        assert cfg.kernel_len == 401
        assert cfg.stride == 160
        assert cfg.pool_sigma == 0.4
        assert (cfg.pcen_s, cfg.pcen_alpha, cfg.pcen_delta, cfg.pcen_gamma) == (
            0.04, 0.96, 2.0, 2.0,
        )
        assert cfg.pcen_epsilon == 1e-6
        assert (cfg.loudness_low_db, cfg.loudness_high_db) == (15.0, 30.0)
        assert cfg.loudness_reference == 2e-5
        assert cfg.snr_grid == (0.0, 5.0, 10.0, 15.0, 20.0)
        assert cfg.noise_kinds == ("gaussian", "babble")
        assert cfg.protocol_seeds == (0, 1, 2)

    def test_default_frontend_matches_library_default(self):
        from gaborfe.frontend import default_frontend

        built = parse_config("").frontend()
        lib = default_frontend(40, 16000.0)
        np.testing.assert_array_equal(built.bank.centre_freq, lib.bank.centre_freq)
        np.testing.assert_array_equal(built.bank.fwhm, lib.bank.fwhm)
        np.testing.assert_array_equal(built.pool.sigma, lib.pool.sigma)
        np.testing.assert_array_equal(built.pcen.s, lib.pcen.s)


class TestParsing:
    def test_typed_overrides(self):
        cfg = parse_config(
            """
            n_channels = 8
            sample_rate = 8000
            pool_sigma = 0.25
            snr_grid = 0, 10
            noise_kinds = gaussian
            protocol_seeds = 5,6
            data_root = /tmp/audio
            """
        )
        assert cfg.n_channels == 8 and isinstance(cfg.n_channels, int)
        assert cfg.sample_rate == 8000.0 and isinstance(cfg.sample_rate, float)
        assert cfg.pool_sigma == 0.25
        assert cfg.snr_grid == (0.0, 10.0)
        assert cfg.noise_kinds == ("gaussian",)
        assert cfg.protocol_seeds == (5, 6)
        assert cfg.data_root == "/tmp/audio"

    def test_comments_and_blank_lines(self):
        cfg = parse_config("# full line comment\n\nepochs = 3  # trailing comment\n")
        assert cfg.epochs == 3

    def test_inf_snr_accepted(self):
        cfg = parse_config("snr_grid = inf, 10\n")
        assert cfg.snr_grid[0] == np.inf

    def test_unknown_key_rejected_with_location(self):
        with pytest.raises(ParseError, match=r"<config>:2: unknown config key 'kernel'"):
            parse_config("epochs = 1\nkernel = 401\n")

    def test_bad_syntax_rejected(self):
        with pytest.raises(ParseError, match="key = value"):
            parse_config("epochs: 3\n")

    def test_bad_types_rejected(self):
        with pytest.raises(ParseError, match="expected an integer"):
            parse_config("epochs = many\n")
        with pytest.raises(ParseError, match="expected a number"):
            parse_config("pool_sigma = wide\n")
        with pytest.raises(ParseError, match="expected numbers"):
            parse_config("snr_grid = a,b\n")
        with pytest.raises(ParseError, match="expected integers"):
            parse_config("protocol_seeds = 1.5\n")
        with pytest.raises(ParseError, match="comma-separated list"):
            parse_config("snr_grid = ,\n")

    def test_invalid_configuration_rejected(self):
        with pytest.raises(ParseError, match="invalid configuration"):
            parse_config("pool_sigma = -1\n")
        with pytest.raises(ParseError, match="invalid configuration"):
            parse_config("noise_kinds = pink\n")
        with pytest.raises(ParseError, match="invalid configuration"):
            parse_config("snr_grid = nan\n")
        with pytest.raises(ParseError, match="invalid configuration"):
            parse_config("loudness_low_db = 40\n")  # above high_db
        with pytest.raises(ParseError, match="invalid configuration"):
            parse_config("segment_s = 0\n")

    def test_derived_objects_reflect_overrides(self):
        cfg = parse_config(
            "n_channels = 6\nkernel_len = 101\npool_kernel_len = 101\nstride = 80\n"
            "toy_classes = 2\ntoy_samples_per_class = 5\ntoy_duration_s = 0.2\n"
        )
        fe = cfg.frontend()
        assert fe.n_channels == 6
        assert fe.bank.kernel_len == 101
        assert fe.pool.stride == 80
        spec = cfg.toy_spec()
        assert spec.n_classes == 2
        assert spec.samples_per_class == 5
        assert spec.duration_s == 0.2
        loud = cfg.loudness()
        assert loud.low_db == 15.0


class TestLoadConfig:
    def test_reads_file_and_reports_path(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("epochs = 2\nseed = 9\n")
        cfg = load_config(path)
        assert cfg.epochs == 2 and cfg.seed == 9

        path.write_text("mystery = 1\n")
        with pytest.raises(ParseError, match=r"run\.cfg:1"):
            load_config(path)

    def test_validate_returns_self(self):
        cfg = RunConfig()
        assert cfg.validate() is cfg
