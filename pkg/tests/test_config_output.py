import json
import math

import numpy as np
import pytest

from fastlight import C_LIGHT, ConfigError, ValidationError
from fastlight.config import (
    SimulationConfig,
    apply_overrides,
    config_for_figure,
    parse_config,
    serialize_config,
)
from fastlight.errors import FastlightError
from fastlight.output import RunManifest, sha256_of, write_series


class TestParseConfig:
    def test_empty_text_gives_rb_defaults(self):
        cfg = parse_config("")
        assert cfg.physical["g"] == 266.0
        assert cfg.physical["t2star"] == 0.733
        assert cfg.physical["tau"] == 0.1
        assert cfg.physical["density"] == 8.0e10
        assert cfg.physical["wavelength"] == 7.8e-5
        assert cfg.medium["x1"] == pytest.approx(2 * C_LIGHT * 0.1)
        assert cfg.pulse["present"] is True
        assert cfg.pulse["cutoff_half_width"] == 10.0
        assert cfg.mode() == "propagate"

    def test_sections_and_values(self):
        cfg = parse_config(
            """
            # comment line
            [physical]
            g = 100.0   # inline comment
            tau = 0.2

            [run]
            seed = 99
            """
        )
        assert cfg.physical["g"] == 100.0
        assert cfg.physical["tau"] == 0.2
        assert cfg.run["seed"] == 99

    def test_negative_coupling_rejected(self):
        with pytest.raises(ValidationError, match=">= 0"):
            parse_config("[physical]\ng = -1\n")

    def test_unknown_section_with_line_number(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config("\n[nonsense]\n")

    def test_unknown_key_with_line_number(self):
        with pytest.raises(ConfigError, match="line 3"):
            parse_config("\n[physical]\nspeed = 3\n")

    def test_bad_value_with_line_number(self):
        with pytest.raises(ConfigError, match="line 2"):
            parse_config("[physical]\ng = fast\n")

    def test_key_outside_section(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_config("g = 1\n")

    def test_cutoff_ten_widths(self):
        cfg = parse_config("[pulse]\ncutoff_half_width = 10\n")
        pulse = cfg.pulse_spec()
        assert pulse.cutoff_half_width == 10.0
        assert pulse.support == (-1.0, 1.0)

    def test_float_list(self):
        cfg = parse_config("[sf]\nlengths = 1.0, 2.0, 3.0\n[pulse]\npresent = false\n[run]\nmode = sweep\n")
        assert cfg.sf["lengths"] == (1.0, 2.0, 3.0)

    def test_mode_pulse_consistency(self):
        with pytest.raises(ValidationError, match="no input pulse"):
            parse_config("[run]\nmode = sf\n")
        with pytest.raises(ValidationError, match="requires an input pulse"):
            parse_config("[run]\nmode = propagate\n[pulse]\npresent = false\n")

    def test_fig_number_validation(self):
        with pytest.raises(ValidationError):
            parse_config("[run]\nmode = fig\n[fig]\nnumber = 3\n")

    def test_default_sweep_lengths_span_half_to_five_ctau(self):
        cfg = parse_config("")
        lengths = cfg.sweep_lengths()
        ctau = C_LIGHT * cfg.physical["tau"]
        assert len(lengths) == 9
        assert lengths[0] == pytest.approx(0.5 * ctau)
        assert lengths[-1] == pytest.approx(5.0 * ctau)


class TestRoundTrip:
    def test_default_round_trip(self):
        cfg = parse_config("")
        assert parse_config(serialize_config(cfg)) == cfg

    def test_modified_round_trip(self):
        cfg = parse_config(
            "[physical]\ng = 123.456789012345\n[run]\nmode = sf\nseed = 17\n"
            "[pulse]\npresent = false\n[sf]\nlengths = 0.7, 1.3\n"
        )
        assert parse_config(serialize_config(cfg)) == cfg


class TestOverrides:
    def test_override_values(self):
        cfg = apply_overrides(parse_config(""), ["physical.g=300", "run.seed=5"])
        assert cfg.physical["g"] == 300.0
        assert cfg.run["seed"] == 5

    def test_bad_override_key(self):
        with pytest.raises(ConfigError, match="unknown key"):
            apply_overrides(parse_config(""), ["physical.mass=1"])

    def test_bad_override_shape(self):
        with pytest.raises(ConfigError, match="section.key=value"):
            apply_overrides(parse_config(""), ["justakey"])

    def test_override_revalidates(self):
        with pytest.raises(ValidationError):
            apply_overrides(parse_config(""), ["physical.g=-5"])


class TestFigureConfig:
    def test_fig2_is_analytic_infinite_wings(self):
        cfg = parse_config("[run]\nmode = fig\n[fig]\nnumber = 2\n")
        base = config_for_figure(cfg)
        assert base.mode() == "analytic"
        assert base.pulse["cutoff_half_width"] is None

    def test_fig7_is_seeded_propagate(self):
        cfg = parse_config("[run]\nmode = fig\n[fig]\nnumber = 7\n")
        base = config_for_figure(cfg)
        assert base.mode() == "propagate"
        assert base.run["sf_seed"] is True
        assert base.pulse["cutoff_half_width"] == 10.0

    def test_fig6_is_sweep(self):
        cfg = parse_config("[run]\nmode = fig\n[fig]\nnumber = 6\n")
        base = config_for_figure(cfg)
        assert base.mode() == "sweep"
        assert len(base.sweep_lengths()) == 9

    def test_fig8_is_pure_sf(self):
        cfg = parse_config("[run]\nmode = fig\n[fig]\nnumber = 8\n")
        base = config_for_figure(cfg)
        assert base.mode() == "sf"
        assert base.pulse["present"] is False


class TestWriteSeries:
    def test_header_only_for_empty_rows(self, tmp_path):
        path = write_series(tmp_path / "empty.csv", ["a", "b"], [])
        assert path.read_text() == "a,b\n"

    def test_deterministic_bytes(self, tmp_path):
        rows = [(0.1, 2), (1.0 / 3.0, 4)]
        p1 = write_series(tmp_path / "one.csv", ["x", "n"], rows)
        p2 = write_series(tmp_path / "two.csv", ["x", "n"], rows)
        assert p1.read_bytes() == p2.read_bytes()
        assert b"\r" not in p1.read_bytes()

    def test_full_precision_floats_round_trip(self, tmp_path):
        values = [math.pi, 1 / 3, 2.0**-40, 6.626e-34]
        path = write_series(tmp_path / "prec.csv", ["v"], [(v,) for v in values])
        lines = path.read_text().splitlines()[1:]
        assert [float(s) for s in lines] == values

    def test_ragged_rows_rejected(self, tmp_path):
        with pytest.raises(FastlightError, match="row 1"):
            write_series(tmp_path / "bad.csv", ["a", "b"], [(1, 2), (3,)])


class TestRunManifest:
    def test_checksums_and_payload(self, tmp_path):
        csv = write_series(tmp_path / "data.csv", ["x"], [(1.5,)])
        manifest = RunManifest(mode="propagate", config_text="[physical]", out_dir=str(tmp_path))
        manifest.add_output(csv)
        manifest.grid_sizes["propagate"] = {"n_x": 10, "n_t": 20, "n_detuning": 4}
        path = manifest.write()
        payload = json.loads(path.read_text())
        assert payload["mode"] == "propagate"
        assert payload["outputs"]["data.csv"] == sha256_of(csv)
        assert payload["grid_sizes"]["propagate"]["n_x"] == 10
        assert payload["config"] == "[physical]"
