"""Config validation diagnostics, CLI exit codes, output formats, determinism."""

import json

import pytest

from urckit import fbl
from urckit.cli import main, run
from urckit.config import parse_config
from urckit.errors import ConfigError
from urckit.report import WALL_CLOCK_KEY


def fbl_config(**over):
    body = {"n": 119, "epsilon": 1e-3, "gamma_db": 0.0, "mode": "complex"}
    body.update(over)
    return {"version": "1", "fbl": body}


class TestParseConfig:
    def test_minimal_fbl_config(self):
        cfg = parse_config(json.dumps(fbl_config()))
        assert cfg.body_kind == "fbl"
        assert cfg.seed == 0  # documented default
        assert cfg.output.format == "json"

    def test_epsilon_constraint_names_key(self):
        with pytest.raises(ConfigError) as exc:
            parse_config(json.dumps(fbl_config(epsilon=1.5)))
        assert "fbl.epsilon" in str(exc.value)
        assert "(0,1)" in str(exc.value)

    def test_unknown_key_names_path(self):
        with pytest.raises(ConfigError) as exc:
            parse_config(json.dumps(fbl_config(bogus=1)))
        assert "fbl.bogus" in str(exc.value)

    def test_duplicate_bodies_rejected(self):
        raw = {"version": "1", "fbl": fbl_config()["fbl"],
               "budget": {"payload_bits": 80, "epsilon": 1e-3, "gamma_db": 0,
                          "latency_s": 1e-3}}
        with pytest.raises(ConfigError) as exc:
            parse_config(json.dumps(raw))
        assert "exactly one body" in str(exc.value)

    def test_no_body_rejected(self):
        with pytest.raises(ConfigError):
            parse_config(json.dumps({"version": "1"}))

    def test_unsupported_version(self):
        raw = fbl_config()
        raw["version"] = "99"
        with pytest.raises(ConfigError) as exc:
            parse_config(json.dumps(raw))
        assert "version" in str(exc.value)

    def test_missing_required_key_names_path(self):
        raw = {"version": "1", "budget": {"payload_bits": 80, "epsilon": 1e-3,
                                          "gamma_db": 0}}
        with pytest.raises(ConfigError) as exc:
            parse_config(json.dumps(raw))
        assert "budget.latency_s" in str(exc.value)

    def test_fbl_overdetermined_rejected(self):
        with pytest.raises(ConfigError) as exc:
            parse_config(json.dumps(fbl_config(k_bits=80.0)))
        assert "exactly three" in str(exc.value)

    def test_invalid_json_and_utf8(self):
        with pytest.raises(ConfigError):
            parse_config(b"{not json")
        with pytest.raises(ConfigError):
            parse_config(b"\xff\xfe")

    def test_urcs_protocol_validation(self):
        raw = {
            "version": "1",
            "urcs": {
                "payload_bits": 128.0, "epsilon": 1e-3, "gamma_db": 0.0,
                "latency_cap_s": 1.0, "k_range": [1, 2],
                "protocol": {"kind": "slotted-aloha"},
            },
        }
        with pytest.raises(ConfigError) as exc:
            parse_config(json.dumps(raw))
        assert "urcs.protocol.p_tx" in str(exc.value)

    def test_k_range_monotone(self):
        raw = {
            "version": "1",
            "urcs": {
                "payload_bits": 128.0, "epsilon": 1e-3, "gamma_db": 0.0,
                "latency_cap_s": 1.0, "k_range": [2, 2],
                "protocol": {"kind": "slotted-aloha", "p_tx": 0.5},
            },
        }
        with pytest.raises(ConfigError) as exc:
            parse_config(json.dumps(raw))
        assert "k_range" in str(exc.value)


def write_config(tmp_path, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def drop_wall_clock(raw: bytes) -> bytes:
    doc = json.loads(raw)
    doc.pop(WALL_CLOCK_KEY, None)
    return json.dumps(doc, sort_keys=True).encode()


class TestCliRuns:
    def test_fbl_forward_json(self, tmp_path, capsys):
        cfg = write_config(tmp_path, fbl_config())
        out = tmp_path / "out.json"
        assert main(["fbl", "--config", cfg, "--output", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["results"]["k_bits"] == pytest.approx(80.329211, rel=1e-6)
        assert doc["rng"]["seed"] == 0
        assert doc["inputs"]["fbl"]["n"] == 119

    def test_fbl_worked_example_reports_reference_and_gap(self, tmp_path, capsys):
        raw = {"version": "1",
               "fbl": {"k_bits": 80.0, "epsilon": 1e-3, "gamma_db": 0.0,
                       "mode": "complex"}}
        cfg = write_config(tmp_path, raw)
        out = tmp_path / "out.json"
        assert main(["fbl", "--config", cfg, "--output", str(out)]) == 0
        doc = json.loads(out.read_text())
        ref = doc["results"]["paper_reference"]
        assert ref["n_min"] == 128
        assert ref["computed_n_min"] == 119
        assert ref["gap_relative"] == pytest.approx((119 - 128) / 128, rel=1e-12)
        printed = capsys.readouterr().out
        assert "119" in printed and "128" in printed and "gap" in printed

    def test_budget_reference_bandwidth(self, tmp_path):
        k128 = fbl.max_info_bits(fbl.FblQuery(n=128, epsilon=1e-3, gamma=1.0)).k_bits
        raw = {"version": "1",
               "budget": {"payload_bits": k128, "epsilon": 1e-3, "gamma_db": 0.0,
                          "latency_s": 1e-3}}
        cfg = write_config(tmp_path, raw)
        out = tmp_path / "out.json"
        assert main(["budget", "--config", cfg, "--output", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["results"]["required_cu"] == 128
        assert doc["results"]["required_bandwidth_hz"] == 64000.0

    def test_goodput_separate_with_probs(self, tmp_path):
        raw = {"version": "1",
               "goodput": {"header_bits": 50.0, "data_bits": 1000.0, "header_cu": 50,
                           "data_cu": 500, "symbol_period_s": 1e-6,
                           "encoding": "separate", "p_eh": 0.0, "p_ed": 0.0}}
        cfg = write_config(tmp_path, raw)
        out = tmp_path / "out.json"
        assert main(["goodput", "--config", cfg, "--output", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["results"]["goodput_bps"] == pytest.approx(1000 / 550e-6, rel=1e-12)

    def test_compare_sweep_csv(self, tmp_path):
        raw = {"version": "1",
               "compare": {"header_bits": 80.0, "data_bits": 128.0,
                           "gamma_db": [-3.0, 0.0], "total_cu": [200, 300]}}
        cfg = write_config(tmp_path, raw)
        out = tmp_path / "sweep.csv"
        assert main(["compare", "--config", cfg, "--output", str(out),
                     "--format", "csv"]) == 0
        lines = out.read_text().splitlines()
        assert lines[0] == ("gamma_db,total_cu,joint_success,separate_success,"
                            "best_header_cu,joint_wins")
        assert len(lines) == 5

    def test_subcommand_body_mismatch_is_config_error(self, tmp_path):
        cfg = write_config(tmp_path, fbl_config())
        assert main(["budget", "--config", cfg]) == 2

    def test_config_error_exit_code(self, tmp_path):
        cfg = write_config(tmp_path, fbl_config(epsilon=2.0))
        assert main(["fbl", "--config", cfg]) == 2

    def test_domain_error_exit_code(self, tmp_path):
        # min_snr: 1000 bits in one channel use is unreachable at any SNR
        raw = {"version": "1",
               "fbl": {"n": 1, "k_bits": 1000.0, "epsilon": 1e-3}}
        cfg = write_config(tmp_path, raw)
        assert main(["fbl", "--config", cfg]) == 3

    def test_missing_config_is_io_error(self, tmp_path):
        assert main(["fbl", "--config", str(tmp_path / "absent.json")]) == 4

    def test_negative_seed_override_rejected(self, tmp_path):
        cfg = write_config(tmp_path, fbl_config())
        assert main(["fbl", "--config", cfg, "--seed", "-3"]) == 2

    def test_non_tabular_payload_raises_format_error(self):
        from urckit.cli import _emit
        from urckit.errors import ReportFormatError

        with pytest.raises(ReportFormatError):
            _emit({"command": "x"}, object(), "csv")

    def test_unwritable_output_is_io_error(self, tmp_path):
        cfg = write_config(tmp_path, fbl_config())
        assert main(["fbl", "--config", cfg,
                     "--output", str(tmp_path / "no" / "dir" / "x.json")]) == 4


class TestDeterminism:
    def urcs_raw(self, seed=7):
        return {
            "version": "1",
            "seed": seed,
            "urcs": {
                "payload_bits": 128.0, "epsilon": 1e-3, "gamma_db": 0.0,
                "latency_cap_s": 0.2, "percentile": 0.9, "n_trials": 150,
                "k_range": [1, 2, 4],
                "protocol": {"kind": "slotted-aloha", "p_tx": 0.35},
            },
        }

    def test_json_payload_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path, self.urcs_raw())
        out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["urcs", "--config", cfg, "--output", str(out1)]) == 0
        assert main(["urcs", "--config", cfg, "--output", str(out2)]) == 0
        assert drop_wall_clock(out1.read_bytes()) == drop_wall_clock(out2.read_bytes())

    def test_csv_byte_identical_across_threads(self, tmp_path):
        cfg = write_config(tmp_path, self.urcs_raw())
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["urcs", "--config", cfg, "--output", str(out1),
                     "--format", "csv", "--threads", "1"]) == 0
        assert main(["urcs", "--config", cfg, "--output", str(out2),
                     "--format", "csv", "--threads", "4"]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_seed_override_changes_results(self, tmp_path):
        cfg = write_config(tmp_path, self.urcs_raw())
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["urcs", "--config", cfg, "--output", str(out1),
                     "--format", "csv"]) == 0
        assert main(["urcs", "--config", cfg, "--output", str(out2),
                     "--format", "csv", "--seed", "12345"]) == 0
        assert out1.read_bytes() != out2.read_bytes()

    def test_seed_echoed_in_report(self, tmp_path):
        cfg = write_config(tmp_path, self.urcs_raw(seed=33))
        out = tmp_path / "a.json"
        assert main(["urcs", "--config", cfg, "--output", str(out)]) == 0
        doc = json.loads(out.read_text())
        assert doc["rng"]["seed"] == 33
        assert doc["rng"]["algorithm"]


class TestRscCli:
    def rsc_raw(self):
        return {
            "version": "1",
            "seed": 5,
            "rsc": {
                "system_bandwidth_hz": 1e5,
                "hysteresis_db": 2.0,
                "dwell_samples": 3,
                "tiers": [
                    {"name": "basic", "payload_bits": 32.0, "latency_s": 20e-3,
                     "reliability_target": 0.999, "availability_target": 0.99999,
                     "rank": 0},
                    {"name": "full", "payload_bits": 2048.0, "latency_s": 5e-3,
                     "reliability_target": 0.999, "availability_target": 0.97,
                     "rank": 2},
                ],
                "channel": {"kind": "rayleigh-block", "mean_snr_db": 13.0,
                            "block_length": 10},
                "trace_length": 5000,
                "sample_period_s": 1e-3,
            },
        }

    def test_rsc_json_and_csv_series(self, tmp_path):
        cfg = write_config(tmp_path, self.rsc_raw())
        out_json = tmp_path / "r.json"
        out_csv = tmp_path / "r.csv"
        assert main(["rsc", "--config", cfg, "--output", str(out_json)]) == 0
        assert main(["rsc", "--config", cfg, "--output", str(out_csv),
                     "--format", "csv"]) == 0
        doc = json.loads(out_json.read_text())
        fracs = [t["time_fraction_selected"] for t in doc["results"]["tiers"]]
        assert sum(fracs) + doc["results"]["outage_fraction"] == pytest.approx(1.0)
        lines = out_csv.read_text().splitlines()
        assert lines[0] == "time_s,snr,selected_rank,delivered"
        assert len(lines) == 5001

    def test_rsc_deterministic(self, tmp_path):
        cfg = write_config(tmp_path, self.rsc_raw())
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["rsc", "--config", cfg, "--output", str(a), "--format", "csv"]) == 0
        assert main(["rsc", "--config", cfg, "--output", str(b), "--format", "csv"]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestUrclCli:
    def test_urcl_guarantees_and_csv(self, tmp_path):
        raw = {
            "version": "1",
            "urcl": {
                "total_bandwidth_hz": 1e9,
                "dedicated_user_cap": 50,
                "window_s": 1.0,
                "n_windows": 50,
                "samples_per_window": 10,
                "channel": {"kind": "rayleigh-block", "mean_snr_db": 10.0},
                "guarantees": [{"rate_bps": 5e8, "availability": 0.95},
                               {"rate_bps": 5e7, "availability": 0.99}],
                "k_range": [1, 25, 50, 100],
            },
        }
        cfg = write_config(tmp_path, raw)
        out_json = tmp_path / "u.json"
        out_csv = tmp_path / "u.csv"
        assert main(["urcl", "--config", cfg, "--output", str(out_json)]) == 0
        assert main(["urcl", "--config", cfg, "--output", str(out_csv),
                     "--format", "csv"]) == 0
        doc = json.loads(out_json.read_text())
        assert len(doc["results"]["guarantee_checks"]) == 2
        lines = out_csv.read_text().splitlines()
        assert lines[0] == "series,k,value,ci_low,ci_high"

    def test_urcs_comparison_series(self, tmp_path):
        raw = {
            "version": "1",
            "urcs": {
                "payload_bits": 128.0, "basic_payload_bits": 16.0,
                "epsilon": 1e-3, "gamma_db": 0.0, "latency_cap_s": 0.2,
                "percentile": 0.9, "n_trials": 100, "k_range": [1, 2],
                "protocol": {"kind": "slotted-aloha", "p_tx": 0.5},
            },
        }
        cfg = write_config(tmp_path, raw)
        out_csv = tmp_path / "c.csv"
        assert main(["urcs", "--config", cfg, "--output", str(out_csv),
                     "--format", "csv"]) == 0
        lines = out_csv.read_text().splitlines()
        assert lines[0] == "series,k,value,ci_low,ci_high"
        series = {line.split(",")[0] for line in lines[1:]}
        assert series == {"full", "basic"}


class TestCsvContract:
    def test_curve_csv_line_counts_and_digits(self, tmp_path):
        raw = TestDeterminism().urcs_raw()
        cfg = write_config(tmp_path, raw)
        out = tmp_path / "c.csv"
        assert main(["urcs", "--config", cfg, "--output", str(out),
                     "--format", "csv"]) == 0
        text = out.read_text()
        lines = text.splitlines()
        assert len(lines) == 1 + 3  # header + one row per K
        assert "\r" not in text
        for line in lines[1:]:
            cells = line.split(",")
            assert len(cells) == 4
            for cell in cells[1:]:
                assert len(cell.replace(".", "").replace("-", "").replace("e", "")
                           .lstrip("0")) <= 13
