import io
import json
from importlib import resources

import pytest

import trotterlab.quantize
from trotterlab.cli import (
    COMMAND_DEFAULTS,
    RunConfig,
    evaluate_criteria,
    main,
    parse_config,
    run,
)
from trotterlab.errors import ParseError, ValidationError


def preset_text(name: str) -> str:
    return resources.files("trotterlab").joinpath(f"presets/{name}").read_text()


class TestParseConfig:
    def test_minimal_document_gives_defaults(self):
        cfg = parse_config('{"command": "sweep-s"}')
        expected = RunConfig(command="sweep-s", **COMMAND_DEFAULTS["sweep-s"])
        assert cfg == expected

    def test_empty_document_with_cli_command(self):
        cfg = parse_config("{}", command="commutator-scan")
        assert cfg.command == "commutator-scan"
        assert cfg.h_values == tuple(2.0**-k for k in range(3, 9))

    def test_invalid_h_rejected(self):
        with pytest.raises(ValidationError) as err:
            parse_config('{"command": "sweep-s", "h": 2.0}')
        assert err.value.field == "h"

    def test_unknown_key_rejected(self):
        with pytest.raises(ValidationError) as err:
            parse_config('{"command": "sweep-s", "stepsize": 0.1}')
        assert err.value.field == "stepsize"

    def test_bad_json_gives_position(self):
        with pytest.raises(ParseError) as err:
            parse_config('{"command": "sweep-s",}')
        assert "line 1" in str(err.value)

    def test_command_mismatch(self):
        with pytest.raises(ValidationError):
            parse_config('{"command": "sweep-s"}', command="sweep-h")

    def test_negative_s_rejected(self):
        with pytest.raises(ValidationError):
            parse_config('{"command": "sweep-s", "s_values": [0.1, -0.1]}')

    def test_bad_observable_rejected(self):
        with pytest.raises(ValidationError):
            parse_config('{"command": "sweep-s", "objservables": []}')
        with pytest.raises(ValidationError):
            parse_config('{"command": "sweep-s", "observables": ["x_hat"]}')

    def test_bad_n_values_rejected(self):
        with pytest.raises(ValidationError):
            parse_config('{"command": "calculus-check", "N_values": [12]}')

    def test_lte_s_preset_matches_paper_defaults(self):
        cfg = parse_config(preset_text("lte_s.json"))
        assert cfg.command == "sweep-s"
        assert cfg.h == pytest.approx(1.0 / 64.0)
        assert cfg.s_values == tuple(2.0**-k for k in range(4, 12))

    def test_all_presets_parse(self):
        for name in ("lte_s.json", "lte_h.json", "long_s.json", "long_h.json",
                     "commutator_scan.json", "calculus_check.json", "query_count.json"):
            cfg = parse_config(preset_text(name))
            assert cfg.command in COMMAND_DEFAULTS

    def test_global_sweep_h_default_step(self):
        cfg = parse_config('{"command": "sweep-h", "mode": "global"}')
        assert cfg.s_fixed == pytest.approx(0.02)
        cfg = parse_config('{"command": "sweep-h"}')
        assert cfg.s_fixed == pytest.approx(0.1)


SMALL_SCAN = {"command": "commutator-scan",
              "h_values": [2.0**-3, 2.0**-4, 2.0**-5, 2.0**-6]}


class TestRun:
    def test_writes_csv_and_exits_zero(self, tmp_path):
        out = tmp_path / "scan.csv"
        cfg = parse_config(json.dumps(SMALL_SCAN))
        code = run(cfg, out=str(out), stream=io.StringIO())
        assert code == 0
        lines = out.read_text().split("\n")
        assert lines[0] == "h,N,metric,value"
        assert len(lines) == 1 + 4 * 5 + 1   # header + rows + trailing newline

    def test_byte_identical_reruns(self, tmp_path):
        cfg = parse_config(json.dumps(SMALL_SCAN))
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        run(cfg, out=str(out1), stream=io.StringIO())
        run(cfg, out=str(out2), stream=io.StringIO())
        assert out1.read_bytes() == out2.read_bytes()

    def test_sweep_s_csv_header_and_row_count(self, tmp_path):
        doc = {"command": "sweep-s", "h": 2.0**-5,
               "s_values": [2.0**-k for k in range(4, 12)],
               "observables": ["cos_x"], "schemes": ["Lie1"]}
        out = tmp_path / "s.csv"
        code = run(parse_config(json.dumps(doc)), out=str(out), stream=io.StringIO())
        assert code == 0
        lines = [l for l in out.read_text().split("\n") if l]
        assert lines[0] == "s,h,N,scheme,observable,metric,value"
        obs_rows = [l for l in lines[1:] if ",observable_error," in l]
        assert len(obs_rows) == 8   # one per s value in the series

    def test_assert_pass_exit_zero(self, tmp_path):
        cfg = parse_config(json.dumps(SMALL_SCAN))
        code = run(cfg, assert_criteria=True, out=str(tmp_path / "x.csv"),
                   stream=io.StringIO())
        assert code == 0

    def test_assert_broken_quantizer_exit_two(self, tmp_path, monkeypatch):
        # negative control: a commutator remainder with first-order scaling
        # must trip the calculus criteria
        monkeypatch.setattr(trotterlab.quantize, "commutator_remainder",
                            lambda a, b, ctx: ctx.h)
        doc = {"command": "calculus-check", "N_values": [16, 32, 64]}
        stream = io.StringIO()
        code = run(parse_config(json.dumps(doc)), assert_criteria=True,
                   out=str(tmp_path / "x.csv"), stream=stream)
        assert code == 2
        assert "commutator-order: FAIL" in stream.getvalue()

    def test_fit_reports_printed(self, tmp_path):
        cfg = parse_config(json.dumps(SMALL_SCAN))
        stream = io.StringIO()
        run(cfg, out=str(tmp_path / "x.csv"), stream=stream)
        text = stream.getvalue()
        assert "fit norm_A_over_h:" in text and "slope=" in text

    def test_config_out_key_used(self, tmp_path):
        doc = dict(SMALL_SCAN)
        doc["out"] = str(tmp_path / "from_config.csv")
        code = run(parse_config(json.dumps(doc)), stream=io.StringIO())
        assert code == 0
        assert (tmp_path / "from_config.csv").exists()

    def test_unwritable_path_exit_one(self):
        cfg = parse_config(json.dumps(SMALL_SCAN))
        code = run(cfg, out="/nonexistent-dir/x.csv", stream=io.StringIO())
        assert code == 1


class TestMain:
    def test_help_exits_zero(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--help"])
        assert exc.value.code == 0
        text = capsys.readouterr().out
        for command in ("sweep-s", "sweep-h", "long-time", "commutator-scan",
                        "calculus-check", "query-count"):
            assert command in text

    def test_missing_config_file_exit_one(self, capsys):
        code = main(["commutator-scan", "--config", "/no/such/file.json"])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_end_to_end_with_config(self, tmp_path, capsys):
        cfg_path = tmp_path / "scan.json"
        cfg_path.write_text(json.dumps(SMALL_SCAN))
        out = tmp_path / "scan.csv"
        code = main(["commutator-scan", "--config", str(cfg_path),
                     "--out", str(out), "--assert"])
        assert code == 0
        assert out.exists()
        assert "criterion" in capsys.readouterr().out

    def test_threads_flag(self, tmp_path):
        cfg_path = tmp_path / "scan.json"
        cfg_path.write_text(json.dumps(SMALL_SCAN))
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["commutator-scan", "--config", str(cfg_path), "--out", str(out1)]) == 0
        assert main(["commutator-scan", "--config", str(cfg_path), "--out", str(out2),
                     "--threads", "4"]) == 0
        assert out1.read_bytes() == out2.read_bytes()


class TestCriteria:
    def test_commutator_criteria_names(self):
        cfg = parse_config(json.dumps(SMALL_SCAN))
        from trotterlab.cli import _dispatch
        result = _dispatch(cfg, threads=1)
        checks = evaluate_criteria(cfg, result)
        assert len(checks) == 5
        assert all(c.passed for c in checks)
