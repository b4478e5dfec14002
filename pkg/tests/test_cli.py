"""Command-line interface: exit codes, file outputs, config handling."""
import json
import math

import numpy as np
import pytest

from averbound import export
from averbound.cli import (ConfigError, load_user_system, main, resolve_config,
                           build_parser)


def run_cli(*argv):
    return main(list(argv))


def test_estimate_writes_table_and_sidecar(tmp_path):
    out = tmp_path / "est.csv"
    code = run_cli("estimate", "--figure", "3e", "--u", "10")
    assert code == 1      # presets are complete; extra knobs are an error

    code = run_cli("estimate", "--figure", "3e", "--out", str(out))
    assert code == 0
    table = export.read_table(out)
    assert list(table) == ["tau", "J_1", "R_11", "K_1", "m", "n"]
    assert np.all(np.diff(table["tau"]) > 0)
    assert np.all(table["n"] > 0)
    sidecar = json.loads((tmp_path / "est.json").read_text())
    assert sidecar["status"] == "completed"
    assert sidecar["ell0"] > 0 and sidecar["wall_time_s"] > 0
    assert sidecar["violation_kind"] is None
    assert sidecar["window_mode"] == "auto"


def test_estimate_rejects_nonpositive_horizon(tmp_path):
    code = run_cli("estimate", "--example", "resonant", "--i0", "2",
                   "--eps", "0.01", "--u", "0",
                   "--out", str(tmp_path / "x.csv"))
    assert code == 1


def test_estimate_unknown_preset():
    assert run_cli("estimate", "--figure", "7q") == 1


def test_estimate_domain_violation_exit_code(tmp_path):
    code = run_cli("estimate", "--example", "action-freq", "--kappa", "1",
                   "--i0", "1", "--eps", "0.01", "--u", "1.0",
                   "--out", str(tmp_path / "blow.csv"))
    assert code == 2
    sidecar = json.loads((tmp_path / "blow.json").read_text())
    assert sidecar["status"] == "domain_violation"
    assert sidecar["violation_kind"] == "n_exceeds_rho_over_eps"
    assert sidecar["tau_final"] < 1.0


def test_estimate_long_resonant_preset_is_fast(tmp_path):
    # the slow-time run over U=200 finishes in a fraction of a second
    out = tmp_path / "long.csv"
    assert run_cli("estimate", "--figure", "3f", "--out", str(out)) == 0
    sidecar = json.loads((tmp_path / "long.json").read_text())
    assert sidecar["status"] == "completed"
    assert sidecar["wall_time_s"] < 5.0


def test_estimate_two_dimensional_columns(tmp_path):
    out = tmp_path / "top.csv"
    code = run_cli("estimate", "--example", "euler-top", "--mu", "1",
                   "--l1", "2", "--l2", "-1", "--i0", "4,4",
                   "--eps", "0.01", "--u", "1", "--out", str(out))
    assert code == 0
    table = export.read_table(out)
    assert list(table) == ["tau", "J_1", "J_2", "R_11", "R_12", "R_21",
                           "R_22", "K_1", "K_2", "m", "n"]


def test_direct_output_columns(tmp_path):
    out = tmp_path / "dir.csv"
    code = run_cli("direct", "--figure", "2a", "--out", str(out))
    assert code == 0
    table = export.read_table(out)
    assert list(table) == ["t", "tau", "L_1", "absL", "theta_mod_2pi"]
    assert np.allclose(table["tau"], 1e-2 * table["t"])
    assert np.all(table["theta_mod_2pi"] >= 0)
    assert np.all(table["theta_mod_2pi"] < 2 * math.pi)
    assert np.allclose(table["absL"], np.abs(table["L_1"]))


def test_direct_budget_exit(tmp_path):
    out = tmp_path / "budget.csv"
    code = run_cli("direct", "--figure", "2d", "--budget", "1e-9",
                   "--out", str(out))
    assert code == 3
    sidecar = json.loads((tmp_path / "budget.json").read_text())
    assert sidecar["budget_exceeded"] is True
    table = export.read_table(out)          # partial table still flushed
    assert table["t"].size > 0
    assert table["t"][-1] < 200.0 / 1e-2


def test_compare_outputs(tmp_path):
    out = tmp_path / "cmp.csv"
    code = run_cli("compare", "--figure", "2a", "--out", str(out))
    assert code == 0
    table = export.read_table(out)
    assert list(table) == ["tau", "n", "envelope_absL"]
    assert np.all(table["envelope_absL"] <= table["n"] * (1 + 1e-9))
    sidecar = json.loads((tmp_path / "cmp.json").read_text())
    assert sidecar["headline"]["violations"] == 0
    assert sidecar["time_ratio"] < 1.0
    assert sidecar["wall_time_estimate_s"] > 0
    assert sidecar["wall_time_direct_s"] > 0


def test_compare_domain_violation_propagates(tmp_path):
    code = run_cli("compare", "--example", "action-freq", "--kappa", "1",
                   "--i0", "1", "--eps", "0.01", "--u", "1.0",
                   "--out", str(tmp_path / "c.csv"))
    assert code == 2


def test_verify_vdp_all_pass(tmp_path):
    out = tmp_path / "verify.json"
    code = run_cli("verify", "--example", "vdp", "--out", str(out))
    assert code == 0
    payload = json.loads(out.read_text())
    names = [c["name"] for c in payload["checks"]]
    assert names == ["auxiliary-identities", "bound-domination",
                     "integral-identity", "analytic-crosscheck"]
    assert all(c["passed"] for c in payload["checks"])


def test_verify_euler_top_params(tmp_path):
    code = run_cli("verify", "--example", "euler-top", "--mu", "1",
                   "--l1", "2", "--l2", "-1", "--i0", "4,4",
                   "--eps", "0.01", "--u", "0.5",
                   "--out", str(tmp_path / "et.json"))
    assert code == 0
    bad = run_cli("verify", "--example", "euler-top", "--mu", "3",
                  "--l1", "2", "--l2", "-1", "--i0", "4,4",
                  "--eps", "0.01", "--u", "0.5")
    assert bad == 1


def test_csv_roundtrip_is_lossless(tmp_path):
    rows = np.array([[1 / 3, math.pi], [1e-17, -2.5000000000000004]])
    path = export.write_table(tmp_path / "t.csv", ["a", "b"], rows)
    back = export.read_table(path)
    assert back["a"][0] == rows[0, 0] and back["b"][0] == rows[0, 1]
    assert back["a"][1] == rows[1, 0] and back["b"][1] == rows[1, 1]


def test_json_table_roundtrip(tmp_path):
    rows = np.array([[0.1, 0.2], [0.3, 0.4]])
    path = export.write_table(tmp_path / "t.json", ["x", "y"], rows, fmt="json")
    back = export.read_table(path)
    assert np.array_equal(back["x"], rows[:, 0])
    assert np.array_equal(back["y"], rows[:, 1])


def test_config_file_selects_preset(tmp_path):
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text("# comment line\nfigure = 2d\nrtol = 1e-8\n")
    cfg = load_user_system(cfg_path)
    assert cfg.example.id == "action-freq"
    assert cfg.example.params["kappa"] == -1
    assert cfg.i0[0] == 1.0 and cfg.eps == 1e-2 and cfg.u == 200.0
    assert cfg.rtol == 1e-8


def test_config_file_explicit_system(tmp_path):
    cfg_path = tmp_path / "run.cfg"
    cfg_path.write_text(
        "system = euler-top\nmu = 1\nl1 = 2\nl2 = -1\n"
        "i0 = 4,4\neps = 1e-2\nu = 1\nbudget = 60\n")
    cfg = load_user_system(cfg_path)
    assert cfg.example.id == "euler-top"
    assert cfg.i0.tolist() == [4.0, 4.0]
    assert cfg.budget == 60.0


@pytest.mark.parametrize("body,fragment", [
    ("", "empty config"),
    ("system = resonant\ni0 = 2\neps = 0\nu = 1\n", "eps must be positive"),
    ("system = resonant\ni0 = 2\neps = 1e-2\n", "missing required key"),
    ("system = nope\ni0 = 2\neps = 1e-2\nu = 1\n", "unknown system"),
    ("figure = 2d\ni0 = 3\n", "conflicts"),
    ("bogus_key = 1\nsystem = resonant\ni0 = 2\neps = 1e-2\nu = 1\n",
     "unknown key"),
    ("system = resonant\nsystem = vdp\ni0 = 2\neps = 1e-2\nu = 1\n",
     "duplicate key"),
    ("just some text\n", "expected 'key = value'"),
])
def test_config_file_errors(tmp_path, body, fragment):
    cfg_path = tmp_path / "bad.cfg"
    cfg_path.write_text(body)
    with pytest.raises(ConfigError, match=fragment):
        load_user_system(cfg_path)


def test_cli_requires_a_selection():
    assert run_cli("estimate") == 1


def test_flag_window_parsing():
    parser = build_parser()
    args = parser.parse_args(["estimate", "--figure", "3e",
                              "--window", "0.5,0.4,0.26"])
    cfg = resolve_config(args)
    assert cfg.window.ell_star == 0.5
    assert cfg.window.sigma == 0.4
    assert cfg.window.slope_bound == 0.26
    with pytest.raises(ConfigError):
        resolve_config(parser.parse_args(
            ["estimate", "--figure", "3e", "--window", "1,2"]))


def test_config_via_main_runs(tmp_path):
    cfg_path = tmp_path / "run.cfg"
    out = tmp_path / "cfg_run.csv"
    cfg_path.write_text(
        f"system = resonant\ni0 = 2\neps = 1e-2\nu = 1\nout = {out}\n")
    assert run_cli("estimate", "--config", str(cfg_path)) == 0
    assert out.exists()
