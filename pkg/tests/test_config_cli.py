"""Configuration and command-line behavior: preset expansion, validation
error collection, structural round-trips, output files, and exit codes."""

import copy

import numpy as np
import pytest

from gradflow import config_from_dict, dump_config, load_config
from gradflow.cli import main
from gradflow.config import exact_parameter_config, fig2a_config
from gradflow.errors import ConfigError

EXPECTED_PRESET_A = np.array(
    [
        [-2.7527, 1.2008, -0.2198, -2.8886],
        [-0.6944, -4.3397, -1.0665, 1.9220],
        [-2.8952, -1.7097, -5.1494, 2.7361],
        [-0.7989, -0.6025, 0.3043, -3.8897],
    ]
)

MINIMAL_PRESET_YAML = "preset: appendix-c\n"

SMALL_PLANT_YAML = """
plant:
  a: [[-1.0, 0.0], [0.0, -2.0]]
  b: [[1.0, 0.0], [0.0, 1.0]]
  c: [[1.0, 0.0], [0.0, 1.0]]
  d: [[0.0, 0.0], [0.0, 0.0]]
  e: [[1.0, 0.0], [0.0, 1.0]]
cost:
  quadratic:
    matrix: [[2.0, 0.0], [0.0, 1.0]]
    linear: [0.1, -0.2]
    offset: 0.0
  reference: [1.0, 0.0]
simulation:
  eta: 0.05
  horizon: 2.0
  step: 0.001
  disturbance: {kind: constant, offset: [0.2, -0.1]}
output:
  figures: false
"""


def test_minimal_preset_expands_to_published_matrices(tmp_path):
    path = tmp_path / "minimal.yaml"
    path.write_text(MINIMAL_PRESET_YAML)
    cfg = load_config(path)
    assert np.allclose(cfg.plant.a, EXPECTED_PRESET_A)
    assert np.allclose(cfg.plant.b, np.eye(4))
    assert cfg.cost.phi.basis.size == 15
    assert cfg.sim.eta > 0  # default gain filled in


def test_wrong_dimension_names_the_key(tmp_path):
    data = {
        "preset": "appendix-c",
        "cost": {
            "preset": "appendix-c",
            "quadratic": {"matrix": [[1.0, 0.0], [0.0, 1.0]], "linear": [0.0, 0.0]},
        },
    }
    with pytest.raises(ConfigError) as err:
        config_from_dict(data)
    assert any("cost.quadratic.matrix" in p for p in err.value.problems)


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError) as err:
        config_from_dict({"preset": "appendix-c", "plant": {"preset": "appendix-c", "zz": 1}})
    assert any("plant.zz" in p for p in err.value.problems)


def test_all_problems_collected():
    data = {
        "preset": "appendix-c",
        "bogus_top": 1,
        "learning": {"estimator": "nope", "lam": "abc"},
        "simulation": {"step": "xyz"},
    }
    with pytest.raises(ConfigError) as err:
        config_from_dict(data)
    joined = "\n".join(err.value.problems)
    assert "bogus_top" in joined
    assert "learning.estimator" in joined
    assert "learning.lam" in joined
    assert "simulation.step" in joined
    assert len(err.value.problems) >= 4


def test_parse_error_reports_position(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("plant: [unclosed\n")
    with pytest.raises(ConfigError) as err:
        load_config(path)
    assert "parse error" in err.value.problems[0]


def test_round_trip_is_structural_fixed_point(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text(SMALL_PLANT_YAML)
    cfg = load_config(path)
    dumped = tmp_path / "dumped.yaml"
    dumped.write_text(dump_config(cfg))
    again = load_config(dumped)
    assert cfg.to_dict() == again.to_dict()


def test_preset_expansion_is_pure():
    first = fig2a_config().to_dict()
    second = fig2a_config().to_dict()
    assert first == second


def test_cli_simulate_writes_outputs(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text(SMALL_PLANT_YAML)
    out = tmp_path / "results"
    code = main(["simulate", "--config", str(path), "--out", str(out)])
    assert code == 0
    csv_text = (out / "trajectory.csv").read_text()
    assert csv_text.splitlines()[0] == "t,z_norm,u_err_norm,x_err_norm,bound,event,wdot_norm"
    assert (out / "report.txt").read_text().startswith("status = PASS")
    assert (out / "certificate.txt").exists()
    assert (out / "config.yaml").exists()
    assert not (out / "figure.png").exists()  # figures disabled in this config


def test_cli_simulate_renders_figure_when_enabled(tmp_path):
    path = tmp_path / "cfg.yaml"
    path.write_text(SMALL_PLANT_YAML.replace("figures: false", "figures: true"))
    out = tmp_path / "withfig"
    assert main(["simulate", "--config", str(path), "--out", str(out)]) == 0
    assert (out / "figure.png").stat().st_size > 0


def test_cli_zero_gain_run_is_inconclusive(tmp_path):
    text = SMALL_PLANT_YAML.replace("eta: 0.05", "eta: 0.0")
    path = tmp_path / "cfg.yaml"
    path.write_text(text)
    out = tmp_path / "frozen"
    code = main(["simulate", "--config", str(path), "--out", str(out)])
    assert code == 1
    report = (out / "report.txt").read_text()
    assert "status = INCONCLUSIVE" in report
    # the bound column must be entirely absent
    rows = (out / "trajectory.csv").read_text().splitlines()[1:]
    assert all(row.split(",")[4] == "" for row in rows)


def test_cli_certify_preset(tmp_path):
    path = tmp_path / "minimal.yaml"
    path.write_text(MINIMAL_PRESET_YAML)
    code = main(["certify", "--config", str(path), "--out", str(tmp_path / "cert")])
    assert code == 0
    text = (tmp_path / "cert" / "certificate.txt").read_text()
    assert "gain_condition = true" in text
    assert "epsilon_condition = true" in text


def test_cli_config_error_exit_code(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("plant: {preset: unknown-preset}\n")
    assert main(["simulate", "--config", str(path)]) == 2
    assert main(["certify", "--config", str(tmp_path / "missing.yaml")]) == 2


def test_seed_override_changes_arrivals(tmp_path):
    cfg = fig2a_config()
    data = copy.deepcopy(cfg.to_dict())
    data["simulation"]["horizon"] = 8.0
    data["output"]["figures"] = False
    base = tmp_path / "base.yaml"
    base.write_text(dump_config(config_from_dict(data)))
    out1, out2 = tmp_path / "s1", tmp_path / "s2"
    main(["simulate", "--config", str(base), "--out", str(out1), "--seed", "1"])
    main(["simulate", "--config", str(base), "--out", str(out2), "--seed", "3"])
    rows1 = (out1 / "trajectory.csv").read_text()
    rows2 = (out2 / "trajectory.csv").read_text()
    assert rows1 != rows2


def test_exact_parameter_config_learning_disabled():
    cfg = exact_parameter_config()
    assert not cfg.sim.learn_phi and not cfg.sim.learn_psi
    assert cfg.sim.phi_seed_points == ()


def test_cli_selftest_passes():
    assert main(["selftest"]) == 0
