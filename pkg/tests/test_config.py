import math

import pytest

from efimov import ConfigError, parse_config

MINIMAL = """\
[run]
mode = vacuum-spectrum
[numerics]
cutoff = 1000
[grid]
inv_a = 0
"""


def test_minimal_config_defaults():
    spec = parse_config(MINIMAL)
    assert spec.mode == "vacuum-spectrum"
    assert spec.numerics.n_mesh == 200
    assert spec.numerics.tol_energy == 1e-8
    assert spec.numerics.tol_eig == 1e-10
    assert spec.numerics.map_kind == "rational"
    assert spec.inv_a_grid == (0.0,)
    assert spec.out_format == "csv" and spec.axis_transform == "none"
    # defaults are recorded in the echo
    assert spec.resolved["numerics"]["n_mesh"] == "200"
    assert "tol_energy = 1e-08" in spec.config_text()


def test_small_mesh_rejected_with_line():
    text = MINIMAL.replace("cutoff = 1000", "cutoff = 1000\nn_mesh = 4")
    with pytest.raises(ConfigError, match=r"line 5: numerics.n_mesh: n_mesh must be >= 8") as ei:
        parse_config(text)
    assert ei.value.key == "numerics.n_mesh" and ei.value.line == 5


def test_medium_flow_grid_must_start_at_zero():
    text = """\
[run]
mode = medium-flow
[numerics]
cutoff = 100
[grid]
k_f = 0.1, 1, 10
"""
    with pytest.raises(ConfigError, match="start at 0.*anchor"):
        parse_config(text)


def test_unknown_keys_strict_and_lenient():
    text = MINIMAL + "colour = blue\n"
    with pytest.raises(ConfigError, match="line 7: grid.colour: unknown key"):
        parse_config(text, strict=True)
    assert parse_config(text, strict=False).inv_a_grid == (0.0,)
    with pytest.raises(ConfigError, match="unknown section"):
        parse_config(MINIMAL + "[extra]\nx = 1\n", strict=True)


def test_missing_and_mistyped_keys():
    with pytest.raises(ConfigError, match="numerics.cutoff: missing"):
        parse_config(MINIMAL.replace("cutoff = 1000", ""))
    with pytest.raises(ConfigError, match="line 4: numerics.cutoff: expected float"):
        parse_config(MINIMAL.replace("1000", "big"))
    with pytest.raises(ConfigError, match="run.mode"):
        parse_config(MINIMAL.replace("vacuum-spectrum", "everything"))
    with pytest.raises(ConfigError, match="ascending"):
        parse_config(MINIMAL.replace("inv_a = 0", "inv_a = 1, 0"))
    with pytest.raises(ConfigError, match="tolerance"):
        parse_config(MINIMAL.replace("cutoff = 1000", "cutoff = 1000\ntol_energy = 0"))
    with pytest.raises(ConfigError, match="expected float"):
        parse_config(MINIMAL.replace("inv_a = 0", "inv_a = 0, nan"))


def test_mode_from_command_line():
    text = MINIMAL.replace("[run]\nmode = vacuum-spectrum\n", "")
    assert parse_config(text, mode="vacuum-spectrum").mode == "vacuum-spectrum"
    with pytest.raises(ConfigError, match="contradicts"):
        parse_config(MINIMAL, mode="medium-flow")
    assert parse_config("", mode="constants").mode == "constants"


def test_ranged_grids():
    text = MINIMAL.replace("inv_a = 0", "inv_a_min = -100\ninv_a_max = -0.01\n"
                                         "inv_a_count = 5\ninv_a_spacing = log")
    grid = parse_config(text).inv_a_grid
    assert grid == pytest.approx((-100.0, -10.0, -1.0, -0.1, -0.01))
    lin = parse_config(MINIMAL.replace("inv_a = 0", "inv_a_min = 0\ninv_a_max = 1\n"
                                                    "inv_a_count = 3")).inv_a_grid
    assert lin == (0.0, 0.5, 1.0)
    flow = parse_config("""\
[run]
mode = medium-flow
[numerics]
cutoff = 100
[grid]
k_f_min = 0
k_f_max = 10
k_f_count = 4
k_f_spacing = log
k_f_log_start = 0.1
""")
    assert flow.kf_grid == pytest.approx((0.0, 0.1, 1.0, 10.0))
    assert flow.medium_kind == "fermi_sea" and flow.medium_inv_a == 0.0
    with pytest.raises(ConfigError, match="same sign"):
        parse_config(MINIMAL.replace("inv_a = 0", "inv_a_min = -1\ninv_a_max = 1\n"
                                                  "inv_a_count = 3\ninv_a_spacing = log"))
    with pytest.raises(ConfigError, match="not both"):
        parse_config(MINIMAL.replace("inv_a = 0", "inv_a = 0\ninv_a_min = 1"))


def test_bo_config():
    text = """\
[run]
mode = bo-count
[bo]
r0 = 0.01
xi = 1, 22.7
mass_ratio = 2
"""
    spec = parse_config(text)
    assert spec.xi_values == (1.0, 22.7) and spec.mass_ratio == 2.0 and spec.r0 == 0.01
    with pytest.raises(ConfigError, match="bo.r0"):
        parse_config(text.replace("r0 = 0.01\n", ""))
    with pytest.raises(ConfigError, match="medium.a_b"):
        parse_config("[run]\nmode = bo-count\n[bo]\nr0 = 1\n[grid]\ndensity = 1e-4\n")
    dens = parse_config("[run]\nmode = bo-count\n[bo]\nr0 = 1\n[grid]\ndensity = 1e-4\n"
                        "[medium]\na_b = 0.5\n")
    assert dens.medium_kind == "bose_condensate" and dens.density_grid == (1e-4,)


def test_output_section():
    spec = parse_config(MINIMAL + "[output]\nformat = json\naxis_transform = fourth_root\n"
                        "path = out.json\n")
    assert (spec.out_format, spec.axis_transform, spec.out_path) == ("json", "fourth_root",
                                                                     "out.json")
    with pytest.raises(ConfigError, match="format"):
        parse_config(MINIMAL + "[output]\nformat = xml\n")


def test_malformed_text():
    with pytest.raises(ConfigError, match="malformed"):
        parse_config("cutoff = 1\n")
    with pytest.raises(ConfigError, match="malformed"):
        parse_config("[run]\nmode = constants\nmode = constants\n")


def test_echo_round_trips():
    spec = parse_config(MINIMAL)
    again = parse_config(spec.config_text())
    assert again == spec
    assert again.config_text() == spec.config_text()
