import math

import pytest

from leodoppler.config import ConfigError, RunConfig, load_config, parse_config


def test_defaults():
    cfg = parse_config("")
    assert cfg == RunConfig()
    assert cfg.constants.h == 600e3 and cfg.constants.f_o == 2e9
    assert cfg.cell.theta_c == 0.0078 and cfg.planner.threshold == 950.0
    assert load_config(None) == RunConfig()


def test_unit_suffixes():
    cfg = parse_config("""
[constants]
h = 1200 km
f_o = 2.5 GHz
inclination_i = 90 deg
[cell]
radius = 50 km
theta_v = 0.1 rad
[planner]
threshold = 0.95 kHz
[grid]
altitudes = 600 km, 1200km
theta_v_list = 0.06, 0.1
""")
    assert cfg.constants.h == 1.2e6 and cfg.constants.f_o == 2.5e9
    assert cfg.constants.inclination_i == pytest.approx(math.pi / 2)
    assert cfg.cell.theta_c == pytest.approx(50e3 / cfg.constants.r_e)
    assert cfg.planner.threshold == pytest.approx(950.0)
    assert cfg.grid.altitudes == (600e3, 1200e3) and cfg.grid.theta_v_list == (0.06, 0.1)


@pytest.mark.parametrize("text, fragment", [
    ("[cell]\nfoo = 1\n", "<config>:2: [cell] foo: unknown key"),
    ("\n\n[cells]\ntheta_c = 1\n", "<config>:3: unknown section"),
    ("[constants]\nh = 600 Hz\n", "<config>:2: [constants] h: unit 'Hz' not allowed"),
    ("[simulation]\nsamples = many\n", "<config>:2: [simulation] samples: expected an integer"),
    ("[cell]\nradius = 50 km\ntheta_c = 0.01\n", "give either radius or theta_c"),
    ("[planner]\nrounding = up\n", "rounding must be one of"),
    ("[numerics]\nv_method = magic\n", "v_method must be one of"),
    ("[cell]\ntheta_v = 0.01\nmu_ups_min = 0.02\n", "mu_ups_min cannot exceed theta_v"),
    ("[constants]\nrate_frame = sideways\n", "rate_frame"),
    ("not an ini", "<config>"),
])
def test_rejected(text, fragment):
    with pytest.raises(ConfigError, match=None) as exc:
        parse_config(text)
    assert fragment in str(exc.value)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read config"):
        load_config(tmp_path / "absent.ini")


def test_file_source_in_message(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text("[output]\ndir = x\n[tolerances]\nks = 0.1\nbogus = 1\n")
    with pytest.raises(ConfigError, match=r"run.ini:5: \[tolerances\] bogus: unknown key"):
        load_config(p)
