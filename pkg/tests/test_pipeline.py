import json
import math

import pytest

from combrange import fisher, pipeline
from combrange.pipeline import Axis, ConfigError, RunConfig, SweepSpec


def test_defaults_are_reference_scenario():
    c = RunConfig()
    assert (c.lambda0_m, c.distance_m, c.temperature_c, c.photons, c.mu2_rel) == (785e-9, 1000.0, 24.0, 1e16, 0.01)
    assert c.water_partial_pa == pytest.approx(0.0313 * 101325.0)


@pytest.mark.parametrize(
    "overrides",
    [
        {"lambda0_m": 100e-9},
        {"mu2_rel": 0.0},
        {"mu2_rel": 0.3},
        {"eta": 1.5},
        {"photons": 0},
        {"distance_m": -1},
        {"shape": "lorentzian"},
        {"centering": "median"},
        {"regime": "partial"},
        {"water_partial_pa": -3},
        {"bogus_key": 1},
        {"photons": "many"},
        {"shape": "moments", "beta": 0.5},
    ],
)
def test_invalid_configs(overrides):
    with pytest.raises(ConfigError):
        pipeline.make_config(overrides)


def test_parse_config_text():
    text = "# reference run\nphotons = 1e12  # fewer photons\n\nshape=sech2\n"
    assert pipeline.parse_config_text(text) == {"photons": "1e12", "shape": "sech2"}
    with pytest.raises(ConfigError, match="line 1"):
        pipeline.parse_config_text("photons 1e12")
    with pytest.raises(ConfigError, match="empty key"):
        pipeline.parse_config_text("= 3")


def test_evaluate_reference_record():
    rec = pipeline.evaluate(RunConfig())
    assert list(rec)[: len(RunConfig.keys())] == list(RunConfig.keys())
    assert rec["sigma_L_m"] == pytest.approx(1.2526259711795757169e-10, rel=1e-8)
    assert rec["sigma_tg_s"] == pytest.approx(2.08e-23, abs=5e-26)
    assert rec["n_mean"] == pytest.approx(1e16) and rec["f_q"] == pytest.approx(4e16)


def test_four_times_the_photons_halves_sigma():
    a = pipeline.evaluate(RunConfig(photons=1e14))["sigma_L_m"]
    b = pipeline.evaluate(RunConfig(photons=4e14))["sigma_L_m"]
    assert b == pytest.approx(a / 2, rel=1e-10)


def test_zero_transmittance():
    with pytest.raises(fisher.FisherError, match="zero-information"):
        pipeline.evaluate(RunConfig(eta=0.0))
    row = pipeline.evaluate_row(RunConfig(eta=0.0))
    assert row["sigma_L_m"] is None and "zero-information" in row["error"]
    assert row["eta"] == 0.0


def test_known_regime_is_more_optimistic():
    full = pipeline.evaluate(RunConfig())["sigma_L_m"]
    known = pipeline.evaluate(RunConfig(regime="known"))["sigma_L_m"]
    assert known < full


def test_index_report_vacuum_and_reference():
    ref = pipeline.index_report(RunConfig())
    assert ref["X"] == pytest.approx(0.99958, abs=5e-6)
    assert ref["n_phase"] == pytest.approx(1.0002656, abs=5e-8)
    assert round(ref["k6_ns_per_m"], 13) == 6.24e-11
    vac = pipeline.index_report(RunConfig(pressure_pa=0.0, water_partial_pa=0.0))
    assert vac["n_phase"] == 1.0


def test_axis_parsing():
    ax = Axis.parse("eta:0.1:1:10")
    assert (ax.name, ax.count, ax.log) == ("eta", 10, False)
    assert Axis.parse("photons:1e10:1e14:5:log").values()[1] == pytest.approx(1e11)
    for bad in ("eta:0:1", "eta:0:1:1", "nope:0:1:3", "photons:0:1:3:log", "eta:a:1:3", "eta:0:1:3:cubic"):
        with pytest.raises(ConfigError):
            Axis.parse(bad)


def test_sweep_spec_limits_and_order():
    with pytest.raises(ConfigError):
        SweepSpec("custom", ())
    with pytest.raises(ConfigError):
        SweepSpec("custom", (Axis("eta", 0, 1, 2),) * 3)
    with pytest.raises(ConfigError):
        SweepSpec("radial", (Axis("eta", 0, 1, 2),))
    spec = SweepSpec("custom", (Axis("eta", 0.5, 1, 2), Axis("delta", -0.5, 0.5, 3)), {"shape": "skewnormal"},
                     ("noise_db", (0.0, 3.0)))
    pts = spec.points()
    assert len(pts) == 12
    assert [p["noise_db"] for p in pts[:6]] == [0.0] * 6
    assert [p["eta"] for p in pts[:3]] == [0.5] * 3
    assert pts[0]["shape_a"] == pytest.approx(-0.5 / math.sqrt(0.75))
    assert pts[1]["shape_a"] == 0.0
    with pytest.raises(ConfigError):
        pipeline.default_sweep("custom")


def test_skew_sweep_ratio_column():
    spec = SweepSpec("skew", (Axis("noise_db", 0, 10, 2), Axis("delta", -0.5, 0.5, 3)),
                     {"shape": "skewnormal", "mu2_rel": 0.01})
    rows = pipeline.sweep(spec)
    assert [r["sigma_ratio"] for r in rows[1::3]] == [1.0, 1.0]
    assert all(r["sigma_ratio"] is not None for r in rows)


def test_sweep_keeps_error_rows():
    spec = SweepSpec("custom", (Axis("eta", 0.0, 1.0, 3),))
    rows = pipeline.sweep(spec)
    assert len(rows) == 3
    assert rows[0]["error"] and rows[0]["sigma_L_m"] is None
    assert rows[1]["error"] is None and rows[2]["sigma_L_m"] < rows[1]["sigma_L_m"]


def test_output_formats():
    rec = pipeline.evaluate(RunConfig())
    text = pipeline.to_csv([rec])
    header, line = text.rstrip("\n").split("\n")
    assert header.split(",") == list(pipeline.table_columns())
    assert header.endswith("n_mean,n_var,f_q,sigma_tphi_s,sigma_tg_s,sigma_tgvd_s,sigma_L_m,sigma_ratio,error")
    assert "1.25262597118e-10" in line
    rows = json.loads(pipeline.to_json([rec]))
    assert all(isinstance(v, str) for v in rows[0].values())
    assert rows[0]["sigma_L_m"] == "1.25262597118e-10"
    assert rows[0]["error"] == ""
    assert pipeline.format_value(True) == "True"
