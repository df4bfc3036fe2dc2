import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from fourlevel_eit.atomic import FieldConfig, Model
from fourlevel_eit.cli import (
    BRANCH_COLUMNS,
    DRESSED_COLUMNS,
    METRIC_COLUMNS,
    SPECTRUM_COLUMNS,
    RunConfig,
    _series,
    list_presets,
    main,
    preset_path,
    read_spectrum_csv,
)
from fourlevel_eit.constants import GAMMA_D1 as G, TWO_PI
from fourlevel_eit.dressed import resonance_branches
from fourlevel_eit.rbdata import atom_system
from fourlevel_eit.spectra import CellConfig, spectrum_scan

MHZ = TWO_PI * 1e6

BASE = {
    "model": "four_level",
    "isotope": "Rb85",
    "transition": {"control_ground_F": 2},
    "temperature_C": 50.0,
    "length_cm": 2.54,
    "control": {"rabi_over_gamma": 5.0, "Delta_MHz": 0.0},
    "gamma21_over_gamma": 0.25,
    "broadening": "doppler_analytic",
}


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def _read(path):
    text = open(path).read()
    meta = {}
    body = []
    for ln in text.splitlines():
        if ln.startswith("# "):
            k, v = ln[2:].split(": ", 1)
            meta[k] = json.loads(v)
        else:
            body.append(ln)
    return meta, list(csv.reader(body)), text


def _run(tmp_path, command, cfg, *extra, out="out.csv"):
    o = str(tmp_path / out)
    return main([command, "--config", _write(tmp_path, cfg), "--out", o, *extra]), o


def test_spectrum_header_and_rows(tmp_path):
    cfg = {**BASE, "scan": {"delta_MHz": {"min": -10, "max": 10, "points": 5}}}
    rc, o = _run(tmp_path, "spectrum", cfg)
    assert rc == 0
    meta, rows, _ = _read(o)
    assert rows[0] == SPECTRUM_COLUMNS
    assert len(rows) == 6
    assert set(meta) == {"code_version", "command", "config", "series", "units", "numeric_fallback_points"}
    assert rows[1][:3] == ["four_level", "0.0", "-10.0"] and rows[-1][2] == "10.0"
    atom = atom_system("Rb85", 2, gamma21=0.25 * G)
    ref = spectrum_scan(Model.FOUR_LEVEL, atom, CellConfig("Rb85", 323.15, 0.0254), FieldConfig(5 * G), [-10 * MHZ])
    assert float(rows[1][3]) == pytest.approx(ref.transmission[0], rel=1e-14)


def test_single_point_spectrum(tmp_path):
    cfg = {**BASE, "scan": {"delta_MHz": {"min": 0, "max": 1, "points": 1}}}
    rc, o = _run(tmp_path, "spectrum", cfg)
    _, rows, _ = _read(o)
    assert rc == 0 and len(rows) == 2


def test_contour_1x1_equals_spectrum(tmp_path):
    s_cfg = {**BASE, "control": {"rabi_over_gamma": 5.0, "Delta_MHz": 40.0},
             "scan": {"delta_MHz": {"min": 3, "max": 4, "points": 1}}}
    c_cfg = {**BASE, "scan": {"delta_MHz": {"min": 3, "max": 4, "points": 1}, "Delta_MHz": {"min": 40, "max": 41, "points": 1}}}
    _, so = _run(tmp_path, "spectrum", s_cfg, out="s.csv")
    _, co = _run(tmp_path, "contour", c_cfg, out="c.csv")
    s = dict(zip(SPECTRUM_COLUMNS, _read(so)[1][1]))
    c_rows = _read(co)[1]
    c = dict(zip(c_rows[0], c_rows[1]))
    for k in ("Delta_MHz", "delta_MHz", "transmission", "chi32_im", "chi42_re"):
        assert s[k] == c[k]


def test_contour_branch_sidecar(tmp_path):
    cfg = {**BASE, "broadening": "none", "gamma21_over_gamma": 0.0, "branches": True,
           "scan": {"delta_MHz": {"min": -40, "max": 40, "points": 20}, "Delta_MHz": {"min": -700, "max": 300, "points": 6}}}
    rc, o = _run(tmp_path, "contour", cfg)
    assert rc == 0
    meta, rows, _ = _read(str(tmp_path / "out.branches.csv"))
    assert rows[0] == BRANCH_COLUMNS and len(rows) == 1 + 6 * 3
    atom = atom_system("Rb85", 2, gamma21=0.0)
    Dg = np.linspace(-700, 300, 6) * MHZ
    br, _ = resonance_branches(atom, FieldConfig(5 * G), Dg)
    got = np.array([float(r[3]) for r in rows[1:]]).reshape(6, 3)
    np.testing.assert_allclose(got, br / MHZ, rtol=1e-15)
    assert meta["branch_calibration"][0]["sign"] == -1


def test_zero_length_sweep_header_only(tmp_path):
    cfg = {**BASE, "sweep": {"parameter": "gamma21", "min": 0, "max": 1, "points": 0}}
    rc, o = _run(tmp_path, "metrics", cfg)
    meta, rows, _ = _read(o)
    assert rc == 0 and rows == [METRIC_COLUMNS]
    assert meta["sweep"]["points"] == 0


def test_metrics_sweep_units(tmp_path):
    cfg = {**BASE, "control": {"power_mW": 20.0, "diameter_mm": 1.0},
           "sweep": {"parameter": "control_power", "values": [20.0], "fwhm": False}}
    rc, o = _run(tmp_path, "metrics", cfg)
    _, rows, _ = _read(o)
    row = dict(zip(rows[0], rows[1]))
    assert row["value"] == "20.0" and row["fwhm_MHz"] == "nan"
    assert 0 < float(row["transparency"]) < 1


def test_dressed_output(tmp_path):
    cfg = {**BASE, "gamma21_over_gamma": 0.0, "scan": {"Delta_MHz": {"min": -100, "max": 100, "points": 3}}}
    rc, o = _run(tmp_path, "dressed", cfg)
    meta, rows, _ = _read(o)
    assert rc == 0 and rows[0] == DRESSED_COLUMNS and len(rows) == 10
    assert "vanish_point" in meta and "branch_calibration" in meta


@pytest.mark.parametrize(
    "cfg",
    [
        {**BASE, "bogus": 1},
        {**BASE, "control": {"rabi_over_gamma": 1.0, "power_mW": 1.0}},
        {**BASE, "control": {"power_mW": 1.0}},
        {**BASE, "model": "five_level"},
        {**BASE, "temperature_C": 400.0},
        {**BASE, "scan": {"delta_MHz": {"min": 1, "max": -1, "points": 3}}},
        {**BASE, "scan": {"delta_MHz": {"min": -1, "max": 1, "points": 0}}},
        {**BASE, "scan": {"delta_MHz": {"min": -1, "max": 1}}},
        {**BASE, "transition": {"control_ground_F": 3, "probe_ground_F": 3}},
    ],
)
def test_configuration_errors_exit_1(tmp_path, cfg, capsys):
    cfg = {"scan": {"delta_MHz": {"min": -1, "max": 1, "points": 3}}, **cfg}
    rc, _ = _run(tmp_path, "spectrum", cfg)
    assert rc == 1
    assert "configuration error" in capsys.readouterr().err


def test_missing_and_malformed_config(tmp_path):
    assert main(["spectrum", "--config", str(tmp_path / "none.json")]) == 1
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    assert main(["spectrum", "--config", str(p)]) == 1
    assert main(["spectrum", "--preset", "nosuchpreset"]) == 1


def test_numerical_error_exit_2(tmp_path, capsys):
    # calibration window without any absorption maximum
    cfg = {**BASE, "scan": {"Delta_MHz": {"min": -10, "max": 10, "points": 3}, "delta_MHz": {"min": 500, "max": 520, "points": 20}}}
    rc, _ = _run(tmp_path, "dressed", cfg)
    assert rc == 2
    assert "numerical error" in capsys.readouterr().err


def _control_off_data(tmp_path, seed=None):
    cfg = {**BASE, "control": {"rabi_over_gamma": 0.0}, "temperature_C": 40.0, "length_cm": 7.6,
           "scan": {"delta_MHz": {"min": -1500, "max": 1500, "points": 121}}}
    extra = []
    if seed is not None:
        cfg["noise"] = {"relative_sigma": 0.005}
        extra = ["--seed", str(seed)]
    rc, o = _run(tmp_path, "spectrum", cfg, *extra, out="data.csv")
    assert rc == 0
    return o


def test_fit_temperature_from_noisy_spectrum(tmp_path):
    data = _control_off_data(tmp_path, seed=7)
    cfg = {**BASE, "control": {"rabi_over_gamma": 0.0}, "temperature_C": 30.0, "length_cm": 7.6,
           "fit": {"parameter": "temperature"}}
    o = str(tmp_path / "fit.json")
    rc = main(["fit", "--config", _write(tmp_path, cfg), "--data", data, "--out", o])
    doc = json.load(open(o))
    assert rc == 0 and doc["converged"]
    assert doc["parameters"]["temperature_C"] == pytest.approx(40.0, abs=0.5)


def test_noise_is_seeded(tmp_path):
    a = open(_control_off_data(tmp_path, seed=3)).read()
    b = open(_control_off_data(tmp_path, seed=3)).read()
    c = open(_control_off_data(tmp_path, seed=4)).read()
    assert a == b and a != c


def test_fit_not_converged_exit_3(tmp_path):
    data = _control_off_data(tmp_path)
    cfg = {**BASE, "control": {"rabi_over_gamma": 0.0}, "length_cm": 7.6,
           "fit": {"parameter": "temperature", "data": "data.csv", "bounds_C": [20.0, 21.0]}}
    rc = main(["fit", "--config", _write(tmp_path, cfg), "--out", str(tmp_path / "fit.json")])
    assert rc == 3
    assert json.load(open(tmp_path / "fit.json"))["converged"] is False


def test_read_spectrum_csv_series_selection(tmp_path):
    cfg = {**BASE, "scan": {"delta_MHz": {"min": -5, "max": 5, "points": 3}},
           "series": [{"label": "a"}, {"label": "b", "gamma21_over_gamma": 0.5}]}
    _, o = _run(tmp_path, "spectrum", cfg)
    with pytest.raises(ValueError):
        read_spectrum_csv(o)
    s = read_spectrum_csv(o, "b")
    np.testing.assert_allclose(s.delta, np.array([-5, 0, 5]) * MHZ)


def test_duplicate_series_labels(tmp_path):
    cfg = {**BASE, "scan": {"delta_MHz": {"min": -5, "max": 5, "points": 3}}, "series": [{}, {}]}
    assert _run(tmp_path, "spectrum", cfg)[0] == 1


@pytest.mark.parametrize("command", ["spectrum", "contour", "metrics"])
def test_threads_do_not_change_output(tmp_path, command):
    cfg = {**BASE, "scan": {"delta_MHz": {"min": -10, "max": 10, "points": 9}, "Delta_MHz": {"min": -50, "max": 50, "points": 3}},
           "sweep": {"parameter": "rabi_over_gamma", "values": [3.0, 6.0, 9.0], "fwhm": False}}
    if command == "spectrum":
        del cfg["scan"]["Delta_MHz"]
    texts = []
    for t in ("1", "3"):
        rc, o = _run(tmp_path, command, cfg, "--threads", t, out=f"o{t}.csv")
        assert rc == 0
        texts.append(open(o, "rb").read())
    assert texts[0] == texts[1]


def test_constants_json(tmp_path):
    o = tmp_path / "c.json"
    assert main(["constants", "--out", str(o)]) == 0
    doc = json.load(open(o))
    assert doc["constants"]["Rb87"]["omega43"]["unit"] == "rad/s"


def test_presets_load():
    names = list_presets()
    assert {"fig2a", "fig3a", "fig7a", "fig11b", "fig12d"} <= set(names)
    for n in names:
        runs = _series(json.loads(preset_path(n).read_text()))
        assert all(isinstance(r, RunConfig) for r in runs)


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "fourlevel_eit", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("fourlevel-eit")
