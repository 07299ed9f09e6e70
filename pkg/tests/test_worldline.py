import json

import numpy as np
import jsonschema
import pytest

from twistorphase.worldline import PhysicalConstants, SpacetimeWorldline, WorldlineError


def test_constants_defaults_and_validation():
    c = PhysicalConstants()
    assert (c.G, c.hbar, c.c) == (6.67430e-11, 1.054571817e-34, 299792458.0)
    assert PhysicalConstants.natural() == PhysicalConstants(1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        PhysicalConstants(G=0)
    with pytest.raises(ValueError):
        PhysicalConstants(hbar=np.nan)


def test_validation_errors():
    with pytest.raises(WorldlineError):
        SpacetimeWorldline(0.0, [0, 1], [[0, 0, 0]] * 2)
    with pytest.raises(WorldlineError):
        SpacetimeWorldline(1.0, [0], [[0, 0, 0]])
    with pytest.raises(WorldlineError):
        SpacetimeWorldline(1.0, [0, 0], [[0, 0, 0]] * 2)
    with pytest.raises(WorldlineError):
        SpacetimeWorldline(1.0, [0, 1], [[0, 0, 0], [2, 0, 0]], c=1.0)
    with pytest.raises(WorldlineError):
        SpacetimeWorldline(1.0, [0, 1], [[0, 0, 0]] * 2, interpolation="spline")


def test_cubic_overshoot_is_caught():
    # chord speeds are fine but the spline between samples is not
    t = np.array([0.0, 1.0, 2.0, 3.0])
    p = np.array([[0, 0, 0], [0.9, 0, 0], [0.0, 0, 0], [0.9, 0, 0]])
    SpacetimeWorldline(1.0, t, p, c=1.0)
    with pytest.raises(WorldlineError):
        SpacetimeWorldline(1.0, t, p, interpolation="cubic", c=1.0)


def test_position_velocity_and_proper_time():
    wl = SpacetimeWorldline(1.0, [0, 1, 2], [[0, 0, 0], [0.6, 0, 0], [0.6, 0, 0]], c=1.0)
    assert np.allclose(wl.position(0.5), [0.3, 0, 0])
    assert np.allclose(wl.position(5.0), [0.6, 0, 0])
    assert np.allclose(wl.velocity(0.5), [0.6, 0, 0])
    assert wl.inverse_gamma(0.5) == pytest.approx(0.8)
    assert np.allclose(wl.proper_times(), [0, 0.8, 1.8])


def test_cubic_proper_time_matches_oracle():
    # x = a sin(w t): proper time from an independent fine trapezoid
    a, w = 0.3, 1.5
    wl = SpacetimeWorldline.from_function(
        1.0, lambda t: np.column_stack([a * np.sin(w * t), 0 * t, 0 * t]), 0, 4, 200,
        interpolation="cubic", c=1.0)
    tt = np.linspace(0, 4, 200_001)
    oracle = np.trapezoid(np.sqrt(1 - (a * w * np.cos(w * tt)) ** 2), tt)
    assert wl.proper_times()[-1] == pytest.approx(oracle, rel=1e-7)


def test_json_round_trip(tmp_path):
    wl = SpacetimeWorldline(2e-14, [0, 1, 2], [[0, 0, 0], [1e-6, 0, 0], [0, 2e-6, 0]],
                            interpolation="cubic")
    path = tmp_path / "wl.json"
    path.write_text(json.dumps(wl.to_json()))
    back = SpacetimeWorldline.load(path)
    assert back.mass == wl.mass and back.interpolation == "cubic"
    assert np.array_equal(back.times, wl.times)
    assert np.array_equal(back.positions, wl.positions)
    with pytest.raises(jsonschema.ValidationError):
        SpacetimeWorldline.from_json({"mass": 1.0, "samples": [{"t": 0, "x": 0, "y": 0}]})


def test_shift_and_mass():
    wl = SpacetimeWorldline.static(1.0, [0, 0, 1], 0, 2)
    assert wl.shifted(3.0).t_start == 3.0
    assert wl.with_mass(5.0).mass == 5.0
    assert not wl.times.flags.writeable
