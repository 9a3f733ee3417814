import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nfsim import (
    ConfigurationError,
    FieldRecord,
    GridConfig,
    NuclearConstants,
    PulseConfig,
    ScenarioConfig,
    SpectrumGridConfig,
    TargetConfig,
    angular_detuning,
    build_time_grid,
    gaussian_input,
)
from nfsim.configio import scenario_from_text, scenario_to_text


def test_time_grid_defaults():
    t = build_time_grid(GridConfig(dt=0.005, t_end=1500.0))
    assert t.size == 300001
    assert t[0] == 0.0
    assert t[-1] == 1500.0


def test_time_grid_small():
    t = build_time_grid(GridConfig(dt=0.5, t_end=1.0, n_slabs=8))
    assert np.allclose(t, [0.0, 0.5, 1.0])


def test_time_grid_non_divisible():
    with pytest.raises(ConfigurationError):
        GridConfig(dt=0.3, t_end=1.0)


def test_time_grid_no_drift():
    grid = GridConfig(dt=0.005, t_end=50.0)
    t = build_time_grid(grid)
    i = np.arange(t.size)
    assert np.all(t == i * grid.dt)


def test_gaussian_peak_values():
    pulse = PulseConfig()
    grid = GridConfig(dt=0.005, t_end=10.0)
    rec = gaussian_input(pulse, grid)
    t = rec.times()
    i0 = int(round(pulse.t0 / grid.dt))
    assert rec.samples[i0] == pytest.approx(1.0)
    ip = int(round((pulse.t0 + pulse.tau) / grid.dt))
    im = int(round((pulse.t0 - pulse.tau) / grid.dt))
    assert rec.samples[ip].real == pytest.approx(math.exp(-1), rel=1e-12)
    assert rec.samples[im].real == pytest.approx(math.exp(-1), rel=1e-12)
    assert abs(rec.samples[0]) < 1e-19


def test_gaussian_symmetric_about_t0():
    pulse = PulseConfig()
    grid = GridConfig(dt=0.005, t_end=10.0)
    rec = gaussian_input(pulse, grid)
    i0 = int(round(pulse.t0 / grid.dt))
    for k in (1, 5, 20, 100):
        a = rec.samples[i0 - k].real
        b = rec.samples[i0 + k].real
        assert a == pytest.approx(b, rel=1e-15)


def test_gaussian_under_resolved():
    with pytest.raises(ConfigurationError):
        gaussian_input(PulseConfig(tau=0.01, t0=0.3), GridConfig(dt=0.005, t_end=10.0))


def test_angular_detuning_values():
    c = NuclearConstants()
    assert angular_detuning(80.0, c) == pytest.approx(80.0 / 141.0, rel=1e-12)
    assert angular_detuning(0.0, c) == 0.0
    assert angular_detuning(5.0, c) == pytest.approx(5.0 / 141.0, rel=1e-12)


def test_pulse_invariants():
    with pytest.raises(ConfigurationError):
        PulseConfig(tau=0.0)
    with pytest.raises(ConfigurationError):
        PulseConfig(t0=0.1, tau=0.1)


def test_grid_invariants():
    with pytest.raises(ConfigurationError):
        GridConfig(dt=-0.1, t_end=1.0)
    with pytest.raises(ConfigurationError):
        GridConfig(dt=0.005, t_end=100.0, n_slabs=4)


def test_target_invariants():
    with pytest.raises(ConfigurationError):
        TargetConfig(xi=-1.0)
    with pytest.raises(ConfigurationError):
        TargetConfig(thickness_L=0.0)
    with pytest.raises(ConfigurationError):
        TargetConfig(delta_over_gamma=-5.0)


def test_scenario_shared_delta():
    with pytest.raises(ConfigurationError):
        ScenarioConfig(
            targets=(
                TargetConfig(delta_over_gamma=80.0),
                TargetConfig(delta_over_gamma=5.0),
            )
        )


def test_scenario_detuning_resolution():
    # dt = 0.05 is too coarse for Delta = 80 gamma
    with pytest.raises(ConfigurationError):
        ScenarioConfig(
            grid=GridConfig(dt=0.05, t_end=100.0),
            pulse=PulseConfig(t0=4.0, tau=1.0),
            targets=(TargetConfig(delta_over_gamma=80.0),),
        )


def test_field_record_validation():
    with pytest.raises(ConfigurationError):
        FieldRecord(0.0, 0.005, np.array([1.0]))
    with pytest.raises(ConfigurationError):
        FieldRecord(0.0, 0.005, np.array([1.0, np.nan]))


def test_field_record_immutable():
    rec = FieldRecord(0.0, 0.005, np.zeros(4))
    with pytest.raises(ValueError):
        rec.samples[0] = 1.0


def test_constants_invariants():
    with pytest.raises(ConfigurationError):
        NuclearConstants(gamma=0.0)
    with pytest.raises(ConfigurationError):
        NuclearConstants(n_electronic=1.0 - 1e-8j)


finite = st.floats(
    min_value=1e-3, max_value=1e3, allow_nan=False, allow_infinity=False
)


@settings(max_examples=50, deadline=None)
@given(
    xi=st.floats(min_value=0.0, max_value=100.0),
    delta=st.floats(min_value=0.0, max_value=100.0),
    tau=st.floats(min_value=0.05, max_value=0.5),
    n_slabs=st.integers(min_value=8, max_value=256),
)
def test_config_roundtrip(xi, delta, tau, n_slabs):
    config = ScenarioConfig(
        pulse=PulseConfig(t0=4 * tau + 0.1, tau=tau),
        grid=GridConfig(dt=tau / 20, t_end=tau / 20 * 2000, n_slabs=n_slabs),
        targets=(
            TargetConfig(xi=xi, delta_over_gamma=delta),
            TargetConfig(xi=xi / 2, delta_over_gamma=delta),
        ),
        spectrum_grid=SpectrumGridConfig(-100.0, 100.0, 0.1),
    )
    back, meta = scenario_from_text(scenario_to_text(config))
    assert meta is None
    assert back == config
