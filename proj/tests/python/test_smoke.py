import math

import numpy as np
import pytest

chiptrap = pytest.importorskip("chiptrap")


def calibrated():
    c = chiptrap.TrapConfig()
    c.d_ext_um = 18.180352640232147
    c.crossing_height_um = 13.635973239119437
    c.ic_height_offset_um = 5.8253434118247949
    return c


def test_guide_wire_field():
    c = chiptrap.TrapConfig()
    c.B0x_G = c.B0y_G = 0.0
    c.Iext_base_mA = c.Iext_slope_mA = c.Ic_base_mA = c.Ic_slope_mA = 0.0
    B = chiptrap.field_at(c, 0.0, 0.0, 0.0, 52.5)
    assert math.hypot(*B) == pytest.approx(20.0, rel=1e-12)


def test_potential_curve():
    x = chiptrap.symmetric_grid(15.0, 256)
    p0 = chiptrap.potential_curve(calibrated(), 0.0, x)
    p1 = chiptrap.potential_curve(calibrated(), 1.0, x)
    assert p0.well_separation_um == 0.0
    assert p1.well_separation_um > 4.0
    np.testing.assert_allclose(p0.U, 2 * math.pi * 1.4e6 * p0.bmin_G)


def test_spectrum_and_ramps():
    grid = chiptrap.GridSpec()
    grid.points = 512
    b = chiptrap.sweep_spectrum(calibrated(), s_points=41, n_states=4, grid=grid)
    assert b.energies.shape == (len(b.s), 4)
    assert np.max(np.diff(b.s)) <= 0.01 + 1e-12
    assert np.all(np.diff(b.energies, axis=1) >= 0)

    t02 = chiptrap.coupling_table(b, 0, 2)
    t01 = chiptrap.coupling_table(b, 0, 1)
    assert np.max(np.abs(t01.a)) < 1e-6 * np.max(np.abs(t02.a))

    lin = chiptrap.sweep_duration(t02, chiptrap.Ramp.linear(1.0), [0.03, 0.06, 0.09])
    opt = chiptrap.optimize_ramp(t02, 0.03)
    assert opt.ramp.value(0.0) == 0.0
    assert opt.ramp.value(0.03) == pytest.approx(1.0)
    for r in lin:
        p = chiptrap.transition_amplitude(t02, opt.ramp.with_duration(r.T)).probability
        assert p < 0.1 * r.probability
    amp = chiptrap.transition_amplitude(t02, opt.ramp).amplitude
    assert abs(opt.predict_amplitude(0.03)) == pytest.approx(abs(amp), rel=1e-3)


def test_constant_coupling_oracle():
    s = np.linspace(0, 1, 101)
    dw = 2 * math.pi * 200
    t = chiptrap.CouplingTable(0, 2, s, np.full_like(s, 0.5), np.full_like(s, dw))
    T = 0.0123
    exact = 0.5 * (np.exp(1j * dw * T) - 1) / (1j * dw * T)
    r = chiptrap.transition_amplitude(t, chiptrap.Ramp.linear(T))
    assert abs(r.amplitude - exact) < 1e-7


def test_dephasing():
    assert chiptrap.gradient_dephasing(6.0, 1.0, 0.06) == pytest.approx(2 * math.pi * 50.4)


def test_errors():
    with pytest.raises(chiptrap.ConfigError):
        chiptrap.parse_config("bogus: 1")
    with pytest.raises(chiptrap.InputError):
        chiptrap.symmetric_grid(5.0, 11)
