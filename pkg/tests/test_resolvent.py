import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ifsmap.errors import SpaceMismatchError, ValidationError
from ifsmap.grid import make_grid, to_frequency
from ifsmap.resolvent import PvSettings, apply_pv, modulated, pv_symbol, resolvent_bound_probe


def test_symbol_is_odd_and_real():
    d = np.linspace(-5, 5, 101)
    s = pv_symbol(d, 0.3)
    assert np.allclose(s, -s[::-1])
    assert pv_symbol(np.array([0.0]), 0.3)[0] == 0.0


@settings(max_examples=50, deadline=None)
@given(st.floats(0.5, 50), st.floats(1e-3, 0.2))
def test_extrapolated_error_formula(d, eta):
    e1, e2 = eta, eta / 2
    exact = -(e1 * e2) ** 2 / ((d * d + e1 * e1) * (d * d + e2 * e2))
    got = pv_symbol(np.array([d]), eta, extrapolate=True)[0] * d - 1
    assert got == pytest.approx(exact, rel=1e-6, abs=1e-15)


def test_settings_validation():
    with pytest.raises(ValidationError):
        PvSettings(eta_rule="other")
    with pytest.raises(ValidationError):
        PvSettings(eta_rule="fixed", eta=0.0)
    with pytest.raises(ValidationError):
        PvSettings(ratios=(0.5, 1.0))


def test_grid_width_rule():
    assert PvSettings().width(8.0, math.pi) == pytest.approx(8.0)
    assert PvSettings(eta_rule="fixed", eta=0.2).width(8.0, math.pi) == 0.2


def test_inverts_helmholtz_away_from_shell():
    g = make_grid(2, math.pi, 256)
    lam = 32.0
    rng = np.random.default_rng(3)
    F = to_frequency(g.field(rng.standard_normal(g.shape)))
    band = g.xi_squared <= (lam / 2) ** 2
    f = g.field(np.zeros(g.shape))
    from ifsmap.grid import to_physical

    f = to_physical(F.replace(np.where(band, F.values, 0)))
    u = apply_pv(lam, f, PvSettings(extrapolate=True))
    from ifsmap.grid import spectral_laplacian

    r = spectral_laplacian(u) + lam**2 * u - f
    assert np.linalg.norm(r.values) <= 1e-6 * np.linalg.norm(f.values)


def test_apply_pv_validation(small_grid):
    f = small_grid.zeros()
    with pytest.raises(ValidationError):
        apply_pv(0.0, f)
    with pytest.raises(SpaceMismatchError):
        apply_pv(1.0, to_frequency(f))


def test_real_input_gives_real_output(small_grid, rng):
    f = small_grid.field(rng.standard_normal(small_grid.shape))
    assert np.abs(apply_pv(3.0, f).values.imag).max() <= 1e-12


def test_modulation_moves_spectrum():
    g = make_grid(2, math.pi, 128)
    bump = g.field(np.exp(-4 * g.radius**2))
    F = np.abs(to_frequency(modulated(bump, 20.0, (1.0, 0.0))).values)
    idx = np.unravel_index(F.argmax(), F.shape)
    assert (idx[0] - 64, idx[1] - 64) == (20, 0)


def test_probe_modulated_slope():
    g = make_grid(2, math.pi, 512)
    r2 = g.radius**2 / 0.25
    bump = np.zeros(g.shape)
    inside = r2 < 1
    bump[inside] = np.exp(1 - 1 / (1 - r2[inside]))
    rep = resolvent_bound_probe([8, 16, 32], g.field(bump), direction=(1.0, 0.0))
    assert rep.slope == pytest.approx(-1.0, abs=0.1)
    assert len(rep.rows()) == 3
