import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ifsmap.errors import ValidationError
from ifsmap.grid import make_grid
from ifsmap.potentials import make_potential
from ifsmap.recover import (
    ModePlan,
    choose_nu,
    default_eps,
    directions,
    error_envelope,
    fourier_at,
    gamma_modulus,
    kappa_lattice,
    reconstruct,
    recover_mode,
)

# (2 pi)^-1 times the integral over the unit disk of 2 sin(rho |x| / 2), rho = 0.01
GAMMA_DISK = 0.003333325000007


@pytest.fixture(scope="module")
def grid():
    return make_grid(2, math.pi, 128)


@pytest.fixture(scope="module")
def pair(grid):
    V1 = make_potential("gaussian", grid).field
    V2 = make_potential("gaussian", grid, amplitude=0.5, width=0.2, center=(0.15, -0.1)).field
    return V1, V2


def test_default_eps():
    assert default_eps(16.0, 2) == pytest.approx(16.0**-1.5)
    assert default_eps(8.0, 3) == pytest.approx(8.0 ** (-4 / 3))


def test_directions_oracle():
    a, b = directions((2.0, 0.0), math.sqrt(2), (0.0, 1.0))
    r = 1 / math.sqrt(2)
    assert np.allclose(a, (r, r)) and np.allclose(b, (r, -r))


@settings(max_examples=60, deadline=None)
@given(st.floats(-4, 4), st.floats(-4, 4), st.floats(0, 3))
def test_directions_property(kx, ky, extra):
    k = np.array([kx, ky])
    lam = np.linalg.norm(k) / 2 + extra + 1e-3
    a, b = directions(k, lam, choose_nu(k))
    assert np.linalg.norm(a) == pytest.approx(1, abs=1e-12)
    assert np.linalg.norm(b) == pytest.approx(1, abs=1e-12)
    assert np.allclose(lam * (a + b), k, atol=1e-10)


@pytest.mark.parametrize("k, nu", [((0, 0), (1, 0)), ((1, 0), (0, 1)), ((0, 2), (1, 0)), ((0, 0, 3), (1, 0, 0))])
def test_choose_nu(k, nu):
    assert np.allclose(choose_nu(k), nu)


def test_directions_validation():
    with pytest.raises(ValidationError):
        directions((2, 0), 0.5, (0, 1))
    with pytest.raises(ValidationError):
        directions((2, 0), 2.0, (1, 0))
    with pytest.raises(ValidationError):
        directions((2, 0), 2.0, (0, 2))


def test_gamma_disk_oracle():
    g = make_grid(2, 2.0, 1024)
    F = g.field((g.radius <= 1).astype(float))
    assert gamma_modulus(F, 0.01) == pytest.approx(GAMMA_DISK, rel=2e-3)


def test_gamma_saturates():
    g = make_grid(2, 2.0, 64)
    F = g.field(np.ones(g.shape))
    big = gamma_modulus(F, 1e6)
    assert big == pytest.approx(2 * 16 / (2 * math.pi), rel=1e-2)
    with pytest.raises(ValidationError):
        gamma_modulus(F, 0.0)


def test_plan_validation():
    with pytest.raises(ValidationError):
        ModePlan((1, 0), (8, 4))
    with pytest.raises(ValidationError):
        ModePlan((4, 0), (2, 8))
    with pytest.raises(ValidationError):
        ModePlan((1, 0), (8,), nu=(1, 0))
    with pytest.raises(ValidationError):
        ModePlan((1, 0), (8,), pairing_mode="other")
    p = ModePlan((1, 0), (8,))
    assert p.nu == (0.0, 1.0) and p.eps(8) == default_eps(8, 2)
    assert ModePlan((1, 0), (8,), eps_rule=lambda lam: 0.1).eps(8) == 0.1


def test_equal_potentials_give_zero(grid):
    V = make_potential("gaussian", grid).field
    est = recover_mode(V, V, ModePlan((1, 0), (8, 16)))
    assert np.all(est.estimate == 0) and np.all(est.remainder == 0)


def test_split_and_convergence(grid, pair):
    V1, V2 = pair
    est = recover_mode(V1, V2, ModePlan((1, 0), (8, 16)))
    assert np.all(est.split_defect() <= 1e-12)
    assert np.all(est.remainder_ratio() < 0.1)
    truth = fourier_at(V1 - V2, (1, 0))
    err = np.abs(est.estimate - truth)
    assert err[1] < err[0] and err[1] <= 1e-2 * abs(truth)
    rep = error_envelope(est, V1 - V2)
    assert rep.under[0] and rep.C >= 0
    assert rep.relative_errors()[1] == pytest.approx(err[1] / abs(truth))


def test_leading_mode_skips_solver(grid, pair):
    V1, V2 = pair
    est = recover_mode(V1, V2, ModePlan((0, 0), (8,), pairing_mode="leading"))
    assert np.isnan(est.full).all()
    assert est.estimate[0] == pytest.approx(est.leading[0] / est.normalization[0])


def test_kappa_lattice(grid):
    k = kappa_lattice(grid, 3, 2)
    assert k.shape == (9, 2) and k.max() == 2 and k.min() == -2
    with pytest.raises(ValidationError):
        kappa_lattice(grid, 4)


def test_reconstruct_validation_and_zero(grid):
    V = make_potential("gaussian", grid).field
    with pytest.raises(ValidationError):
        reconstruct(V, V, size=17, multiple=2, template=ModePlan((0, 0), (8,)))
    rec = reconstruct(V, V, size=3, template=ModePlan((0, 0), (16,)))
    assert not np.any(rec.field.values)
    assert rec.cell == pytest.approx(math.pi / 2)
    assert len(rec.estimates) == 9
