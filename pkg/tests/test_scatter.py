import math

import numpy as np
import pytest

from ifsmap.errors import DivergentSeriesError, ValidationError
from ifsmap.grid import make_grid
from ifsmap.herglotz import herglotz_wave, make_density, quadrature_for_eps, rotation_to
from ifsmap.norms import b_star_norm, triple_norm
from ifsmap.potentials import make_potential
from ifsmap.resolvent import apply_pv
from ifsmap.scatter import empirical_threshold, lambda_threshold, one_step_constant, solve_correction


@pytest.fixture(scope="module")
def setup():
    g = make_grid(2, math.pi, 128)
    q = quadrature_for_eps(2, 0.1, 16)

    def incident(lam):
        return herglotz_wave(lam, make_density(0.1, rotation_to((1.0, 0.0)), q), g)

    return g, incident


def test_zero_potential_gives_zero_correction(setup):
    g, incident = setup
    r = solve_correction(g.zeros(), 8.0, incident(8.0))
    assert r.iterations == 1 and not np.any(r.v.values)
    assert r.correction_ratio == 0.0


def test_fixed_point_and_residual(setup):
    g, incident = setup
    V = make_potential("gaussian", g).field
    u = incident(12.0)
    r = solve_correction(V, 12.0, u, track_residual=True)
    assert r.converged
    again = apply_pv(12.0, V * (u + r.v))
    assert b_star_norm(again - r.v) <= 1e-9 * b_star_norm(u)
    assert r.residual <= 1e-2
    assert len(r.residual_history) == r.iterations
    assert set(r.summary()) == {"iterations", "contraction_ratios", "residual", "correction_ratio"}


def test_correction_shrinks_with_energy(setup):
    g, incident = setup
    V = make_potential("gaussian", g).field
    a = solve_correction(V, 8.0, incident(8.0)).correction_ratio
    b = solve_correction(V, 16.0, incident(16.0)).correction_ratio
    assert b < a


def test_strong_potential_diverges(setup):
    g, incident = setup
    V = make_potential("gaussian", g, amplitude=200.0).field
    with pytest.raises(DivergentSeriesError):
        solve_correction(V, 8.0, incident(8.0))


def test_validation(setup):
    g, incident = setup
    u = incident(8.0)
    with pytest.raises(ValidationError):
        solve_correction(g.zeros(), 0.0, u)
    with pytest.raises(ValidationError):
        solve_correction(g.zeros(), 8.0, u, tol=0.0)
    with pytest.raises(ValidationError):
        lambda_threshold(g.zeros(), C_n=0.0)


def test_threshold_scales_with_norm(setup):
    g, _ = setup
    V = make_potential("gaussian", g).field
    assert lambda_threshold(V, 2.0) == pytest.approx(2 * triple_norm(V))


def test_one_step_constant_is_order_one(setup):
    g, incident = setup
    V = make_potential("gaussian", g).field
    c = one_step_constant(V, 12.0, incident(12.0))
    assert 0 < c < 10


def test_empirical_threshold(setup):
    g, incident = setup
    V = make_potential("gaussian", g).field
    est = empirical_threshold(V, [8.0, 4.0], incident)
    assert est.lambdas == [4.0, 8.0]
    assert not any(est.diverged)
    assert est.threshold == pytest.approx(max(l * m for l, m in zip(est.lambdas, est.max_ratios)))
    assert est.C_n == pytest.approx(est.threshold / triple_norm(V))
    assert est.threshold < 4.0
