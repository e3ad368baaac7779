import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ifsmap.errors import OddGridSizeError, SpaceMismatchError, ValidationError
from ifsmap.grid import (
    Space,
    apply_multiplier,
    apply_window,
    integrate,
    l2_norm,
    make_grid,
    read_field,
    smooth_taper,
    spectral_laplacian,
    to_frequency,
    to_physical,
    write_field,
)

from conftest import random_field


def test_spacing():
    assert make_grid(2, 8, 16).h == 1.0


def test_max_frequency_per_axis():
    g = make_grid(2, math.pi, 64)
    assert g.max_frequency == pytest.approx(32.0)
    assert g.freq_axis[0] == pytest.approx(-32.0)
    assert 0.0 in g.freq_axis


@pytest.mark.parametrize("args, err", [
    ((3, 8, 15), OddGridSizeError),
    ((4, 8, 16), ValidationError),
    ((2, 0.0, 16), ValidationError),
    ((2, -1.0, 16), ValidationError),
    ((2, 1.0, 8), ValidationError),
])
def test_rejects_bad_grids(args, err):
    with pytest.raises(err):
        make_grid(*args)


def test_lattices_have_equal_size():
    g = make_grid(3, 2.0, 16)
    assert g.xi_squared.size == g.radius.size == 16**3


def test_field_validation(small_grid):
    with pytest.raises(ValidationError):
        small_grid.field(np.zeros(10))
    bad = np.zeros(small_grid.shape)
    bad[0, 0] = np.nan
    with pytest.raises(ValidationError):
        small_grid.field(bad)
    flat = small_grid.field(np.arange(64 * 64))
    assert flat.values[1, 0] == 64  # row-major


def test_fields_are_immutable(small_grid):
    f = small_grid.zeros()
    with pytest.raises(ValueError):
        f.values[0, 0] = 1


def test_roundtrip(small_grid, rng):
    f = random_field(small_grid, rng)
    back = to_physical(to_frequency(f))
    assert np.abs(back.values - f.values).max() <= 1e-12 * np.abs(f.values).max()


def test_space_flags_enforced(small_grid):
    f = small_grid.zeros()
    with pytest.raises(SpaceMismatchError):
        to_physical(f)
    with pytest.raises(SpaceMismatchError):
        to_frequency(to_frequency(f))
    with pytest.raises(SpaceMismatchError):
        integrate(to_frequency(f))


def test_mode_lands_on_one_lattice_point(small_grid):
    k = (3, -5)
    F = to_frequency(small_grid.field(small_grid.mode(k)))
    a = np.abs(F.values)
    idx = np.unravel_index(a.argmax(), a.shape)
    assert tuple(np.array(idx) - 32) == k
    a[idx] = 0
    assert a.max() <= 1e-12 * np.abs(F.values).max()


def test_constant_transform(small_grid):
    g = small_grid
    F = to_frequency(g.field(np.ones(g.shape)))
    expected = g.h**2 * g.N**2 / (2 * math.pi)
    assert F.values[32, 32] == pytest.approx(expected, rel=1e-14)
    rest = np.abs(F.values).copy()
    rest[32, 32] = 0
    assert rest.max() <= 1e-12 * expected


def test_plancherel(small_grid, rng):
    f = random_field(small_grid, rng)
    assert l2_norm(to_frequency(f)) == pytest.approx(l2_norm(f), rel=1e-10)


def test_integrate_constant_and_mode(small_grid):
    g = small_grid
    assert integrate(g.field(np.ones(g.shape))) == pytest.approx(256.0)
    assert abs(integrate(g.field(g.mode((1, 2))))) <= 1e-12


def test_integrate_gaussian():
    g = make_grid(2, 8.0, 256)
    f = g.sample(lambda x, y: np.exp(-(x * x + y * y)))
    assert abs(integrate(f) - math.pi) <= 1e-10


def test_laplacian_of_modes_and_constants(small_grid):
    g = small_grid
    k = np.array([2, -1])
    f = g.field(g.mode(k))
    xi2 = float(np.sum((k * g.dxi) ** 2))
    assert np.abs(spectral_laplacian(f).values + xi2 * f.values).max() <= 1e-12 * xi2
    assert np.abs(spectral_laplacian(g.field(np.ones(g.shape))).values).max() <= 1e-12


def test_laplacian_of_gaussian():
    g = make_grid(2, 8.0, 256)
    f = g.sample(lambda x, y: np.exp(-(x * x + y * y)))
    r2 = g.radius**2
    exact = (4 * r2 - 4) * np.exp(-r2)
    lap = apply_window(spectral_laplacian(f), 0.75).values
    ref = np.where(g.sup_radius <= 0.75 * g.L, exact, 0)
    assert np.abs(lap - ref).max() <= 1e-8


def test_laplacian_matches_frequency_path(small_grid, rng):
    f = random_field(small_grid, rng)
    F = to_frequency(f)
    via = to_physical(F.replace(-small_grid.xi_squared * F.values))
    assert np.abs(via.values - spectral_laplacian(f).values).max() <= 1e-10 * np.abs(via.values).max()


def test_window(small_grid):
    g = small_grid
    one = g.field(np.ones(g.shape))
    assert apply_window(one, 1.0) is one
    half = apply_window(one, 0.5)
    # the boundary |x_i| = L/2 is inside: 33 samples per axis
    assert integrate(half) == pytest.approx(33**2 * g.h**2)
    assert np.array_equal(apply_window(half, 0.5).values, half.values)
    with pytest.raises(ValidationError):
        apply_window(one, 0.0)


def test_taper_is_one_inside_and_zero_outside():
    g = make_grid(2, 4.0, 64)
    t = smooth_taper(g, 0.5, 0.9)
    assert np.all(t[g.sup_radius <= 2.0] == 1.0)
    assert np.all(t[g.sup_radius >= 3.6] == 0.0)
    assert np.all((t >= 0) & (t <= 1))


def test_multiplier_identity(small_grid, rng):
    f = random_field(small_grid, rng)
    out = apply_multiplier(f, np.ones(small_grid.shape))
    assert np.abs(out.values - f.values).max() <= 1e-13


def test_field_file_roundtrip(tmp_path, rng):
    g = make_grid(3, 1.5, 16)
    f = random_field(g, rng)
    p = tmp_path / "f.ssfld"
    write_field(p, f)
    data = p.read_bytes()
    assert data[:6] == b"SSFLD1"
    assert len(data) == 6 + 4 + 4 + 8 + 1 + 16 * 16**3
    back = read_field(p)
    assert back.grid == g and back.space == Space.PHYSICAL
    assert np.array_equal(back.values, f.values)
    buf = io.BytesIO()
    write_field(buf, to_frequency(f))
    assert buf.getvalue()[6 + 16] == 1


def test_field_file_rejects_garbage(tmp_path):
    p = tmp_path / "bad"
    p.write_bytes(b"NOTAFIELD")
    with pytest.raises(ValidationError):
        read_field(p)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.sampled_from([(2, 16), (2, 32), (3, 16)]))
def test_roundtrip_and_plancherel_property(seed, shape):
    n, N = shape
    g = make_grid(n, 3.0, N)
    f = random_field(g, np.random.default_rng(seed))
    F = to_frequency(f)
    assert np.abs(to_physical(F).values - f.values).max() <= 1e-12 * np.abs(f.values).max()
    assert l2_norm(F) == pytest.approx(l2_norm(f), rel=1e-10)
