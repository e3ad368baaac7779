"""Periodic box discretization of R^n with continuum-normalized transforms.

The box is ``[-L, L)^n`` sampled at ``N`` points per axis, ``x_j = -L + j h``
with ``h = 2L/N``.  The frequency lattice is ``xi_k = (pi/L) k`` for integer
``k`` in ``[-N/2, N/2)``, stored in ascending order (zero frequency at index
``N/2`` on every axis).  Arrays are C-ordered (row-major, axis 0 slowest).

The forward transform discretizes

    F(xi) = (2 pi)^(-n/2) * integral exp(-i x.xi) f(x) dx

so frequency samples of a well-resolved, well-contained function are samples
of its continuum Fourier transform.
"""
from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import OddGridSizeError, SpaceMismatchError, ValidationError

__all__ = [
    "Grid",
    "ScalarField",
    "Space",
    "make_grid",
    "to_frequency",
    "to_physical",
    "integrate",
    "spectral_laplacian",
    "apply_multiplier",
    "apply_window",
    "smooth_taper",
    "inner",
    "l2_norm",
    "window_mask",
    "field_bytes",
    "write_field",
    "read_field",
]

MAGIC = b"SSFLD1"


class Space(enum.IntEnum):
    PHYSICAL = 0
    FREQUENCY = 1


@dataclass(frozen=True)
class Grid:
    n: int
    L: float
    N: int

    def __post_init__(self):
        if self.n not in (2, 3):
            raise ValidationError(f"dimension must be 2 or 3, got {self.n}")
        if self.N % 2:
            raise OddGridSizeError(f"N must be even, got {self.N}")
        if self.N < 16:
            raise ValidationError(f"N must be at least 16, got {self.N}")
        if not self.L > 0:
            raise ValidationError(f"L must be positive, got {self.L}")

    @property
    def h(self) -> float:
        return 2.0 * self.L / self.N

    @property
    def dxi(self) -> float:
        """Frequency lattice spacing pi/L."""
        return np.pi / self.L

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def cell_volume(self) -> float:
        return self.h**self.n

    @cached_property
    def axis(self) -> np.ndarray:
        return -self.L + self.h * np.arange(self.N)

    @cached_property
    def freq_axis(self) -> np.ndarray:
        return self.dxi * np.arange(-self.N // 2, self.N // 2)

    @cached_property
    def coords(self) -> tuple[np.ndarray, ...]:
        """Broadcastable coordinate arrays, one per axis."""
        return _open_mesh(self.axis, self.n)

    @cached_property
    def radius(self) -> np.ndarray:
        r2 = sum(c**2 for c in self.coords)
        return np.sqrt(np.broadcast_to(r2, self.shape))

    @cached_property
    def sup_radius(self) -> np.ndarray:
        """max_i |x_i| at every lattice point."""
        out = np.zeros(self.shape)
        for c in self.coords:
            np.maximum(out, np.abs(c), out=out)
        return out

    @cached_property
    def xi_squared(self) -> np.ndarray:
        """|xi|^2 in ascending (shifted) frequency order."""
        return np.broadcast_to(sum(k**2 for k in _open_mesh(self.freq_axis, self.n)), self.shape)

    @cached_property
    def _xi_squared_fft(self) -> np.ndarray:
        # |xi|^2 in numpy FFT order, used by the multiplier fast path
        k = self.dxi * np.fft.fftfreq(self.N, d=1.0 / self.N)
        return np.broadcast_to(sum(c**2 for c in _open_mesh(k, self.n)), self.shape).copy()

    @cached_property
    def _shift_sign(self) -> np.ndarray:
        # (-1)^(k_1 + ... + k_n) over the shifted index k; accounts for x_0 = -L
        s = (-1.0) ** np.arange(-self.N // 2, self.N // 2)
        return np.broadcast_to(math.prod(_open_mesh(s, self.n)), self.shape)

    @property
    def max_frequency(self) -> float:
        return self.dxi * self.N / 2

    def mode(self, k) -> np.ndarray:
        """Samples of the lattice plane wave exp(i xi_k . x) for integer index k."""
        k = np.asarray(k, dtype=float)
        if k.shape != (self.n,):
            raise ValidationError("mode index must have one entry per axis")
        phase = sum(self.dxi * ki * c for ki, c in zip(k, self.coords))
        return np.broadcast_to(np.exp(1j * phase), self.shape).copy()

    def field(self, values, space: Space = Space.PHYSICAL) -> "ScalarField":
        return ScalarField(self, np.asarray(values), Space(space))

    def zeros(self) -> "ScalarField":
        return ScalarField(self, np.zeros(self.shape, dtype=complex))

    def sample(self, fn) -> "ScalarField":
        """Evaluate ``fn(*coords)`` on the physical lattice."""
        vals = np.broadcast_to(fn(*self.coords), self.shape)
        return ScalarField(self, np.array(vals, dtype=complex))


def _open_mesh(ax: np.ndarray, n: int) -> tuple[np.ndarray, ...]:
    out = []
    for i in range(n):
        shape = [1] * n
        shape[i] = ax.size
        out.append(ax.reshape(shape))
    return tuple(out)


def make_grid(n: int, L: float, N: int) -> Grid:
    return Grid(int(n), float(L), int(N))


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Complex samples of a function on a grid, in physical or frequency space.

    ``values`` has shape ``grid.shape``; the flat row-major view is the
    canonical length-N^n sequence.  The array is made read-only on
    construction.
    """

    grid: Grid
    values: np.ndarray
    space: Space = Space.PHYSICAL

    def __post_init__(self):
        vals = np.array(self.values, dtype=complex)
        if vals.shape != self.grid.shape:
            if vals.size == self.grid.N**self.grid.n:
                vals = vals.reshape(self.grid.shape)
            else:
                raise ValidationError(
                    f"field has {vals.size} samples, grid needs {self.grid.N ** self.grid.n}"
                )
        if not np.all(np.isfinite(vals)):
            raise ValidationError("field contains non-finite samples")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "space", Space(self.space))

    def _check(self, other: "ScalarField"):
        if other.grid != self.grid:
            raise ValidationError("fields live on different grids")
        if other.space != self.space:
            raise SpaceMismatchError("fields live in different spaces")

    def replace(self, values) -> "ScalarField":
        return ScalarField(self.grid, values, self.space)

    def __add__(self, other):
        if isinstance(other, ScalarField):
            self._check(other)
            return self.replace(self.values + other.values)
        return self.replace(self.values + other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, ScalarField):
            self._check(other)
            return self.replace(self.values - other.values)
        return self.replace(self.values - other)

    def __neg__(self):
        return self.replace(-self.values)

    def __mul__(self, other):
        if isinstance(other, ScalarField):
            self._check(other)
            return self.replace(self.values * other.values)
        return self.replace(self.values * other)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self.replace(self.values / scalar)

    def conj(self) -> "ScalarField":
        return self.replace(np.conj(self.values))

    def abs(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)


def _require(f: ScalarField, space: Space, op: str):
    if f.space != space:
        raise SpaceMismatchError(f"{op} expects a {space.name.lower()}-space field")


def to_frequency(f: ScalarField) -> ScalarField:
    _require(f, Space.PHYSICAL, "to_frequency")
    g = f.grid
    scale = g.cell_volume * (2 * np.pi) ** (-g.n / 2)
    vals = np.fft.fftshift(np.fft.fftn(f.values)) * g._shift_sign * scale
    return ScalarField(g, vals, Space.FREQUENCY)


def to_physical(F: ScalarField) -> ScalarField:
    _require(F, Space.FREQUENCY, "to_physical")
    g = F.grid
    scale = (2 * np.pi) ** (g.n / 2) / g.cell_volume
    vals = np.fft.ifftn(np.fft.ifftshift(F.values * g._shift_sign)) * scale
    return ScalarField(g, vals, Space.PHYSICAL)


def apply_multiplier(f: ScalarField, symbol: np.ndarray) -> ScalarField:
    """Apply a Fourier multiplier given in FFT (unshifted) frequency order.

    The continuum normalizations and the ``(-1)^k`` phase of
    :func:`to_frequency` cancel for a multiplier, so this is exactly
    ``to_physical(symbol * to_frequency(f))`` up to rounding.
    """
    _require(f, Space.PHYSICAL, "apply_multiplier")
    return f.replace(np.fft.ifftn(symbol * np.fft.fftn(f.values)))


def spectral_laplacian(f: ScalarField) -> ScalarField:
    return apply_multiplier(f, -f.grid._xi_squared_fft)


def integrate(f: ScalarField) -> complex:
    _require(f, Space.PHYSICAL, "integrate")
    return complex(f.values.sum() * f.grid.cell_volume)


def inner(f: ScalarField, g: ScalarField) -> complex:
    """Discrete L^2 pairing h^n sum f conj(g)."""
    f._check(g)
    return complex(np.vdot(g.values, f.values) * f.grid.cell_volume)


def l2_norm(f: ScalarField) -> float:
    if f.space == Space.PHYSICAL:
        w = f.grid.cell_volume
    else:
        w = f.grid.dxi**f.grid.n
    return float(np.sqrt(w * np.vdot(f.values, f.values).real))


def window_mask(grid: Grid, fraction: float) -> np.ndarray:
    if not 0 < fraction <= 1:
        raise ValidationError(f"window fraction must lie in (0, 1], got {fraction}")
    return grid.sup_radius <= fraction * grid.L


def apply_window(f: ScalarField, fraction: float) -> ScalarField:
    """Zero every sample with max_i |x_i| > fraction * L."""
    _require(f, Space.PHYSICAL, "apply_window")
    if fraction == 1:
        return f
    return f.replace(np.where(window_mask(f.grid, fraction), f.values, 0))


def _smooth_step(t: np.ndarray) -> np.ndarray:
    # C-infinity step: 0 for t <= 0, 1 for t >= 1
    t = np.clip(t, 0.0, 1.0)
    a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def smooth_taper(grid: Grid, inner_fraction: float = 0.75, outer_fraction: float = 0.95) -> np.ndarray:
    """Tensor-product C-infinity cutoff: 1 on ||x||_inf <= inner*L, 0 beyond outer*L.

    Multiplying a non-periodic field by the taper makes it smooth and periodic,
    so spectral derivatives are exact wherever the taper equals one.
    """
    if not 0 < inner_fraction < outer_fraction <= 1:
        raise ValidationError("taper needs 0 < inner < outer <= 1")
    a, b = inner_fraction * grid.L, outer_fraction * grid.L
    prof = 1.0 - _smooth_step((np.abs(grid.axis) - a) / (b - a))
    out = np.ones(grid.shape)
    for c in _open_mesh(prof, grid.n):
        out = out * c
    return out


# -- SSFLD1 file format -------------------------------------------------------
# 6-byte magic, <u32 n, <u32 N, <f64 L, u8 space, then N^n (re, im) <f64 pairs

_HEADER = struct.Struct("<IIdB")


def field_bytes(f: ScalarField) -> bytes:
    g = f.grid
    head = MAGIC + _HEADER.pack(g.n, g.N, g.L, int(f.space))
    return head + np.ascontiguousarray(f.values, dtype="<c16").tobytes()


def write_field(path, f: ScalarField) -> None:
    """Write ``f`` to a path or a binary file object."""
    if hasattr(path, "write"):
        path.write(field_bytes(f))
    else:
        Path(path).write_bytes(field_bytes(f))


def read_field(path) -> ScalarField:
    data = Path(path).read_bytes()
    if data[:6] != MAGIC:
        raise ValidationError(f"{path}: not an SSFLD1 file")
    n, N, L, space = _HEADER.unpack_from(data, 6)
    grid = make_grid(n, L, N)
    body = data[6 + _HEADER.size:]
    if len(body) != 16 * N**n:
        raise ValidationError(f"{path}: expected {16 * N ** n} payload bytes, found {len(body)}")
    vals = np.frombuffer(body, dtype="<c16").astype(complex).reshape(grid.shape)
    return ScalarField(grid, vals, Space(space))
