"""Split-step propagation of i u_t = -Delta u + V u and duality probes.

One Strang step applies the free flow for dt/2 in frequency space, the
potential phase ``exp(-i V dt)`` in physical space, and another free
half-step.  Consecutive free half-steps are merged.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .grid import ScalarField, apply_window, smooth_taper, window_mask

__all__ = [
    "PropagatorConfig",
    "initial_to_final",
    "free_gaussian",
    "StationaryPhaseReport",
    "stationary_phase_probe",
    "DuhamelReport",
    "duhamel_difference_probe",
    "discrete_ibp_probe",
    "refinement_order",
]


@dataclass(frozen=True)
class PropagatorConfig:
    T: float
    dt: float

    def __post_init__(self):
        if not self.dt > 0:
            raise ValidationError("dt must be positive")
        if not self.T >= 0:
            raise ValidationError("T must be non-negative")

    @property
    def steps(self) -> int:
        return int(round(self.T / self.dt))

    @property
    def actual_T(self) -> float:
        return self.steps * self.dt


class _Stepper:
    """Strang steps on raw arrays; ``direction=-1`` runs the flow backwards."""

    def __init__(self, V: ScalarField | None, grid, dt: float, direction: int = 1):
        self.grid = grid
        s = direction * dt
        xi2 = grid._xi_squared_fft
        self.half = np.exp(-0.5j * s * xi2)
        self.full = self.half * self.half
        self.pot = None if V is None else np.exp(-1j * s * V.values)

    def run(self, u: np.ndarray, steps: int, callback=None) -> np.ndarray:
        """Advance ``steps`` steps; ``callback(k, u)`` sees the state after each step k >= 0."""
        if callback is not None:
            callback(0, u)
        if steps == 0:
            return u
        if callback is None and self.pot is None:
            # the free flow is a single multiplier
            return np.fft.ifftn(self.half ** (2 * steps) * np.fft.fftn(u))
        U = self.half * np.fft.fftn(u)
        for k in range(1, steps + 1):
            x = np.fft.ifftn(U)
            if self.pot is not None:
                x *= self.pot
            U = np.fft.fftn(x)
            if callback is not None or k == steps:
                u = np.fft.ifftn(self.half * U)
                if callback is not None:
                    callback(k, u)
            U *= self.full
        return u


def _potential(V, f):
    if V is None:
        return None
    V._check(f)
    return V


def initial_to_final(V: ScalarField | None, f: ScalarField, cfg: PropagatorConfig,
                     backward: bool = False) -> ScalarField:
    """u(T) for u(0) = f.  ``backward`` applies the inverse-time flow."""
    st = _Stepper(_potential(V, f), f.grid, cfg.dt, -1 if backward else 1)
    return f.replace(st.run(f.values, cfg.steps))


def free_gaussian(grid, t: float, sigma: float = 1.0, k0=None) -> ScalarField:
    """Free evolution of exp(-|x|^2 / (2 sigma^2) + i k0.x) at time t (whole space)."""
    k0 = np.zeros(grid.n) if k0 is None else np.asarray(k0, dtype=float)
    a = sigma * sigma + 2j * t
    shifted = sum((c - 2 * k * t) ** 2 for c, k in zip(grid.coords, k0))
    plane = sum(k * c for k, c in zip(k0, grid.coords))
    vals = (sigma * sigma / a) ** (grid.n / 2) * np.exp(-shifted / (2 * a) + 1j * plane - 1j * k0.dot(k0) * t)
    return ScalarField(grid, np.broadcast_to(vals, grid.shape))


@dataclass
class StationaryPhaseReport:
    times: np.ndarray
    deviations: np.ndarray

    @property
    def max_deviation(self) -> float:
        return float(self.deviations.max()) if self.deviations.size else 0.0


def stationary_phase_probe(V: ScalarField | None, lam: float, w: ScalarField, dt: float, steps: int,
                           window: float = 0.5, taper: bool = True) -> StationaryPhaseReport:
    """Windowed deviation of the propagated state from exp(-i lam^2 t) w after every step.

    A stationary state is not periodic, so by default it is multiplied by a
    smooth cutoff supported in ``0.95 L`` first; the window must stay clear
    of the region the cutoff disturbs during the run.
    """
    f = w * smooth_taper(w.grid, 0.75, 0.95) if taper else w
    ref = apply_window(w, window).values
    scale = np.linalg.norm(ref)
    mask = window_mask(w.grid, window)
    devs = []

    def record(k, u):
        if k:
            diff = (u - np.exp(-1j * lam * lam * k * dt) * w.values)[mask]
            devs.append(np.linalg.norm(diff) / scale)

    _Stepper(_potential(V, w), w.grid, dt).run(f.values, steps, record)
    return StationaryPhaseReport(dt * np.arange(1, steps + 1), np.array(devs))


@dataclass
class DuhamelReport:
    A: complex
    B: complex
    born: complex
    phase: complex = -1j
    steps: int = 0

    @property
    def discrepancy(self) -> float:
        s = abs(self.A) + abs(self.B)
        return abs(self.A - self.B) / s if s > 0 else 0.0

    @property
    def born_discrepancy(self) -> float:
        s = abs(self.A) + abs(self.born)
        return abs(self.A - self.born) / s if s > 0 else 0.0


def duhamel_difference_probe(V1: ScalarField, V2: ScalarField, f: ScalarField, g: ScalarField,
                             cfg: PropagatorConfig) -> DuhamelReport:
    """A = <(U1_T - U2_T) f, g> against B = -i int_0^T <(V1 - V2) u1(t), v2(t)> dt.

    u1 runs forward from f under V1; v2 solves the adjoint problem with
    v2(T) = g under conj(V2).  The time integral uses the trapezoid rule on
    the step grid.  ``born`` replaces u1 by the V2-evolution u2, which is
    the first-order term in V1 - V2.
    """
    V1._check(V2)
    V1._check(f)
    f._check(g)
    grid = f.grid
    K, dt = cfg.steps, cfg.dt
    hn = grid.cell_volume
    F = (V1 - V2).values
    same = not np.any(F)
    u1T = _Stepper(V1, grid, dt).run(f.values, K)
    u2T = _Stepper(V2, grid, dt).run(f.values, K)
    A = complex(np.vdot(g.values, u1T - u2T) * hn)
    if same:
        return DuhamelReport(A, 0j, 0j, steps=K)
    # v2(0) by the backward flow under conj(V2); v2(t) is then regenerated
    # forward in time by the exact inverse of those backward steps
    V2c = V2.conj()
    v0 = _Stepper(V2c, grid, dt, -1).run(g.values, K)
    weights = np.full(K + 1, dt)
    weights[[0, -1]] = dt / 2
    acc = {"B": 0j, "born": 0j}
    s1 = _Stepper(V1, grid, dt)
    s2 = _Stepper(V2, grid, dt)
    sv = _Stepper(V2c, grid, dt)
    u1, u2, v2 = f.values, f.values, v0
    for k in range(K + 1):
        if k:
            u1 = s1.run(u1, 1)
            u2 = s2.run(u2, 1)
            v2 = sv.run(v2, 1)
        acc["B"] += weights[k] * np.vdot(v2, F * u1)
        acc["born"] += weights[k] * np.vdot(v2, F * u2)
    B = -1j * acc["B"] * hn
    born = -1j * acc["born"] * hn
    return DuhamelReport(A, complex(B), complex(born), steps=K)


def _time_derivative(u: np.ndarray, dt: float) -> np.ndarray:
    # second-order differences along axis 0, one-sided at the ends
    return np.gradient(u, dt, axis=0, edge_order=2)


def discrete_ibp_probe(u: np.ndarray, v: np.ndarray, dt: float, grid, atol: float = 1e-14) -> complex:
    """Signed discrepancy sum <(i d_t + Delta) u, v> - sum <u, (i d_t + Delta) v>.

    ``u`` and ``v`` have shape ``(steps + 1,) + grid.shape``.  Sums use the
    trapezoid rule in time and h^n in space.  The magnitude of the result is
    the discrepancy; the sign convention makes swapping u and v return minus
    the complex conjugate.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape or u.shape[1:] != grid.shape or u.shape[0] < 3:
        raise ValidationError("u and v need shape (T >= 3,) + grid.shape")
    if not dt > 0:
        raise ValidationError("dt must be positive")
    scale = max(np.abs(u).max(), 1e-300)
    if np.abs(u[0]).max() > atol * scale or np.abs(u[-1]).max() > atol * scale:
        raise ValidationError("u must vanish at the first and last time samples")
    axes = tuple(range(1, u.ndim))
    xi2 = grid._xi_squared_fft

    def op(z):
        lap = np.fft.ifftn(-xi2 * np.fft.fftn(z, axes=axes), axes=axes)
        return 1j * _time_derivative(z, dt) + lap

    w = np.full(u.shape[0], dt)
    w[[0, -1]] = dt / 2
    left = np.dot(w, (op(u) * np.conj(v)).reshape(w.size, -1).sum(axis=1))
    right = np.dot(w, (u * np.conj(op(v))).reshape(w.size, -1).sum(axis=1))
    return complex((left - right) * grid.cell_volume)


def refinement_order(errors) -> np.ndarray:
    """Observed orders log2(e_k / e_{k+1}) for successive halvings."""
    e = np.asarray(errors, dtype=float)
    return np.log2(e[:-1] / e[1:])
