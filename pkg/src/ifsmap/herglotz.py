"""Sphere quadrature, parabolically scaled cap densities and Herglotz waves.

A Herglotz wave is the plane-wave superposition

    E_lam f(x) = integral_{S^(n-1)} exp(-i lam x . theta) f(theta) dsigma(theta),

evaluated here by quadrature directly on the grid lattice.  Cap densities are
``f(theta) = chi_eps(Q^T theta)`` with the anisotropic rescaling

    chi_eps(xi) = eps^-(n-1) chi(xi' / eps, (xi_n - 1) / eps^2)

of a smooth bump ``chi``, so the support is a geodesic cap of radius about
``eps/4`` around ``Q e_n``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate as _quad

from . import kernels
from .errors import UnderresolvedCapError, UnderresolvedGridError, ValidationError
from .grid import Grid, ScalarField, apply_window, smooth_taper, spectral_laplacian
from .norms import b_star_norm

__all__ = [
    "SphereQuadrature",
    "SphericalDensity",
    "make_quadrature",
    "quadrature_for_eps",
    "bump_chi",
    "rotation_to",
    "make_density",
    "uniform_density",
    "density_norms",
    "limit_l1_norm",
    "herglotz_wave",
    "herglotz_at",
    "required_points",
    "helmholtz_residual",
    "decay_probe",
    "sphere_area",
]

# Support radius of the default bump, in the bump's own coordinates.
CHI_RADIUS = 0.25
# Residual diagnostics read only ||x||_inf <= INTERIOR * L.
INTERIOR = 0.75


def sphere_area(n: int) -> float:
    return 2 * math.pi if n == 2 else 4 * math.pi


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    n: int
    nodes: np.ndarray
    weights: np.ndarray
    resolution: int

    @property
    def spacing(self) -> float:
        """Largest angular gap between neighbouring nodes (equatorial azimuth step)."""
        return 2 * math.pi / self.resolution

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def make_quadrature(n: int, M: int) -> SphereQuadrature:
    """Equispaced angles on S^1, or Gauss-Legendre(polar) x equispaced(azimuth) on S^2."""
    if n not in (2, 3):
        raise ValidationError(f"dimension must be 2 or 3, got {n}")
    if M < 16:
        raise ValidationError(f"quadrature resolution must be at least 16, got {M}")
    az = 2 * math.pi * np.arange(M) / M
    if n == 2:
        nodes = np.column_stack([np.cos(az), np.sin(az)])
        weights = np.full(M, 2 * math.pi / M)
    else:
        t, wt = np.polynomial.legendre.leggauss(M)
        s = np.sqrt(1.0 - t**2)
        nodes = np.column_stack(
            [np.outer(s, np.cos(az)).ravel(), np.outer(s, np.sin(az)).ravel(), np.repeat(t, M)]
        )
        weights = np.repeat(wt, M) * (2 * math.pi / M)
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return SphereQuadrature(n, nodes, weights, M)


def quadrature_for_eps(n: int, eps: float, nodes_per_eps: int = 64, minimum: int = 64) -> SphereQuadrature:
    """Smallest power-of-two resolution with angular spacing <= eps / nodes_per_eps."""
    need = 2 * math.pi * nodes_per_eps / eps
    M = max(minimum, 1 << math.ceil(math.log2(need)))
    return make_quadrature(n, M)


def bump_chi(xi) -> np.ndarray:
    """exp(1 - 1/(1 - |4 xi|^2)) inside |xi| < 1/4, zero outside; chi(0) = 1.

    ``xi`` has its components along the last axis.
    """
    xi = np.asarray(xi, dtype=float)
    s = 16.0 * np.sum(xi * xi, axis=-1)
    inside = s < 1.0
    out = np.zeros(s.shape)
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside]))
    return out if out.ndim else float(out)


def rotation_to(omega) -> np.ndarray:
    """Orthogonal Q with Q e_n = omega.

    Householder reflection across the bisector of e_n and omega; the identity
    when omega = e_n.  For omega = -e_n this is diag(1, ..., 1, -1).
    """
    omega = np.asarray(omega, dtype=float)
    if abs(np.linalg.norm(omega) - 1.0) > 1e-10:
        raise ValidationError("rotation_to needs a unit vector")
    n = omega.size
    e = np.zeros(n)
    e[-1] = 1.0
    v = e - omega
    nv = np.linalg.norm(v)
    if nv < 1e-15:
        return np.eye(n)
    v /= nv
    return np.eye(n) - 2.0 * np.outer(v, v)


@dataclass(frozen=True, eq=False)
class SphericalDensity:
    quadrature: SphereQuadrature
    values: np.ndarray
    eps: float
    rotation: np.ndarray

    @property
    def center(self) -> np.ndarray:
        return self.rotation[:, -1]

    def support(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes with non-zero density and their weights times density."""
        nz = np.nonzero(self.values)[0]
        q = self.quadrature
        return q.nodes[nz], q.weights[nz] * self.values[nz]

    def scaled(self, c: complex) -> "SphericalDensity":
        return SphericalDensity(self.quadrature, c * self.values, self.eps, self.rotation)


def _cap_values(eps: float, local: np.ndarray) -> np.ndarray:
    n = local.shape[1]
    tang = local[:, :-1]
    zn = local[:, -1]
    t2 = np.sum(tang * tang, axis=1)
    # xi_n - 1 without cancellation for unit vectors near e_n
    near = zn > -0.5
    normal = zn - 1.0
    normal[near] = -t2[near] / (1.0 + zn[near])
    scaled = np.column_stack([tang / eps, normal / eps**2])
    return bump_chi(scaled) / eps ** (n - 1)


def make_density(eps: float, Q, quad: SphereQuadrature, check_resolution: bool = True) -> SphericalDensity:
    if not 0 < eps <= 1:
        raise ValidationError(f"eps must lie in (0, 1], got {eps}")
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (quad.n, quad.n) or np.abs(Q.T @ Q - np.eye(quad.n)).max() > 1e-12:
        raise ValidationError("Q must be an orthogonal n x n matrix")
    if check_resolution and quad.spacing > eps / 4:
        raise UnderresolvedCapError(
            f"node spacing {quad.spacing:.3g} exceeds eps/4 = {eps / 4:.3g}"
        )
    local = quad.nodes @ Q  # rows are Q^T theta_m
    vals = _cap_values(eps, local)
    vals.flags.writeable = False
    return SphericalDensity(quad, vals, float(eps), Q)


def uniform_density(quad: SphereQuadrature) -> SphericalDensity:
    """f = 1 on the whole sphere, so that E_lam f(0) = |S^(n-1)|."""
    vals = np.ones(quad.weights.size)
    vals.flags.writeable = False
    return SphericalDensity(quad, vals, 1.0, np.eye(quad.n))


def density_norms(d: SphericalDensity) -> tuple[float, float]:
    """Quadrature (L1, L2) norms on the sphere."""
    w = d.quadrature.weights
    a = np.abs(d.values)
    return float(np.dot(w, a)), float(math.sqrt(np.dot(w, a * a)))


def limit_l1_norm(n: int) -> float:
    """integral over R^(n-1) of chi(eta, -|eta|^2/2), the eps -> 0 limit of the L1 norm."""

    def profile(r):
        return bump_chi(np.array([r, -0.5 * r * r]))

    # chi(eta, -|eta|^2/2) vanishes once |eta|^2 + |eta|^4/4 >= 1/16
    rmax = math.sqrt(2 * (math.sqrt(1 + 1 / 16) - 1))
    if n == 2:
        val, _ = _quad.quad(profile, 0.0, rmax, epsabs=1e-14, epsrel=1e-13, limit=200)
        return 2 * val
    val, _ = _quad.quad(lambda r: r * profile(r), 0.0, rmax, epsabs=1e-14, epsrel=1e-13, limit=200)
    return 2 * math.pi * val


def required_points(lam: float, L: float) -> int:
    """Minimum N per axis for a wave of frequency lam on a box of half-width L."""
    return 8 * math.ceil(lam * L / math.pi)


def herglotz_wave(lam: float, d: SphericalDensity, g: Grid) -> ScalarField:
    if not lam > 0:
        raise ValidationError(f"lambda must be positive, got {lam}")
    if d.quadrature.n != g.n:
        raise ValidationError("density and grid dimensions differ")
    need = required_points(lam, g.L)
    if g.N < need:
        raise UnderresolvedGridError(f"lambda={lam} on L={g.L} needs N >= {need}, grid has {g.N}")
    nodes, coeffs = d.support()
    return ScalarField(g, kernels.herglotz_sum(g.axis, float(lam), nodes, coeffs))


def herglotz_at(points, lam: float, d: SphericalDensity) -> np.ndarray:
    """Direct evaluation of E_lam f at arbitrary points (rows of ``points``)."""
    nodes, coeffs = d.support()
    phase = np.asarray(points, dtype=float) @ nodes.T
    return np.exp(-1j * lam * phase) @ coeffs


def helmholtz_residual(w: ScalarField, lam: float, V: ScalarField | None = None,
                       window: float = INTERIOR) -> float:
    """||(Delta + lam^2 - V) w|| / (lam^2 ||w||) over the interior window.

    The Laplacian acts on a C-infinity tapered copy of ``w`` that equals ``w``
    on the window, so non-periodic fields (Herglotz waves) differentiate
    spectrally without wrap-around contamination.
    """
    taper = smooth_taper(w.grid, window, 1.0)
    lap = spectral_laplacian(w * taper)
    r = lap + lam**2 * w
    if V is not None:
        r = r - V * w
    num = np.linalg.norm(apply_window(r, window).values)
    den = lam**2 * np.linalg.norm(apply_window(w, window).values)
    return float(num / den) if den > 0 else 0.0


def decay_probe(lams, density_for, grid_for) -> tuple[np.ndarray, float]:
    """B* norms of E_lam f over ``lams`` and the fitted log-log slope.

    ``density_for(lam)`` and ``grid_for(lam)`` supply the density and grid
    at each energy, so the grid can follow the resolution rule.
    """
    lams = np.asarray(lams, dtype=float)
    vals = np.array([b_star_norm(herglotz_wave(l, density_for(l), grid_for(l))) for l in lams])
    slope = float(np.polyfit(np.log(lams), np.log(vals), 1)[0])
    return vals, slope
