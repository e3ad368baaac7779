"""High-energy recovery of the Fourier transform of F = V1 - V2.

For a target frequency ``kappa`` and a unit ``nu`` orthogonal to it, the
directions

    omega_{1,2} = kappa / (2 lam) +- sqrt(1 - |kappa|^2 / (4 lam^2)) nu

satisfy ``lam (omega_1 + omega_2) = kappa``.  Herglotz waves u_j built from
caps of width eps around omega_j then have a product u_1 u_2 that behaves
like ``exp(-i kappa.x)`` times the product of the density L1 norms, so

    integral F u_1 u_2 ~ (2 pi)^(n/2) F^(kappa) ||f_1||_1 ||f_2||_1.

The stationary states w_j = u_j + v_j add the remainder
``integral F (u_1 v_2 + v_1 u_2 + v_1 v_2)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .grid import ScalarField, Space, to_physical
from .herglotz import (
    SphereQuadrature,
    density_norms,
    herglotz_wave,
    make_density,
    quadrature_for_eps,
    rotation_to,
)
from .parallel import parallel_map
from .resolvent import PvSettings
from .scatter import solve_correction

__all__ = [
    "ModePlan",
    "ModeEstimate",
    "SolverConfig",
    "EnvelopeReport",
    "Reconstruction",
    "choose_nu",
    "directions",
    "default_eps",
    "gamma_modulus",
    "fourier_at",
    "recover_mode",
    "error_envelope",
    "kappa_lattice",
    "reconstruct",
]


def default_eps(lam: float, n: int) -> float:
    """The cap-width schedule eps = lam^-(1 + 1/n)."""
    return float(lam) ** -(1.0 + 1.0 / n)


def choose_nu(kappa) -> np.ndarray:
    """Unit vector orthogonal to kappa: the first coordinate axis not parallel
    to kappa, with its kappa-component removed."""
    k = np.asarray(kappa, dtype=float)
    nk = np.linalg.norm(k)
    for i in range(k.size):
        e = np.zeros(k.size)
        e[i] = 1.0
        if nk == 0:
            return e
        if abs(k[i]) / nk < 1 - 1e-6:
            v = e - (k[i] / nk**2) * k
            return v / np.linalg.norm(v)
    raise AssertionError("unreachable: some axis is never parallel to kappa")


def directions(kappa, lam: float, nu) -> tuple[np.ndarray, np.ndarray]:
    k = np.asarray(kappa, dtype=float)
    nu = np.asarray(nu, dtype=float)
    nk = np.linalg.norm(k)
    if abs(np.linalg.norm(nu) - 1) > 1e-12:
        raise ValidationError("nu must be a unit vector")
    if abs(k.dot(nu)) > 1e-12 * max(1.0, nk):
        raise ValidationError("nu must be orthogonal to kappa")
    if lam < nk / 2:
        raise ValidationError(f"lambda={lam} is below |kappa|/2={nk / 2}")
    a = k / (2 * lam)
    b = math.sqrt(max(0.0, 1.0 - nk * nk / (4 * lam * lam)))
    return a + b * nu, a - b * nu


def gamma_modulus(F: ScalarField, rho: float) -> float:
    """(2 pi)^(-n/2) integral sup_{|xi|<rho} |exp(i xi.x) - 1| |F(x)| dx.

    The supremum equals 2 sin(rho |x| / 2) while rho |x| <= pi and 2 beyond.
    """
    if F.space != Space.PHYSICAL:
        raise ValidationError("gamma_modulus expects a physical-space field")
    if not rho > 0:
        raise ValidationError("rho must be positive")
    g = F.grid
    t = np.minimum(rho * g.radius, math.pi)
    sup = 2.0 * np.sin(t / 2)
    return float((2 * math.pi) ** (-g.n / 2) * g.cell_volume * np.sum(sup * np.abs(F.values)))


def fourier_at(F: ScalarField, kappa) -> complex:
    """Direct quadrature (2 pi)^(-n/2) h^n sum F(x) exp(-i kappa.x)."""
    g = F.grid
    phase = sum(k * c for k, c in zip(np.asarray(kappa, dtype=float), g.coords))
    return complex((2 * math.pi) ** (-g.n / 2) * g.cell_volume * np.sum(F.values * np.exp(-1j * phase)))


@dataclass(frozen=True)
class SolverConfig:
    pv: PvSettings = field(default_factory=PvSettings)
    tol: float = 1e-10
    max_iter: int = 200
    nodes_per_eps: int = 16


@dataclass(frozen=True)
class ModePlan:
    kappa: tuple
    lambdas: tuple
    nu: tuple | None = None
    eps_rule: object = None  # callable lam -> eps; None means the default schedule
    pairing_mode: str = "full"

    def __post_init__(self):
        k = np.asarray(self.kappa, dtype=float)
        object.__setattr__(self, "kappa", tuple(float(x) for x in k))
        lams = tuple(float(x) for x in self.lambdas)
        if not lams or any(b <= a for a, b in zip(lams, lams[1:])):
            raise ValidationError("lambda schedule must be non-empty and strictly increasing")
        if lams[0] <= np.linalg.norm(k) / 2:
            raise ValidationError("every lambda must exceed |kappa|/2")
        object.__setattr__(self, "lambdas", lams)
        nu = choose_nu(k) if self.nu is None else np.asarray(self.nu, dtype=float)
        if abs(np.linalg.norm(nu) - 1) > 1e-12 or abs(nu.dot(k)) > 1e-12 * max(1.0, np.linalg.norm(k)):
            raise ValidationError("nu must be a unit vector orthogonal to kappa")
        object.__setattr__(self, "nu", tuple(float(x) for x in nu))
        if self.pairing_mode not in ("leading", "full"):
            raise ValidationError(f"pairing_mode must be 'leading' or 'full', got {self.pairing_mode!r}")

    @property
    def n(self) -> int:
        return len(self.kappa)

    def eps(self, lam: float) -> float:
        return default_eps(lam, self.n) if self.eps_rule is None else float(self.eps_rule(lam))

    def with_kappa(self, kappa, nu=None) -> "ModePlan":
        return ModePlan(tuple(kappa), self.lambdas, nu, self.eps_rule, self.pairing_mode)


@dataclass
class ModeEstimate:
    kappa: np.ndarray
    nu: np.ndarray
    lambdas: np.ndarray
    eps: np.ndarray
    estimate: np.ndarray
    leading: np.ndarray
    remainder: np.ndarray
    full: np.ndarray
    gamma: np.ndarray
    l1_norms: np.ndarray
    l2_norms: np.ndarray
    pairing_mode: str

    @property
    def normalization(self) -> np.ndarray:
        n = self.kappa.size
        return (2 * math.pi) ** (n / 2) * self.l1_norms[:, 0] * self.l1_norms[:, 1]

    def split_defect(self) -> np.ndarray:
        """|leading + remainder - full| / |full| per lambda (full mode only)."""
        return np.abs(self.leading + self.remainder - self.full) / np.maximum(np.abs(self.full), 1e-300)

    def remainder_ratio(self) -> np.ndarray:
        return np.abs(self.remainder) / np.maximum(np.abs(self.leading), 1e-300)


def _pair(F: ScalarField, a: ScalarField, b: ScalarField) -> complex:
    # bilinear integral F a b (no conjugation)
    return complex(np.sum(F.values * a.values * b.values) * F.grid.cell_volume)


def _quadrature(n: int, eps: float, solver: SolverConfig) -> SphereQuadrature:
    return quadrature_for_eps(n, eps, nodes_per_eps=solver.nodes_per_eps, minimum=64)


def recover_mode(V1: ScalarField, V2: ScalarField, plan: ModePlan,
                 solver: SolverConfig | None = None) -> ModeEstimate:
    solver = solver or SolverConfig()
    V1._check(V2)
    g = V1.grid
    if plan.n != g.n:
        raise ValidationError("kappa dimension differs from the grid dimension")
    F = V1 - V2
    nu = np.asarray(plan.nu)
    zero_F = not np.any(F.values)
    rows = []
    for lam in plan.lambdas:
        eps = plan.eps(lam)
        quad = _quadrature(g.n, eps, solver)
        om1, om2 = directions(plan.kappa, lam, nu)
        d1 = make_density(eps, rotation_to(om1), quad)
        d2 = make_density(eps, rotation_to(om2), quad)
        u1, u2 = herglotz_wave(lam, d1, g), herglotz_wave(lam, d2, g)
        leading = _pair(F, u1, u2)
        remainder = full = complex("nan")
        if plan.pairing_mode == "full" and not zero_F:
            v1 = solve_correction(V1, lam, u1, solver.tol, solver.max_iter, solver.pv).v
            v2 = solve_correction(V2, lam, u2, solver.tol, solver.max_iter, solver.pv).v
            remainder = _pair(F, u1, v2) + _pair(F, v1, u2) + _pair(F, v1, v2)
            full = _pair(F, u1 + v1, u2 + v2)
        elif plan.pairing_mode == "full":
            remainder = full = 0j
        n1, n2 = density_norms(d1), density_norms(d2)
        rows.append((lam, eps, leading, remainder, full, gamma_modulus(F, lam * eps) if not zero_F else 0.0,
                     (n1[0], n2[0]), (n1[1], n2[1])))
    lams, eps, lead, rem, full, gam, l1, l2 = (np.array(c) for c in zip(*rows))
    norm = (2 * math.pi) ** (g.n / 2) * l1[:, 0] * l1[:, 1]
    pairing = full if plan.pairing_mode == "full" else lead
    return ModeEstimate(np.asarray(plan.kappa), nu, lams, eps, pairing / norm, lead, rem, full,
                        gam, l1, l2, plan.pairing_mode)


@dataclass
class EnvelopeReport:
    lambdas: np.ndarray
    errors: np.ndarray
    gamma: np.ndarray
    C: float
    envelope: np.ndarray
    truth: complex

    @property
    def under(self) -> np.ndarray:
        return self.errors <= self.envelope * (1 + 1e-9) + 1e-15

    @property
    def verdict(self) -> bool:
        return bool(np.all(self.under))

    def relative_errors(self) -> np.ndarray:
        scale = abs(self.truth)
        return self.errors / scale if scale > 0 else self.errors


def error_envelope(est: ModeEstimate, F: ScalarField | None = None, truth: complex | None = None,
                   calibrate: int = 1) -> EnvelopeReport:
    """Compare |F^_est - F^(kappa)| with gamma(lam eps) + C lam^(-1/n).

    C is fitted on the first ``calibrate`` schedule entries as the smallest
    value that puts them under the envelope; the remaining entries are then
    genuine checks.
    """
    if truth is None:
        if F is None:
            raise ValidationError("error_envelope needs F or a truth value")
        truth = fourier_at(F, est.kappa)
    n = est.kappa.size
    err = np.abs(est.estimate - truth)
    decay = est.lambdas ** (-1.0 / n)
    k = max(1, min(calibrate, err.size))
    C = float(max(0.0, np.max((err[:k] - est.gamma[:k]) / decay[:k])))
    return EnvelopeReport(est.lambdas, err, est.gamma, C, est.gamma + C * decay, complex(truth))


def kappa_lattice(grid, size: int = 17, multiple: int = 1) -> np.ndarray:
    """Integer multiples of the frequency step on a ``size^n`` block centred at 0.

    Returns integer indices of shape (size^n, n); the frequencies are
    ``indices * multiple * pi / L``.
    """
    if size % 2 != 1:
        raise ValidationError("lattice size must be odd so that it is symmetric about 0")
    half = size // 2
    ax = np.arange(-half, half + 1)
    mesh = np.meshgrid(*([ax] * grid.n), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1) * multiple


@dataclass
class Reconstruction:
    field: ScalarField
    estimates: dict
    cell: float
    relative_error: float | None
    symmetry_defect: float


def reconstruct(V1: ScalarField, V2: ScalarField, size: int = 17, multiple: int = 2,
                template: ModePlan | None = None, solver: SolverConfig | None = None,
                truth: ScalarField | None = None, check_symmetry: int = 4) -> Reconstruction:
    """Assemble F^_est at the largest scheduled lambda on a kappa lattice and invert.

    The lattice has spacing ``multiple * pi / L``, so the inverse transform is
    periodic with period ``2L / multiple``; the reconstruction is read on the
    fundamental cell ``||x||_inf < L / multiple`` and is zero outside it.
    For real potentials only half of the lattice is solved; the other half is
    filled by conjugate symmetry, and ``check_symmetry`` mirrored modes are
    solved directly to measure the symmetry defect.
    """
    g = V1.grid
    template = template or ModePlan((0.0,) * g.n, (64.0,))
    lam = template.lambdas[-1]
    idx = kappa_lattice(g, size, multiple)
    if np.max(np.linalg.norm(idx * g.dxi, axis=1)) > lam / 2:
        raise ValidationError("kappa lattice exceeds the resolvable band |kappa| <= lambda/2")
    real = not (np.any(V1.values.imag) or np.any(V2.values.imag))
    keys = [tuple(int(x) for x in k) for k in idx]
    todo = [k for k in keys if not real or k >= tuple(-x for x in k)]

    def solve(k):
        plan = ModePlan(tuple(np.asarray(k) * g.dxi), (lam,), None, template.eps_rule, template.pairing_mode)
        return complex(recover_mode(V1, V2, plan, solver).estimate[-1])

    values = dict(zip(todo, parallel_map(solve, todo)))
    defect = 0.0
    if real:
        mirrored = [k for k in todo if any(k)][:check_symmetry]
        direct = parallel_map(solve, [tuple(-x for x in k) for k in mirrored])
        for k, d in zip(mirrored, direct):
            scale = max(abs(values[k]), 1e-300)
            defect = max(defect, abs(d - np.conj(values[k])) / scale)
        for k in keys:
            if k not in values:
                values[k] = complex(np.conj(values[tuple(-x for x in k)]))
    spec = np.zeros(g.shape, dtype=complex)
    half = g.N // 2
    for k, val in values.items():
        spec[tuple(half + np.asarray(k))] = val
    rec = to_physical(g.field(spec, Space.FREQUENCY)) * float(multiple) ** g.n
    cell = g.L / multiple
    inside = g.sup_radius < cell
    rec = rec.replace(np.where(inside, rec.values, 0))
    rel = None
    if truth is not None:
        t = np.where(inside, truth.values, 0)
        tn = np.linalg.norm(t)
        rel = float(np.linalg.norm(rec.values - t) / tn) if tn > 0 else float(np.linalg.norm(rec.values))
    return Reconstruction(rec, dict(sorted(values.items())), cell, rel, defect)
