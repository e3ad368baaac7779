"""Preset potentials: Gaussian, compact bump, dyadic-decay family and zero."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .grid import Grid, ScalarField
from .norms import annulus_index, triple_norm

__all__ = ["PotentialSpec", "make_potential", "PRESETS", "gaussian_hat"]

PRESETS = ("gaussian", "bump", "dyadic", "zero")

_DEFAULTS = {
    "gaussian": {"amplitude": 1.0, "width": 0.25, "center": (0.0, 0.0, 0.0)},
    "bump": {"amplitude": 1.0, "radius": 0.5, "center": (0.0, 0.0, 0.0)},
    "dyadic": {"amplitude": 1.0, "rate": 2.0},
    "zero": {},
}


@dataclass(frozen=True, eq=False)
class PotentialSpec:
    name: str
    params: dict
    field: ScalarField
    norms: dict = field(default_factory=dict)

    def fourier(self, kappa) -> complex:
        """Continuum Fourier transform at ``kappa`` where a closed form exists."""
        if self.name == "zero":
            return 0j
        if self.name == "gaussian":
            p = self.params
            return gaussian_hat(kappa, p["amplitude"], p["width"], p["center"][: self.field.grid.n])
        raise ValidationError(f"no closed-form transform for preset {self.name!r}")


def gaussian_hat(kappa, amplitude: float, width: float, center=None) -> complex:
    """(2 pi)^(-n/2) integral A exp(-|x-c|^2/s^2) exp(-i kappa.x) dx = A (s^2/2)^(n/2) exp(-s^2|k|^2/4 - i k.c)."""
    k = np.asarray(kappa, dtype=float)
    n = k.size
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)[:n]
    s2 = width * width
    return complex(amplitude * (s2 / 2) ** (n / 2) * np.exp(-s2 * k.dot(k) / 4 - 1j * k.dot(c)))


def _shifted_r2(g: Grid, center) -> np.ndarray:
    c = np.asarray(center, dtype=float)[: g.n]
    return np.broadcast_to(sum((x - ci) ** 2 for x, ci in zip(g.coords, c)), g.shape)


def make_potential(name: str, g: Grid, **params) -> PotentialSpec:
    """Sample a preset on ``g``; unknown keyword arguments are rejected."""
    if name not in PRESETS:
        raise ValidationError(f"unknown potential preset {name!r}; expected one of {PRESETS}")
    extra = set(params) - set(_DEFAULTS[name])
    if extra:
        raise ValidationError(f"preset {name!r} does not take {sorted(extra)}")
    p = {**_DEFAULTS[name], **params}
    if "center" in p:
        c = tuple(float(x) for x in np.atleast_1d(p["center"]))
        p["center"] = (c + (0.0,) * 3)[:3]
    if name == "zero":
        vals = np.zeros(g.shape)
    elif name == "gaussian":
        if not p["width"] > 0:
            raise ValidationError("gaussian width must be positive")
        vals = p["amplitude"] * np.exp(-_shifted_r2(g, p["center"]) / p["width"] ** 2)
    elif name == "bump":
        if not p["radius"] > 0:
            raise ValidationError("bump radius must be positive")
        t = _shifted_r2(g, p["center"]) / p["radius"] ** 2
        vals = np.zeros(g.shape)
        inside = t < 1
        vals[inside] = p["amplitude"] * np.exp(1.0 - 1.0 / (1.0 - t[inside]))
    else:
        # piecewise constant A 2^(-rate j) on the annulus D_j
        j = annulus_index(g.radius)
        vals = p["amplitude"] * np.exp2(-p["rate"] * j)
    f = ScalarField(g, vals)
    return PotentialSpec(name, p, f, {"triple": triple_norm(f), "Linf": float(np.abs(vals).max()),
                                      "L1": float(np.abs(vals).sum() * g.cell_volume)})


def support_fraction(V: ScalarField, tol: float = 1e-12) -> float:
    """Smallest window fraction outside which |V| <= tol max|V|."""
    a = np.abs(V.values)
    peak = a.max()
    if peak == 0:
        return 0.0
    return float(V.grid.sup_radius[a > tol * peak].max() / V.grid.L) if math.isfinite(peak) else 1.0
