"""Dyadic annuli and the weighted norms built on them.

``D_0 = {|x| <= 1}`` and ``D_j = {2^(j-1) < |x| <= 2^j}``.  On a grid the
decomposition is truncated at ``j_max = ceil(log2(L sqrt(n)))``, the first
index whose annulus contains the box corners, and the L^inf pieces are
lattice maxima rather than essential suprema.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .grid import Grid, ScalarField, Space, SpaceMismatchError

__all__ = [
    "DyadicDecomposition",
    "dyadic_decomposition",
    "annulus_index",
    "triple_norm",
    "b_norm",
    "b_star_norm",
    "l1_norm",
    "l2_norm",
    "linf_norm",
    "all_norms",
]


def annulus_index(r: np.ndarray) -> np.ndarray:
    """Dyadic annulus index of each radius (0 for r <= 1)."""
    r = np.asarray(r, dtype=float)
    j = np.zeros(r.shape, dtype=np.int64)
    out = r > 1
    jj = np.ceil(np.log2(r[out])).astype(np.int64)
    # guard the boundaries r = 2^j against log2 rounding
    jj += r[out] > np.ldexp(1.0, jj)
    jj -= r[out] <= np.ldexp(1.0, jj - 1)
    j[out] = jj
    return j


@dataclass(frozen=True, eq=False)
class DyadicDecomposition:
    grid: Grid
    j_max: int
    labels: np.ndarray

    @property
    def nbins(self) -> int:
        return self.j_max + 1

    def reduce(self, f: ScalarField) -> tuple[np.ndarray, np.ndarray]:
        """Per-annulus (sum |f|^2, max |f|) over lattice points."""
        if f.space != Space.PHYSICAL:
            raise SpaceMismatchError("norms are defined on physical-space fields")
        return kernels.annulus_reduce(f.values, self.labels, self.nbins)

    def l2_pieces(self, f: ScalarField) -> np.ndarray:
        sumsq, _ = self.reduce(f)
        return np.sqrt(sumsq * self.grid.cell_volume)


@lru_cache(maxsize=16)
def dyadic_decomposition(grid: Grid) -> DyadicDecomposition:
    j_max = math.ceil(math.log2(grid.L * math.sqrt(grid.n)))
    labels = annulus_index(grid.radius)
    labels.flags.writeable = False
    return DyadicDecomposition(grid, max(j_max, int(labels.max())), labels)


def triple_norm(V: ScalarField) -> float:
    """sum_j 2^j max_{D_j} |V|."""
    dec = dyadic_decomposition(V.grid)
    _, peak = dec.reduce(V)
    return float(np.sum(np.ldexp(peak, np.arange(dec.nbins))))


def b_norm(f: ScalarField) -> float:
    dec = dyadic_decomposition(f.grid)
    pieces = dec.l2_pieces(f)
    return float(np.sum(2.0 ** (np.arange(dec.nbins) / 2) * pieces))


def b_star_norm(f: ScalarField) -> float:
    dec = dyadic_decomposition(f.grid)
    pieces = dec.l2_pieces(f)
    return float(np.max(2.0 ** (-np.arange(dec.nbins) / 2) * pieces))


def l1_norm(f: ScalarField) -> float:
    return float(np.abs(f.values).sum() * f.grid.cell_volume)


def l2_norm(f: ScalarField) -> float:
    return float(np.sqrt((np.abs(f.values) ** 2).sum() * f.grid.cell_volume))


def linf_norm(f: ScalarField) -> float:
    return float(np.abs(f.values).max())


def all_norms(f: ScalarField) -> dict[str, float]:
    return {
        "triple": triple_norm(f),
        "B": b_norm(f),
        "B_star": b_star_norm(f),
        "L1": l1_norm(f),
        "L2": l2_norm(f),
        "Linf": linf_norm(f),
    }
