"""Stationary states w = u + v of -Delta + V at energy lam^2.

Given an incident Herglotz wave ``u`` the correction solves
``v = P_lam(V (u + v))`` and is computed by fixed-point iteration, which is
the Neumann series for ``(Id - P_lam V)^-1 P_lam(V u)`` summed in place.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import DivergentSeriesError, MaxIterationsError, ValidationError
from .grid import ScalarField
from .herglotz import INTERIOR, helmholtz_residual
from .norms import b_star_norm, triple_norm
from .resolvent import PvSettings, apply_pv

__all__ = [
    "ScatterResult",
    "ThresholdEstimate",
    "lambda_threshold",
    "solve_correction",
    "one_step_constant",
    "empirical_threshold",
]


@dataclass
class ScatterResult:
    v: ScalarField
    iterations: int
    contraction_ratios: list[float]
    residual: float
    correction_ratio: float
    residual_history: list[float] = field(default_factory=list)

    @property
    def converged(self) -> bool:
        return all(r < 1 for r in self.contraction_ratios)

    def summary(self) -> dict:
        return {
            "iterations": self.iterations,
            "contraction_ratios": list(self.contraction_ratios),
            "residual": self.residual,
            "correction_ratio": self.correction_ratio,
        }


def lambda_threshold(V: ScalarField, C_n: float = 1.0) -> float:
    """C_n |||V|||.  The default C_n = 1 is a placeholder, not a proven constant."""
    if not C_n > 0:
        raise ValidationError("C_n must be positive")
    return C_n * triple_norm(V)


def solve_correction(V: ScalarField, lam: float, u: ScalarField, tol: float = 1e-10,
                     max_iter: int = 200, pv: PvSettings | None = None,
                     window: float = INTERIOR, track_residual: bool = False) -> ScatterResult:
    """Iterate v_{k+1} = P_lam(V (u + v_k)) from v_0 = 0.

    Stops once ||v_{k+1} - v_k||_{B*} <= tol ||u||_{B*}.  Raises
    DivergentSeriesError after three consecutive contraction ratios >= 1.
    """
    if not lam > 0:
        raise ValidationError(f"lambda must be positive, got {lam}")
    if not tol > 0:
        raise ValidationError("tol must be positive")
    V._check(u)
    scale = b_star_norm(u)
    v = u.grid.zeros()
    ratios: list[float] = []
    history: list[float] = []
    prev_step = None
    bad = 0
    for k in range(1, max_iter + 1):
        v_new = apply_pv(lam, V * (u + v), pv)
        step = b_star_norm(v_new - v)
        v = v_new
        if track_residual:
            history.append(helmholtz_residual(u + v, lam, V, window))
        if prev_step is not None:
            ratio = step / prev_step if prev_step > 0 else 0.0
            ratios.append(ratio)
            bad = bad + 1 if ratio >= 1 else 0
            if bad >= 3:
                raise DivergentSeriesError(
                    f"contraction ratio >= 1 for three steps at lambda={lam} (last {ratio:.3g})"
                )
        if step <= tol * scale:
            return ScatterResult(
                v, k, ratios, helmholtz_residual(u + v, lam, V, window),
                b_star_norm(v) / scale if scale > 0 else 0.0, history,
            )
        prev_step = step
    raise MaxIterationsError(f"no convergence in {max_iter} iterations at lambda={lam}")


def one_step_constant(V: ScalarField, lam: float, u: ScalarField, pv: PvSettings | None = None) -> float:
    """lam ||P_lam(V u)||_{B*} / (|||V||| ||u||_{B*}), the empirical one-step constant."""
    return lam * b_star_norm(apply_pv(lam, V * u, pv)) / (triple_norm(V) * b_star_norm(u))


@dataclass
class ThresholdEstimate:
    """Empirical lam_V: the energy where the observed contraction would reach 1."""

    threshold: float
    C_n: float
    lambdas: list
    max_ratios: list
    diverged: list

    def rows(self):
        return list(zip(self.lambdas, self.max_ratios, self.diverged))


def empirical_threshold(V: ScalarField, lambdas, u_for, pv: PvSettings | None = None,
                        tol: float = 1e-10, max_iter: int = 200) -> ThresholdEstimate:
    """Calibrate lam_V from the contraction ratios of actual solves.

    The ratios behave like C |||V||| / lam, so each converged solve gives the
    estimate ``lam * max(ratios)``; a divergent solve shows the threshold is
    at least ``lam``.  The largest of these is returned, together with the
    implied constant ``C_n = threshold / |||V|||``.
    """
    est, ratios, div = 0.0, [], []
    lams = sorted(float(x) for x in lambdas)
    for lam in lams:
        try:
            r = solve_correction(V, lam, u_for(lam), tol, max_iter, pv)
        except (DivergentSeriesError, MaxIterationsError):
            ratios.append(float("inf"))
            div.append(True)
            est = max(est, lam)
            continue
        m = max(r.contraction_ratios, default=0.0)
        ratios.append(m)
        div.append(False)
        est = max(est, lam * m)
    tn = triple_norm(V)
    return ThresholdEstimate(est, est / tn if tn > 0 else 0.0, lams, ratios, div)
