"""The quantitative acceptance battery.

Each check returns a :class:`CriterionResult`; :func:`run_all` runs them in
order.  The CLI ``verify-estimates`` command and the acceptance tests both
call into this module, so the thresholds live in one place.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, apply_window, make_grid, spectral_laplacian, to_frequency, to_physical
from .herglotz import (
    density_norms,
    helmholtz_residual,
    herglotz_wave,
    limit_l1_norm,
    make_density,
    make_quadrature,
    quadrature_for_eps,
    rotation_to,
    uniform_density,
)
from .norms import b_norm, b_star_norm, triple_norm
from .potentials import make_potential
from .propagate import (
    PropagatorConfig,
    discrete_ibp_probe,
    duhamel_difference_probe,
    free_gaussian,
    initial_to_final,
    refinement_order,
)
from .recover import ModePlan, error_envelope, reconstruct, recover_mode
from .resolvent import PvSettings, apply_pv, resolvent_bound_probe
from .scatter import empirical_threshold, solve_correction

__all__ = ["CriterionResult", "VerifyConfig", "CRITERIA", "run_all", "run_one"]

LAMBDAS = (8.0, 16.0, 32.0, 64.0)


@dataclass(frozen=True)
class VerifyConfig:
    seed: int = 20240917
    L: float = math.pi
    N: int = 512
    # narrow caps make u look like a plane wave across the potential
    incident_eps: float = 0.02
    # relative error below which recovery is at the discretization floor
    recovery_floor: float = 1e-5

    def grid(self) -> Grid:
        return make_grid(2, self.L, self.N)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    summary: str
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.number:2d} {self.name}: {self.summary} ({self.seconds:.1f}s)"


def _slope(x, y) -> float:
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])


def _incident(cfg: VerifyConfig, g: Grid, direction=(1.0, 0.0)):
    quad = quadrature_for_eps(2, cfg.incident_eps, nodes_per_eps=16)
    d = make_density(cfg.incident_eps, rotation_to(np.asarray(direction)), quad)
    return lambda lam: herglotz_wave(lam, d, g)


def _gaussian_pair(g: Grid):
    p1 = make_potential("gaussian", g)
    p2 = make_potential("gaussian", g, amplitude=0.5, width=0.2, center=(0.15, -0.1))
    return p1, p2


# -- individual criteria -------------------------------------------------------

def herglotz_decay(cfg: VerifyConfig):
    g2 = cfg.grid()
    d2 = uniform_density(make_quadrature(2, 512))
    v2 = [b_star_norm(herglotz_wave(lam, d2, g2)) for lam in LAMBDAS]
    s2 = _slope(LAMBDAS, v2)
    g3 = make_grid(3, math.pi / 4, 128)
    v3 = []
    for lam in LAMBDAS:
        # angular resolution grows with lam L so the sum stays converged
        M = 2 * math.ceil((lam * g3.L * math.sqrt(3) + 16) / 2)
        v3.append(b_star_norm(herglotz_wave(lam, uniform_density(make_quadrature(3, M)), g3)))
    s3 = _slope(LAMBDAS, v3)
    ok = abs(s2 + 0.5) <= 0.15 and abs(s3 + 1.0) <= 0.2
    return ok, f"slope n=2 {s2:+.3f} (want -0.5+-0.15), n=3 {s3:+.3f} (want -1+-0.2)", {
        "n2": v2, "n3": v3, "slope2": s2, "slope3": s3}


def herglotz_residual(cfg: VerifyConfig):
    g = cfg.grid()
    quad = quadrature_for_eps(2, 0.5)
    d = make_density(0.5, rotation_to(np.array([0.6, 0.8])), quad)
    du = uniform_density(make_quadrature(2, 512))
    res = [max(helmholtz_residual(herglotz_wave(lam, d, g), lam),
               helmholtz_residual(herglotz_wave(lam, du, g), lam)) for lam in LAMBDAS]
    worst = max(res)
    return worst <= 1e-3, f"max interior residual {worst:.2e} (want <= 1e-3)", {"residuals": res}


def resolvent_identity(cfg: VerifyConfig):
    g = cfg.grid()
    base = g.sample(lambda x, y: np.exp(-(x * x + y * y)))
    pv = PvSettings(extrapolate=True)
    out = []
    for lam in (32.0, 64.0):
        F = to_frequency(base)
        f = to_physical(F.replace(np.where(g.xi_squared <= (lam / 2) ** 2, F.values, 0)))
        p = apply_pv(lam, f, pv)
        r = spectral_laplacian(p) + lam**2 * p - f
        out.append(np.linalg.norm(apply_window(r, 0.75).values) / np.linalg.norm(apply_window(f, 0.75).values))
    worst = float(max(out))
    return worst <= 1e-6, f"max relative defect {worst:.2e} at lam in (32, 64) (want <= 1e-6)", {"defects": out}


def resolvent_decay(cfg: VerifyConfig):
    g = cfg.grid()
    bump = make_potential("bump", g, radius=0.5).field
    rep = resolvent_bound_probe(LAMBDAS, bump, PvSettings(), direction=(1.0, 0.0))
    return abs(rep.slope + 1) <= 0.2, f"slope {rep.slope:+.3f} (want -1+-0.2)", {
        "ratios": rep.ratios.tolist(), "slope": rep.slope}


def multiplication_bound(cfg: VerifyConfig):
    rng = np.random.default_rng(cfg.seed)
    g = make_grid(2, 8.0, 64)
    violations, worst = 0, 0.0
    for _ in range(100):
        decay = np.exp(-rng.uniform(0.05, 1.0) * g.radius ** rng.uniform(1.0, 2.0))
        V = g.field(decay * (rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape)))
        u = g.field(rng.standard_normal(g.shape) + 1j * rng.standard_normal(g.shape))
        lhs, rhs = b_norm(V * u), triple_norm(V) * b_star_norm(u)
        worst = max(worst, lhs / rhs)
        violations += lhs > rhs
    return violations == 0, f"{violations} violations in 100 pairs, max ratio {worst:.3f}", {
        "violations": violations, "max_ratio": worst}


def neumann_convergence(cfg: VerifyConfig):
    g = cfg.grid()
    V = make_potential("gaussian", g).field
    inc = _incident(cfg, g)
    thr = empirical_threshold(V, (2.0, 4.0, 8.0), inc)
    lams = [lam for lam in LAMBDAS if lam >= 4 * thr.threshold]
    rows, ok = [], bool(lams)
    for lam in lams:
        r = solve_correction(V, lam, inc(lam))
        rows.append((lam, max(r.contraction_ratios), r.residual))
        ok &= max(r.contraction_ratios) < 1 and r.residual <= 1e-3
    worst_ratio = max(r[1] for r in rows) if rows else float("nan")
    worst_res = max(r[2] for r in rows) if rows else float("nan")
    return ok, (f"threshold {thr.threshold:.3g}, {len(lams)} energies checked, max ratio "
                f"{worst_ratio:.3g}, max residual {worst_res:.2e}"), {"threshold": thr.threshold, "rows": rows}


def correction_decay(cfg: VerifyConfig):
    g = cfg.grid()
    V = make_potential("gaussian", g).field
    inc = _incident(cfg, g)
    ratios = [solve_correction(V, lam, inc(lam)).correction_ratio for lam in LAMBDAS]
    s = _slope(LAMBDAS, ratios)
    return abs(s + 1) <= 0.2, f"slope {s:+.3f} (want -1+-0.2)", {"ratios": ratios, "slope": s}


def density_asymptotics(cfg: VerifyConfig):
    limit = limit_l1_norm(2)
    l1 = density_norms(make_density(0.05, np.eye(2), quadrature_for_eps(2, 0.05)))[0]
    l1_err = abs(l1 - limit) / limit
    l2 = {e: density_norms(make_density(e, np.eye(2), quadrature_for_eps(2, e)))[1] * math.sqrt(e)
          for e in (0.1, 0.05)}
    l2_change = abs(l2[0.05] - l2[0.1]) / l2[0.1]
    rng = np.random.default_rng(cfg.seed)
    rot = 0.0
    for e in (0.1, 0.05):
        quad = quadrature_for_eps(2, e, nodes_per_eps=512)
        a, b = (rng.standard_normal(2) for _ in range(2))
        na = density_norms(make_density(e, rotation_to(a / np.linalg.norm(a)), quad))
        nb = density_norms(make_density(e, rotation_to(b / np.linalg.norm(b)), quad))
        rot = max(rot, *(abs(x - y) / abs(x) for x, y in zip(na, nb)))
    ok = l1_err <= 0.02 and l2_change < 0.1 and rot <= 1e-10
    return ok, (f"L1 err {l1_err:.2e} (<=2e-2), L2 scaling change {l2_change:.2e} (<1e-1), "
                f"rotation defect {rot:.1e} (<=1e-10)"), {"l1": l1, "limit": limit, "l2": l2, "rotation": rot}


def leading_remainder(cfg: VerifyConfig):
    g = cfg.grid()
    p1, p2 = _gaussian_pair(g)
    defects, ratios = [], []
    for kappa in ((0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 2.0)):
        est = recover_mode(p1.field, p2.field, ModePlan(kappa, (32.0,)))
        defects.append(float(est.split_defect()[0]))
        ratios.append(float(est.remainder_ratio()[0]))
    ok = max(defects) <= 1e-10 and max(ratios) <= 0.1
    return ok, f"split defect {max(defects):.1e} (<=1e-10), remainder/leading at lam=32 {max(ratios):.2e} (<=0.1)", {
        "defects": defects, "ratios": ratios}


def mode_recovery(cfg: VerifyConfig):
    g = cfg.grid()
    V = make_potential("gaussian", g)
    Z = g.zeros()
    ks = [(a, b) for a in range(-2, 3) for b in range(-2, 3) if a * a + b * b <= 4]
    ok, worst_final, rows = True, 0.0, []
    for k in ks:
        est = recover_mode(V.field, Z, ModePlan(k, LAMBDAS))
        truth = V.fourier(k)
        env = error_envelope(est, truth=truth)
        rel = env.relative_errors()
        floor = cfg.recovery_floor
        monotone = all(b < a or b <= floor for a, b in zip(rel, rel[1:]))
        ok &= monotone and rel[-1] <= 0.1 and env.verdict
        worst_final = max(worst_final, rel[-1])
        rows.append({"kappa": k, "relative_errors": rel.tolist(), "C": env.C, "under": env.under.tolist(),
                     "monotone": monotone})
    return ok, (f"{len(ks)} modes with |kappa| <= 2, worst final relative error {worst_final:.2e}; "
                "all decreasing to the floor and under the envelope" if ok else
                f"{len(ks)} modes; worst final relative error {worst_final:.2e}; see details"), {"modes": rows}


def reconstruction(cfg: VerifyConfig):
    g = cfg.grid()
    p1, p2 = _gaussian_pair(g)
    rec = reconstruct(p1.field, p2.field, truth=p1.field - p2.field)
    same = reconstruct(p1.field, p1.field)
    zero = float(np.abs(same.field.values).max() / np.abs(p1.field.values).max())
    ok = rec.relative_error <= 0.15 and zero <= 1e-8
    return ok, (f"relative L2 error {rec.relative_error:.3f} (<=0.15), equal-pair norm {zero:.1e} (<=1e-8), "
                f"conjugate-symmetry defect {rec.symmetry_defect:.1e}"), {
        "relative_error": rec.relative_error, "equal_pair": zero, "symmetry": rec.symmetry_defect}


def propagator(cfg: VerifyConfig):
    g = make_grid(2, 8.0, 256)
    f = free_gaussian(g, 0.0, 1.0, (2.0, 1.0))
    u = initial_to_final(None, f, PropagatorConfig(0.5, 1e-3))
    exact = free_gaussian(g, 0.5, 1.0, (2.0, 1.0))
    free_err = float(np.linalg.norm((u - exact).values) / np.linalg.norm(exact.values))
    V = make_potential("gaussian", g, amplitude=5.0, width=1.0).field
    uT = initial_to_final(V, f, PropagatorConfig(1.0, 1e-3))
    drift = abs(np.linalg.norm(uT.values) / np.linalg.norm(f.values) - 1)
    states = [initial_to_final(V, f, PropagatorConfig(0.5, dt)).values for dt in (4e-3, 2e-3, 1e-3, 5e-4)]
    diffs = [np.linalg.norm(a - b) for a, b in zip(states, states[1:])]
    orders = refinement_order(diffs)
    ok = free_err <= 1e-4 and drift <= 1e-10 and np.all(np.abs(orders - 2) <= 0.2)
    return ok, (f"free error {free_err:.1e} (<=1e-4), mass drift {drift:.1e} (<=1e-10), "
                f"orders {', '.join(f'{o:.3f}' for o in orders)} (2+-0.2)"), {
        "free_error": free_err, "drift": drift, "orders": orders.tolist()}


def _duhamel_setup():
    g = make_grid(2, 4.0, 128)
    G = make_potential("gaussian", g, width=0.5).field
    f = free_gaussian(g, 0.0, 0.7, (1.0, 0.0))
    h = free_gaussian(g, 0.0, 0.7, (0.0, 1.0))
    return g, G, f, h


def duhamel(cfg: VerifyConfig):
    g, G, f, h = _duhamel_setup()
    Z = g.zeros()
    cfg_t = PropagatorConfig(0.2, 1e-3)
    born = {}
    for delta in (1e-2, 1e-3):
        r = duhamel_difference_probe(G * delta, Z, f, h, cfg_t)
        born[delta] = (abs(r.A - r.born), r.discrepancy)
    # |A - born| / delta^2 stays put when the Born error is second order
    q = (born[1e-2][0] / 1e-4) / (born[1e-3][0] / 1e-6)
    born_ok = abs(q - 1) <= 0.2 and max(b[1] for b in born.values()) <= 1e-5
    errs = [abs((r := duhamel_difference_probe(G, G * 0.3, f, h, PropagatorConfig(0.2, dt))).A - r.B)
            for dt in (2e-3, 1e-3, 5e-4)]
    drops = [a / b for a, b in zip(errs, errs[1:])]
    drop_ok = all(abs(d - 4) <= 0.8 for d in drops)
    same = duhamel_difference_probe(G, G, f, h, cfg_t)
    zero_ok = same.A == 0 and same.B == 0
    ok = born_ok and drop_ok and zero_ok
    return ok, (f"Born error/delta^2 ratio {q:.3f} (1+-0.2), A-B rel {max(b[1] for b in born.values()):.1e}; "
                f"dt-halving drops {', '.join(f'{d:.2f}' for d in drops)} (4+-0.8); equal potentials exact zero: {zero_ok}"), {
        "born": {str(k): v for k, v in born.items()}, "drops": drops, "errors": errs}


def _ibp_fields(g: Grid, dt: float, compact: bool):
    t = np.arange(0.0, 1.0 + dt / 2, dt)
    X, Y = g.coords
    if compact:
        # smooth bump supported in [0.1, 0.9]
        s = (t - 0.1) / 0.8
        env = np.zeros_like(t)
        inside = (s > 0) & (s < 1)
        env[inside] = np.exp(1 - 1 / (1 - (2 * s[inside] - 1) ** 2))
    else:
        env = np.sin(np.pi * t) ** 2
    shape = (-1,) + (1,) * g.n
    u = env.reshape(shape) * (np.exp(-(X**2 + Y**2)) * np.exp(1j * X))[None]
    v = np.exp(-2j * t).reshape(shape) * np.exp(-((X - 0.3) ** 2 + Y**2) / 2)[None]
    return u, v


def integration_by_parts(cfg: VerifyConfig):
    g = make_grid(2, 4.0, 64)
    u, v = _ibp_fields(g, 1e-3, compact=True)
    compact = abs(discrete_ibp_probe(u, v, 1e-3, g))
    errs = []
    for dt in (4e-3, 2e-3, 1e-3):
        u, v = _ibp_fields(g, dt, compact=False)
        errs.append(abs(discrete_ibp_probe(u, v, dt, g)))
    orders = refinement_order(errs)
    ok = compact <= 1e-6 and np.all(np.abs(orders - 2) <= 0.2)
    return ok, (f"compactly supported data {compact:.1e} (<=1e-6); endpoint-vanishing data "
                f"{errs[-1]:.1e} at dt=1e-3 with orders {', '.join(f'{o:.3f}' for o in orders)} (2+-0.2)"), {
        "compact": compact, "errors": errs, "orders": orders.tolist()}


CRITERIA = [
    (1, "Herglotz decay", herglotz_decay),
    (2, "Herglotz PDE residual", herglotz_residual),
    (3, "Resolvent identity", resolvent_identity),
    (4, "Resolvent decay", resolvent_decay),
    (5, "Multiplication bound", multiplication_bound),
    (6, "Neumann convergence", neumann_convergence),
    (7, "Correction decay", correction_decay),
    (8, "Density asymptotics", density_asymptotics),
    (9, "Leading/remainder split", leading_remainder),
    (10, "Mode recovery", mode_recovery),
    (11, "Reconstruction", reconstruction),
    (12, "Propagator", propagator),
    (13, "Duhamel/duality probe", duhamel),
    (14, "Discrete integration by parts", integration_by_parts),
]


def run_one(number: int, cfg: VerifyConfig | None = None) -> CriterionResult:
    cfg = cfg or VerifyConfig()
    for num, name, fn in CRITERIA:
        if num == number:
            t0 = time.perf_counter()
            ok, summary, details = fn(cfg)
            return CriterionResult(num, name, bool(ok), summary, details, time.perf_counter() - t0)
    raise KeyError(f"no criterion {number}")


def run_all(numbers=None, cfg: VerifyConfig | None = None, echo=None) -> list[CriterionResult]:
    out = []
    for num, _, _ in CRITERIA:
        if numbers is None or num in numbers:
            res = run_one(num, cfg)
            if echo is not None:
                echo(res.line())
            out.append(res)
    return out
