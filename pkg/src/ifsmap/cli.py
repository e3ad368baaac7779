"""Command-line front end: ``ifsmap <command> [config.ini] [flags]``.

Exit codes: 0 success, 1 unknown command, 2 invalid configuration or
arguments, 3 numerical failure (divergence, or failed acceptance checks).
Outputs are assembled in memory and written only once a command has
finished, so a failing run leaves no partial files behind.
"""
from __future__ import annotations

import argparse
import configparser
import hashlib
import io
import json
import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import IfsmapError, NumericalError, ValidationError
from .grid import Grid, ScalarField, field_bytes, make_grid, read_field
from .herglotz import (
    density_norms,
    helmholtz_residual,
    herglotz_wave,
    make_density,
    quadrature_for_eps,
    rotation_to,
)
from .norms import all_norms
from .parallel import parallel_map
from .potentials import PRESETS, make_potential
from .propagate import PropagatorConfig, free_gaussian, initial_to_final
from .recover import ModePlan, SolverConfig, fourier_at, reconstruct, recover_mode
from .resolvent import PvSettings, resolvent_bound_probe
from .scatter import solve_correction

COMMANDS = ("norms", "herglotz", "resolvent-probe", "stationary-state", "recover", "propagate",
            "verify-estimates")
CSV_VERSION = 1


class ConfigError(ValidationError):
    pass


# -- configuration -------------------------------------------------------------

def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(";", ",").split(",") if x.strip())


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


@dataclass
class ExperimentConfig:
    parser: configparser.ConfigParser
    path: Path | None
    digest: str
    grid: Grid
    output: Path
    seed: int = 0
    base: Path = field(default_factory=Path.cwd)

    def section(self, name: str) -> configparser.SectionProxy | dict:
        return self.parser[name] if self.parser.has_section(name) else {}

    def get(self, section: str, key: str, default=None):
        s = self.section(section)
        return s.get(key, default) if s else default

    def number(self, section: str, key: str, default=None, positive: bool = False) -> float:
        raw = self.get(section, key)
        if raw is None:
            if default is None:
                raise ConfigError(f"[{section}] needs '{key}'")
            return default
        try:
            val = float(raw)
        except ValueError:
            raise ConfigError(f"[{section}] {key} = {raw!r} is not a number") from None
        if positive and not val > 0:
            raise ConfigError(f"[{section}] {key} must be positive")
        return val

    def schedule(self, section: str, key: str, default=None) -> tuple[float, ...]:
        raw = self.get(section, key)
        vals = default if raw is None else _floats(raw)
        if not vals:
            raise ConfigError(f"[{section}] needs '{key}'")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ConfigError(f"[{section}] {key} must be strictly increasing")
        if vals[0] <= 0:
            raise ConfigError(f"[{section}] {key} entries must be positive")
        return tuple(vals)

    def potential(self, section: str) -> ScalarField:
        s = self.section(section)
        if not s:
            raise ConfigError(f"missing [{section}] section")
        if "file" in s:
            f = read_field(self.resolve(s["file"]))
            if f.grid != self.grid:
                raise ConfigError(f"[{section}] file grid {f.grid} differs from [grid]")
            return f
        name = s.get("preset", "")
        if name not in PRESETS:
            raise ConfigError(f"[{section}] preset must be one of {PRESETS}, got {name!r}")
        params = {}
        for key, raw in s.items():
            if key == "preset":
                continue
            vals = _floats(raw)
            params[key] = vals if key == "center" else vals[0]
        return make_potential(name, self.grid, **params).field

    def resolve(self, p: str) -> Path:
        path = Path(p)
        if not path.is_absolute():
            path = self.base / path
        if not path.exists():
            raise ConfigError(f"referenced file {p!r} does not exist")
        return path


def default_config_text() -> str:
    return resources.files("ifsmap").joinpath("data/default.ini").read_text()


def load_config(path: str | None) -> ExperimentConfig:
    if path is None:
        text, p = default_config_text(), None
    else:
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file {path!r} not found")
        text = p.read_text()
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.optionxform = str  # keys are case-sensitive: n and N differ
    try:
        cp.read_string(text, source=str(p) if p else "<default>")
    except configparser.Error as e:
        raise ConfigError(f"malformed config: {e}") from None
    digest = hashlib.sha256(text.encode()).hexdigest()
    cfg = ExperimentConfig(cp, p, digest, make_grid(2, math.pi, 512), Path("ifsmap-out"),
                           base=p.parent if p else Path.cwd())
    n = int(cfg.number("grid", "n", 2))
    L = cfg.number("grid", "L", math.pi, positive=True)
    N = int(cfg.number("grid", "N", 512))
    cfg.grid = make_grid(n, L, N)
    cfg.output = Path(cfg.get("output", "dir", "ifsmap-out"))
    if not cfg.output.is_absolute():
        cfg.output = cfg.base / cfg.output
    cfg.seed = int(cfg.number("run", "seed", 0))
    return cfg


# -- output handling -----------------------------------------------------------

class Outputs:
    """Collects files and writes them together at the end of a command."""

    def __init__(self, cfg: ExperimentConfig, command: str):
        self.cfg = cfg
        self.command = command
        self.files: dict[str, bytes] = {}

    def csv(self, name: str, columns: list[str], units: str, rows) -> None:
        buf = io.StringIO()
        buf.write(f"# ifsmap {self.command} csv_version={CSV_VERSION} config_sha256={self.cfg.digest} "
                  f"units: {units}\n")
        buf.write(",".join(columns) + "\n")
        for row in sorted(rows, key=lambda r: tuple(r[: len(columns)])):
            buf.write(",".join(repr(float(x)) if isinstance(x, (float, np.floating)) else str(x) for x in row))
            buf.write("\n")
        self.files[name] = buf.getvalue().encode()

    def json(self, name: str, payload: dict) -> None:
        payload = {"config_sha256": self.cfg.digest, "command": self.command, **payload}
        self.files[name] = (json.dumps(payload, indent=2, sort_keys=True, default=_jsonable) + "\n").encode()

    def field(self, name: str, f: ScalarField) -> None:
        self.files[name] = field_bytes(f)

    def flush(self) -> list[Path]:
        out = []
        if self.files:
            self.cfg.output.mkdir(parents=True, exist_ok=True)
        for name in sorted(self.files):
            p = self.cfg.output / name
            p.write_bytes(self.files[name])
            out.append(p)
        return out


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"cannot serialize {type(x).__name__}")


# -- commands ------------------------------------------------------------------

def _pv(cfg: ExperimentConfig, section: str) -> PvSettings:
    return PvSettings(
        eta=cfg.number(section, "eta", 1.0, positive=True),
        eta_rule=cfg.get(section, "eta_rule", "grid"),
        c=cfg.number(section, "c", 0.5, positive=True),
        extrapolate=_bool(cfg.get(section, "extrapolate", "false")),
    )


def _direction(text, n: int) -> np.ndarray:
    d = np.asarray(_floats(text) if isinstance(text, str) else text, dtype=float)
    if d.size != n or not np.linalg.norm(d) > 0:
        raise ConfigError(f"direction needs {n} components, not all zero")
    return d / np.linalg.norm(d)


def _density(cfg: ExperimentConfig, section: str, eps: float, direction):
    per = int(cfg.number(section, "nodes_per_eps", 16, positive=True))
    quad = quadrature_for_eps(cfg.grid.n, eps, nodes_per_eps=per)
    return make_density(eps, rotation_to(direction), quad)


def cmd_norms(cfg, args, out: Outputs):
    sec = "field" if cfg.parser.has_section("field") else "potential"
    f = cfg.potential(sec)
    norms = all_norms(f)
    out.json("norms.json", {"norms": norms})
    print(json.dumps(norms, indent=2, sort_keys=True))


def cmd_herglotz(cfg, args, out: Outputs):
    lam = args.lam if args.lam is not None else cfg.number("herglotz", "lambda", positive=True)
    eps = args.eps if args.eps is not None else cfg.number("herglotz", "eps", 0.5, positive=True)
    raw_dir = args.direction or cfg.get("herglotz", "direction", ",".join(["0"] * (cfg.grid.n - 1) + ["1"]))
    d = _density(cfg, "herglotz", eps, _direction(raw_dir, cfg.grid.n))
    w = herglotz_wave(lam, d, cfg.grid)
    l1, l2 = density_norms(d)
    diag = {"lambda": lam, "eps": eps, "direction": d.center, "density_L1": l1, "density_L2": l2,
            "norms": all_norms(w), "residual": helmholtz_residual(w, lam)}
    out.field("herglotz.ssfld", w)
    out.json("herglotz.json", diag)
    print(json.dumps({"residual": diag["residual"], "B_star": diag["norms"]["B_star"]}, sort_keys=True))


def cmd_resolvent_probe(cfg, args, out: Outputs):
    lams = cfg.schedule("resolvent", "lambdas", (8.0, 16.0, 32.0, 64.0))
    radius = cfg.number("resolvent", "radius", 0.5, positive=True)
    f = make_potential("bump", cfg.grid, radius=radius).field
    raw = cfg.get("resolvent", "direction", "1" + ",0" * (cfg.grid.n - 1))
    direction = None if raw.strip().lower() == "none" else _direction(raw, cfg.grid.n)
    rep = resolvent_bound_probe(lams, f, _pv(cfg, "resolvent"), direction=direction)
    out.csv("resolvent_probe.csv", ["lambda", "ratio", "eta"],
            "lambda [1/length]; ratio [length]; eta [1/length^2]", rep.rows())
    out.json("resolvent_probe.json", {"slope": rep.slope})
    print(f"slope {rep.slope:.6f}")


def cmd_stationary_state(cfg, args, out: Outputs):
    lam = cfg.number("stationary", "lambda", 32.0, positive=True)
    eps = cfg.number("stationary", "eps", 0.02, positive=True)
    direction = _direction(cfg.get("stationary", "direction", "1" + ",0" * (cfg.grid.n - 1)), cfg.grid.n)
    tol = cfg.number("stationary", "tol", 1e-10, positive=True)
    max_iter = int(cfg.number("stationary", "max_iter", 200, positive=True))
    V = cfg.potential("potential")
    u = herglotz_wave(lam, _density(cfg, "stationary", eps, direction), cfg.grid)
    r = solve_correction(V, lam, u, tol, max_iter, _pv(cfg, "stationary"))
    out.json("stationary_state.json", {"lambda": lam, "eps": eps, **r.summary()})
    if _bool(cfg.get("stationary", "dump", "false")):
        out.field("u.ssfld", u)
        out.field("v.ssfld", r.v)
        out.field("w.ssfld", u + r.v)
    print(json.dumps(r.summary(), sort_keys=True))


def _eps_rule(cfg):
    raw = cfg.get("recover", "eps_rule", "default").strip()
    if raw == "default":
        return None
    if raw.startswith("const:"):
        val = float(raw.split(":", 1)[1])
        if not 0 < val <= 1:
            raise ConfigError("[recover] constant eps must lie in (0, 1]")
        return _ConstEps(val)
    raise ConfigError(f"[recover] eps_rule must be 'default' or 'const:<value>', got {raw!r}")


@dataclass(frozen=True)
class _ConstEps:
    value: float

    def __call__(self, lam):
        return self.value


def cmd_recover(cfg, args, out: Outputs):
    g = cfg.grid
    V1, V2 = cfg.potential("potential1"), cfg.potential("potential2")
    F = V1 - V2
    lams = cfg.schedule("recover", "lambdas", (8.0, 16.0, 32.0, 64.0))
    mode = cfg.get("recover", "pairing", "full")
    solver = SolverConfig(pv=_pv(cfg, "recover"), tol=cfg.number("recover", "tol", 1e-10, positive=True))
    eps_rule = _eps_rule(cfg)
    kap_raw = cfg.get("recover", "kappa", "")
    kappas = [_floats(k) for k in kap_raw.split(";") if k.strip()]
    for k in kappas:
        if len(k) != g.n:
            raise ConfigError(f"[recover] kappa {k} needs {g.n} components")
    plans = [ModePlan(k, lams, None, eps_rule, mode) for k in kappas]
    ests = parallel_map(lambda p: recover_mode(V1, V2, p, solver), plans)
    axes = "xyz"[: g.n]
    cols = [f"kappa_{a}" for a in axes] + ["lambda", "eps", "estimate_re", "estimate_im", "truth_re",
                                           "truth_im", "gamma", "remainder_re", "remainder_im"]
    rows = []
    for est in ests:
        truth = fourier_at(F, est.kappa)
        for i, lam in enumerate(est.lambdas):
            e, rem = complex(est.estimate[i]), complex(est.remainder[i])
            rows.append([*map(float, est.kappa), float(lam), float(est.eps[i]), e.real, e.imag,
                         truth.real, truth.imag, float(est.gamma[i]), rem.real, rem.imag])
    lattice = cfg.get("recover", "lattice")
    summary = {"modes": len(kappas)}
    if lattice:
        size = int(lattice)
        multiple = int(cfg.number("recover", "multiple", 2, positive=True))
        template = ModePlan((0.0,) * g.n, lams, None, eps_rule, mode)
        rec = reconstruct(V1, V2, size, multiple, template, solver, truth=F)
        out.field("reconstruction.ssfld", rec.field)
        summary.update({"relative_error": rec.relative_error, "symmetry_defect": rec.symmetry_defect,
                        "cell_half_width": rec.cell})
        out.csv("reconstruction.csv", [f"index_{a}" for a in axes] + ["estimate_re", "estimate_im"],
                "index [multiples of pi/L]; estimate [potential x length^n]",
                [[*k, v.real, v.imag] for k, v in rec.estimates.items()])
    out.csv("recover.csv", cols,
            "kappa, lambda [1/length]; eps [1]; estimate, truth, gamma [potential x length^n]; "
            "remainder [potential x length^n x density^2]", rows)
    out.json("recover.json", summary)
    print(json.dumps(summary, sort_keys=True, default=_jsonable))


def _initial(cfg, spec: str) -> ScalarField:
    if spec == "packet":
        sigma = cfg.number("propagate", "sigma", 1.0, positive=True)
        k0 = _floats(cfg.get("propagate", "k0", ",".join(["0"] * cfg.grid.n)))
        if len(k0) != cfg.grid.n:
            raise ConfigError("[propagate] k0 needs one entry per axis")
        return free_gaussian(cfg.grid, 0.0, sigma, k0)
    f = read_field(cfg.resolve(spec))
    if f.grid != cfg.grid:
        raise ConfigError("initial-state file grid differs from [grid]")
    return f


def cmd_propagate(cfg, args, out: Outputs):
    T = args.T if args.T is not None else cfg.number("propagate", "T", 0.5)
    dt = args.dt if args.dt is not None else cfg.number("propagate", "dt", 1e-3, positive=True)
    pc = PropagatorConfig(T, dt)
    if args.potential:
        if args.potential in PRESETS:
            V = make_potential(args.potential, cfg.grid).field
        else:
            V = read_field(cfg.resolve(args.potential))
    else:
        V = cfg.potential("potential")
    f = _initial(cfg, args.initial or cfg.get("propagate", "initial", "packet"))
    u = initial_to_final(V, f, pc)
    back = initial_to_final(V.conj(), u, pc, backward=True)
    m0 = np.linalg.norm(f.values)
    diag = {"T": pc.actual_T, "steps": pc.steps, "dt": dt,
            "mass_drift": float(abs(np.linalg.norm(u.values) / m0 - 1)),
            "time_reversal_error": float(np.linalg.norm((back - f).values) / m0)}
    out.field("propagated.ssfld", u)
    out.json("propagate.json", diag)
    print(json.dumps(diag, sort_keys=True))


def cmd_verify(cfg, args, out: Outputs):
    from .verify import VerifyConfig, run_all

    raw = cfg.get("verify", "criteria", "")
    numbers = None
    if raw.strip():
        numbers = set()
        for part in raw.split(","):
            a, _, b = part.strip().partition("-")
            numbers.update(range(int(a), int(b or a) + 1))
    vc = VerifyConfig(seed=cfg.seed or VerifyConfig.seed)
    results = run_all(numbers, vc, echo=print)
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed")
    out.csv("verify.csv", ["criterion", "passed", "seconds"], "seconds [s]",
            [[r.number, int(r.passed), round(r.seconds, 1)] for r in results])
    out.json("verify.json", {"results": [{"number": r.number, "name": r.name, "passed": r.passed,
                                          "summary": r.summary} for r in results]})
    return 0 if passed == len(results) else 3


HANDLERS = {
    "norms": cmd_norms,
    "herglotz": cmd_herglotz,
    "resolvent-probe": cmd_resolvent_probe,
    "stationary-state": cmd_stationary_state,
    "recover": cmd_recover,
    "propagate": cmd_propagate,
    "verify-estimates": cmd_verify,
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ifsmap", description="Stationary-state and recovery sandbox.")
    p.add_argument("command", help=", ".join(COMMANDS))
    p.add_argument("config", nargs="?", help="INI configuration (default: packaged default.ini)")
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--direction")
    p.add_argument("--grid", help="n,L,N overriding the [grid] section")
    p.add_argument("--T", type=float)
    p.add_argument("--dt", type=float)
    p.add_argument("--potential", help="preset name or SSFLD1 path")
    p.add_argument("--initial", help="'packet' or SSFLD1 path")
    return p


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    if args.command not in HANDLERS:
        print(f"ifsmap: unknown command {args.command!r}; expected one of {', '.join(COMMANDS)}",
              file=sys.stderr)
        return 1
    try:
        cfg = load_config(args.config)
        if args.grid:
            n, L, N = _floats(args.grid)
            cfg.grid = make_grid(int(n), L, int(N))
        out = Outputs(cfg, args.command)
        status = HANDLERS[args.command](cfg, args, out) or 0
        out.flush()
        return status
    except NumericalError as e:
        print(f"ifsmap: numerical failure: {e}", file=sys.stderr)
        return 3
    except (ValidationError, ValueError) as e:
        print(f"ifsmap: invalid input: {e}", file=sys.stderr)
        return 2
    except IfsmapError as e:
        print(f"ifsmap: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
