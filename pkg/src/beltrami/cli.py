"""Scenario runner: ``python -m beltrami {solve,verify-oracle,classify,diagnose} --config FILE``.

Configuration is an INI file (schema 1)::

    [scenario]
    schema = 1

    [grid]
    center = 0
    halfwidth = 1.5
    resolution = 512

    [coefficient]
    source = example1          ; or: file
    alpha = 1.0
    path = coeff.csv           ; CSV with header x,y,re_mu,im_mu,re_nu,im_nu

    [ladder]
    levels = 2, 3, 5, 9

    [solver]
    tol = 1e-8
    max_iter = 500
    gap_window = 1.2

    [analysis]
    p = 2
    far_field_radii = 1.1, 1.2, 1.3
    poletsky = yes
    equicontinuity = yes
    seed = 0

    [classify]
    q_source = example1        ; example1 | constant | file
    q_value = 1
    q_path = q.csv
    probes = 0, 0.5, -0.3+0.4j
    window_radius = 2
    delta = 0.5

    [output]
    dir = out

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import oracle
from .analysis import Annulus, classify, equicontinuity_bound, inverse_poletsky_check
from .coefficients import CoefficientField, TruncationLevel, truncate
from .dilatation import change_of_variables_check, dilatation_report, inner_p_field
from .errors import BeltramiError, FormatError, InvalidArgument, NoConvergence, SolverDivergence
from .grid import make_grid
from .io import dump_json, read_coefficients, read_field, write_field
from .regions import Disk
from .solver import SampledMap, far_field_profile, inverse_map, invert_map, solve_principal
from .transforms import make_plan

log = logging.getLogger("beltrami")

SCHEMA = 1
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


class ConfigError(BeltramiError):
    pass


@dataclass
class ScenarioConfig:
    center: complex = 0j
    halfwidth: float = 1.5
    resolution: int = 512
    source: str = "example1"
    alpha: float = 1.0
    coeff_path: Path | None = None
    levels: list = field(default_factory=lambda: [2, 3, 5, 9])
    tol: float = 1e-8
    max_iter: int = 500
    gap_window: float = 1.2
    p: float = 2.0
    far_field_radii: list = field(default_factory=list)
    poletsky: bool = True
    equicontinuity: bool = True
    seed: int = 0
    q_source: str = "example1"
    q_value: float = 1.0
    q_path: Path | None = None
    probes: list = field(default_factory=lambda: [0j, 0.5 + 0j, -0.3 + 0.4j])
    window_radius: float = 2.0
    delta: float = 0.5
    out: Path = Path("out")

    def validate(self):
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])) or not self.levels or self.levels[0] < 1:
            raise ConfigError(f"levels must be increasing integers >= 1, got {self.levels}")
        if not (1 < self.p <= 2):
            raise ConfigError(f"p must lie in (1, 2], got {self.p}")
        if not self.tol > 0:
            raise ConfigError("tol must be positive")
        if self.source not in ("example1", "file"):
            raise ConfigError(f"unknown coefficient source {self.source!r}")
        if self.source == "file" and self.coeff_path is None:
            raise ConfigError("coefficient source 'file' needs a path")
        if self.q_source not in ("example1", "constant", "file"):
            raise ConfigError(f"unknown q_source {self.q_source!r}")
        if not self.alpha > 0:
            raise ConfigError("alpha must be positive")
        try:
            make_grid(self.center, self.halfwidth, self.resolution)
        except InvalidArgument as exc:
            raise ConfigError(str(exc)) from None
        return self


def _floats(text):
    return [float(t) for t in text.replace(";", ",").split(",") if t.strip()]


def _complexes(text):
    return [complex(t.strip().replace(" ", "")) for t in text.split(",") if t.strip()]


def load_config(path, out=None, seed=None) -> ScenarioConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    path = Path(path)
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    cfg = ScenarioConfig()
    base = path.parent
    try:
        schema = cp.getint("scenario", "schema", fallback=None)
        if schema != SCHEMA:
            raise ConfigError(f"unsupported or missing schema version {schema!r} (expected {SCHEMA})")
        g = cp["grid"] if cp.has_section("grid") else {}
        cfg.center = complex(str(g.get("center", "0")).replace(" ", ""))
        cfg.halfwidth = float(g.get("halfwidth", cfg.halfwidth))
        cfg.resolution = int(g.get("resolution", cfg.resolution))
        if cp.has_section("coefficient"):
            c = cp["coefficient"]
            cfg.source = c.get("source", cfg.source).strip()
            cfg.alpha = c.getfloat("alpha", cfg.alpha)
            if c.get("path"):
                cfg.coeff_path = base / c.get("path")
        if cp.has_section("ladder"):
            cfg.levels = [int(v) for v in _floats(cp["ladder"].get("levels", ""))] or cfg.levels
        if cp.has_section("solver"):
            s = cp["solver"]
            cfg.tol = s.getfloat("tol", cfg.tol)
            cfg.max_iter = s.getint("max_iter", cfg.max_iter)
            cfg.gap_window = s.getfloat("gap_window", cfg.gap_window)
        if cp.has_section("analysis"):
            a = cp["analysis"]
            cfg.p = a.getfloat("p", cfg.p)
            cfg.far_field_radii = _floats(a.get("far_field_radii", ""))
            cfg.poletsky = a.getboolean("poletsky", cfg.poletsky)
            cfg.equicontinuity = a.getboolean("equicontinuity", cfg.equicontinuity)
            cfg.seed = a.getint("seed", cfg.seed)
        if cp.has_section("classify"):
            q = cp["classify"]
            cfg.q_source = q.get("q_source", cfg.q_source).strip()
            cfg.q_value = q.getfloat("q_value", cfg.q_value)
            if q.get("q_path"):
                cfg.q_path = base / q.get("q_path")
            if q.get("probes"):
                cfg.probes = _complexes(q.get("probes"))
            cfg.window_radius = q.getfloat("window_radius", cfg.window_radius)
            cfg.delta = q.getfloat("delta", cfg.delta)
        if cp.has_section("output"):
            cfg.out = base / cp["output"].get("dir", "out")
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if out is not None:
        cfg.out = Path(out)
    if seed is not None:
        cfg.seed = int(seed)
    return cfg.validate()


def _coefficient(cfg: ScenarioConfig, spec) -> CoefficientField:
    if cfg.source == "example1":
        return CoefficientField.from_functions(lambda z: oracle.mu_example(z, cfg.alpha), None, spec)
    coeff = read_coefficients(cfg.coeff_path)
    if coeff.spec != spec:
        raise ConfigError("coefficient file grid does not match [grid]")
    return coeff


def _mkdir(out: Path):
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc


def _solve_levels(cfg, spec, plan, coeff, out, invert=False):
    """Solve each level, writing artifacts as they complete; returns (maps, inverses, record)."""
    window = Disk(0, cfg.gap_window)
    mask = window.contains(spec.nodes())
    maps, inverses, record = [], [], []
    for n in cfg.levels:
        lvl = TruncationLevel(n)
        try:
            f = solve_principal(truncate(coeff, lvl), plan, cfg.tol, cfg.max_iter, lvl)
        except (SolverDivergence, NoConvergence, InvalidArgument) as exc:
            dump_json(out / "failure.json", {"failed_level": n, "error": type(exc).__name__, "message": str(exc),
                                              "completed_levels": [r["level"] for r in record]})
            exc.args = (f"level {n}: {exc}",)
            raise
        gap = float(np.abs(f.values - maps[-1].values)[mask].max()) if maps else None
        diag = {
            "level": n,
            "iterations": f.diagnostics["iterations"],
            "residual": f.diagnostics["relative_residual"],
            "cauchy_gap_prev": gap,
            "flagged_nodes": f.diagnostics["flagged_nodes"],
        }
        write_field(out / f"level_{n}.csv", f.displacement)
        dump_json(out / f"level_{n}_diagnostics.json", diag)
        record.append(diag)
        maps.append(f)
        if invert:
            inverses.append(inverse_map(f))
    return maps, inverses, record


def cmd_solve(cfg: ScenarioConfig) -> int:
    spec = make_grid(cfg.center, cfg.halfwidth, cfg.resolution)
    out = cfg.out
    _mkdir(out)
    coeff = _coefficient(cfg, spec)
    plan = make_plan(spec)
    maps, _, record = _solve_levels(cfg, spec, plan, coeff, out)
    radii = cfg.far_field_radii or _default_radii(cfg, coeff)
    rows, exps = [], {}
    for n, f in zip(cfg.levels, maps):
        prof = far_field_profile(f, radii)
        exps[str(n)] = prof.exponent
        rows += [(n, R, e) for R, e in zip(prof.radii, prof.sup_errors)]
    with open(out / "far_field.csv", "w") as fh:
        fh.write("level,R,sup_error\n")
        for n, R, e in rows:
            fh.write(f"{n},{R!r},{float(e)!r}\n")
    dump_json(out / "ladder.json", {
        "levels": cfg.levels,
        "cauchy_gaps": [r["cauchy_gap_prev"] for r in record[1:]],
        "residuals": [r["residual"] for r in record],
        "iterations": [r["iterations"] for r in record],
        "far_field_exponents": exps,
        "gap_window": cfg.gap_window,
    })
    return EXIT_OK


def _default_radii(cfg, coeff):
    reach = cfg.halfwidth - 2 * 2 * cfg.halfwidth / cfg.resolution - max(abs(cfg.center.real), abs(cfg.center.imag))
    lo = min(max(coeff.support_radius * 1.05, 1e-3), 0.9 * reach)
    return list(np.linspace(lo, reach, 4))


def _stats(err, scale=1.0):
    err = np.asarray(err)[np.isfinite(err)]
    return {"max": float(err.max() / scale), "median": float(np.median(err) / scale)} if err.size else {"max": None, "median": None}


def cmd_verify_oracle(cfg: ScenarioConfig, thresholds=None) -> int:
    if cfg.source != "example1":
        raise ConfigError("verify-oracle requires coefficient source example1")
    th = {"f_sup": 0.05, "f_median": 0.01, "g_inner": 1e-3, "g_outer_rel": 0.01, "K_rel": 0.05}
    th.update(thresholds or {})
    params = []
    for k in cfg.levels:
        try:
            params.append(oracle.ExampleParams(cfg.alpha, k))
        except InvalidArgument as exc:
            raise ConfigError(f"level {k}: {exc}") from None
    spec = make_grid(cfg.center, cfg.halfwidth, cfg.resolution)
    out = cfg.out
    _mkdir(out)
    coeff = _coefficient(cfg, spec)
    plan = make_plan(spec)
    z = spec.nodes()
    win = np.abs(z) <= cfg.gap_window
    rng = np.random.default_rng(cfg.seed)
    report = {"alpha": cfg.alpha, "resolution": cfg.resolution, "thresholds": th, "levels": []}
    all_ok = True
    for prm in params:
        f = solve_principal(truncate(coeff, int(prm.k)), plan, cfg.tol, cfg.max_iter, int(prm.k))
        exact = oracle.f_k_example(z, prm)
        scale = float(np.abs(exact[win]).max())
        f_err = _stats(np.abs(f.values - exact)[win], scale)

        s0 = prm.image_radius
        ang = rng.uniform(0, 2 * np.pi, 400)
        y_in = rng.uniform(0.02, 0.9 * s0, 400) * np.exp(1j * ang)
        y_out = rng.uniform(min(1.1 * s0, 0.95), 0.95, 400) * np.exp(1j * ang)
        g_in = invert_map(f, y_in, 1e-12)
        g_out = invert_map(f, y_out, 1e-12)
        gi = _stats(np.abs(g_in - oracle.g_k_example(y_in, prm)))
        go = _stats(np.abs(g_out - oracle.g_k_example(y_out, prm)) / np.abs(oracle.g_k_example(y_out, prm)))

        g_oracle = SampledMap.from_function(lambda y: oracle.g_k_example(y, prm), spec)
        k_fd, bad = inner_p_field(g_oracle, 2)
        r = np.abs(z)
        h = spec.spacing
        away = (np.abs(r - s0) > 3 * h) & (np.abs(r - 1) > 3 * h) & ~bad
        K_exact = oracle.K_inverse_example(z, prm)
        k_err = _stats((np.abs(k_fd - K_exact) / K_exact)[away])

        ok = (f_err["max"] <= th["f_sup"] and f_err["median"] <= th["f_median"]
              and (gi["max"] or 0) <= th["g_inner"] and (go["max"] or 0) <= th["g_outer_rel"]
              and k_err["max"] <= th["K_rel"])
        all_ok &= ok
        report["levels"].append({
            "k": prm.k, "rho": prm.rho, "iterations": f.diagnostics["iterations"],
            "f_error": f_err, "g_inner_error": gi, "g_outer_rel_error": go, "K_mu_g_rel_error": k_err,
            "inversion_failures": int(np.sum(~np.isfinite(g_in)) + np.sum(~np.isfinite(g_out))),
            "passed": ok,
        })
    report["all_passed"] = all_ok
    dump_json(out / "oracle_report.json", report)
    return EXIT_OK


def _majorant(cfg: ScenarioConfig):
    if cfg.q_source == "example1":
        return lambda y: oracle.Q_example(y, cfg.alpha)
    if cfg.q_source == "constant":
        v = cfg.q_value
        return lambda y: np.full(np.shape(y), v)
    if cfg.q_path is None:
        raise ConfigError("q_source 'file' needs q_path")
    try:
        return read_field(cfg.q_path, "scalar")
    except FormatError:
        raise
    except OSError as exc:
        raise OSError(f"cannot read Q file {cfg.q_path}: {exc}") from exc


def cmd_classify(cfg: ScenarioConfig) -> int:
    Q = _majorant(cfg)
    _mkdir(cfg.out)
    verdict = classify(Q, Disk(0, cfg.window_radius), cfg.probes, delta=cfg.delta)
    dump_json(cfg.out / "verdict.json", verdict.to_dict())
    return EXIT_OK


def cmd_diagnose(cfg: ScenarioConfig) -> int:
    spec = make_grid(cfg.center, cfg.halfwidth, cfg.resolution)
    out = cfg.out
    _mkdir(out)
    coeff = _coefficient(cfg, spec)
    plan = make_plan(spec)
    maps, inverses, record = _solve_levels(cfg, spec, plan, coeff, out, invert=True)
    Q = _majorant(cfg) if cfg.q_source != "file" or cfg.q_path else None
    C = Disk(0, 0.8 * cfg.gap_window)
    levels = []
    for n, f, g in zip(cfg.levels, maps, inverses):
        entry = {"level": n, "dilatation": dilatation_report(g, Disk(0, cfg.gap_window), cfg.p).to_dict()}
        try:
            lhs, rhs, gap = change_of_variables_check(f, g, C, cfg.p)
            entry["change_of_variables"] = {"lhs": lhs, "rhs": rhs, "rel_gap": gap}
        except InvalidArgument as exc:
            entry["change_of_variables"] = {"error": str(exc)}
        if cfg.poletsky and Q is not None:
            res = []
            for ann in (Annulus(0, 0.3, 0.6), Annulus(0, 0.6, 0.9), Annulus(0.2, 0.1, 0.4)):
                try:
                    pr = inverse_poletsky_check(f, Q, ann, "log")
                    res.append({"annulus": [ann.center, ann.r1, ann.r2], "lhs": pr.lhs, "rhs": pr.rhs, "holds": pr.holds})
                except InvalidArgument as exc:
                    res.append({"annulus": [ann.center, ann.r1, ann.r2], "error": str(exc)})
            entry["poletsky"] = res
        levels.append(entry)
    report = {"levels": levels, "record": record}
    if cfg.equicontinuity:
        G = Disk(0, min(1.0, 0.9 * cfg.halfwidth))
        K = Disk(0, 0.6 * G.radius)
        eq = equicontinuity_bound(maps, K, G, seed=cfg.seed)
        report["equicontinuity"] = {"C_hat": eq.C_hat, "per_map": eq.per_map,
                                    "worst": {"map": eq.worst[0], "x": eq.worst[1], "y": eq.worst[2]}}
    dump_json(out / "diagnostics.json", report)
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "verify-oracle": cmd_verify_oracle, "classify": cmd_classify, "diagnose": cmd_diagnose}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="beltrami", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="INI scenario file")
        p.add_argument("--out", help="output directory (overrides [output] dir)")
        p.add_argument("--seed", type=int, help="seed for randomised diagnostics (default 0)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config, args.out, args.seed)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverDivergence, NoConvergence) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except FormatError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except InvalidArgument as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
