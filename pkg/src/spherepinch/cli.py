"""Command-line front end: ``spherepinch <command> [--key value ...]``.

Parameters come from an optional ``--config`` file of ``key=value`` lines
and from flags; flags win. Reports are CSV (17 significant digits, config
echoed in ``#`` lines) or JSON (``schema: 1``). Exit codes: 0 success,
2 configuration error, 3 numerical error, 4 validation failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .curvature import check_lower_bound, ricci_arrays, scan_radii
from .geodesic import GeodesicGrid
from .geometry import ReducedPoint, ResourceGuardError, UnsupportedMetricError, distance, gh_distortion, sample_space
from .spectrum import ModeCutoffError, merged_spectrum
from .sphere_map import (
    DegreeIndeterminate,
    MapUndefinedError,
    build_phi,
    coordinate_functions,
    degree_estimate,
    empirical_lipschitz,
    h_deviation,
    lowest_eigen_functions,
    map_distortion,
    structured_points,
)
from .sturm import BisectionError
from .warped import make_pinch_family, make_round_sphere, pinch_constants, sphere_volume, validate_closure, volume

COMMANDS = ("spectrum", "curvature", "volume", "distance", "gh", "phi", "sweep", "validate")
SWEEPABLE = ("spectrum", "curvature", "volume", "gh", "phi", "validate")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VALIDATION = 0, 2, 3, 4

NUMERIC_ERRORS = (
    BisectionError,
    ModeCutoffError,
    MapUndefinedError,
    DegreeIndeterminate,
    ResourceGuardError,
    FloatingPointError,
    np.linalg.LinAlgError,
)


class ConfigError(ValueError):
    pass


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(float(t)) for t in str(text).split(",") if t.strip())


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(t) for t in str(text).split(",") if t.strip())


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass
class RunConfig:
    command: str = ""
    family: str = "pinch"
    n: int = 3
    k: tuple[int, ...] = (1000,)
    N: int = 2000
    lmax: float = 20.0
    richardson: bool = True
    resolution: int = 128
    stencil: int = 3
    counts: tuple[int, ...] = (5, 8, 8)
    grid_points: int = 256
    quad_points: int = 2048
    x: tuple[float, ...] = ()
    y: tuple[float, ...] = ()
    sweep_command: str = "spectrum"
    functions: str = "auto"
    interior: bool = False
    seed: int = 0
    workers: int = 4
    format: str = "csv"
    output: str = "-"

    PARSERS = {
        "command": str,
        "family": str,
        "n": int,
        "k": _int_list,
        "N": int,
        "lmax": float,
        "richardson": _bool,
        "resolution": int,
        "stencil": int,
        "counts": _int_list,
        "grid_points": int,
        "quad_points": int,
        "x": _float_list,
        "y": _float_list,
        "sweep_command": str,
        "functions": str,
        "interior": _bool,
        "seed": int,
        "workers": int,
        "format": str,
        "output": str,
    }

    @classmethod
    def from_mapping(cls, values: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        cfg = cls()
        for key, raw in values.items():
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                setattr(cfg, key, cls.PARSERS[key](raw))
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from None
        cfg.check()
        return cfg

    def check(self) -> None:
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.command in COMMANDS, f"command must be one of {', '.join(COMMANDS)}")
        need(self.family in ("round", "pinch"), "family must be round or pinch")
        need(3 <= self.n <= 12, "n must be in [3, 12]")
        need(len(self.k) >= 1 and all(2 <= k <= 10**7 for k in self.k), "k values must be in [2, 1e7]")
        need(64 <= self.N <= 10**6, "N must be in [64, 1e6]")
        need(0.0 < self.lmax <= 1e6, "lmax must be in (0, 1e6]")
        need(32 <= self.resolution <= 1024, "resolution must be in [32, 1024]")
        need(1 <= self.stencil <= 5, "stencil must be in [1, 5]")
        need(len(self.counts) == 3 and all(c >= 1 for c in self.counts), "counts needs three positive integers")
        need(64 <= self.grid_points <= 10**6, "grid_points must be in [64, 1e6]")
        need(16 <= self.quad_points <= 10**7, "quad_points must be in [16, 1e7]")
        need(len(self.x) in (0, 3) and len(self.y) in (0, 3), "x and y take r,dtheta,psi")
        need(self.sweep_command in SWEEPABLE, f"sweep_command must be one of {', '.join(SWEEPABLE)}")
        need(self.functions in ("auto", "coordinates", "eigen"), "functions must be auto, coordinates or eigen")
        need(1 <= self.workers <= 64, "workers must be in [1, 64]")
        need(self.format in ("csv", "json"), "format must be csv or json")

    def resolved(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out


def parse_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value")
                key, value = (s.strip() for s in line.split("=", 1))
                values[key.replace("-", "_")] = value
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return values


# reports ------------------------------------------------------------


@dataclass
class Report:
    columns: list[str]
    rows: list[list]
    summary: dict
    ok: bool = True


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if v is None:
        return ""
    return str(v)


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    return v


def render(report: Report, cfg: RunConfig, timestamp: str) -> str:
    config = cfg.resolved()
    if cfg.format == "json":
        doc = {
            "schema": 1,
            "version": __version__,
            "timestamp": timestamp,
            "config": config,
            "summary": report.summary,
            "columns": report.columns,
            "rows": report.rows,
        }
        return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"
    lines = [f"# version={__version__}", f"# timestamp={timestamp}"]
    lines += [f"# {k}={','.join(map(_fmt, v)) if isinstance(v, list) else _fmt(v)}" for k, v in config.items()]
    lines += [f"# summary.{k}={_fmt(v)}" for k, v in report.summary.items()]
    lines.append(",".join(report.columns))
    lines += [",".join(_fmt(v) for v in row) for row in report.rows]
    return "\n".join(lines) + "\n"


# commands -----------------------------------------------------------


def _metric(cfg: RunConfig, k: int | None = None):
    if cfg.family == "round":
        return make_round_sphere(cfg.n)
    return make_pinch_family(cfg.n, cfg.k[0] if k is None else k)[0]


def cmd_spectrum(cfg: RunConfig, k: int | None = None) -> Report:
    metric = _metric(cfg, k)
    res = merged_spectrum(metric, cfg.lmax, cfg.N, cfg.richardson)
    rows = [
        [e.lam, e.multiplicity, e.mode.m, e.mode.l, e.N, e.extrapolated, e.raw] for e in res.entries
    ]
    vals = [v for v in res.values() if v > 1e-6]
    summary = {f"lambda_{i + 1}": float(v) for i, v in enumerate(vals[: cfg.n + 1])}
    return Report(["lambda", "multiplicity", "m", "l", "N", "extrapolated", "raw"], rows, summary)


def cmd_curvature(cfg: RunConfig, k: int | None = None) -> Report:
    metric = _metric(cfg, k)
    r = scan_radii(metric, cfg.grid_points)
    rr, ru, rv = ricci_arrays(metric, r)
    rep = check_lower_bound(metric, cfg.n - 1, cfg.grid_points)
    summary = {
        "ric_min": rep.worst.value,
        "ric_min_r": rep.worst.r,
        "ric_min_direction": rep.worst.direction,
        "bound": rep.bound,
        "bound_passed": rep.passed,
    }
    rows = [[float(a), float(b), float(c), float(d)] for a, b, c, d in zip(r, rr, ru, rv)]
    return Report(["r", "ric_r", "ric_u", "ric_v"], rows, summary)


def cmd_volume(cfg: RunConfig, k: int | None = None) -> Report:
    metric = _metric(cfg, k)
    vol = volume(metric, cfg.quad_points)
    check = volume(metric, 2 * cfg.quad_points)
    ratio = vol / sphere_volume(cfg.n)
    summary = {"volume": vol, "ratio_to_round": ratio, "volume_doubled_quadrature": check}
    return Report(["volume", "ratio_to_round"], [[vol, ratio]], summary)


def cmd_distance(cfg: RunConfig) -> Report:
    metric = _metric(cfg)
    if cfg.x and cfg.y:
        try:
            x, y = ReducedPoint(*cfg.x), ReducedPoint(*cfg.y)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        est = distance(metric, x, y, cfg.resolution, cfg.stencil)
        summary = {"distance": est.value, "coarse": est.coarse}
        return Report(["distance", "coarse_distance"], [[est.value, est.coarse]], summary)
    space = sample_space(metric, tuple(cfg.counts), cfg.resolution, cfg.stencil)
    P = len(space)
    rows = [
        [i, j, *space.points[i], *space.points[j], space.dist[i, j]] for i in range(P) for j in range(i + 1, P)
    ]
    summary = {"n_points": P, "diameter": float(space.dist.max())}
    cols = ["i", "j", "r_i", "theta_i", "psi_i", "r_j", "theta_j", "psi_j", "distance"]
    return Report(cols, rows, summary)


def cmd_gh(cfg: RunConfig, k: int | None = None) -> Report:
    if cfg.family != "pinch":
        raise ConfigError("gh needs family=pinch")
    metric = _metric(cfg, k)
    rep = gh_distortion(metric, cfg.resolution, tuple(cfg.counts), cfg.stencil)
    summary = rep.as_dict()
    return Report(list(summary), [list(summary.values())], summary)


def cmd_phi(cfg: RunConfig, k: int | None = None) -> Report:
    metric = _metric(cfg, k)
    use_coords = cfg.functions == "coordinates" or (cfg.functions == "auto" and cfg.family == "round")
    if use_coords and cfg.family != "round":
        raise ConfigError("coordinate functions exist only for family=round")
    fns = coordinate_functions(metric) if use_coords else lowest_eigen_functions(metric, cfg.N)
    grid = GeodesicGrid(metric, cfg.resolution, cfg.stencil)
    space = sample_space(metric, tuple(cfg.counts), grid=grid)
    keep = np.ones(len(space), dtype=bool)
    if cfg.interior:
        keep = (space.points[:, 0] > 0.0) & (space.points[:, 0] < metric.R)
    D = space.dist[np.ix_(keep, keep)]
    sample = build_phi(metric, fns, space.points[keep])
    degree = agreeing = None
    if cfg.n == 3 and not cfg.interior:
        pts, shape = structured_points(metric, (33, 48, 48))
        dgrid = build_phi(metric, fns, pts)
        steps = (metric.R / (shape[0] - 1), 2 * math.pi / shape[1], 2 * math.pi / shape[2])
        drep = degree_estimate(dgrid.phi.reshape(*shape, 4), steps, seed=cfg.seed)
        degree, agreeing = drep.degree, drep.agreeing
    summary = {
        "h_deviation": h_deviation(sample),
        "max_distortion": map_distortion(sample, D),
        "lipschitz": empirical_lipschitz(sample, D),
        "degree": degree,
        "degree_agreeing": agreeing,
        "n": cfg.n,
        "family": cfg.family,
        "k": None if cfg.family == "round" else (cfg.k[0] if k is None else k),
        "n_points": int(keep.sum()),
        "functions": ";".join(f.label for f in fns),
    }
    return Report(list(summary), [list(summary.values())], summary)


def cmd_validate(cfg: RunConfig, k: int | None = None) -> Report:
    metric = _metric(cfg, k)
    rep = validate_closure(metric)
    rows = [[c.name, c.expected, c.actual, c.residual, c.ok] for c in rep.checks]
    rows += [[f"seam r={x!r}", "C1", max(dv, dd), max(dv, dd), max(dv, dd) < 1e-12] for x, dv, dd in rep.seams]
    ok = rep.ok
    if cfg.family == "pinch":
        c = pinch_constants(cfg.k[0] if k is None else k)
        for name, res in (("eta identity", c.eta_identity_residual()), ("eps+theta identity", c.angle_identity_residual())):
            rows.append([name, "0", res, res, res < 1e-12])
            ok = ok and res < 1e-12
    summary = {"passed": ok, "failures": ";".join(str(r[0]) for r in rows if not r[4])}
    return Report(["check", "expected", "actual", "residual", "ok"], rows, summary, ok)


SINGLE = {
    "spectrum": cmd_spectrum,
    "curvature": cmd_curvature,
    "volume": cmd_volume,
    "gh": cmd_gh,
    "phi": cmd_phi,
    "validate": cmd_validate,
}


def cmd_sweep(cfg: RunConfig) -> Report:
    if cfg.family != "pinch":
        raise ConfigError("sweep runs over k and needs family=pinch")
    func = SINGLE[cfg.sweep_command]

    def one(k):
        try:
            rep = func(cfg, k)
            return {"status": "ok" if rep.ok else "failed", **rep.summary}
        except ConfigError:
            raise
        except Exception as exc:  # one k failing must not abort the others
            return {"status": "failed", "error": f"{type(exc).__name__}: {exc}"}

    with ThreadPoolExecutor(max_workers=min(cfg.workers, len(cfg.k))) as pool:
        results = list(pool.map(one, cfg.k))  # map keeps input order
    order = np.argsort(cfg.k, kind="stable")
    columns = ["k", "status"]
    for res in results:
        columns += [c for c in res if c not in columns]
    rows = [[cfg.k[i]] + [results[i].get(c) for c in columns[1:]] for i in order]
    n_failed = sum(r["status"] != "ok" for r in results)
    return Report(columns, rows, {"rows": len(rows), "failed": n_failed}, n_failed == 0)


def run(cfg: RunConfig, timestamp: str | None = None) -> tuple[int, str]:
    """Execute a resolved config; returns (exit status, rendered report)."""
    timestamp = timestamp or datetime.now(timezone.utc).isoformat(timespec="seconds")
    if cfg.command == "sweep":
        report = cmd_sweep(cfg)
    elif cfg.command == "distance":
        report = cmd_distance(cfg)
    else:
        report = SINGLE[cfg.command](cfg)
    text = render(report, cfg, timestamp)
    if cfg.output == "-":
        sys.stdout.write(text)
    else:
        with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return (EXIT_OK if report.ok else EXIT_VALIDATION), text


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="spherepinch", description="Warped-sphere spectra, curvature and geometry.")
    p.add_argument("command", nargs="?", help=f"one of: {', '.join(COMMANDS)}")
    p.add_argument("--config", help="key=value file; flags override its entries")
    for name in RunConfig.PARSERS:
        if name == "command":
            continue
        flag = "--" + name.replace("_", "-")
        p.add_argument(flag, dest=name, default=argparse.SUPPRESS, metavar=name.upper())
    p.add_argument("--command", dest="sweep_command", default=argparse.SUPPRESS, help="command run by sweep")
    p.add_argument("--no-richardson", dest="richardson", action="store_const", const="false", default=argparse.SUPPRESS)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        values = parse_config_file(ns.config) if ns.config else {}
        flags = {k: v for k, v in vars(ns).items() if k != "config" and v is not None}
        values.update(flags)
        cfg = RunConfig.from_mapping(values)
        status, _ = run(cfg)
        return status
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnsupportedMetricError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERIC_ERRORS as exc:
        print(f"numerical error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
