"""Config-driven command line front end.

Subcommands
-----------
validate   print regularity and extension-hypothesis verdicts for the model
chart      export the metric grid as CSV
boundary   per-tau table of boundary radius, its rate, chart radius,
           boundary g_tautau and the lightlikeness defect
oracle     compare the quadrature lane against closed forms (power-law only)
geodesic   trace the radial geodesic and export it as CSV

Configuration is a flat INI file::

    [model]
    family = power
    alpha = 2.0

    [grid]
    tau_min = 0.5
    tau_max = 2.0
    n_tau = 10
    rho_fraction_max = 1.5
    n_rho = 20
    k = 0

    [tolerances]
    quad_abs = 1e-10

    [output]
    path = chart.csv

    [geodesic]
    tau0 = 1.0
    rho_end_fraction = 0.75
    steps = 2048

``--set section.key=value`` overrides single entries; ``--out`` overrides
the output path (stdout when neither is given).  Numeric output uses 17
significant digits, '.' decimal separator and LF line endings, and rerunning
any command on the same configuration produces byte-identical output.  The
environment variable FERMI_CHART_THREADS caps grid parallelism (the output
does not depend on it).

Exit codes: 0 success; 1 validation verdict failure; 2 configuration-parse
or numerical failure (failing rows are listed on stderr).
"""

from __future__ import annotations

import argparse
import configparser
import math
import sys
from dataclasses import dataclass
from typing import Dict, List, Optional

from . import chart as chart_mod
from . import oracle as oracle_mod
from .chart import ChartGridSpec, CSV_HEADER, csv_row, grid, rho_max
from .errors import ConfigError, FermiChartError
from .geodesic import TRACE_CSV_HEADER, null_check_M0, trace_radial
from .quadrature import (DEFAULT_TOLERANCES, Tolerances, fermi_radius,
                         fermi_radius_rate)
from .scalefactor import (ADOT0_INFINITE, ScaleFactorModel, check_regularity,
                          make_model)

__all__ = ["RunConfig", "load_config", "main"]

_MODEL_FAMILIES = ("power", "milne", "sinh", "lambda_gamma", "user")


@dataclass
class RunConfig:
    """Validated run configuration assembled from the INI file."""

    model: ScaleFactorModel
    grid: ChartGridSpec
    k: int
    tolerances: Tolerances
    output_path: Optional[str]
    geo_tau0: float
    geo_rho_end_fraction: float
    geo_steps: int


def _parse_number(section: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {raw!r} is not a number") from None


def _parse_int(section: str, key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key} = {raw!r} is not an integer") from None


def load_config(path: str, overrides: Optional[List[str]] = None) -> RunConfig:
    """Parse and validate a configuration file plus --set overrides."""
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"config parse failure: {exc}") from None

    for ov in overrides or []:
        if "=" not in ov or "." not in ov.split("=", 1)[0]:
            raise ConfigError(
                f"--set expects section.key=value, got {ov!r}")
        target, value = ov.split("=", 1)
        section, key = target.split(".", 1)
        section, key, value = section.strip(), key.strip(), value.strip()
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, key, value)

    if not cp.has_section("model"):
        raise ConfigError("config needs a [model] section")
    model_items = dict(cp.items("model"))
    family = model_items.pop("family", None)
    if family not in _MODEL_FAMILIES:
        raise ConfigError(
            f"[model] family must be one of {_MODEL_FAMILIES}, got {family!r}")
    params: Dict[str, object] = {}
    for key, raw in model_items.items():
        if family == "user" and key == "expression":
            params[key] = raw
        else:
            # parameter names are case-sensitive in make_model
            name = {"lambda": "Lambda", "a": "A"}.get(key, key)
            params[name] = _parse_number("model", key, raw)
    try:
        model = make_model(family, **params)
    except FermiChartError as exc:
        raise ConfigError(f"[model] rejected: {exc}") from None

    g = cp["grid"] if cp.has_section("grid") else {}
    try:
        spec = ChartGridSpec(
            tau_min=_parse_number("grid", "tau_min", g.get("tau_min", "0.5")),
            tau_max=_parse_number("grid", "tau_max", g.get("tau_max", "2.0")),
            n_tau=_parse_int("grid", "n_tau", g.get("n_tau", "5")),
            rho_fraction_max=_parse_number(
                "grid", "rho_fraction_max", g.get("rho_fraction_max", "1.5")),
            n_rho=_parse_int("grid", "n_rho", g.get("n_rho", "9")),
        )
    except FermiChartError as exc:
        raise ConfigError(f"[grid] rejected: {exc}") from None
    k = _parse_int("grid", "k", g.get("k", "0"))
    if k not in (-1, 0, 1):
        raise ConfigError(f"[grid] k must be -1, 0 or 1, got {k}")

    t = cp["tolerances"] if cp.has_section("tolerances") else {}
    base = DEFAULT_TOLERANCES
    try:
        tol = Tolerances(
            quad_abs=_parse_number("tolerances", "quad_abs",
                                   t.get("quad_abs", repr(base.quad_abs))),
            quad_rel=_parse_number("tolerances", "quad_rel",
                                   t.get("quad_rel", repr(base.quad_rel))),
            root_tol=_parse_number("tolerances", "root_tol",
                                   t.get("root_tol", repr(base.root_tol))),
            fd_step=_parse_number("tolerances", "fd_step",
                                  t.get("fd_step", repr(base.fd_step))),
            boundary_eps=_parse_number("tolerances", "boundary_eps",
                                       t.get("boundary_eps", repr(base.boundary_eps))),
        )
    except FermiChartError as exc:
        raise ConfigError(f"[tolerances] rejected: {exc}") from None

    out = cp.get("output", "path", fallback=None)

    geo = cp["geodesic"] if cp.has_section("geodesic") else {}
    tau0 = _parse_number("geodesic", "tau0", geo.get("tau0", "1.0"))
    frac = _parse_number("geodesic", "rho_end_fraction",
                         geo.get("rho_end_fraction", "0.75"))
    steps = _parse_int("geodesic", "steps", geo.get("steps", "2048"))
    if not (0.0 < frac < 1.0):
        raise ConfigError(
            f"[geodesic] rho_end_fraction must lie in (0, 1), got {frac}")
    if not tau0 > 0.0:
        raise ConfigError(f"[geodesic] tau0 must be > 0, got {tau0}")
    if steps < 8:
        raise ConfigError(f"[geodesic] steps must be >= 8, got {steps}")

    return RunConfig(model=model, grid=spec, k=k, tolerances=tol,
                     output_path=out, geo_tau0=tau0,
                     geo_rho_end_fraction=frac, geo_steps=steps)


def _fmt(v: float) -> str:
    return "%.17g" % v


def _open_out(cfg: RunConfig, out_arg: Optional[str]):
    """Output stream from --out, else config, else stdout."""
    path = out_arg or cfg.output_path
    if path is None:
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline="\n"), True


def cmd_validate(cfg: RunConfig) -> int:
    """Print regularity/extension verdicts; exit 0 iff the model is regular."""
    rep = check_regularity(cfg.model)
    lines = [f"model: {cfg.model.label()}"]
    lines.append(f"regular: {'yes' if rep.is_regular else 'no'}")
    lines.append(f"strongly regular: {'yes' if rep.is_strongly_regular else 'no'}")
    lines.append(f"deceleration bound estimate K: {rep.K_estimate:.6g}")
    lines.append(f"third-derivative bound estimate C: {rep.C_estimate:.6g}")
    lines.append(f"adot(0+) class: {rep.adot0_class}")
    lines.append("event horizon: "
                 f"{'finite' if rep.event_horizon_finite else 'infinite'}")
    lines.append("particle horizon: "
                 f"{'finite' if rep.particle_horizon_finite else 'infinite'}")
    if rep.notes:
        lines.append(f"notes: {rep.notes}")
    if not rep.is_regular:
        lines.append(f"verdict: NOT regular (witness t = {rep.witness_t:g})")
        print("\n".join(lines))
        return 1
    strong = "strongly regular" if rep.is_strongly_regular else "regular"
    if rep.adot0_class == ADOT0_INFINITE:
        lines.append(
            f"verdict: {strong}; C1 extension hypotheses: NOT satisfied "
            "(adot(0+) = infinity); continuous extension only")
    else:
        lines.append(f"verdict: {strong}; C1 extension hypotheses: satisfied")
        lines.append("full 4x4 continuous extension (k=0): hypotheses satisfied")
    print("\n".join(lines))
    return 0


def cmd_chart(cfg: RunConfig, out_arg: Optional[str]) -> int:
    """Write the metric grid CSV; exit 2 when any per-point failure occurred."""
    stream, close = _open_out(cfg, out_arg)
    failures = []
    try:
        stream.write(CSV_HEADER + "\n")
        for pt, ms in grid(cfg.model, cfg.grid, k=cfg.k, tol=cfg.tolerances):
            stream.write(csv_row(pt, ms) + "\n")
            if ms.failure is not None:
                failures.append(
                    f"tau={_fmt(pt.tau)} rho={_fmt(pt.rho)}: {ms.failure}")
    finally:
        if close:
            stream.close()
    for msg in failures:
        print(f"failure: {msg}", file=sys.stderr)
    return 2 if failures else 0


def cmd_boundary(cfg: RunConfig, out_arg: Optional[str]) -> int:
    """Write the per-tau boundary table; exit 2 on any per-row failure."""
    stream, close = _open_out(cfg, out_arg)
    failures = []
    try:
        stream.write("tau,rho_M,drho_M_dtau,rho_max,g_tautau_boundary,null_check\n")
        for tau in cfg.grid.taus():
            tau = float(tau)
            try:
                rho_m = fermi_radius(cfg.model, tau, cfg.tolerances)
                rate = fermi_radius_rate(cfg.model, tau, cfg.tolerances)
                rmax = rho_max(cfg.model, tau, cfg.tolerances)
                g_b = chart_mod.g_tautau(cfg.model, tau, rho_m,
                                         cfg.tolerances, rho_m=rho_m)
                nc = null_check_M0(cfg.model, tau, cfg.tolerances)
                stream.write(",".join(_fmt(v) for v in
                                      (tau, rho_m, rate, rmax, g_b, nc)) + "\n")
            except FermiChartError as exc:
                failures.append(f"tau={_fmt(tau)}: {exc}")
                stream.write(",".join([_fmt(tau)] + ["nan"] * 5) + "\n")
    finally:
        if close:
            stream.close()
    for msg in failures:
        print(f"failure: {msg}", file=sys.stderr)
    return 2 if failures else 0


def cmd_oracle(cfg: RunConfig, out_arg: Optional[str]) -> int:
    """Compare quadrature-lane metric values against power-law closed forms.

    Only points with t0 >= 0 (rho <= rho_M) are compared; the closed forms
    cover the interior and the boundary.  Writes a wide CSV plus trailing
    summary comment lines, and prints the two maxima on stdout when the
    table goes to a file.
    """
    if cfg.model.family != "power":
        print("oracle comparison requires [model] family = power",
              file=sys.stderr)
        return 2
    alpha = float(cfg.model.params["alpha"])
    stream, close = _open_out(cfg, out_arg)
    failures = []
    max_abs = 0.0
    max_rel = 0.0
    try:
        stream.write("tau,rho,t0,g_quad,g_closed,dg_drho_quad,dg_drho_closed,"
                     "dg_dtau_quad,dg_dtau_closed\n")
        for tau in cfg.grid.taus():
            tau = float(tau)
            rho_m = fermi_radius(cfg.model, tau, cfg.tolerances)
            for frac in cfg.grid.fractions():
                if frac > 1.0:
                    continue
                rho = float(frac) * rho_m
                try:
                    t0 = chart_mod.solve_t0(cfg.model, tau, rho,
                                            cfg.tolerances, rho_m=rho_m)
                    gq = chart_mod.g_tautau(cfg.model, tau, rho,
                                            cfg.tolerances, rho_m=rho_m)
                    drq = chart_mod.dg_drho(cfg.model, tau, rho,
                                            cfg.tolerances, rho_m=rho_m)
                    dtq = chart_mod.dg_dtau(cfg.model, tau, rho,
                                            cfg.tolerances, rho_m=rho_m)
                    gc = oracle_mod.g_tautau_closed(alpha, tau, t0)
                    drc = oracle_mod.dg_drho_closed(alpha, tau, t0)
                    dtc = oracle_mod.dg_dtau_closed(alpha, tau, t0)
                except FermiChartError as exc:
                    failures.append(f"tau={_fmt(tau)} rho={_fmt(rho)}: {exc}")
                    continue
                stream.write(",".join(_fmt(v) for v in
                                      (tau, rho, t0, gq, gc, drq, drc, dtq, dtc))
                             + "\n")
                for q, c in ((gq, gc), (drq, drc), (dtq, dtc)):
                    if math.isfinite(q) and math.isfinite(c):
                        d = abs(q - c)
                        max_abs = max(max_abs, d)
                        max_rel = max(max_rel, d / max(1.0, abs(c)))
        stream.write(f"# max_abs_deviation={_fmt(max_abs)}\n")
        stream.write(f"# max_rel_deviation={_fmt(max_rel)}\n")
    finally:
        if close:
            stream.close()
    if close:
        print(f"max abs deviation: {_fmt(max_abs)}")
        print(f"max rel deviation: {_fmt(max_rel)}")
    for msg in failures:
        print(f"failure: {msg}", file=sys.stderr)
    return 2 if failures else 0


def cmd_geodesic(cfg: RunConfig, out_arg: Optional[str]) -> int:
    """Trace the radial geodesic and write its CSV; exit 2 if unconverged."""
    rmax = rho_max(cfg.model, cfg.geo_tau0, cfg.tolerances)
    rho_end = cfg.geo_rho_end_fraction * rmax
    trace = trace_radial(cfg.model, cfg.geo_tau0, rho_end,
                         steps=cfg.geo_steps, tol=cfg.tolerances)
    stream, close = _open_out(cfg, out_arg)
    try:
        stream.write(TRACE_CSV_HEADER + "\n")
        for row in trace.csv_rows():
            stream.write(row + "\n")
    finally:
        if close:
            stream.close()
    if not trace.converged:
        print(f"failure: geodesic residual_norm={_fmt(trace.residual_norm)} "
              f"exceeds tolerance after refinement", file=sys.stderr)
        return 2
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="fermi-chart",
        description="Fermi coordinate charts of Robertson-Walker cosmologies, "
                    "extended through the big bang.")
    parser.add_argument("command",
                        choices=["validate", "chart", "boundary", "oracle",
                                 "geodesic"])
    parser.add_argument("--config", required=True,
                        help="path to the INI configuration file")
    parser.add_argument("--out", default=None,
                        help="output path (overrides [output] path; stdout "
                             "when neither is set)")
    parser.add_argument("--set", action="append", default=[], metavar="S.K=V",
                        dest="overrides",
                        help="override one config entry (section.key=value); "
                             "repeatable")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config, args.overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    try:
        if args.command == "validate":
            return cmd_validate(cfg)
        if args.command == "chart":
            return cmd_chart(cfg, args.out)
        if args.command == "boundary":
            return cmd_boundary(cfg, args.out)
        if args.command == "oracle":
            return cmd_oracle(cfg, args.out)
        return cmd_geodesic(cfg, args.out)
    except FermiChartError as exc:
        print(f"failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
