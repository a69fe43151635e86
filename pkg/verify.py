#!/usr/bin/env python3
"""
Verification driver: runs the identity suites over a catalog geometry and writes reports.

Usage:
    python verify.py --geometry hyperbolic --suite flat-oracle
    python verify.py --suite all --samples 1 --out reports/smoke.json
    python verify.py --config runs/ci.env --tol ricci=1e-3
"""

import argparse
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from dotenv import dotenv_values, load_dotenv

from base_geometry import ChartedGeometry, asd_einstein_check
from derivatives import DERIVATIVE_MODES
from errors import InvalidConfig, TwistorError, UnknownSuite
from flat_oracle import flat_oracle_check
from geometry_catalog import compactified_partner, create_geometry
from projective_twistor import cheng_yau_check, ke_metric_check
from reports import DEFAULT_SEED, REPORT_FORMATS, VerificationReport, emit_report, print_summary
from spin_bundle import spin_connection_check
from twistor_cr import twistor_cr_check
from twistor_total_space import (
    ambient_family_check,
    curvature_formula_check,
    hyperkahler_check,
    integrability_check,
    kahler_potential_check,
)

load_dotenv()

# Suites the driver can run, in the order "all" runs them
SUITES = [
    {"name": "asd-einstein", "needs": "base",
     "description": "Curvature spinors: Psi~ = Phi = 0 and constant Lambda"},
    {"name": "spin-connection", "needs": "base",
     "description": "Spin connection, S' curvature and the conformal shift"},
    {"name": "integrability", "needs": "base",
     "description": "Nijenhuis tensors of I and J, quaternion relations, tau~ and omega~"},
    {"name": "kahler-potential", "needs": "base",
     "description": "i ddbar |pi|^2 = omega~_J and compatibility of g~"},
    {"name": "hyperkahler", "needs": "base",
     "description": "Parallel J, K and omega~; Ricci-flatness, Hessians and signature of g~"},
    {"name": "curvature-formula", "needs": "base",
     "description": "Curvature of g~ against Lambda |pi|^2 W-"},
    {"name": "ke-metric", "needs": "base",
     "description": "Kaehler-Einstein metric on the projective twistor space"},
    {"name": "cheng-yau", "needs": "compactified",
     "description": "Complete Kaehler-Einstein metric from log |r~|"},
    {"name": "ambient-family", "needs": "compactified",
     "description": "Ambient metrics g~[r] across r = 0, dilations and homogeneity"},
    {"name": "twistor-cr", "needs": "boundary",
     "description": "Twistor CR structure over the boundary 3-manifold and the CR embedding"},
    {"name": "flat-oracle", "needs": "compactified",
     "description": "Closed-form flat model against the ambient pipeline"},
]
SUITE_NAMES = [suite["name"] for suite in SUITES]

CONFIG_KEYS = {"geometry", "suites", "samples", "seed", "deriv", "format", "out", "quiet"}


@dataclass
class RunConfig:
    geometry: Optional[str] = None
    suites: List[str] = field(default_factory=lambda: ["all"])
    samples: int = 8
    seed: int = DEFAULT_SEED
    tolerances: Dict[str, float] = field(default_factory=dict)
    deriv: str = "dual"
    fmt: str = "json"
    out: Optional[str] = None
    quiet: bool = False

    def validate(self) -> "RunConfig":
        unknown = [name for name in self.suites if name != "all" and name not in SUITE_NAMES]
        if unknown:
            raise UnknownSuite(
                f"Unknown suite: '{unknown[0]}'. Must be one of: all, {', '.join(SUITE_NAMES)}."
            )
        if self.samples < 1:
            raise InvalidConfig(f"samples must be at least 1, got {self.samples}.")
        if self.deriv not in DERIVATIVE_MODES:
            raise InvalidConfig(f"deriv must be one of {', '.join(DERIVATIVE_MODES)}, got '{self.deriv}'.")
        if self.fmt not in REPORT_FORMATS:
            raise InvalidConfig(f"format must be one of {', '.join(REPORT_FORMATS)}, got '{self.fmt}'.")
        for name, value in self.tolerances.items():
            if not value > 0:
                raise InvalidConfig(f"Tolerance for '{name}' must be positive, got {value}.")
        return self

    @property
    def suite_list(self) -> List[str]:
        return SUITE_NAMES if "all" in self.suites else list(dict.fromkeys(self.suites))


def _parse_int(key: str, value: str) -> int:
    try:
        return int(value)
    except (TypeError, ValueError):
        raise InvalidConfig(f"{key} must be an integer, got '{value}'.") from None


def _parse_tolerance(entry: str) -> Tuple[str, float]:
    name, sep, value = entry.partition("=")
    if not sep or not name.strip():
        raise InvalidConfig(f"Tolerance override must look like name=value, got '{entry}'.")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise InvalidConfig(f"Tolerance for '{name.strip()}' is not a number: '{value}'.") from None


def load_config(path: str) -> Dict[str, object]:
    """
    Read a flat KEY=VALUE run file.

    Keys: geometry, suites (comma separated), samples, seed, deriv, format, out, quiet and
    tol.<check> entries.

    Raises:
        InvalidConfig: If the file is missing or has an unknown key
    """
    if not os.path.exists(path):
        raise InvalidConfig(f"Config file not found: {path}")
    values: Dict[str, object] = {}
    tolerances: Dict[str, float] = {}
    for key, value in dotenv_values(path).items():
        key = key.strip().lower()
        if key.startswith("tol."):
            name, tolerance = _parse_tolerance(f"{key[4:]}={value}")
            tolerances[name] = tolerance
        elif key in CONFIG_KEYS:
            values[key] = value
        else:
            raise InvalidConfig(
                f"Unknown config key '{key}' in {path}.\n"
                f"Allowed keys: {', '.join(sorted(CONFIG_KEYS))} and tol.<check>."
            )
    values["tolerances"] = tolerances
    return values


def build_config(args: argparse.Namespace) -> RunConfig:
    """Environment defaults, then the config file, then command-line flags."""
    config = RunConfig(
        geometry=os.environ.get("TWISTOR_GEOMETRY"),
        samples=_parse_int("TWISTOR_SAMPLES", os.environ.get("TWISTOR_SAMPLES", "8")),
        seed=_parse_int("TWISTOR_SEED", os.environ.get("TWISTOR_SEED", str(DEFAULT_SEED))),
        deriv=os.environ.get("TWISTOR_DERIV_MODE", "dual"),
    )
    if args.config:
        values = load_config(args.config)
        config.tolerances.update(values.pop("tolerances"))
        if "geometry" in values:
            config.geometry = values["geometry"]
        if "suites" in values:
            config.suites = [name.strip() for name in str(values["suites"]).split(",") if name.strip()]
        if "samples" in values:
            config.samples = _parse_int("samples", values["samples"])
        if "seed" in values:
            config.seed = _parse_int("seed", values["seed"])
        if "deriv" in values:
            config.deriv = values["deriv"]
        if "format" in values:
            config.fmt = values["format"]
        if "out" in values:
            config.out = values["out"]
        if "quiet" in values:
            config.quiet = str(values["quiet"]).strip().lower() in ("1", "true", "yes")

    if args.geometry:
        config.geometry = args.geometry
    if args.suite:
        config.suites = args.suite
    if args.samples is not None:
        config.samples = args.samples
    if args.seed is not None:
        config.seed = args.seed
    if args.deriv:
        config.deriv = args.deriv
    if args.format:
        config.fmt = args.format
    if args.out:
        config.out = args.out
    if args.quiet:
        config.quiet = True
    for entry in args.tol or []:
        name, value = _parse_tolerance(entry)
        config.tolerances[name] = value
    return config.validate()


def execute_suite(name: str, geom: ChartedGeometry, config: RunConfig) -> VerificationReport:
    """
    Run one suite on a geometry and return its report.

    Suites over a compactified chart use the geometry's compactified partner; suites
    that need a 4-manifold are skipped on a 3-manifold and vice versa.
    """
    options = dict(samples=config.samples, seed=config.seed, mode=config.deriv, tolerances=config.tolerances)
    suite = next(entry for entry in SUITES if entry["name"] == name)

    if geom.dimension == 3 and name != "twistor-cr":
        return VerificationReport(name, geom.name, seed=config.seed, deriv=config.deriv).skip(
            "needs a 4-dimensional geometry")
    partner = compactified_partner(geom) if suite["needs"] in ("compactified", "boundary") else None
    if suite["needs"] == "compactified" and partner is None:
        return VerificationReport(name, geom.name, seed=config.seed, deriv=config.deriv).skip(
            "no compactified model is known for this geometry")

    if name == "asd-einstein":
        return asd_einstein_check(geom, **options)
    elif name == "spin-connection":
        return spin_connection_check(geom, **options)
    elif name == "integrability":
        return integrability_check(geom, **options)
    elif name == "kahler-potential":
        return kahler_potential_check(geom, **options)
    elif name == "hyperkahler":
        return hyperkahler_check(geom, **options)
    elif name == "curvature-formula":
        return curvature_formula_check(geom, **options)
    elif name == "ke-metric":
        return ke_metric_check(geom, **options)
    elif name == "cheng-yau":
        return cheng_yau_check(*partner, **options)
    elif name == "ambient-family":
        return ambient_family_check(*partner, **options)
    elif name == "twistor-cr":
        if geom.dimension == 3:
            return twistor_cr_check(h3=geom, **options)
        if partner is None:
            return VerificationReport(name, geom.name, seed=config.seed, deriv=config.deriv).skip(
                "no boundary 3-manifold is known for this geometry")
        geomX, r = partner
        return twistor_cr_check(geomX=geomX, r=r, **options)
    elif name == "flat-oracle":
        return flat_oracle_check(*partner, **options)

    raise UnknownSuite(f"Unknown suite: '{name}'.")


def run(config: RunConfig) -> Tuple[List[VerificationReport], int]:
    """
    Execute the configured suites, write the reports and print the summary.

    Returns:
        (reports, exit status): 0 if every executed check passes, 1 otherwise
    """
    geom = create_geometry(config.geometry)
    reports = []
    for name in config.suite_list:
        print(f"\n{'='*60}")
        print(f"[Verify] Running suite {name} on {geom.name}")
        print(f"{'='*60}")
        start = time.perf_counter()
        report = execute_suite(name, geom, config)
        report.elapsed_ms = 1000.0 * (time.perf_counter() - start)
        reports.append(report)
        if report.skipped:
            print(f"  Skipped: {report.skipped}")
        elif not config.quiet:
            for record in report.checks:
                mark = "✅" if record.passed else "❌"
                print(f"  {mark} {record.check}: {record.max_residual:.3e} (tol {record.tolerance:.1e})")

    for path in emit_report(reports, config.fmt, config.out):
        print(f"[Verify] Report written to {path}")
    print_summary(reports, quiet=config.quiet)
    return reports, 0 if all(report.passed for report in reports) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="verify",
        description="Verify the twistor-space identities numerically on a catalog geometry.",
    )
    parser.add_argument("--geometry", help="catalog geometry (default: $TWISTOR_GEOMETRY or hyperbolic)")
    parser.add_argument("--suite", action="append", help=f"suite to run, repeatable: all, {', '.join(SUITE_NAMES)}")
    parser.add_argument("--samples", type=int, help="sample points per suite")
    parser.add_argument("--seed", type=int, help="seed for the sample points")
    parser.add_argument("--tol", action="append", metavar="NAME=VALUE", help="tolerance override for one check")
    parser.add_argument("--deriv", choices=DERIVATIVE_MODES, help="derivative propagation mode")
    parser.add_argument("--out", help="report file (default: $TWISTOR_OUTPUT_DIR/verify.<format>)")
    parser.add_argument("--format", choices=REPORT_FORMATS, help="report format")
    parser.add_argument("--config", help="KEY=VALUE run file")
    parser.add_argument("--quiet", action="store_true", help="only print the summary table")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = build_config(args)
        _, status = run(config)
    except TwistorError as exc:
        message = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
        print(f"[Verify] {type(exc).__name__}: {message}", file=sys.stderr)
        return 2
    return status


if __name__ == "__main__":
    sys.exit(main())
