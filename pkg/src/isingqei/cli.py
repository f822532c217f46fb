"""Command line interface: profile, bound, verify, scan, selftest.

Configuration precedence is CLI flags over config-file values over built-in
defaults.  Every command echoes its fully resolved configuration; re-running
with that echo reproduces the output files byte for byte (timestamps are
printed to the console only, never written into data files).

Exit codes: 0 success, 1 numerical non-convergence, 2 invalid configuration,
3 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .energy_density import (Model, SpacetimePoint, expectation_point,
                             expectation_profile, spatial_energy_integral,
                             total_energy)
from .negative_energy import (energy_at_origin, gamma_threshold, ijk_integrals,
                              limit_ijk, optimal_beta, scan)
from .numerics import QuadratureConfig, find_root, fourier_transform, integrate_1d
from .qei import (SmearingFunction, conformal_sharp_bound, fm_identity_residual,
                  massless_limit_rhs, qei_rhs, qei_rhs_oracle_ising, smeared_lhs,
                  verify, verification_suite)
from .states import BumpProfile, FockStateSpec, TwoBumpParams, l_factor, make_two_bump

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2
EXIT_VERIFICATION = 3

_DEFAULTS: dict = {
    "model": "ising",
    "mass": 1.0,
    "alpha": 0.5,
    "beta": -0.04,
    "gamma": 5.0,
    "nparticles": "1,2,5",
    "tau": 1.0,
    "center": 0.0,
    "x": 0.0,
    "t_min": -1.0,
    "t_max": 1.0,
    "samples": 21,
    "tol": None,          # None: per-command default
    "seed": 1234,
    "suite": 0,
    "cross_check": True,
    "mu_sweep": None,
    "alphas": "0.1,0.25,0.5,1.0",
    "gammas": "0,0.5,1,1.5,2,2.5,3,3.5,4,4.5,5,5.5,6,6.5,7,7.5,8",
    "out": None,
    "format": "csv",
    "plot": None,
}

# Commands differ in how tight the default quadrature needs to be: profiles
# sample many oscillatory points, the rest are few tight integrals.
_TOL_DEFAULTS = {"profile": 1e-5, "bound": 1e-9, "verify": 1e-9,
                 "scan": 1e-9, "selftest": 1e-9}


@dataclass
class OutputRecord:
    command: str
    config: dict
    version: str
    timestamp: str
    rows: list = field(default_factory=list)
    checks: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def payload(self) -> dict:
        """Serializable content; excludes the timestamp so reruns are identical."""
        out = {"command": self.command, "version": self.version,
               "config": self.config, "results": self.rows}
        if self.checks:
            out["checks"] = self.checks
        if self.extra:
            out.update(self.extra)
        return out


class ConfigError(ValueError):
    pass


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(tok) for tok in str(text).split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated numbers, got {text!r}") from exc


def _parse_ints(text: str) -> list[int]:
    vals = _parse_floats(text)
    if any(v != int(v) for v in vals):
        raise ConfigError(f"expected integers, got {text!r}")
    return [int(v) for v in vals]


def _resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(_DEFAULTS)
    if args.config is not None:
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        try:
            loaded = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        unknown = set(loaded) - set(cfg) - {"command"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(loaded)
    for key in cfg:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if args.no_cross_check:
        cfg["cross_check"] = False
    cfg["command"] = args.command
    if cfg["tol"] is None:
        cfg["tol"] = _TOL_DEFAULTS[args.command]
    _validate(cfg)
    return cfg


def _validate(cfg: dict) -> None:
    if cfg["model"] not in ("free", "ising"):
        raise ConfigError("model must be 'free' or 'ising'")
    for key in ("mass", "tau"):
        if not (float(cfg[key]) > 0 and math.isfinite(float(cfg[key]))):
            raise ConfigError(f"{key} must be positive and finite")
    for key in ("alpha",):
        if not float(cfg[key]) > 0:
            raise ConfigError("alpha must be positive")
    for key in ("beta", "gamma", "x", "t_min", "t_max", "center", "tol"):
        if not math.isfinite(float(cfg[key])):
            raise ConfigError(f"{key} must be finite")
    if not float(cfg["tol"]) > 0:
        raise ConfigError("tol must be positive")
    if int(cfg["samples"]) < 1:
        raise ConfigError("samples must be at least 1")
    if float(cfg["t_min"]) > float(cfg["t_max"]):
        raise ConfigError("t_min must not exceed t_max")
    if any(n < 1 for n in _parse_ints(cfg["nparticles"])):
        raise ConfigError("particle numbers must be >= 1")
    if cfg["format"] not in ("csv", "json"):
        raise ConfigError("format must be 'csv' or 'json'")


def _quadrature(cfg: dict) -> QuadratureConfig:
    rel = float(cfg["tol"])
    return QuadratureConfig(abs_tol=min(1e-12, 1e-4 * rel) if rel < 1e-8
                            else 1e-4 * rel, rel_tol=rel)


def _model(cfg: dict) -> Model:
    return (Model.ising(float(cfg["mass"])) if cfg["model"] == "ising"
            else Model.free_boson(float(cfg["mass"])))


def _smearing(cfg: dict) -> SmearingFunction:
    return SmearingFunction.bump(tau=float(cfg["tau"]), center=float(cfg["center"]))


def _record(cfg: dict) -> OutputRecord:
    return OutputRecord(command=cfg["command"], config=dict(cfg),
                        version=__version__,
                        timestamp=time.strftime("%Y-%m-%dT%H:%M:%S"))


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------

def cmd_profile(cfg: dict) -> tuple[OutputRecord, int]:
    """Energy density per particle along the time axis."""
    record = _record(cfg)
    quad = _quadrature(cfg)
    model = _model(cfg)
    packet = make_two_bump(
        TwoBumpParams(float(cfg["alpha"]), float(cfg["beta"]), float(cfg["gamma"])),
        BumpProfile.gaussian(), quad)
    ts = np.linspace(float(cfg["t_min"]), float(cfg["t_max"]), int(cfg["samples"]))
    line = [SpacetimePoint(float(t), float(cfg["x"])) for t in ts]
    n_list = _parse_ints(cfg["nparticles"])
    ok = True
    for n in n_list:
        profile = expectation_profile(model, FockStateSpec.product(n, packet),
                                      line, quad)
        for point, val in profile.points:
            record.rows.append({
                "n": n, "t": point.t, "rho": val.value / n,
                "rho_error": val.error / n, "imag_residual": val.imag_residual,
                "converged": val.converged})
            ok = ok and val.converged
    return record, EXIT_OK if ok else EXIT_NUMERICAL


def cmd_bound(cfg: dict) -> tuple[OutputRecord, int]:
    """The QEI lower bound, optionally swept over the mass."""
    record = _record(cfg)
    quad = _quadrature(cfg)
    g = _smearing(cfg)
    masses = (_parse_floats(cfg["mu_sweep"]) if cfg["mu_sweep"]
              else [float(cfg["mass"])])
    massless = massless_limit_rhs(g, quad)
    kind = cfg["model"]
    ok = True
    for mu in masses:
        if mu <= 0:
            raise ConfigError("masses in the sweep must be positive")
        model = Model.ising(mu) if kind == "ising" else Model.free_boson(mu)
        res = qei_rhs(model, g, quad)
        ok = ok and res.converged
        record.rows.append({
            "model": kind, "mu": mu, "rhs": res.value, "rhs_error": res.error,
            "massless_limit": massless,
            "ratio_to_massless": res.value / massless if massless else float("nan"),
            "converged": res.converged})
    return record, EXIT_OK if ok else EXIT_NUMERICAL


def _report_row(report) -> dict:
    return {"state": report.state_label, "model": report.model_label,
            "g": report.g_label, "lhs": report.lhs, "lhs_error": report.lhs_error,
            "rhs": report.rhs, "rhs_error": report.rhs_error,
            "margin": report.margin, "passed": report.passed}


def cmd_verify(cfg: dict) -> tuple[OutputRecord, int]:
    """QEI reports for the requested states; failing any is exit code 3."""
    record = _record(cfg)
    quad = _quadrature(cfg)
    model = _model(cfg)
    g = _smearing(cfg)
    x = float(cfg["x"])
    cross = bool(cfg["cross_check"])
    states = [FockStateSpec.vacuum()]
    packet = make_two_bump(
        TwoBumpParams(float(cfg["alpha"]), float(cfg["beta"]), float(cfg["gamma"])),
        BumpProfile.gaussian(), quad)
    states += [FockStateSpec.product(n, packet)
               for n in _parse_ints(cfg["nparticles"])]
    if int(cfg["suite"]) > 0:
        states += verification_suite(model, int(cfg["suite"]),
                                     int(cfg["seed"]), quad)
    rhs = qei_rhs(model, g, quad)
    all_passed = True
    for state in states:
        report = verify(model, state, g, x, quad, cross_check=cross,
                        rhs_result=rhs)
        record.rows.append(_report_row(report))
        all_passed = all_passed and report.passed
    return record, EXIT_OK if all_passed else EXIT_VERIFICATION


def cmd_scan(cfg: dict) -> tuple[OutputRecord, int]:
    """Negativity scan over (alpha, gamma); the mass prefactor enters here."""
    record = _record(cfg)
    quad = _quadrature(cfg)
    prefactor = float(cfg["mass"]) ** 2 / (2.0 * math.pi)
    result = scan(_parse_floats(cfg["alphas"]), _parse_floats(cfg["gammas"]),
                  BumpProfile.gaussian(), quad)
    ok = True
    for row in result.rows:
        ok = ok and row.ok
        record.rows.append({
            "alpha": row.alpha, "gamma": row.gamma, "beta_opt": row.beta_opt,
            "min_value": prefactor * row.min_value, "negative": row.negative,
            "min_value_error": prefactor * row.error, "ok": row.ok})
    record.extra["gamma_threshold"] = result.gamma_star
    return record, EXIT_OK if ok else EXIT_NUMERICAL


def cmd_selftest(cfg: dict) -> tuple[OutputRecord, int]:
    """Cross-checks, limits and invariants in one run; any failure is exit 3."""
    record = _record(cfg)
    quad = _quadrature(cfg)
    checks = record.checks
    rng = np.random.default_rng(int(cfg["seed"]))
    g = _smearing(cfg)
    prof = BumpProfile.gaussian()
    ising, free = Model.ising(), Model.free_boson()

    def check(name: str, passed: bool, detail: str) -> None:
        checks.append({"check": name, "passed": bool(passed), "detail": detail})

    res = integrate_1d(lambda th: np.exp(-th * th), -7.0, 7.0, quad)
    check("quadrature_gaussian",
          abs(res.value / math.sqrt(math.pi) - 1.0) < 1e-10,
          f"value={res.value!r}")

    w = 3.1
    ft_p, ft_m = fourier_transform(g, w, quad), fourier_transform(g, -w, quad)
    check("fourier_conjugate_symmetry", abs(ft_p - np.conj(ft_m)) < 1e-10,
          f"|diff|={abs(ft_p - np.conj(ft_m)):.2e}")

    root = find_root(lambda c: c ** 3 - 5 * c ** 2 + 3 * c + 1, (3.0, 6.0))
    check("cubic_root", abs(root - (2.0 + math.sqrt(5.0))) < 1e-10, f"root={root}")

    gstar = gamma_threshold()
    resid = abs((1 + math.cosh(gstar)) ** 3 - 8 * math.cosh(gstar) ** 2)
    check("gamma_threshold", abs(gstar - math.acosh(2 + math.sqrt(5))) < 1e-9
          and resid < 1e-9, f"gamma*={gstar}, residual={resid:.1e}")

    worst = 0.0
    for gm in (0.0, 2.0, 5.0):
        num, lim = ijk_integrals(1e-3, gm, prof, quad), limit_ijk(gm)
        worst = max(worst, abs(num.i_val / lim.i_val - 1),
                    abs(num.j_val / lim.j_val - 1), abs(num.k_val / lim.k_val - 1))
    check("ijk_delta_limit", worst < 1e-4, f"max rel dev={worst:.2e}")

    packet = make_two_bump(TwoBumpParams(0.5, -0.04, 5.0), prof, quad)
    origin = expectation_point(ising, FockStateSpec.product(1, packet),
                               SpacetimePoint(0.0, 0.0), quad)
    quadratic = energy_at_origin(0.5, -0.04, 5.0, prof, quad) / (2.0 * math.pi)
    check("origin_energy_two_paths",
          abs(origin.value - quadratic) < 1e-7 * (1 + abs(origin.value))
          and origin.value < 0,
          f"direct={origin.value:.10f}, quadratic={quadratic:.10f}")

    pos_ok = True
    for t in (-1.0, 0.0, 0.7):
        val = expectation_point(free, FockStateSpec.product(1, packet),
                                SpacetimePoint(t, 0.3), quad)
        pos_ok = pos_ok and val.value >= -val.error
    check("free_positivity", pos_ok, "one-particle free density nonnegative")

    point = SpacetimePoint(0.4, 0.0)
    v1 = expectation_point(free, FockStateSpec.product(1, packet), point, quad)
    v3 = expectation_point(free, FockStateSpec.product(3, packet), point, quad)
    check("free_additivity", abs(v3.value - 3 * v1.value) <= v3.error + 3 * v1.error,
          f"|n=3 - 3(n=1)|={abs(v3.value - 3 * v1.value):.2e}")

    i1 = expectation_point(ising, FockStateSpec.product(1, packet),
                           SpacetimePoint(0.0, 0.0), quad)
    i2 = expectation_point(ising, FockStateSpec.product(2, packet),
                           SpacetimePoint(0.0, 0.0), quad)
    gap = abs(i2.value - 2 * i1.value)
    check("ising_nonadditivity", gap > 10 * (i2.error + 2 * i1.error),
          f"gap={gap:.4f}")

    rhs_rel = 0.0
    for mu in (0.1, 1.0, 10.0):
        bound = qei_rhs(Model.ising(mu), g, quad)
        oracle = qei_rhs_oracle_ising(g, quad, mu=mu)
        rhs_rel = max(rhs_rel, abs(oracle.value / bound.value - 1.0))
    check("bound_oracle_agreement", rhs_rel < 1e-6, f"max rel diff={rhs_rel:.2e}")

    massless = massless_limit_rhs(g, quad)
    dev = max(abs(qei_rhs(Model.ising(1e-3), g, quad).value / massless - 1.0),
              abs(qei_rhs(Model.free_boson(1e-3), g, quad).value / massless - 1.0))
    check("massless_limit", dev < 0.01, f"max rel dev={dev:.2e}")

    r1 = massless / conformal_sharp_bound(1.0, g, quad)
    r2 = massless / conformal_sharp_bound(0.5, g, quad)
    check("conformal_ratios", abs(r1 - 1.5) < 0.015 and abs(r2 - 3.0) < 0.03,
          f"ratios={r1:.6f}, {r2:.6f}")

    worst_fm = 0.0
    for _ in range(5):
        w1, w2 = rng.uniform(-5, 5, 2)
        resid = fm_identity_residual(g, w1, w2, quad)
        lhs_mag = abs((w1 + w2) * fourier_transform(g.squared(), w2 - w1, quad))
        worst_fm = max(worst_fm, resid / (1e-6 * (1.0 + lhs_mag)))
    check("fewster_mistry_identity", worst_fm < 1.0,
          f"worst residual/tolerance={worst_fm:.2e}")

    sm = smeared_lhs(ising, FockStateSpec.product(1, packet), g, 0.0, quad,
                     cross_check=True)
    check("smeared_routes_agree", sm.pointwise_value is not None,
          f"rapidity={sm.value:.8f}, pointwise={sm.pointwise_value:.8f}")

    for label, state in (("vacuum", FockStateSpec.vacuum()),
                         ("fig1_n1", FockStateSpec.product(1, packet))):
        report = verify(ising, state, g, 0.0, quad, cross_check=False)
        check(f"qei_{label}", report.passed,
              f"margin={report.margin:.6f} +- {report.lhs_error + report.rhs_error:.1e}")

    small = make_two_bump(TwoBumpParams(0.8, 0.5, 1.0), prof, quad)
    ok_energy = True
    detail = []
    for model in (free, ising):
        st = FockStateSpec.product(1, small)
        window = spatial_energy_integral(model, st, quad)
        te = total_energy(model, st, quad)
        rel = abs(window.value / te - 1.0)
        detail.append(f"{model.kind.value}:{rel:.1e}")
        ok_energy = ok_energy and rel < 1e-4
    check("spatial_energy_integral", ok_energy, " ".join(detail))

    lsym = abs(l_factor(packet, 0.3, 2.2) - l_factor(packet, 2.2, 0.3))
    check("l_factor_symmetry", lsym == 0.0, f"|asym|={lsym:.1e}")

    passed = all(c["passed"] for c in checks)
    return record, EXIT_OK if passed else EXIT_VERIFICATION


# --------------------------------------------------------------------------
# Output
# --------------------------------------------------------------------------

_CSV_COLUMNS = {
    "profile": ["n", "t", "rho", "rho_error", "imag_residual", "converged"],
    "bound": ["model", "mu", "rhs", "rhs_error", "massless_limit",
              "ratio_to_massless", "converged"],
    "verify": ["state", "model", "g", "lhs", "lhs_error", "rhs", "rhs_error",
               "margin", "passed"],
    "scan": ["alpha", "gamma", "beta_opt", "min_value", "negative",
             "min_value_error", "ok"],
    "selftest": ["check", "passed", "detail"],
}


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(record: OutputRecord, stream) -> None:
    columns = list(_CSV_COLUMNS[record.command])
    rows = record.rows if record.command != "selftest" else record.checks
    if record.command == "profile":
        n_values = {r["n"] for r in rows}
        if len(n_values) == 1:
            columns = [c for c in columns if c != "n"]
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_format_cell(row[c]) for c in columns])


def _write_output(record: OutputRecord, cfg: dict) -> None:
    out = cfg.get("out")
    if cfg["format"] == "json":
        text = json.dumps(record.payload(), indent=2, sort_keys=True,
                          default=str) + "\n"
        if out:
            Path(out).write_text(text)
        else:
            sys.stdout.write(text)
    else:
        if out:
            with open(out, "w", newline="") as fh:
                _write_csv(record, fh)
        else:
            _write_csv(record, sys.stdout)
    if out:
        print(f"# wrote {out}")
    echo = dict(record.config)
    print(f"# config: {json.dumps(echo, sort_keys=True, default=str)}")
    print(f"# version {record.version}, finished {record.timestamp}")


def _maybe_plot(record: OutputRecord, cfg: dict) -> None:
    target = cfg.get("plot")
    if not target:
        return
    if target is True or target == "auto":
        base = Path(cfg["out"]).with_suffix(".png") if cfg.get("out") \
            else Path(f"isingqei_{record.command}.png")
    else:
        base = Path(target)
    from . import figures
    if record.command == "profile":
        figures.profile_figure(record.rows, str(base))
    elif record.command == "bound":
        figures.bound_figure(record.rows, str(base))
    elif record.command == "scan":
        figures.scan_figure(record.rows, record.extra["gamma_threshold"], str(base))
    elif record.command == "verify":
        figures.verify_figure(record.rows, str(base))
    else:
        return
    print(f"# wrote {base}")


# --------------------------------------------------------------------------
# Entry point
# --------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isingqei",
        description="Energy densities and quantum energy inequality bounds "
                    "for the 1+1d free scalar and massive Ising models.")
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "profile": "energy density per particle along the time axis",
        "bound": "QEI lower bound for a smearing function",
        "verify": "check the inequality on explicit states",
        "scan": "negativity scan of the two-bump family",
        "selftest": "run the internal cross-check suite",
    }
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--model", choices=["free", "ising"])
        p.add_argument("--mass", type=float)
        p.add_argument("--alpha", type=float)
        p.add_argument("--beta", type=float)
        p.add_argument("--gamma", type=float)
        p.add_argument("--nparticles", type=str,
                       help="comma-separated particle numbers, e.g. 1,2,5")
        p.add_argument("--tau", type=float)
        p.add_argument("--center", type=float)
        p.add_argument("--x", type=float)
        p.add_argument("--t-min", dest="t_min", type=float)
        p.add_argument("--t-max", dest="t_max", type=float)
        p.add_argument("--samples", type=int)
        p.add_argument("--tol", type=float, help="relative quadrature tolerance")
        p.add_argument("--seed", type=int)
        p.add_argument("--suite", type=int,
                       help="number of extra randomized states for verify")
        p.add_argument("--mu-sweep", dest="mu_sweep", type=str)
        p.add_argument("--alphas", type=str)
        p.add_argument("--gammas", type=str)
        p.add_argument("--out", type=str)
        p.add_argument("--format", choices=["csv", "json"])
        p.add_argument("--config", type=str)
        p.add_argument("--plot", nargs="?", const=True, default=None,
                       help="render a figure (optionally to the given path)")
        p.add_argument("--no-cross-check", action="store_true",
                       help="skip the pointwise route of the smeared energy")
    return parser


_HANDLERS = {"profile": cmd_profile, "bound": cmd_bound, "verify": cmd_verify,
             "scan": cmd_scan, "selftest": cmd_selftest}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _resolve_config(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        record, code = _HANDLERS[args.command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError,) as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RuntimeError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _write_output(record, cfg)
    _maybe_plot(record, cfg)
    if record.command == "selftest":
        for c in record.checks:
            print(f"{'PASS' if c['passed'] else 'FAIL'} {c['check']}: {c['detail']}")
    return code


if __name__ == "__main__":
    sys.exit(main())
