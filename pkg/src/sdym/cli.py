"""Command-line verification suites.

Each subcommand runs a group of checks over the fixture backgrounds and writes
one JSON object per check (JSON Lines, sorted keys, sorted by check id).  The
exit status is 0 iff every check passed, 2 on a configuration error.

    sdym-report check-sdym --fixtures fixtures.json
    sdym-report run-suite --suite all --out report.jsonl
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import gauge, hidden, lie, manifest, riemann_hilbert as rh, twistor

SUITES = ("sdym", "manifest", "hidden", "rh")
TOLERANCES = {"exact": 1e-10, "symmetry": 1e-8, "fd": 1e-6}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    n: int = 2
    jet_order: int = 6
    lambda_order: int = hidden.DEFAULT_LAMBDA_ORDER
    mode_window: int = rh.DEFAULT_BUDGET
    samples: int = rh.DEFAULT_SAMPLES
    probes: int = 100
    tolerances: tuple = tuple(sorted(TOLERANCES.items()))
    tolerance_scale: float = 1.0
    seed: int = 0
    alpha: float = twistor.DEFAULT_ALPHA
    fixtures: str | None = None

    def validate(self):
        if self.n != 2:
            raise ConfigError("the instanton fixtures are su(2); n must be 2")
        if self.jet_order < 2 or self.lambda_order < 1:
            raise ConfigError("jet_order must be >= 2 and lambda_order >= 1")
        budget = hidden.OrderBudget(self.jet_order, self.lambda_order)
        if budget.exact_order < 3:
            raise ConfigError(
                f"effective order min(jet_order + 1, lambda_order) = {budget.exact_order} < 3: "
                "hidden-symmetry checks would have nothing left to verify")
        if self.samples & (self.samples - 1) or self.samples < 4 * self.mode_window:
            raise ConfigError("samples must be a power of two and >= 4 * mode_window")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        if self.tolerance_scale < 0 or any(v < 0 for _, v in self.tolerances):
            raise ConfigError("tolerances must be nonnegative")
        if self.probes < 1:
            raise ConfigError("probes must be positive")
        return self

    def tol(self, kind):
        return dict(self.tolerances)[kind] * self.tolerance_scale

    def as_dict(self):
        d = dataclasses.asdict(self)
        d["tolerances"] = dict(self.tolerances)
        return d


def _digest(payload):
    blob = json.dumps(payload, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


class Recorder:
    """Collects check reports for one task."""

    def __init__(self, config, context):
        self.config = config
        self.context = context
        self.reports = []

    def add(self, check, residual, kind, **inputs):
        tol = self.config.tol(kind)
        residual = float(residual)
        payload = {"check": check, "config": self.config.as_dict(), "context": self.context, "inputs": inputs}
        self.reports.append({
            "check": check,
            "inputs_digest": _digest(payload),
            "residual": residual,
            "tolerance": tol,
            "pass": bool(residual <= tol),
        })


def _fixture_id(i, rec):
    return f"{i:02d}-{rec['family']}"


def load_records(config):
    if config.fixtures is None:
        return [dict(r) for r in gauge.DEFAULT_FIXTURES]
    return gauge.load_fixtures(config.fixtures)


# -- suites -------------------------------------------------------------------------

def suite_sdym(config, records):
    tasks = []
    for i, rec in enumerate(records):
        def run(i=i, rec=rec):
            fid = _fixture_id(i, rec)
            r = Recorder(config, rec)
            A = gauge.potential_from_record(rec)
            bp = gauge.default_base_point(A)
            probes = gauge.probe_points(bp, config.probes, seed=config.seed, avoid=gauge.poles_of(A))
            r.add(f"sdym/{fid}/probes", gauge.sdym_residual(A, probes), "exact", probes=config.probes)
            r.add(f"sdym/{fid}/jets", gauge.sdym_residual(A.to_jets(bp, config.jet_order)), "exact")
            return r.reports
        tasks.append(run)
    return tasks


def _jet_background(config, rec):
    A = gauge.potential_from_record(rec)
    return A.to_jets(gauge.default_base_point(A), config.jet_order)


def suite_manifest(config, records):
    def algebra():
        r = Recorder(config, "conformal algebra")
        gens = manifest.all_generators()
        r.add("manifest/closure", len(manifest.closure_defects(gens)), "exact")
        nonzero = sum(
            any(c != 0 for c in manifest.vf_bracket(manifest.conformal_generator("X", a),
                                                    manifest.conformal_generator("Y", b)))
            for a in (1, 2, 3) for b in (1, 2, 3))
        r.add("manifest/commuting-so3", nonzero, "exact")
        return r.reports

    tasks = [algebra]
    for i, rec in enumerate(records):
        def run(i=i, rec=rec):
            fid = _fixture_id(i, rec)
            r = Recorder(config, rec)
            A = _jet_background(config, rec)
            for N in manifest.all_generators():
                dA = manifest.conformal_variation(A, N)
                r.add(f"manifest/{fid}/conformal/{N}", gauge.linearized_sdym_residual(A, dA), "exact")
            rng = np.random.default_rng(config.seed)
            for k in range(5):
                theta = manifest.random_gauge_parameter(A.space, A.n, rng)
                dA = manifest.gauge_variation(A, theta)
                r.add(f"manifest/{fid}/gauge/{k}", gauge.linearized_sdym_residual(A, dA), "exact")
            gens = manifest.all_generators()
            for k in range(5):
                a, b = rng.choice(len(gens), size=2, replace=False)
                N, M = gens[a], gens[b]
                lhs = manifest.composed_conformal_variation(A, N, M)
                rhs = manifest.composed_conformal_variation(A, M, N)
                br = manifest.conformal_variation(A, manifest.vf_bracket(N, M))
                res = max((x - y - z).norm() for x, y, z in zip(lhs.jets, rhs.jets, br.jets))
                r.add(f"manifest/{fid}/composition/{N}-{M}", res, "exact")
            return r.reports
        tasks.append(run)
    return tasks


def _gauge_generators():
    T = lie.su2_basis()
    return [(f"lam^{n}T{a + 1}", hidden.GaugeTypeGenerator.from_modes({n: T[a]}))
            for n in (0, 1, 2) for a in range(3)]


def _diffeo_generators():
    out = []
    for name, idx in (("P", 1), ("B", None), ("X", 1)):
        lift = twistor.lift_conformal(manifest.conformal_generator(name, idx))
        for n in (0, 1):
            out.append((f"lam^-{n}{lift.label}", lift.times_lambda_power(-n)))
    return out


def algebra_cases():
    """The ten (phi1, phi2) / (eta, phi) cases of the algebra checks."""
    T = lie.su2_basis()
    G = hidden.GaugeTypeGenerator
    w_gen = G({(0, 1, 0): T[0], (1, 0, 1): T[2]})
    brackets = [
        ("lamT1,T2", G.from_modes({1: T[0]}), G.from_modes({0: T[1]})),
        ("T1,T1", G.from_modes({0: T[0]}), G.from_modes({0: T[0]})),
        ("lam^2T3,lam^-1T1", G.from_modes({2: T[2]}), G.from_modes({-1: T[0]})),
        ("w,T2", w_gen, G.from_modes({0: T[1]})),
        ("w,lamT3", w_gen, G.from_modes({1: T[2]})),
    ]
    derivations = []
    for name, idx in (("P", 1), ("X", 1), ("Y", 2), ("B", None), ("K", 3)):
        lift = twistor.lift_conformal(manifest.conformal_generator(name, idx))
        phi = G.from_modes({1: T[0]}) if name != "Y" else w_gen
        derivations.append((f"{lift.label}", lift, phi))
    return brackets, derivations


def suite_hidden(config, records):
    def lifts():
        r = Recorder(config, "lifts")
        for N in manifest.all_generators():
            r.add(f"hidden/lift/{N}", twistor.bracket_residual(twistor.lift_conformal(N)), "exact")
        return r.reports

    tasks = [lifts]
    for i, rec in enumerate(records):
        def run(i=i, rec=rec):
            fid = _fixture_id(i, rec)
            r = Recorder(config, rec)
            A = _jet_background(config, rec)
            psi = hidden.lax_recursion(A, config.lambda_order)
            cover = twistor.CoverRegion(config.alpha)
            lams = cover.samples()
            r.add(f"hidden/{fid}/linear-system", hidden.verify_linear_system(A, psi, lams), "exact")
            B = hidden.potentials_from_psi(psi)
            r.add(f"hidden/{fid}/ward-roundtrip", max((a - b).norm() for a, b in zip(A.jets, B.jets)), "exact")
            F = hidden.transition_matrix(psi)
            q = psi.budget.exact_order - 1
            r.add(f"hidden/{fid}/holomorphy", twistor.holomorphy_residual(F, order=q), "exact")
            for label, phi in _gauge_generators():
                dF = hidden.gauge_type_delta_F(phi, F)
                r.add(f"hidden/{fid}/gauge-type/{label}/holomorphy",
                      twistor.holomorphy_residual(dF, order=q), "exact")
                res = hidden.gauge_type_variation(A, psi, phi)
                r.add(f"hidden/{fid}/gauge-type/{label}/consistency",
                      max(res.consistency, res.sides_defect), "exact")
                r.add(f"hidden/{fid}/gauge-type/{label}/symmetry",
                      gauge.linearized_sdym_residual(A, res.variation), "symmetry")
            rng = np.random.default_rng(config.seed)
            theta = manifest.random_gauge_parameter(A.space, A.n, rng)
            res = hidden.gauge_type_variation(A, psi, hidden.GaugeTypeGenerator({}), split_override=(theta, theta))
            ref = manifest.gauge_variation(A, theta)
            r.add(f"hidden/{fid}/manifest-gauge-reduction",
                  max((a - b.truncate(a.order)).norm() for a, b in zip(res.variation.jets, ref.jets)), "exact")
            for label, eta in _diffeo_generators():
                res = hidden.diffeo_type_variation(A, psi, eta)
                r.add(f"hidden/{fid}/diffeo-type/{label}/consistency",
                      max(res.consistency, res.sides_defect), "exact")
                r.add(f"hidden/{fid}/diffeo-type/{label}/symmetry",
                      gauge.linearized_sdym_residual(A, res.variation), "symmetry")
            brackets, derivations = algebra_cases()
            for label, p1, p2 in brackets:
                r.add(f"hidden/{fid}/algebra/bracket/{label}", hidden.action_bracket_check(p1, p2, F), "exact")
            for label, eta, phi in derivations:
                r.add(f"hidden/{fid}/algebra/derivation/{label}", hidden.derivation_check(eta, phi, F), "exact")
            return r.reports
        tasks.append(run)
    return tasks


def suite_rh(config, records=None):
    def run():
        r = Recorder(config, "riemann-hilbert")
        K, N = config.mode_window, config.samples
        rng = np.random.default_rng(config.seed)
        data = rng.normal(size=(9, 2, 2)) + 1j * rng.normal(size=(9, 2, 2))
        f = rh.LaurentPoly(data, -4)
        parts = rh.split(f)
        r.add("rh/reconstruction/laurent", (parts.reconstruct() - f).norm(), "exact")
        stray = [k for k in parts.plus.support() if k < 0] + [k for k in parts.minus.support() if k > 0]
        r.add("rh/mode-support", len(stray), "exact")
        fs = f.to_sampled(N, K)
        dual = max(np.max(np.abs(rh.contour_coefficient(f, k) - rh.contour_coefficient(fs, k)))
                   for k in range(-4, 5))
        r.add("rh/dual-backend", dual, "exact")
        g = rh.Sampled.from_function(lambda lam: np.array([[1 / (lam - 2)]]), N, K)
        L = rh.laurent_coefficients(g)
        oracle = max(abs(L.mode(k)[0, 0] - (-(2.0 ** (-k - 1)) if k >= 0 else 0)) for k in range(-K, K + 1))
        r.add("rh/rational-modes", oracle, "exact")
        sp = rh.split(g)
        r.add("rh/reconstruction/sampled", (sp.reconstruct() - g).norm(), "exact")
        # analytic inside the contour: nothing in the strictly negative modes
        neg = max(np.max(np.abs(rh.contour_coefficient(sp.minus, k))) for k in range(-K, 0))
        r.add("rh/rational-placement", neg, "exact")
        return r.reports
    return [run]


SUITE_TASKS = {"sdym": suite_sdym, "manifest": suite_manifest, "hidden": suite_hidden, "rh": suite_rh}


def run_suites(config, suites, timing=False):
    config.validate()
    records = load_records(config)
    tasks = []
    for s in suites:
        tasks += SUITE_TASKS[s](config, records)

    def timed(task):
        t0 = time.perf_counter()
        reps = task()
        dt = time.perf_counter() - t0
        if timing:
            for rep in reps:
                rep["wall_time"] = dt / max(len(reps), 1)
        return reps

    workers = int(os.environ.get("SDYM_WORKERS", "1") or 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(timed, tasks))
    else:
        results = [timed(t) for t in tasks]
    reports = [rep for reps in results for rep in reps]
    return sorted(reports, key=lambda rep: rep["check"])


def cmd_check_sdym(config, timing=False):
    return run_suites(config, ["sdym"], timing)


def cmd_check_manifest(config, timing=False):
    return run_suites(config, ["manifest"], timing)


def cmd_check_hidden(config, timing=False):
    return run_suites(config, ["hidden"], timing)


def cmd_check_rh(config, timing=False):
    return run_suites(config, ["rh"], timing)


def cmd_run_suite(config, suites=SUITES, timing=False):
    return run_suites(config, list(suites), timing)


# -- command line ------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="sdym-report", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("check-sdym", "check-manifest", "check-hidden", "check-rh", "run-suite"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with RunConfig fields")
        p.add_argument("--suite", default="all", help="comma-separated suites for run-suite (default: all)")
        p.add_argument("--seed", type=int)
        p.add_argument("--jet-order", type=int)
        p.add_argument("--lambda-order", type=int)
        p.add_argument("--tolerance-scale", type=float)
        p.add_argument("--fixtures", help="fixture JSON (list of records)")
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--timing", action="store_true", help="add wall times (reports are then not reproducible)")
    return parser


def config_from_args(args):
    values = {}
    if args.config:
        with open(args.config) as fh:
            values.update(json.load(fh))
    for key in ("seed", "jet_order", "lambda_order", "tolerance_scale", "fixtures"):
        v = getattr(args, key)
        if v is not None:
            values[key] = v
    if "tolerances" in values:
        tol = dict(TOLERANCES)
        tol.update(values["tolerances"])
        values["tolerances"] = tuple(sorted(tol.items()))
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return RunConfig(**values).validate()


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        if args.command == "run-suite":
            suites = SUITES if args.suite == "all" else tuple(s.strip() for s in args.suite.split(","))
            bad = [s for s in suites if s not in SUITES]
            if bad:
                raise ConfigError(f"unknown suites: {bad}")
        else:
            suites = (args.command.split("-", 1)[1],)
        if config.fixtures:
            load_records(config)
    except (ConfigError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"sdym-report: configuration error: {exc}", file=sys.stderr)
        return 2
    reports = run_suites(config, suites, args.timing)
    lines = "".join(json.dumps(rep, sort_keys=True) + "\n" for rep in reports)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(lines)
    else:
        sys.stdout.write(lines)
    return 0 if all(rep["pass"] for rep in reports) else 1


if __name__ == "__main__":
    sys.exit(main())
