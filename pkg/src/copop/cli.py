"""Command-line driver: ``copop <subcommand> --config run.json``.

Every subcommand computes its reports in memory and writes them only once
the whole computation succeeded.  Exit codes: 0 success, 1 computation
failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import contextlib
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import counting, diagnostics, operator, weights
from .config import parse_config
from .errors import ConfigError, CopopError
from .quadrature import QuadratureRule

SCHEMA = 1
SUBCOMMANDS = ("admissible", "moments", "counting", "verify-cov", "hs", "essnorm",
               "schatten", "closed-range", "matrix", "all")
BEREZIN_POINTS = (0.6, 0.75, 0.9)

COV_FUNCTIONS = {
    "1": lambda z: np.ones(np.shape(z)),
    "abs2": lambda z: np.abs(z) ** 2,
    "re_plus_1": lambda z: np.real(z) + 1.0,
}


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(obj.real), _clean(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isfinite(v):
            return v
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    return obj


def dump_json(obj):
    return json.dumps(_clean(obj), indent=2, allow_nan=False, ensure_ascii=False) + "\n"


class Run:
    """Shared state for one invocation: config, weight, map and stamp."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.w = cfg.weight
        self.phi = cfg.map
        g = cfg["grids"]
        self.rule = QuadratureRule(g["radial_nodes"], g["angular_nodes"])
        self.admissibility = weights.check_admissible(self.w)
        self.stamp = {
            "admissible": self.admissibility.admissible,
            "w4": self.admissibility.w4,
            "l1": self.admissibility.l1,
            "delta": self.admissibility.delta,
        }
        self.files = {}
        self._moments = None

    def header(self, command):
        return {"schema": SCHEMA, "command": command,
                "config_digest": self.cfg.digest(), "admissibility": self.stamp}

    def emit(self, name, text, kind):
        if kind in self.cfg["output"]["formats"]:
            self.files[name] = text

    def report(self, name, command, body):
        doc = self.header(command)
        doc["result"] = body
        self.emit(name, dump_json(doc), "json")
        return body

    @property
    def moments(self):
        if self._moments is None:
            m = self.cfg["moments"]
            self._moments = weights.compute_moments(self.w, m["nmax"], m["radial_nodes"])
        return self._moments


def cmd_admissible(run):
    rep = run.admissibility
    body = rep.as_dict()
    body["admissible"] = rep.admissible
    body["l1_infimum"] = rep.l1_infimum
    return run.report("admissible.json", "admissible", body)


def cmd_moments(run):
    mt = run.moments
    body = {"nmax": mt.nmax, "nodes": mt.nodes, "quadrature_error": mt.quadrature_error,
            "closed_form_error": mt.closed_form_error}
    run.emit("moments.csv", mt.to_csv(), "csv")
    return run.report("moments.json", "moments", body)


def cmd_counting(run):
    g = run.cfg["grids"]
    m = g["counting_angles"]
    theta = 2.0 * np.pi * np.arange(m) / m
    z = (np.asarray(g["radii"])[:, None] * np.exp(1j * theta)[None, :]).ravel()
    n = counting.counting_values(run.phi, run.w, z)
    t = n / weights.eval_weight(run.w, np.abs(z))
    lines = ["re,im,N,tau"]
    lines += [f"{float(p.real)!r},{float(p.imag)!r},{float(a)!r},{float(b)!r}"
              for p, a, b in zip(z, n, t)]
    run.emit("counting.csv", "\n".join(lines) + "\n", "csv")
    body = {"points": len(z), "max_tau": float(t.max()), "min_tau": float(t.min())}
    return run.report("counting.json", "counting", body)


def cmd_verify_cov(run):
    checks = []
    for name in run.cfg["cov"]["functions"]:
        c = counting.verify_change_of_variables(run.phi, run.w, COV_FUNCTIONS[name])
        checks.append({"f": name, "lhs": c.lhs, "rhs": c.rhs, "reldiff": c.reldiff})
    body = {"checks": checks,
            "max_reldiff": max((c["reldiff"] for c in checks), default=0.0)}
    return run.report("verify_cov.json", "verify-cov", body)


def cmd_hs(run):
    rep = operator.hs_report(run.phi, run.w, nmax=run.cfg["moments"]["nmax"],
                             rule=run.rule, R_sequence=run.cfg["grids"]["R_sequence"])
    body = rep.as_dict()
    body["routes_agree"] = bool(rep.relative_gap <= run.cfg["tolerances"]["hs_gap_tol"])
    return run.report("hs.json", "hs", body)


def cmd_essnorm(run):
    g, t = run.cfg["grids"], run.cfg["tolerances"]
    prof = diagnostics.essential_norm_profile(
        run.phi, run.w, radii=g["radii"], angles_per_radius=g["angles"],
        compact_tol=t["compact_tol"], notcompact_tol=t["notcompact_tol"], stamp=run.stamp)
    run.emit("essnorm.csv", prof.to_csv(), "csv")
    body = prof.as_dict()
    del body["admissibility"]
    return run.report("essnorm.json", "essnorm", body)


def cmd_schatten(run):
    s = run.cfg["schatten"]
    reports = []
    for p in s["p"]:
        rep = diagnostics.schatten_integral(run.phi, run.w, p, rule=run.rule,
                                            R_sequence=run.cfg["grids"]["R_sequence"],
                                            stamp=run.stamp)
        run.emit(f"schatten_p{p:g}.csv", rep.to_csv(), "csv")
        d = rep.as_dict()
        del d["admissibility"]
        reports.append(d)
    r = s["berezin_r"]
    berezin = []
    for x in BEREZIN_POINTS:
        psi = counting.tau(run.phi, run.w, x)
        hat = diagnostics.berezin_transform(run.phi, run.w, x, r)
        bound = 2.0 / r ** 2 * hat
        berezin.append({"z": x, "psi": psi, "berezin": hat, "bound": bound,
                        "holds": bool(psi <= bound * (1 + 1e-9) + 1e-12)})
    body = {"reports": reports, "berezin_r": r, "berezin": berezin}
    return run.report("schatten.json", "schatten", body)


def cmd_closed_range(run):
    c = run.cfg["closed_range"]
    delta = c["delta"] if c["delta"] is not None else (run.admissibility.delta or 1.0)
    family = diagnostics.probe_family(c["nmax_monomials"],
                                      [complex(re, im) for re, im in c["a_grid"]], delta)
    rep = diagnostics.closed_range_probe(run.phi, run.w, family, rule=run.rule,
                                         normalize_origin=c["normalize_origin"],
                                         stamp=run.stamp)
    run.emit("closed_range.csv", rep.to_csv(), "csv")
    body = rep.as_dict()
    del body["admissibility"]
    body["delta"] = delta
    return run.report("closed_range.json", "closed-range", body)


def cmd_matrix(run):
    M = run.cfg["matrix"]["size"] - 1
    mat = operator.build_matrix(run.phi, run.w, M)
    sv = operator.jacobi_singular_values(mat.entries)
    run.emit("matrix.csv", mat.to_csv(), "csv")
    run.emit("singular_values.csv",
             "k,sigma\n" + "".join(f"{k},{float(s)!r}\n" for k, s in enumerate(sv)), "csv")
    body = {"size": mat.size, "truncation_tail": mat.truncation_tail,
            "largest_singular_value": float(sv[0]),
            "schatten_norms": {f"{p:g}": operator.schatten_from_matrix(mat, p)
                               for p in run.cfg["schatten"]["p"]}}
    return run.report("matrix.json", "matrix", body)


def cmd_all(run):
    # dependency order: weight, moments, counting, operator, diagnostics
    adm = cmd_admissible(run)
    mom = cmd_moments(run)
    cnt = cmd_counting(run)
    cov = cmd_verify_cov(run)
    hs = cmd_hs(run)
    ess = cmd_essnorm(run)
    sch = cmd_schatten(run)
    cr = cmd_closed_range(run)
    mat = cmd_matrix(run)
    body = {
        "admissible": adm["admissible"],
        "moments_nmax": mom["nmax"],
        "counting_max_tau": cnt["max_tau"],
        "cov_max_reldiff": cov["max_reldiff"],
        "hs_verdict": hs["verdict"],
        "hs_gap": hs["gap"],
        "essnorm_verdict": ess["verdict"],
        "schatten_verdicts": {f"{r['p']:g}": r["verdict"] for r in sch["reports"]},
        "closed_range_verdict": cr["verdict"],
        "closed_range_infimum": cr["infimum"],
        "matrix_largest_singular_value": mat["largest_singular_value"],
    }
    return run.report("summary.json", "all", body)


COMMANDS = {
    "admissible": cmd_admissible, "moments": cmd_moments, "counting": cmd_counting,
    "verify-cov": cmd_verify_cov, "hs": cmd_hs, "essnorm": cmd_essnorm,
    "schatten": cmd_schatten, "closed-range": cmd_closed_range,
    "matrix": cmd_matrix, "all": cmd_all,
}


def _float_list(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="copop",
        description="Numerical diagnostics for composition operators on weighted spaces.")
    ap.add_argument("subcommand", choices=SUBCOMMANDS)
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", help="output directory (overrides output.directory)")
    ap.add_argument("--radial-nodes", type=int)
    ap.add_argument("--angular-nodes", type=int)
    ap.add_argument("--rseq", type=_float_list, help="truncation radii, e.g. 0.9,0.99,0.999")
    ap.add_argument("--normalize-origin", action="store_true",
                    help="probe closed range for sigma_phi(0) o phi")
    ap.add_argument("--p", type=_float_list, help="Schatten exponents, e.g. 1,2,4")
    ap.add_argument("--delta", type=float, help="exponent of the kernel test functions")
    return ap


def _apply_overrides(data, args):
    if not isinstance(data, dict):
        return data

    def section(name):
        sec = data.setdefault(name, {})
        if not isinstance(sec, dict):
            raise ConfigError("expected an object", name)
        return sec

    if args.radial_nodes is not None:
        section("grids")["radial_nodes"] = args.radial_nodes
    if args.angular_nodes is not None:
        section("grids")["angular_nodes"] = args.angular_nodes
    if args.rseq is not None:
        section("grids")["R_sequence"] = args.rseq
    if args.p is not None:
        section("schatten")["p"] = args.p
    if args.normalize_origin:
        section("closed_range")["normalize_origin"] = True
    if args.delta is not None:
        section("closed_range")["delta"] = args.delta
    if args.out is not None:
        section("output")["directory"] = args.out
    return data


def load_config(path, args):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", str(path)) from None
    parse_config(text)  # so line/column errors refer to the file as written
    return parse_config(json.dumps(_apply_overrides(json.loads(text), args)))


def write_artifacts(directory, files):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        for name in sorted(files):
            target = directory / name
            tmp = target.with_suffix(target.suffix + ".part")
            with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(files[name])
            written.append(tmp)
        for tmp in written:
            os.replace(tmp, tmp.with_suffix(""))
    except OSError:
        for tmp in written:
            with contextlib.suppress(OSError):
                tmp.unlink()
        raise


def _thread_limit():
    value = os.environ.get("COPOP_THREADS")
    if not value:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits
    try:
        n = int(value)
    except ValueError:
        raise ConfigError(f"expected a positive integer, got {value!r}", "COPOP_THREADS") from None
    if n < 1:
        raise ConfigError("must be >= 1", "COPOP_THREADS")
    return threadpool_limits(limits=n)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args)
        with _thread_limit():
            run = Run(cfg)
            if not run.admissibility.admissible:
                print("copop: warning: weight is not admissible; reports are stamped",
                      file=sys.stderr)
            COMMANDS[args.subcommand](run)
        write_artifacts(cfg["output"]["directory"], run.files)
    except ConfigError as exc:
        print(f"copop: config error: {exc}", file=sys.stderr)
        return 2
    except CopopError as exc:
        print(f"copop: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
