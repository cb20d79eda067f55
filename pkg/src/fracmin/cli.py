"""Command line entry point.

Every subcommand reads a JSON config (``--config``), writes its outputs plus a
``manifest.json`` into ``--out`` (default: ``$FRACMIN_OUTPUT_ROOT/<command>-<hash>``,
with ``runs`` as the root when the variable is unset) and exits with 0 on
success, 1 on a domain error (error class name on stderr) and 2 on usage
errors.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .analysis import (dilation_test, mass_scan, required_masses, subadditivity_check,
                       theta_scaling_check, theta_vector_check)
from .ccdiag import (FieldSequence, classify, concentration_table, default_radii,
                     separating_sequence, spreading_sequence, translate_sequence)
from .config import Bundle, load_config
from .errors import ConfigError, FracminError, NonConvergence
from .flow import certify, minimize
from .grid import Grid, Profile, frac_kinetic, gagliardo_kinetic_1d
from .io import RunWriter, canonical_hash, default_output_root, load_field
from .nonlinearity import SamplePlan, check_hypotheses

log = logging.getLogger("fracmin")

COMMANDS = ("check-hypotheses", "minimize", "scan-mass", "dilation-test", "subadd-test",
            "theta-test", "cc-classify", "validate-kinetic")


def _need_spec(bundle: Bundle):
    if bundle.spec is None:
        raise ConfigError("this command needs a nonlinearity section", rule="nonlinearity required",
                          path="nonlinearity")
    return bundle.spec


def _trace_rows(res):
    for i, (e, r, h) in enumerate(zip(res.energy_trace, res.residual_trace, res.hs_trace)):
        yield {"iteration": i, "J": e, "residual": r, "hs_norm": h}


def _write_minimizer(w: RunWriter, prefix: str, res, spec, c2):
    w.write_field(f"{prefix}u_star", res.u_star)
    w.write_csv(f"{prefix}trace.csv", _trace_rows(res), ["iteration", "J", "residual", "hs_norm"])
    w.write_json(f"{prefix}result.json", {**res.summary(), "certification": certify(res, spec, c2)})


# -- subcommands --------------------------------------------------------------


def cmd_check_hypotheses(b: Bundle, w: RunWriter):
    spec = _need_spec(b)
    h = b.model.hypotheses
    plan = SamplePlan.for_grid(b.grid, hypotheses=tuple(h.hypotheses))
    over = {k: tuple(v) for k, v in (("radii", h.radii), ("t_values", h.t_values),
                                     ("thetas", h.thetas)) if v is not None}
    if over:
        plan = replace(plan, **over)
    rep = check_hypotheses(spec, plan)
    w.write_json("hypotheses.json", rep)
    for name, v in rep.verdicts.items():
        print(f"{name}: {v.status}")


def cmd_minimize(b: Bundle, w: RunWriter):
    spec = _need_spec(b)
    warm = None
    if b.model.flow.warm_start:
        warm = load_field(b.model.flow.warm_start)
    cfg = b.flow(warm=warm)
    res = minimize(spec, b.grid, cfg)
    _write_minimizer(w, "", res, spec, cfg.c2)
    r = res.report
    print(f"J = {r.total!r}  lambda = {r.lambda_!r}  residual = {r.el_residual:.3e}  "
          f"iterations = {res.iterations}  converged = {res.converged}")
    if not res.converged:
        raise NonConvergence(f"residual {r.el_residual:.3e} above tolerance {cfg.el_tol:.1e}",
                             result=res)


def cmd_scan_mass(b: Bundle, w: RunWriter):
    spec = _need_spec(b)
    cv = b.model.scan.c_values
    if not cv or any(c <= 0 for c in cv):
        raise ConfigError("scan.c_values must be nonempty and positive", rule="c > 0",
                          path="scan.c_values")
    comp = spec.comparison() if b.model.scan.comparison else None
    if b.model.scan.comparison and comp is None:
        raise ConfigError("scan.comparison requested but the family has no comparison",
                          rule="comparison available", path="scan.comparison")
    scan = mass_scan(spec, cv, b.flow(c2=1.0), b.grid, comparison=comp)
    _write_scan(w, scan)
    print(f"scanned {len(scan.c_values)} masses; continuity {scan.continuity()}")


def _write_scan(w, scan):
    fields = ["c", "I_c", "converged"]
    if scan.I_inf_values is not None:
        fields += ["I_inf_c", "inf_converged"]
    w.write_csv("scan.csv", scan.rows(), fields)
    payload = {"continuity": scan.continuity(),
               "points": [r.summary() for r in scan.results]}
    if scan.inf_results is not None:
        payload["inf_points"] = [r.summary() for r in scan.inf_results]
    w.write_json("scan.json", payload)


def cmd_dilation_test(b: Bundle, w: RunWriter):
    spec = _need_spec(b)
    d = b.model.dilation
    rep = dilation_test(spec, Profile(d.profile, width=d.width), d.lambda_ladder, b.grid,
                        c2=d.c2 if d.c2 is not None else b.model.flow.c2,
                        skip_overflow=d.skip_overflow)
    w.write_json("dilation.json", rep)
    w.write_csv("dilation.csv", (r.__dict__ for r in rep.rows),
                ["lam", "kinetic", "potential", "energy", "kinetic_ratio", "kinetic_law_error"])
    print(f"{rep.verdict}  best lambda = {rep.best_lambda}  J = {rep.best_energy!r}")


def cmd_subadd_test(b: Bundle, w: RunWriter):
    spec = _need_spec(b)
    sa = b.model.subadd
    need = required_masses(sa.c_values, sa.a_values, sa.split)
    comp = None
    if sa.mode == "cross":
        comp = spec.comparison()
        if comp is None:
            raise ConfigError("cross mode needs a comparison nonlinearity",
                              rule="comparison available", path="subadd.mode")
    scan = mass_scan(spec, need, b.flow(c2=1.0), b.grid, comparison=comp)
    rep = subadditivity_check(scan, sa.mode, sa.a_values, sa.c_values, sa.tol, sa.split,
                              sa.interpolate, sa.margin)
    _write_scan(w, scan)
    w.write_json("subadd.json", rep)
    print(f"{sa.mode}: passed = {rep.passed}  worst margin = {rep.worst_margin!r}")


def cmd_theta_test(b: Bundle, w: RunWriter):
    spec = _need_spec(b)
    th = b.model.theta
    cfg = b.flow(c2=th.c ** 2)
    rep = theta_scaling_check(spec, th.c, th.thetas, cfg, b.grid, th.tol)
    out = rep.to_dict()
    if th.vector_check:
        target = spec.periodic_part() or spec
        out["vector"] = [theta_vector_check(rep.base_result.u_star, target, t) for t in th.thetas]
    w.write_json("theta.json", out)
    print(f"theta scaling passed = {rep.passed}")


def _cc_sequence(b: Bundle) -> FieldSequence:
    cc = b.model.cc
    g = b.grid
    opts = dict(cc.options)
    if cc.source == "spreading":
        return spreading_sequence(g, cc.count, **opts)
    if cc.source == "translates":
        return translate_sequence(g, cc.count, **opts)
    if cc.source == "separating":
        return separating_sequence(g, cc.count, **opts)
    if cc.source == "fields":
        if not cc.fields:
            raise ConfigError("cc.fields is empty", rule="fields given", path="cc.fields")
        return FieldSequence([load_field(p) for p in cc.fields])
    spec = _need_spec(b)
    cfg = replace(b.flow(), snapshot_every=max(1, int(opts.get("snapshot_every", 10))),
                  max_iters=int(opts.get("max_iters", b.model.flow.max_iters)))
    res = minimize(spec, g, cfg)
    return FieldSequence(res.snapshots)


def cmd_cc_classify(b: Bundle, w: RunWriter):
    cc = b.model.cc
    seq = _cc_sequence(b)
    radii = tuple(cc.radii) if cc.radii else default_radii(seq.grid)
    Q, _ = concentration_table(seq, radii)
    w.write_csv("cc_samples.csv",
                ({"n": n, "R": R, "Q": Q[n, k]} for n in range(len(seq)) for k, R in enumerate(radii)),
                ["n", "R", "Q"])
    res = classify(seq, cc.eps_ladder, radii)
    w.write_json("classification.json", res)
    print(f"verdict: {res.verdict}")


def cmd_validate_kinetic(b: Bundle, w: RunWriter):
    v = b.model.validate_
    L = b.grid.box_length
    rows = []
    for s in v.s_values:
        for kind in v.profiles:
            for M in v.points:
                g = Grid(1, L, M, s)
                u = g.sample(Profile(kind))
                spec_k = frac_kinetic(u)
                quad_k = gagliardo_kinetic_1d(u)
                rows.append({"s": s, "profile": kind, "points": M, "spectral": spec_k,
                             "gagliardo": quad_k, "rel_error": abs(spec_k - quad_k) / spec_k})
    ok = all(r["rel_error"] <= v.tol for r in rows)
    w.write_csv("kinetic.csv", rows, ["s", "profile", "points", "spectral", "gagliardo", "rel_error"])
    w.write_json("kinetic.json", {"tolerance": v.tol, "passed": ok, "rows": rows})
    print(f"kinetic cross-validation passed = {ok}; worst = {max(r['rel_error'] for r in rows):.3e}")


HANDLERS = {
    "check-hypotheses": cmd_check_hypotheses,
    "minimize": cmd_minimize,
    "scan-mass": cmd_scan_mass,
    "dilation-test": cmd_dilation_test,
    "subadd-test": cmd_subadd_test,
    "theta-test": cmd_theta_test,
    "cc-classify": cmd_cc_classify,
    "validate-kinetic": cmd_validate_kinetic,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracmin", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"fracmin {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in COMMANDS:
        sp = sub.add_parser(name, help=(HANDLERS[name].__doc__ or name.replace("-", " ")))
        sp.add_argument("--config", required=True, type=Path, help="JSON config file")
        sp.add_argument("--out", type=Path, default=None, help="output directory")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if not args.config.is_file():
        parser.print_usage(sys.stderr)
        print(f"fracmin: error: config file not found: {args.config}", file=sys.stderr)
        return 2
    writer = None
    bundle = None
    try:
        bundle = load_config(args.config)
        cfg_dict = bundle.to_dict()
        out = args.out or default_output_root() / f"{args.command}-{canonical_hash(cfg_dict)[:12]}"
        writer = RunWriter(out, args.command)
        HANDLERS[args.command](bundle, writer)
    except FracminError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        if writer is not None:
            writer.finalize(bundle.to_dict(), bundle.model.flow.seed, bundle.grid, bundle.spec,
                            status="error", error=type(exc).__name__)
        return 1
    writer.finalize(cfg_dict, bundle.model.flow.seed, bundle.grid, bundle.spec)
    print(f"outputs in {writer.dir}")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
