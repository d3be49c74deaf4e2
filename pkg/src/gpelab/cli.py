"""Command-line front end.

Commands: townes, single, pair, sweep, unbounded, trial, lemma-a, report.
Exit codes: 0 success, 1 config error, 2 solver error, 3 invariant failure,
4 diagnostic failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import kernels
from .asymptotics import (
    GridPolicy,
    fit_power_law,
    run_sweep,
    theorem2_diagnostics,
    theorem3_diagnostics,
)
from .errors import ConfigError, GpelabError
from .grid import Grid2D, integrate_values
from .manifest import (
    dump_field,
    load_config,
    resolve_config,
    write_csv,
    write_manifest,
)
from .minimize import FlowOptions, ProblemSpec, TrapSpec, minimize_pair, minimize_single
from .plotting import line_plot
from .townes import RadialProfile, solve_townes
from .trial import (
    LemmaAParams,
    demonstrate_unbounded,
    lemma_a_brute_force,
    lemma_a_minimize,
    same_trap_upper_bound,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2
EXIT_INVARIANT = 3
EXIT_DIAGNOSTIC = 4


def _parse_set(values):
    out = {}
    for item in values or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, raw = item.split("=", 1)
        try:
            val = json.loads(raw)
        except json.JSONDecodeError:
            val = raw
        node = out
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = val
    return out


def _load(args):
    doc = load_config(args.config) if args.config else {}
    cfg = resolve_config(doc, _parse_set(args.set))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    return cfg, out_dir


def _grid(cfg) -> Grid2D:
    return Grid2D(cfg["grid"]["half_width"], cfg["grid"]["n"])


def _trap(doc) -> TrapSpec:
    return TrapSpec(tuple(doc["center"]), doc["exponent"])


def _options(cfg) -> FlowOptions:
    s = cfg["solver"]
    return FlowOptions(
        dt0=s["dt0"],
        tol_residual=s["tol_residual"],
        tol_energy=s["tol_energy"],
        max_iter=s["max_iter"],
        polish_iter=s["polish_iter"],
    )


def _profile(cfg, out_dir) -> RadialProfile:
    ref = cfg.get("q_reference")
    if ref:
        return RadialProfile.load(ref)
    cached = out_dir / "townes.json"
    if cached.exists():
        return RadialProfile.load(cached)
    t = cfg["townes"]
    prof = solve_townes(t["tolerance"], t["r_max"], t["step"])
    prof.save(cached)
    return prof


# --------------------------------------------------------------------------
# commands


def cmd_townes(args) -> int:
    cfg, out = _load(args)
    t = cfg["townes"]
    prof = solve_townes(t["tolerance"], t["r_max"], t["step"])
    prof.save(out / "townes.json")
    rows = [
        {"name": "astar", "value": prof.mass},
        {"name": "q0", "value": prof.q0},
        {"name": "kinetic", "value": prof.kinetic},
        {"name": "quartic", "value": prof.quartic},
        {"name": "tail_slope", "value": prof.tail_slope},
    ]
    for p in t["moment_ps"]:
        rows.append({"name": f"m_{p:g}", "value": prof.moment(p)})
        rows.append({"name": f"lambda_{p:g}", "value": prof.lambda_of(p)})
    from .grid import gn_quotient
    from .townes import sample_to_grid

    grid = _grid(cfg)
    gn = gn_quotient(sample_to_grid(prof, grid, 1.0))
    rows.append({"name": "gn_quotient", "value": gn})
    write_csv(out / "constants.csv", "gpelab-constants/1", ["name", "value"], rows)
    write_manifest(out, "townes", cfg, {"backend": kernels.BACKEND})

    kin_res = abs(prof.kinetic / prof.mass - 1.0)
    qrt_res = abs(prof.quartic / (2.0 * prof.mass) - 1.0)
    gn_res = abs(gn / (prof.mass / 2.0) - 1.0)
    if args.check:
        print(f"identity |kinetic/mass - 1| = {kin_res:.3e}")
        print(f"identity |quartic/(2 mass) - 1| = {qrt_res:.3e}")
        print(f"identity |J(Q)/(a*/2) - 1| = {gn_res:.3e}")
    if max(kin_res, qrt_res, gn_res) > 1e-6:
        print("invariant failure: profile identities out of tolerance", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def _check_result(res, tol=1e-12) -> list[str]:
    problems = []
    fields = [res.u1] + ([res.u2] if res.u2 is not None else [])
    for i, f in enumerate(fields, 1):
        mass = integrate_values(f.grid, f.values**2)
        if abs(mass - 1.0) > tol:
            problems.append(f"component {i} mass deviates: {mass!r}")
        if float(f.values.min()) < 0.0:
            problems.append(f"component {i} has negative values")
    if res.max_energy_increase > 1e-10:
        problems.append(f"energy increased by {res.max_energy_increase:.3e}")
    return problems


def cmd_single(args) -> int:
    cfg, out = _load(args)
    prob = cfg["problem"]
    res = minimize_single(prob["a1"], _trap(prob["trap1"]), _grid(cfg), _options(cfg))
    doc = {
        "energy": res.energy,
        "mu": res.mu[0],
        "residual": res.residual,
        "iterations": res.iterations,
        "converged": res.converged,
    }
    with open(out / "result.json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    dump_field(out / "u1.bin", res.u1, {"component": 1})
    write_manifest(out, "single", cfg, {"backend": kernels.BACKEND})
    problems = _check_result(res)
    if problems:
        print("; ".join(problems), file=sys.stderr)
        return EXIT_INVARIANT
    if args.check and not res.converged:
        print("solver did not reach tolerance", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def cmd_pair(args) -> int:
    cfg, out = _load(args)
    prob = cfg["problem"]
    spec = ProblemSpec(
        prob["a1"], prob["a2"], prob["beta"], _trap(prob["trap1"]), _trap(prob["trap2"])
    )
    res = minimize_pair(spec, _grid(cfg), _options(cfg))
    doc = {
        "energy": res.energy,
        "e_components": list(res.e_components),
        "overlap": res.overlap,
        "mu": list(res.mu),
        "residual": res.residual,
        "iterations": res.iterations,
        "converged": res.converged,
    }
    with open(out / "result.json", "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    dump_field(out / "u1.bin", res.u1, {"component": 1})
    dump_field(out / "u2.bin", res.u2, {"component": 2})
    write_manifest(out, "pair", cfg, {"backend": kernels.BACKEND})
    problems = _check_result(res)
    if problems:
        print("; ".join(problems), file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


_SWEEP_COLUMNS = [
    "a1", "a2", "beta", "grid_n", "eps1", "eps2", "eps_tilde1", "eps_tilde2",
    "e", "e_comp1", "e_comp2", "e_single1", "e_single2", "overlap", "mu1", "mu2",
    "peak1_x", "peak1_y", "peak2_x", "peak2_y", "peak_count1", "peak_count2",
    "profile_dist1", "profile_dist2", "lambda_fit1", "lambda_fit2",
    "quartic1", "quartic2", "residual", "converged", "under_resolved", "failure",
]


def cmd_sweep(args) -> int:
    cfg, out = _load(args)
    prob = cfg["problem"]
    prof = _profile(cfg, out)
    astar = prof.mass
    template = ProblemSpec(
        1.0, 1.0, prob["beta"], _trap(prob["trap1"]), _trap(prob["trap2"])
    )
    schedule = [(f * astar, f * astar) for f in cfg["schedule"]["fractions"]]
    policy = GridPolicy(
        base=_grid(cfg),
        max_n=cfg["policy"]["max_n"],
        min_cells_per_eps=cfg["policy"]["min_cells_per_eps"],
    )
    opts = _options(cfg)
    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            parts = pool.map(
                lambda pt: run_sweep([pt], template, policy, prof, opts), schedule
            )
        records = [rec for part in parts for rec in part]
    else:
        records = run_sweep(schedule, template, policy, prof, opts)

    write_csv(out / "sweep.csv", "gpelab-sweep/1", _SWEEP_COLUMNS, [r.to_row() for r in records])
    same_trap = template.trap1.center == template.trap2.center
    if same_trap:
        report = theorem3_diagnostics(records, template.trap1.center)
    else:
        report = theorem2_diagnostics(
            records, prof, template,
            tol=cfg["solver"]["tol_residual"],
            half_width=policy.base.half_width,
        )
    with open(out / "diagnostics.json", "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    write_manifest(
        out, "sweep", cfg,
        {"backend": kernels.BACKEND, "astar": astar, "schedule": schedule},
    )

    good = [r for r in records if not r.failure]
    if good:
        gaps = [astar - r.a1 for r in good]
        line_plot(
            out / "energy.svg",
            [("pair e", gaps, [r.e for r in good]),
             ("single e1", gaps, [r.e_single1 for r in good])],
            title="energy vs distance to critical coupling",
            xlabel="a* - a", ylabel="energy", logx=True, logy=True,
        )
        dists = [(g_, r.profile_dist1) for g_, r in zip(gaps, good) if math.isfinite(r.profile_dist1)]
        if dists:
            line_plot(
                out / "profile_distance.svg",
                [("component 1", [d[0] for d in dists], [d[1] for d in dists])],
                title="rescaled-profile H1 distance",
                xlabel="a* - a", ylabel="H1 distance", logx=True,
            )
        seps = [
            (g_, math.hypot(r.peak1[0] - r.peak2[0], r.peak1[1] - r.peak2[1]))
            for g_, r in zip(gaps, good)
        ]
        if any(s > 0 for _, s in seps):
            line_plot(
                out / "peak_separation.svg",
                [("peak separation", [s[0] for s in seps], [max(s[1], 1e-12) for s in seps])],
                title="peak separation", xlabel="a* - a", ylabel="|x1 - x2|", logx=True,
            )
    if any(r.failure for r in records):
        for r in records:
            if r.failure:
                print(f"point a1={r.a1:.8g} failed: {r.failure}", file=sys.stderr)
        return EXIT_SOLVER
    if not report["passed"]:
        for flag in report["flags"]:
            print(f"diagnostic: {flag}", file=sys.stderr)
        return EXIT_DIAGNOSTIC
    return EXIT_OK


def cmd_unbounded(args) -> int:
    cfg, out = _load(args)
    prob = cfg["problem"]
    prof = _profile(cfg, out)
    if prob["a1"] <= prof.mass:
        print("unbounded demonstration needs a1 > a*", file=sys.stderr)
        return EXIT_CONFIG
    ladder = demonstrate_unbounded(
        prob["a1"], _grid(cfg), prof, taus=cfg["trial"]["taus"],
        beta=prob["beta"], trap1=_trap(prob["trap1"]), trap2=_trap(prob["trap2"]),
    )
    rows = [{"tau": t, "energy": e} for t, e in ladder]
    write_csv(out / "unbounded.csv", "gpelab-unbounded/1", ["tau", "energy"], rows)
    write_manifest(out, "unbounded", cfg, {"backend": kernels.BACKEND})
    line_plot(
        out / "unbounded.svg",
        [("E(trial, bump)", [t for t, _ in ladder], [e for _, e in ladder])],
        title="trial energy ladder", xlabel="tau", ylabel="energy", logx=True,
    )
    energies = [e for _, e in ladder]
    if len(energies) < 2 or not all(b < a for a, b in zip(energies, energies[1:])):
        print("energy ladder is not strictly decreasing", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_trial(args) -> int:
    cfg, out = _load(args)
    prob = cfg["problem"]
    prof = _profile(cfg, out)
    astar = prof.mass
    grid = _grid(cfg)
    p = prob["trap1"]["exponent"]
    rows = []
    compare_fail = []
    for frac in cfg["schedule"]["fractions"]:
        a = frac * astar
        tau, e_trial = same_trap_upper_bound(
            a, a, p, grid, prof, beta=prob["beta"], center=tuple(prob["trap1"]["center"]),
            c0=cfg["trial"]["c0"],
        )
        gap = astar - a
        denom = gap ** (p / (p + 2.0)) * math.log(1.0 / gap) ** (2.0 * p / (p + 2.0))
        row = {"a1": a, "tau": tau, "energy": e_trial, "bound_ratio": e_trial / denom,
               "e_pair": math.nan}
        if args.compare:
            spec = ProblemSpec(a, a, prob["beta"], _trap(prob["trap1"]), _trap(prob["trap1"]))
            res = minimize_pair(spec, grid, _options(cfg))
            row["e_pair"] = res.energy
            if e_trial < res.energy:
                compare_fail.append(a)
        rows.append(row)
    write_csv(out / "trial.csv", "gpelab-trial/1",
              ["a1", "tau", "energy", "bound_ratio", "e_pair"], rows)
    write_manifest(out, "trial", cfg, {"backend": kernels.BACKEND})
    line_plot(
        out / "trial.svg",
        [("bound ratio", [r["a1"] for r in rows], [r["bound_ratio"] for r in rows])],
        title="same-trap upper bound ratio", xlabel="a1", ylabel="ratio",
    )
    if compare_fail:
        print(f"trial energy fell below the measured minimum at a1={compare_fail}",
              file=sys.stderr)
        return EXIT_DIAGNOSTIC
    return EXIT_OK


def cmd_lemma_a(args) -> int:
    cfg, out = _load(args)
    la = cfg["lemma_a"]
    prof = _profile(cfg, out)
    astar = prof.mass
    rows = []
    mono_fail = []
    for kappa in la["kappas"]:
        for pp in la["ps"]:
            for frac in la["a_fractions"]:
                a = frac * astar
                prev_ratio = None
                for m in la["ms"]:
                    params = LemmaAParams(kappa, m, pp, a, astar)
                    s1, fmin = lemma_a_minimize(params)
                    gap = astar - a
                    denom = gap ** (pp / (pp + 2.0)) * math.log(1.0 / gap) ** (
                        2.0 * pp / (pp + 2.0)
                    )
                    ratio = fmin / denom
                    row = {"kappa": kappa, "m": m, "p": pp, "a": a, "s1": s1,
                           "f_min": fmin, "bound_ratio": ratio, "brute_rel_err": math.nan}
                    if args.check:
                        sb = lemma_a_brute_force(params, n=10**5)
                        row["brute_rel_err"] = abs(s1 - sb) / sb
                    if prev_ratio is not None and ratio <= prev_ratio:
                        mono_fail.append((kappa, pp, a, m))
                    prev_ratio = ratio
                    rows.append(row)
    write_csv(out / "lemma_a.csv", "gpelab-lemma-a/1",
              ["kappa", "m", "p", "a", "s1", "f_min", "bound_ratio", "brute_rel_err"], rows)
    write_manifest(out, "lemma-a", cfg, {"backend": kernels.BACKEND})
    if args.check:
        worst = max(r["brute_rel_err"] for r in rows)
        print(f"worst Newton-vs-brute relative error: {worst:.3e}")
        if worst > 1e-6:
            print("oracle disagreement beyond 1e-6", file=sys.stderr)
            return EXIT_INVARIANT
    if mono_fail:
        print(f"bound ratio not increasing in m at {mono_fail}", file=sys.stderr)
        return EXIT_DIAGNOSTIC
    return EXIT_OK


def cmd_report(args) -> int:
    out = Path(args.out)
    diag = out / "diagnostics.json"
    if not diag.exists():
        print(f"no diagnostics.json under {out}", file=sys.stderr)
        return EXIT_CONFIG
    with open(diag) as fh:
        report = json.load(fh)
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK if report.get("passed") else EXIT_DIAGNOSTIC


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gpelab")
    sub = ap.add_subparsers(dest="command", required=True)
    handlers = {
        "townes": cmd_townes,
        "single": cmd_single,
        "pair": cmd_pair,
        "sweep": cmd_sweep,
        "unbounded": cmd_unbounded,
        "trial": cmd_trial,
        "lemma-a": cmd_lemma_a,
        "report": cmd_report,
    }
    for name, fn in handlers.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None)
        sp.add_argument("--out", default=".")
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--check", action="store_true")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE")
        if name == "trial":
            sp.add_argument("--compare", action="store_true")
        sp.set_defaults(handler=fn)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GpelabError as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
