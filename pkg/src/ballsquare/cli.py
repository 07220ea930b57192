"""Command-line entry point: ``ballsquare {gen,squarefn,equiv,lemma}``.

Every command reads an optional JSON config, fills in defaults, writes the
fully resolved config to ``<out>/run_config.json`` and writes its results next
to it.  Feeding the emitted config back with ``--config`` reproduces the
outputs byte for byte.

Exit codes: 0 success, 2 parameter/range rejection, 3 numerical
non-convergence, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import copy
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import convolve, hardy, lemma, squarefn, testfields
from .errors import ConvergenceError, FieldFormatError, ParameterError
from .field import GridSpec, lp_norm, read_field, translate, write_field, write_field_csv
from .kernels import KernelSpec

log = logging.getLogger("ballsquare")

EXIT_OK, EXIT_PARAM, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4

IDENTITY_RTOL = 1e-12
MAX_FAILURE_FRACTION = 0.10

DEFAULTS = {
    "gen": {
        "grid": {"n": 2, "N": 256, "L": 1.0},
        "recipe": {"kind": "atom", "center": [0.3, 0.35], "width": 0.2},
        "csv": False,
    },
    "squarefn": {
        "input": None,
        "alpha": 1.5,
        "kernel": {"kind": "ball", "k": 1},
        "scales": {"t_min": None, "t_max": None, "per_octave": 4},
        "mode": "discrete",
    },
    "equiv": {
        "alpha": 1.5,
        "k_list": [1, 2, 3],
        "source": {"grid": {"n": 2, "N": 256, "L": 1.0},
                   "recipe": {"kind": "atom", "center": [0.3, 0.35], "width": 0.2}},
        "scales": {"t_min": None, "t_max": None, "per_octave": 4},
        "family": {"kind": "single"},
    },
    "lemma": {
        "alpha": 1.5,
        "n": 2,
        "bases": 15,
        "rungs": 7,
        "slope_rungs": 3,
        "seed": 2024,
        "tol": 1e-8,
        "u_range": [0.25, 6.75],
        "custom": [],
        "tol_halving": True,
        "grad_check": {"radii": [0.5, 1.0, 2.0]},
    },
}


def _merge(base, override):
    out = copy.deepcopy(base)
    for key, val in (override or {}).items():
        if isinstance(val, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _dump(obj, path):
    Path(path).write_text(json.dumps(obj, indent=2, allow_nan=False) + "\n")


def _grid(spec):
    return GridSpec(int(spec["n"]), int(spec["N"]), float(spec.get("L", 1.0)))


def _scales(grid, spec, k=1, reference=None):
    """Scale grid from a config block; ``None`` bounds take resolution defaults.

    ``reference`` supplies the default bounds (refinement families share the
    coarsest grid's scales unless told otherwise).
    """
    base = reference or squarefn.default_scale_grid(grid, int(spec["per_octave"]), k)
    t_min = spec.get("t_min")
    t_max = spec.get("t_max")
    return squarefn.scale_grid(
        grid,
        base.t_min if t_min is None else float(t_min),
        base.t_max if t_max is None else float(t_max),
        int(spec["per_octave"]),
        k,
    )


def cmd_gen(cfg, out):
    grid = _grid(cfg["grid"])
    f = testfields.build(cfg["recipe"], grid)
    cfg["recipe"] = testfields.recipe_metadata(cfg["recipe"])
    write_field(f, out / "field.sqfn")
    if cfg.get("csv"):
        write_field_csv(f, out / "field.csv")
    return {"mean": f.mean(), "mean_zero": f.mean_zero, "l1": lp_norm(f, 1),
            "l2": lp_norm(f, 2)}


def cmd_squarefn(cfg, out):
    if not cfg.get("input"):
        raise ParameterError("squarefn needs an input field file ('input' in the config)")
    cfg["input"] = str(Path(cfg["input"]).resolve())
    f = read_field(cfg["input"])
    kind = cfg["kernel"]["kind"]
    k = int(cfg["kernel"].get("k", 1)) if kind == "binomial" else 1
    if kind not in ("ball", "binomial"):
        raise ParameterError(f"kernel kind must be 'ball' or 'binomial', got {kind!r}")
    kernel = KernelSpec.ball(f.grid.n) if kind == "ball" else KernelSpec.binomial(f.grid.n, k)
    scales = _scales(f.grid, cfg["scales"], k)
    cfg["scales"] = {"t_min": scales.t_min, "t_max": scales.t_max,
                     "per_octave": scales.per_octave}
    opts = dict(override=cfg["override_range"], mode=cfg["mode"], threads=cfg["threads"])
    res = squarefn.square_function(f, float(cfg["alpha"]), kernel, scales, **opts)
    write_field(res.result, out / "result.sqfn")
    res.to_csv(out / "profile.csv")
    summary = {"l1": lp_norm(res.result, 1), "l2": lp_norm(res.result, 2),
               "kernel": kernel.to_dict(), "scales": scales.to_dict(), **res.metadata}
    if cfg["check_identity"]:
        direct = squarefn.e_tilde_direct(f, float(cfg["alpha"]), k, scales, **opts)
        worst = squarefn.identity_discrepancy(res, direct)
        summary["identity_discrepancy"] = worst
        summary["identity_ok"] = worst <= IDENTITY_RTOL
        if not summary["identity_ok"]:
            _dump(summary, out / "summary.json")
            raise ConvergenceError(f"kernel and (I - A_t)^k pipelines differ by {worst:.3g}")
    _dump(summary, out / "summary.json")
    return summary


def _source_field(src, grid=None):
    if src.get("input"):
        f = read_field(src["input"])
        return f
    return testfields.build(src["recipe"], grid or _grid(src["grid"]))


def cmd_equiv(cfg, out):
    src = cfg["source"]
    if src.get("input"):
        src["input"] = str(Path(src["input"]).resolve())
    alpha = float(cfg["alpha"])
    k_list = [int(k) for k in cfg["k_list"]]
    kmax = max(k_list + [1])
    fam = cfg["family"]
    kind = fam.get("kind", "single")
    opts = dict(override=cfg["override_range"], threads=cfg["threads"])
    reports, summary = [], {"family": kind}

    if kind == "refinement":
        if src.get("input"):
            raise ParameterError("refinement families need a recipe source, not a field file")
        n_list = [int(N) for N in fam.get("N_list", [128, 256, 512])]
        policy = fam.setdefault("scale_policy", "fixed")
        base_grid = _grid(src["grid"])
        coarse = GridSpec(base_grid.n, min(n_list), base_grid.L)
        ref = _scales(coarse, cfg["scales"], kmax)
        for N in n_list:
            g = GridSpec(base_grid.n, N, base_grid.L)
            f = testfields.build(src["recipe"], g)
            if policy == "fixed":
                sc = squarefn.scale_grid(g, ref.t_min, ref.t_max, ref.per_octave, kmax)
            elif policy == "resolve":
                sc = squarefn.scale_grid(g, 2 * g.spacing, ref.t_max, ref.per_octave, kmax)
            else:
                raise ParameterError(f"scale_policy must be 'fixed' or 'resolve', got {policy!r}")
            reports.append(hardy.equivalence_report(f, alpha, k_list, sc, label=f"N={N}", **opts))
        ratios = [r.ratio_thm1 for r in reports]
        if None not in ratios:
            changes = [abs(b - a) for a, b in zip(ratios, ratios[1:])]
            summary["ratio_changes"] = changes
            summary["cauchy"] = all(b < a for a, b in zip(changes, changes[1:]))
        summary["u_alpha_l1"] = [r.u_alpha_l1 for r in reports]
    else:
        f = _source_field(src)
        sc = _scales(f.grid, cfg["scales"], kmax)
        cfg["scales"] = {"t_min": sc.t_min, "t_max": sc.t_max, "per_octave": sc.per_octave}
        base = hardy.equivalence_report(f, alpha, k_list, sc, label="base", **opts)
        reports.append(base)
        if kind == "translation":
            shifts = fam.get("shifts") or [[s * f.grid.N // 8] * f.grid.n for s in range(1, 8)]
            fam["shifts"] = shifts
            for s in shifts:
                reports.append(hardy.equivalence_report(
                    translate(f, s), alpha, k_list, sc, label=f"shift={list(s)}", **opts))
            ratios = [r.ratio_thm1 for r in reports]
            if None not in ratios:
                summary["max_rel_spread"] = (max(ratios) - min(ratios)) / min(ratios)
        elif kind == "dilation":
            fd = hardy.dilate(f, 2)
            scd = squarefn.scale_grid(fd.grid, sc.t_min / 2, sc.t_max / 2, sc.per_octave, kmax)
            reports.append(hardy.equivalence_report(fd, alpha, k_list, scd, label="dilated x2",
                                                    **opts))
            if base.ratio_thm1 and reports[-1].ratio_thm1:
                summary["ratio_factor"] = reports[-1].ratio_thm1 / base.ratio_thm1
        elif kind != "single":
            raise ParameterError(f"unknown family kind {kind!r}")

    if any(r.undefined for r in reports):
        log.warning("some ratios are undefined (zero denominators); reported as 'undefined'")
    summary["reports"] = [r.flat() for r in reports]
    _dump(summary, out / "report.json")
    hardy.write_report_csv(reports, out / "rows.csv")
    return summary


def cmd_lemma(cfg, out):
    alpha, n = float(cfg["alpha"]), int(cfg["n"])
    spec = lemma.SampleSpec(bases=int(cfg["bases"]), rungs=int(cfg["rungs"]),
                            seed=int(cfg["seed"]), tol=float(cfg["tol"]),
                            u_range=tuple(cfg["u_range"]), custom=cfg["custom"],
                            slope_rungs=int(cfg["slope_rungs"]))
    scan = lemma.bound_scan(alpha, n, spec, threads=cfg["threads"])
    report = json.loads(scan.to_json())
    if cfg["tol_halving"]:
        spec.tol = spec.tol / 2
        fine = lemma.bound_scan(alpha, n, spec, threads=cfg["threads"])
        report["sup_ratio_half_tol"] = fine.sup_ratio
        if scan.sup_ratio > 0:
            report["sup_ratio_rel_change"] = abs(fine.sup_ratio - scan.sup_ratio) / scan.sup_ratio
    checks = []
    for C in cfg["grad_check"]["radii"]:
        try:
            g = lemma.grad_integral_check(alpha, n, float(C))
            checks.append({"radius": g.radius, "quadrature": g.quadrature,
                           "closed_form": g.closed_form, "rel_error": g.rel_error,
                           "in_admissible_range": g.in_admissible_range})
        except ConvergenceError as exc:
            checks.append({"radius": float(C), "error": str(exc)})
    report["grad_checks"] = checks
    _dump(report, out / "lemma_report.json")
    scan.to_csv(out / "lemma_samples.csv")
    attempted = len(scan.samples) + len(scan.failures)
    if attempted and len(scan.failures) / attempted > MAX_FAILURE_FRACTION:
        raise ConvergenceError(f"{len(scan.failures)} of {attempted} quadratures failed")
    return report


COMMANDS = {"gen": cmd_gen, "squarefn": cmd_squarefn, "equiv": cmd_equiv, "lemma": cmd_lemma}


def build_parser():
    parser = argparse.ArgumentParser(prog="ballsquare", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--threads", type=int, default=None, help="worker threads")
    common.add_argument("--override-range", action="store_true", default=None,
                        help="allow alpha outside the admissible range (recorded in outputs)")
    common.add_argument("--check-identity", action="store_true", default=None,
                        help="squarefn: cross-check the binomial kernel against (I - A_t)^k")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=COMMANDS[name].__name__.replace("cmd_", ""))
    return parser


def resolve_config(command, path, args):
    user = json.loads(Path(path).read_text()) if path else {}
    if user.get("command", command) != command:
        raise ParameterError(f"config is for {user['command']!r}, not {command!r}")
    cfg = _merge(DEFAULTS[command], {k: v for k, v in user.items() if k != "command"})
    cfg.setdefault("threads", 1)
    cfg.setdefault("override_range", False)
    cfg.setdefault("check_identity", False)
    if args.threads is not None:
        cfg["threads"] = args.threads
    if args.override_range:
        cfg["override_range"] = True
    if args.check_identity:
        cfg["check_identity"] = True
    return {"command": command, **cfg}


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = resolve_config(args.command, args.config, args)
        convolve.set_workers(cfg["threads"])
        out = args.out
        out.mkdir(parents=True, exist_ok=True)
        body = {k: v for k, v in cfg.items() if k != "command"}
        try:
            COMMANDS[args.command](body, out)
        finally:
            _dump({"command": args.command, **body}, out / "run_config.json")
    except ParameterError as exc:
        log.error("%s", exc)
        return EXIT_PARAM
    except ConvergenceError as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC
    except (FieldFormatError, OSError, json.JSONDecodeError) as exc:
        log.error("%s", exc)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
