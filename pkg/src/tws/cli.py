"""Command line interface: constants, check, search, plotdata, whitney, cz.

Configuration and reports are JSON (sorted keys, so identical runs are
byte-identical); plot data is comma-separated CSV with a header row.  The
environment variable TWS_THREADS caps the thread pool used for independent
condition evaluations; results are assembled in a fixed order regardless of
scheduling, so parallel runs reproduce sequential output byte for byte.

Exit codes: 0 all hard assertions pass, 1 assertion or witness failure,
2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import backend, checks
from . import conditions as cond
from . import corpus
from . import decompositions as dec
from . import operators as ops
from .dyadic import locate
from .measures import Interval, StepAtomicMeasure, WeightPair
from .poisson import PartitionData, poisson_std

__all__ = ["main"]


class ConfigError(ValueError):
    pass


def _load_measure(spec, base_dir: Path) -> StepAtomicMeasure:
    if isinstance(spec, dict) and "builtin" in spec:
        kind = spec["builtin"]
        if kind == "lebesgue":
            return corpus.lebesgue_on(
                float(spec["a"]), float(spec["b"]), int(spec.get("resolution", 0))
            )
        if kind == "dirac":
            return corpus.dirac(float(spec["x"]), float(spec.get("m", 1.0)))
        raise ConfigError(f"unknown builtin measure {kind!r}")
    if isinstance(spec, dict) and "path" in spec:
        path = base_dir / spec["path"]
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read measure file {path}: {exc}") from exc
        try:
            return StepAtomicMeasure.from_json(text)
        except (ValueError, json.JSONDecodeError) as exc:
            raise ConfigError(f"measure file {path}: {exc}") from exc
    if isinstance(spec, dict):
        try:
            return StepAtomicMeasure.from_json_dict(spec)
        except ValueError as exc:
            raise ConfigError(f"inline measure: {exc}") from exc
    raise ConfigError("measure spec must be an object")


def _load_config(path: str | None, seed_override: int | None):
    if path is None:
        cfg = {}
        base = Path.cwd()
    else:
        p = Path(path)
        try:
            cfg = json.loads(p.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        base = p.parent
    if seed_override is not None:
        cfg["seed"] = seed_override
    cfg.setdefault("seed", 0)
    cfg.setdefault("p", 2.0)
    cfg.setdefault("budgets", {})
    return cfg, base


def _weights_from_config(cfg, base) -> WeightPair:
    wspec = cfg.get("weights")
    if wspec is None:
        rng = np.random.default_rng(int(cfg["seed"]))
        return corpus.random_weight_pair(rng, p=float(cfg["p"]))
    return WeightPair(
        sigma=_load_measure(wspec["sigma"], base),
        omega=_load_measure(wspec["omega"], base),
        p=float(cfg["p"]),
    )


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("TWS_THREADS", "1")))
    except ValueError:
        return 1


def _ordered_map(fn, items):
    n = _threads()
    if n <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def _np_default(o):
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_np_default) + "\n"


def _resolve_out(args, cfg) -> str | None:
    if args.out:
        return args.out
    return cfg.get("outputs", {}).get("dir")


def _emit(text: str, out_dir: str | None, filename: str) -> None:
    if out_dir:
        path = Path(out_dir)
        path.mkdir(parents=True, exist_ok=True)
        (path / filename).write_text(text)
        print(f"wrote {path / filename}")
    else:
        sys.stdout.write(text)


# ----------------------------------------------------------------------
# constants
# ----------------------------------------------------------------------
def cmd_constants(args) -> int:
    cfg, base = _load_config(args.config, args.seed)
    w = _weights_from_config(cfg, base)
    w.require_no_common_point_masses()
    seed = int(cfg["seed"])
    b = cfg["budgets"]
    tnat = ops.SearchBudget(
        points_per_decade=int(b.get("tnat_points_per_decade", 6)),
        refine_iters=int(b.get("tnat_refine", 8)),
    )
    depth = int(b.get("family_depth", 8))
    n_random = int(b.get("family_random", 2000))
    fam = cond.interval_family(
        w, depth=depth, n_random=n_random, rng=np.random.default_rng(seed)
    )
    stride = max(1, len(fam) // int(b.get("strengthened_family_cap", 400)))

    def _ap(_):
        return cond.ap_constant(w, fam)

    def _strength(_):
        return cond.strengthened_ap(w, fam[::stride])

    def _forward(_):
        return cond.forward_testing(
            w,
            subset_budget=int(b.get("forward_subsets", 6)),
            rng=np.random.default_rng(seed + 1),
            tnat_budget=tnat,
        )

    def _dual(_):
        return cond.dual_testing(
            w,
            f_budget=int(b.get("dual_f_budget", 4)),
            rng=np.random.default_rng(seed + 2),
            tnat_budget=tnat,
        )

    def _maximal(_):
        return cond.maximal_norms(
            w, f_budget=int(b.get("maximal_f_budget", 4)),
            rng=np.random.default_rng(seed + 3),
        )

    ap_rep, (s_rep, h_rep), f_rep, d_rep, (m_rep, md_rep) = _ordered_map(
        lambda fn: fn(None), [_ap, _strength, _forward, _dual, _maximal]
    )

    # decomposition conditions over a root cube covering the sigma support
    bounds = w.sigma.support_bounds()
    if bounds is None:
        root = locate(0, 0.0, 0)
        piv_ratio, piv_parts = 0.0, PartitionData(root, (root,))
        poi_ratio, poi_parts = 0.0, PartitionData(root, (root,))
    else:
        lo, hi = bounds
        top = math.ceil(math.log2(max(hi - lo, 2.0 ** -w.sigma.resolution))) + 1
        root = locate(0, 0.5 * (lo + hi), top)
        piv_ratio, piv_parts = cond.pivotal_search(
            w, root, max_depth=int(b.get("pivotal_depth", 6))
        )
        poi_ratio, poi_parts = cond.poisson_condition_search(
            w, root, rounds=int(b.get("poisson_rounds", 8))
        )
    gamma_sigma = None if w.sigma.is_zero() else cond.doubling_gamma(w.sigma)
    gamma_omega = None if w.omega.is_zero() else cond.doubling_gamma(w.omega)
    asym_rep = cond.asym_ap(
        w, float(b.get("asym_c0", 4.0)), rng=np.random.default_rng(seed + 4)
    )

    reports = [ap_rep, s_rep, h_rep, f_rep, d_rep, m_rep, md_rep, asym_rep]
    witness_failures = []
    if args.verify_witness:
        for rep in reports:
            if not rep.witness:
                continue
            redo = cond.reevaluate_witness(w, rep)
            if abs(redo - rep.estimate) > 1e-9 * max(1.0, abs(rep.estimate)):
                witness_failures.append(
                    {"condition": rep.condition, "stored": rep.estimate, "replayed": redo}
                )

    chains = {
        "plain_le_2x_strengthened": ap_rep.estimate <= 2.0 * s_rep.estimate * (1 + 1e-9),
        "half_le_2x_strengthened": h_rep.estimate <= 2.0 * s_rep.estimate * (1 + 1e-9),
        "strengthened_over_plain": (
            s_rep.estimate / ap_rep.estimate if ap_rep.estimate > 0 else None
        ),
    }
    doc = {
        "backend": backend.BACKEND,
        "seed": seed,
        "p": w.p,
        "reports": {r.condition: r.to_json_dict() for r in reports},
        "pivotal": {
            "ratio": piv_ratio,
            "pieces": [[c.j, c.k] for c in piv_parts.pieces],
            "root": [root.j, root.k],
        },
        "poisson-condition": {
            "ratio": poi_ratio,
            "pieces": [[c.j, c.k] for c in poi_parts.pieces],
            "root": [root.j, root.k],
        },
        "doubling": {"sigma": gamma_sigma, "omega": gamma_omega},
        "chains": chains,
        "witness_failures": witness_failures,
    }
    _emit(_json_text(doc), _resolve_out(args, cfg), "constants.json")
    if witness_failures:
        print("witness verification FAILED", file=sys.stderr)
        return 1
    return 0


# ----------------------------------------------------------------------
# check
# ----------------------------------------------------------------------
def cmd_check(args) -> int:
    cfg, _ = _load_config(args.config, args.seed)
    seed = int(cfg["seed"])
    scale = float(cfg.get("budgets", {}).get("check_scale", 1.0))
    try:
        results, ok = checks.run_suite(args.suite, seed=seed, scale=scale)
    except KeyError as exc:
        raise ConfigError(str(exc)) from exc
    rows = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        kind = "hard" if r.hard else "soft"
        print(f"[{status}] ({kind}) {r.name}  {json.dumps(r.info, sort_keys=True)}")
        rows.append(r.row())
    doc = {
        "backend": backend.BACKEND,
        "seed": seed,
        "suite": args.suite,
        "results": rows,
        "all_hard_passed": bool(ok),
    }
    out_dir = _resolve_out(args, cfg)
    if out_dir:
        _emit(_json_text(doc), out_dir, f"check_{args.suite}.json")
    print(("all hard assertions passed" if ok else "HARD ASSERTION FAILURE"))
    return 0 if ok else 1


# ----------------------------------------------------------------------
# search
# ----------------------------------------------------------------------
SEARCH_TARGETS = ("strengthened-over-plain", "pivotal-vs-dual", "forward-over-ap")


def cmd_search(args) -> int:
    cfg, base = _load_config(args.config, args.seed)
    seed = int(cfg["seed"])
    gen = cfg.get("generator", {})
    count = int(gen.get("count", 12))
    top_k = int(gen.get("k", 5))
    resolution = int(gen.get("resolution", 5))
    p = float(gen.get("p", cfg["p"]))
    if args.target not in SEARCH_TARGETS:
        raise ConfigError(
            f"unknown search target {args.target!r}; choose from {SEARCH_TARGETS}"
        )
    rng = np.random.default_rng(seed)
    findings = []
    for idx in range(count):
        w = corpus.random_weight_pair(
            rng, p=p, resolution=resolution, doubling=bool(gen.get("doubling", True))
        )
        fam = cond.interval_family(w, depth=6, n_random=60, rng=rng)
        ap_rep = cond.ap_constant(w, fam)
        entry = {
            "index": idx,
            "sigma": w.sigma.to_json_dict(),
            "omega": w.omega.to_json_dict(),
            "ap": ap_rep.to_json_dict(),
        }
        if args.target == "strengthened-over-plain":
            # one family for both sides: the pointwise tail-weight bound then
            # guarantees the ratio never drops below 1/2
            sub = fam[:: max(1, len(fam) // 80)]
            s_rep, _ = cond.strengthened_ap(w, sub)
            ap_sub = cond.ap_constant(w, sub)
            ratio = s_rep.estimate / ap_sub.estimate if ap_sub.estimate > 0 else 0.0
            entry["ap"] = ap_sub.to_json_dict()
            entry["strengthened"] = s_rep.to_json_dict()
        elif args.target == "pivotal-vs-dual":
            lo, hi = w.sigma.support_bounds()
            root = locate(0, 0.5 * (lo + hi),
                          math.ceil(math.log2(max(hi - lo, 1e-9))) + 1)
            piv, parts = cond.pivotal_search(w, root, max_depth=5)
            d_rep = cond.dual_testing(
                w, f_budget=2, rng=np.random.default_rng(seed + idx)
            )
            ratio = piv / d_rep.estimate if d_rep.estimate > 0 else math.inf
            entry["pivotal_ratio"] = piv
            entry["dual"] = d_rep.to_json_dict()
        else:
            f_rep = cond.forward_testing(
                w, subset_budget=3, rng=np.random.default_rng(seed + idx)
            )
            ratio = f_rep.estimate / ap_rep.estimate if ap_rep.estimate > 0 else 0.0
            entry["forward"] = f_rep.to_json_dict()
        entry["ratio"] = ratio
        findings.append(entry)
    findings.sort(key=lambda e: (-e["ratio"], e["index"]))
    doc = {
        "backend": backend.BACKEND,
        "seed": seed,
        "target": args.target,
        "findings": findings[:top_k],
    }
    _emit(_json_text(doc), _resolve_out(args, cfg), f"search_{args.target}.json")
    return 0


# ----------------------------------------------------------------------
# plotdata
# ----------------------------------------------------------------------
PLOT_QUANTITIES = ("tnat-profile", "poisson-profile", "superlevel", "condition-vs-scale")


def cmd_plotdata(args) -> int:
    cfg, base = _load_config(args.config, args.seed)
    w = _weights_from_config(cfg, base)
    seed = int(cfg["seed"])
    nu = w.sigma
    lines = []
    if args.quantity == "tnat-profile":
        lines.append("x,t_natural")
        bounds = nu.support_bounds()
        budget = ops.SearchBudget(points_per_decade=8, refine_iters=8)
        if bounds is None:
            c, span = 0.0, 2.0  # zero measure: emit the all-zero column
        else:
            c = 0.5 * (bounds[0] + bounds[1])
            span = max(bounds[1] - bounds[0], 2.0 ** -nu.resolution)
        for i in range(120):
            x = c + span * (i - 60) / 30.0
            lines.append(f"{x!r},{float(ops.t_natural(nu, x, budget))!r}")
    elif args.quantity == "poisson-profile":
        lines.append("scale,poisson_tail")
        bounds = nu.support_bounds()
        if bounds is not None:
            c = 0.5 * (bounds[0] + bounds[1])
            for j in range(-nu.resolution, 8):
                q = Interval(c - 2.0**j, c + 2.0**j)
                lines.append(f"{j},{float(poisson_std(q, nu))!r}")
    elif args.quantity == "superlevel":
        lines.append("level,cell_index,cell_left,cell_width")
        budget = ops.SearchBudget(points_per_decade=6, refine_iters=6)
        prof = dec.mesh_profile(nu, budget=budget)
        for k in range(-2, 4):
            om = dec.superlevel_set(nu, k, profile=prof)
            width = 2.0**om.scale
            for cell in om.cells:
                lines.append(f"{k},{cell},{float(cell * width)!r},{width!r}")
    elif args.quantity == "condition-vs-scale":
        lines.append("scale,ap_value")
        bounds = nu.support_bounds()
        if bounds is not None:
            c = 0.5 * (bounds[0] + bounds[1])
            for j in range(-nu.resolution, 8):
                q = Interval(c - 2.0**j, c + 2.0**j)
                lines.append(f"{j},{float(cond.ap_value(w, q))!r}")
    else:
        raise ConfigError(
            f"unknown quantity {args.quantity!r}; choose from {PLOT_QUANTITIES}"
        )
    _emit("\n".join(lines) + "\n", _resolve_out(args, cfg), f"plot_{args.quantity}.csv")
    return 0


# ----------------------------------------------------------------------
# whitney / cz
# ----------------------------------------------------------------------
def cmd_whitney(args) -> int:
    cfg, base = _load_config(args.config, args.seed)
    w = _weights_from_config(cfg, base)
    nu = w.sigma
    budget = ops.SearchBudget(points_per_decade=6, refine_iters=6)
    level = int(cfg.get("whitney", {}).get("level", 0))
    om = dec.superlevel_set(nu, level, budget=budget)
    wd = dec.whitney(om, level=level)
    info = wd.verify() if wd.cubes else {}
    doc = {
        "level": level,
        "mesh_scale": om.scale,
        "omega_cells": list(om.cells),
        "cubes": [[q.j, q.k] for q in wd.cubes],
        "constants": info,
    }
    _emit(_json_text(doc), _resolve_out(args, cfg), "whitney.json")
    return 0


def cmd_cz(args) -> int:
    cfg, base = _load_config(args.config, args.seed)
    w = _weights_from_config(cfg, base)
    seed = int(cfg["seed"])
    rng = np.random.default_rng(seed)
    f = corpus.random_step_function(rng, w.sigma, signed=True)
    gamma = max(2.0, cond.doubling_gamma(w.sigma))
    t_cfg = cfg.get("cz", {}).get("t")
    t = dec.first_height(f, w.sigma, gamma) if t_cfg is None else int(t_cfg)
    dz = dec.cz_split(f, w.sigma, gamma, t)
    doc = {
        "gamma": gamma,
        "t": t,
        "f": {str(k): v for k, v in sorted(f.values.items())},
        "principal": [
            {"cube": [c.j, c.k], "avg": a} for c, a in dz.principal
        ],
        "children": [
            [{"cube": [c.j, c.k], "avg": a} for c, a in kids]
            for kids in dz.children
        ],
        "doubling_warning": dz.doubling_warning,
        "invariants": checks.verify_cz(dz),
    }
    _emit(_json_text(doc), _resolve_out(args, cfg), "cz.json")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="tws",
        description="two-weight testing machinery for maximal Hilbert transforms",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", default=None, help="JSON config file")
        sp.add_argument("--seed", type=int, default=None, help="override seed")
        sp.add_argument("--out", default=None, help="output directory")

    sp = sub.add_parser("constants", help="estimate every testing constant")
    common(sp)
    sp.add_argument(
        "--verify-witness",
        action="store_true",
        help="re-evaluate all witnesses and require 1e-9 reproduction",
    )
    sp.set_defaults(fn=cmd_constants)

    sp = sub.add_parser("check", help="run a verification suite")
    sp.add_argument("suite", nargs="?", default="all")
    common(sp)
    sp.set_defaults(fn=cmd_check)

    sp = sub.add_parser("search", help="rank random weight pairs by a ratio")
    sp.add_argument("target", choices=SEARCH_TARGETS)
    common(sp)
    sp.set_defaults(fn=cmd_search)

    sp = sub.add_parser("plotdata", help="emit CSV samples of a quantity")
    sp.add_argument("quantity", choices=PLOT_QUANTITIES)
    common(sp)
    sp.set_defaults(fn=cmd_plotdata)

    sp = sub.add_parser("whitney", help="emit a Whitney decomposition as JSON")
    common(sp)
    sp.set_defaults(fn=cmd_whitney)

    sp = sub.add_parser("cz", help="emit a stopping-cube split as JSON")
    common(sp)
    sp.set_defaults(fn=cmd_cz)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
