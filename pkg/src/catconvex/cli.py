"""Command-line front end: scene ingestion, experiment drivers, reports.

Every command emits a deterministic report (JSON, or CSV for tables);
identical configuration and seed produce byte-identical output.  Exit
codes: 0 for a passing verdict, 1 for a geometric refutation with a
witness, 2 for usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass

import numpy as np

from .convex_scenes import (
    Scene,
    SceneGraph,
    analyze_scene,
    local_convexity_check,
    scene_from_dict,
    select_eps,
)
from .errors import GeometryError, SceneFormatError
from .local_global import (
    CONVEX,
    GEODESIC_IN_C,
    cat_check_intrinsic,
    connect,
    convexity_verdict,
    sample_scene_points,
)
from .model_spaces import diameter_bound
from .spherical_trig import contraction_constant, half_midpoint_distance, max_midpoint_ratio

__all__ = ["RunConfig", "load_scene", "run", "main"]


@dataclass
class RunConfig:
    """Resolved invocation parameters shared by all commands."""

    command: str
    scene_path: str | None = None
    kappa_override: float | None = None
    tol: float = 1e-10
    resolution: float = 1e-2
    samples: int = 10000
    seed: int = 0
    output_path: str | None = None
    format: str = "json"

    def __post_init__(self):
        if self.tol <= 0 or self.resolution <= 0 or self.samples <= 0:
            raise GeometryError("tol, resolution, and samples must all be positive")


def load_scene(path: str, kappa_override: float | None = None) -> Scene:
    """Parse and structurally validate a scene file."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SceneFormatError(
            f"malformed scene JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})"
        ) from None
    if kappa_override is not None:
        data["kappa"] = kappa_override
    return scene_from_dict(data)


def _json_default(obj):
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, float) and math.isinf(obj):
        return "inf"
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _emit(text: str, config: RunConfig) -> None:
    if config.output_path:
        with open(config.output_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report(config: RunConfig, verdict: str, witnesses, certificates, timings, extra=None) -> str:
    doc = {
        "command": config.command,
        "config": {k: (v if not (isinstance(v, float) and math.isinf(v)) else "inf")
                   for k, v in asdict(config).items()},
        "verdict": verdict,
        "witnesses": witnesses,
        "certificates": certificates,
        "timings": timings,
    }
    if extra:
        doc.update(extra)
    return json.dumps(doc, sort_keys=True, indent=2, default=_json_default) + "\n"


def _cmd_dkappa(config: RunConfig, args) -> int:
    value = diameter_bound(args.kappa)
    print(repr(value) if math.isfinite(value) else "inf")
    text = _report(config, "ok", [], [], {"evaluations": 1}, {"dkappa": value})
    if config.output_path:
        _emit(text, config)
    return 0


def _cmd_trig(config: RunConfig, args) -> int:
    value = half_midpoint_distance(args.a, args.b, args.c)
    print(repr(value))
    text = _report(
        config, "ok", [], [], {"evaluations": 1},
        {"half_midpoint_distance": value, "sides": [args.a, args.b, args.c]},
    )
    if config.output_path:
        _emit(text, config)
    return 0


def _cmd_k_table(config: RunConfig, args) -> int:
    if not 0.0 < args.cmin <= args.cmax or args.cmax >= 2.0 * math.pi / 3.0:
        raise GeometryError(
            "side bounds must satisfy 0 < cmin <= cmax < 2*pi/3"
        )
    grid = np.linspace(args.cmin, args.cmax, args.steps)
    lines = ["C,K,max_ratio"]
    for C in grid:
        k_val = contraction_constant(float(C))
        ratio = max_midpoint_ratio(float(C), steps=args.ratio_steps)
        lines.append(f"{float(C)!r},{k_val!r},{ratio!r}")
    text = "\n".join(lines) + "\n"
    if config.format == "json":
        text = _report(
            config, "ok", [], [],
            {"evaluations": len(grid)},
            {"rows": [dict(zip(("C", "K", "max_ratio"), map(float, ln.split(","))))
                      for ln in lines[1:]]},
        )
    _emit(text, config)
    return 0


def _cmd_validate(config: RunConfig, args) -> int:
    scene = load_scene(config.scene_path, config.kappa_override)
    report = scene_validate_bounded(scene, config)
    witnesses = [
        {"cell": i, "witness": [list(map(float, w)) for w in c.witness]}
        for i, c in enumerate(report.cells)
        if c.witness is not None
    ]
    text = _report(
        config,
        "valid" if report.ok else "invalid",
        witnesses,
        [],
        {"samples": report.samples},
        {"validation": report.to_json_dict()},
    )
    _emit(text, config)
    return 0 if report.ok else 1


def scene_validate_bounded(scene: Scene, config: RunConfig):
    from .convex_scenes import validate_scene

    return validate_scene(scene, samples=min(config.samples, 4000), seed=config.seed)


def _cmd_check_local(config: RunConfig, args) -> int:
    scene = load_scene(config.scene_path, config.kappa_override)
    analysis = analyze_scene(scene, seed=config.seed)
    if args.eps is not None:
        eps, policy = args.eps, "flag"
    else:
        eps, policy = select_eps(scene, seed=config.seed, analysis=analysis)
    rng = np.random.default_rng(config.seed)
    points = sample_scene_points(scene, rng, args.points, analysis)
    if args.at is not None:
        points = np.vstack([np.array(json.loads(args.at), dtype=float)[None, :], points])
    witnesses = []
    reports = []
    for p in points:
        rep = local_convexity_check(
            scene, p, eps, samples=max(64, config.samples // max(1, len(points))),
            seed=config.seed, analysis=analysis,
        )
        reports.append(rep.to_json_dict())
        if not rep.passed:
            witnesses.append(rep.to_json_dict())
    text = _report(
        config,
        "locally_convex" if not witnesses else "witness_found",
        witnesses,
        [],
        {"points_checked": len(points), "eps_policy": policy, "eps": eps},
        {"checks": reports},
    )
    _emit(text, config)
    return 0 if not witnesses else 1


def _cmd_connect(config: RunConfig, args) -> int:
    scene = load_scene(config.scene_path, config.kappa_override)
    analysis = analyze_scene(scene, seed=config.seed)
    graph = SceneGraph(scene, resolution=config.resolution, seed=config.seed, analysis=analysis)
    pairs = []
    if args.x is not None and args.y is not None:
        pairs.append(
            (np.array(json.loads(args.x), dtype=float), np.array(json.loads(args.y), dtype=float))
        )
    else:
        rng = np.random.default_rng(config.seed)
        points = sample_scene_points(scene, rng, max(2 * args.pairs, 8), analysis)
        while len(pairs) < args.pairs:
            i, j = rng.integers(0, len(points), size=2)
            if i != j:
                pairs.append((points[i], points[j]))
    certificates = []
    all_ok = True
    for x, y in pairs:
        cert = connect(
            scene, x, y, resolution=config.resolution, tol=config.tol,
            seed=config.seed, graph=graph,
        )
        certificates.append(cert.to_json_dict())
        all_ok = all_ok and cert.verdict == GEODESIC_IN_C
    witnesses = [c["witness"] for c in certificates if c.get("witness")]
    text = _report(
        config,
        "all_connected" if all_ok else "refuted",
        witnesses,
        certificates,
        {"pairs": len(pairs), "dijkstra_runs": graph.dijkstra_runs},
    )
    _emit(text, config)
    return 0 if all_ok else 1


def _cmd_verdict(config: RunConfig, args) -> int:
    scene = load_scene(config.scene_path, config.kappa_override)
    report = convexity_verdict(
        scene,
        pair_samples=args.pairs,
        resolution=config.resolution,
        tol=config.tol,
        seed=config.seed,
    )
    doc = report.to_json_dict()
    text = _report(
        config,
        report.verdict,
        [] if doc["witness"] is None else [doc["witness"]],
        doc.pop("certificates"),
        {"pairs": len(report.pairs)},
        {"report": doc},
    )
    _emit(text, config)
    return 0 if report.verdict == CONVEX else 1


def _cmd_cat_check(config: RunConfig, args) -> int:
    scene = load_scene(config.scene_path, config.kappa_override)
    report = cat_check_intrinsic(
        scene,
        n_triangles=args.triangles,
        resolution=config.resolution,
        seed=config.seed,
    )
    doc = report.to_json_dict()
    text = _report(
        config,
        "comparisons_hold" if report.passed else "comparison_violated",
        doc["violations"],
        [],
        {"triangles": report.triangles, "comparisons": report.comparisons},
        {"report": doc},
    )
    _emit(text, config)
    return 0 if report.passed else 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catconvex",
        description="Convexity certification in constant-curvature model spaces",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--resolution", type=float, default=1e-2)
    common.add_argument("--samples", type=int, default=10000)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", dest="out", default=None, help="report file path")
    common.add_argument("--format", choices=("json", "csv"), default=None)
    scene_common = argparse.ArgumentParser(add_help=False)
    scene_common.add_argument("--scene", required=True, help="scene JSON path")
    scene_common.add_argument("--kappa", type=float, default=None, help="override scene curvature")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dkappa", parents=[common], help="print the diameter bound")
    p.add_argument("--kappa", type=float, required=True)

    p = sub.add_parser("trig", parents=[common], help="evaluate the midpoint distance")
    p.add_argument("--a", type=float, required=True)
    p.add_argument("--b", type=float, required=True)
    p.add_argument("--c", type=float, required=True)

    p = sub.add_parser("k-table", parents=[common], help="contraction constants over a grid")
    p.add_argument("--cmin", type=float, required=True)
    p.add_argument("--cmax", type=float, required=True)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--ratio-steps", type=int, default=24)

    sub.add_parser("validate", parents=[common, scene_common], help="validate a scene")

    p = sub.add_parser("check-local", parents=[common, scene_common], help="local convexity probes")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--points", type=int, default=12)
    p.add_argument("--at", default=None, help="extra probe point as a JSON array")

    p = sub.add_parser("connect", parents=[common, scene_common], help="certify geodesics")
    p.add_argument("--x", default=None, help="first endpoint as a JSON array")
    p.add_argument("--y", default=None, help="second endpoint as a JSON array")
    p.add_argument("--pairs", type=int, default=4)

    p = sub.add_parser("verdict", parents=[common, scene_common], help="scene convexity verdict")
    p.add_argument("--pairs", type=int, default=12)

    p = sub.add_parser("cat-check", parents=[common, scene_common], help="comparison check")
    p.add_argument("--triangles", type=int, default=60)

    return parser


_DISPATCH = {
    "dkappa": _cmd_dkappa,
    "trig": _cmd_trig,
    "k-table": _cmd_k_table,
    "validate": _cmd_validate,
    "check-local": _cmd_check_local,
    "connect": _cmd_connect,
    "verdict": _cmd_verdict,
    "cat-check": _cmd_cat_check,
}


def run(config: RunConfig, args) -> int:
    """Execute one resolved command; returns the process exit status."""
    return _DISPATCH[config.command](config, args)


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    default_format = "csv" if args.command == "k-table" else "json"
    try:
        config = RunConfig(
            command=args.command,
            scene_path=getattr(args, "scene", None),
            kappa_override=getattr(args, "kappa", None) if args.command not in ("dkappa",) else None,
            tol=args.tol,
            resolution=args.resolution,
            samples=args.samples,
            seed=args.seed,
            output_path=args.out,
            format=args.format or default_format,
        )
        return run(config, args)
    except (SceneFormatError,) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (GeometryError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
