"""Command line interface.

Exit codes: 0 success, 2 invalid configuration, 3 unrealizable group,
4 failed verification.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import analogues, domain_carver as cv
from .config import ConfigError, RunConfig, make_config
from .export import so2_svg, so11_svg, write_artifacts, _write
from .groups import NotARelatorError, SignatureNotHyperbolicError
from .presets import preset, presets
from .pipeline import run_pipeline

EXIT_OK, EXIT_CONFIG, EXIT_UNREALIZABLE, EXIT_VERIFY = 0, 2, 3, 4


def _group_args(p: argparse.ArgumentParser):
    p.add_argument("--preset", help="named group such as E_12")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--signature", help="a,b,c")
    p.add_argument("--level", help="target level k")
    p.add_argument("--offsets", help="s1,s2,s3 or auto")
    p.add_argument("--vertex", help="auto, 1, 2 or 3")
    p.add_argument("--epsilon", help="initial orbit cutoff")
    p.add_argument("--samples", help="tiling samples")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", dest="formats", help="comma list of obj,json,svg")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lorentzfd", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("presets", help="preset catalogue")
    pr.add_argument("action", choices=["list"])
    pr.add_argument("--max-level", type=int, default=3)
    pr.add_argument("--json", action="store_true")

    _group_args(sub.add_parser("compute", help="carve, verify and write all artifacts"))
    ex = sub.add_parser("export", help="carve and write only the requested formats")
    _group_args(ex)

    ve = sub.add_parser("verify", help="verification runs")
    ve.add_argument("what", choices=["tiling"])
    _group_args(ve)

    an = sub.add_parser("analogue", help="two-dimensional analogues")
    an.add_argument("kind", choices=["so2", "so11"])
    an.add_argument("--m", type=int, default=6, help="order of the cyclic group (so2)")
    an.add_argument("--d", type=float, default=0.8, help="boost parameter (so11)")
    an.add_argument("--n", type=int, default=4, help="truncation |k| <= n (so11)")
    an.add_argument("--out", help="directory for an SVG")
    return ap


def config_from_args(args) -> RunConfig:
    base = RunConfig()
    if args.preset:
        try:
            pre = preset(args.preset)
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
        base = replace(base, signature=pre.signature, level=pre.level,
                       offsets=pre.offsets if pre.offsets else "auto", name=pre.name)
    overrides = {k: getattr(args, k) for k in
                 ("signature", "level", "offsets", "vertex", "epsilon", "samples", "out", "formats")}
    if overrides["offsets"] is None and (overrides["signature"] or overrides["level"]) and not args.preset:
        overrides["offsets"] = "auto"
    return make_config(base, args.config, **overrides)


def _print_summary(rep: dict, out=sys.stdout):
    if rep["status"] != "ok":
        print(f"{rep['name']}: {rep['status']} ({rep.get('reason', '')})", file=out)
        return
    g, c, v, t = rep["group"], rep["complex"], rep["volume"], rep["tiling"]
    print(f"{rep['name']}: signature {tuple(g['signature'])} level {g['level']} "
          f"offsets {tuple(g['offsets'])} p={g['p']}", file=out)
    print(f"  atlas {rep['atlas']['size']} points at eps={rep['atlas']['epsilon']}, "
          f"margin {rep['certificate']['margin']:.4g}", file=out)
    print(f"  F_e: {c['cells']} cells, V={c['vertices']} E={c['edges']} F={c['faces']}, "
          f"closed={c['closed']}, chi={c['euler_characteristic']}", file=out)
    print(f"  volume {v['lorentz']:.8g}, ratio {v['ratio']:.8g}", file=out)
    print(f"  pairs {len(rep['pairing'])}, tiling {t['covered']}/{t['samples']} covered, "
          f"{t['interior_double']} double", file=out)
    print(f"  rotation residual {rep['symmetry']['rotation_residual']:.3g}", file=out)
    print("  checks: " + ", ".join(f"{k}={v}" for k, v in rep["checks"].items()), file=out)


def _run(args, write: bool) -> int:
    cfg = config_from_args(args)
    if args.command == "verify":
        cfg = replace(cfg, formats=())
    res = run_pipeline(cfg, write=write)
    _print_summary(res.report)
    if res.unrealizable:
        return EXIT_UNREALIZABLE
    if args.command == "verify":
        return EXIT_OK if res.report["checks"]["tiling"] else EXIT_VERIFY
    return EXIT_OK if res.ok else EXIT_VERIFY


def _analogue(args) -> int:
    if args.kind == "so2":
        try:
            dom = analogues.so2_domain(args.m)
        except analogues.UnboundedPolytopeError as exc:
            raise ConfigError(str(exc)) from exc
        info = {"m": dom.m, "vertex_radius": float(dom.vertex_radius[0]),
                "arc_length": float(dom.arc_lengths[0])}
        svg = so2_svg(dom)
    else:
        try:
            dom = analogues.so11_domain(args.d, args.n)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        seg = dom.segments[1]
        info = {"d": dom.d, "n": dom.n, "segment_length": float(seg[0, 1] - seg[0, 0]),
                "naive_intersection_diameter": float(np.ptp(analogues.naive_intersection(dom.d, dom.n), axis=0).max())}
        svg = so11_svg(dom)
    print(json.dumps(info, sort_keys=True))
    if args.out:
        _write(Path(args.out) / f"{args.kind}.svg", svg)
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "presets":
            rows = [p.as_row() for p in presets(args.max_level)]
            if args.json:
                print(json.dumps(rows, indent=2))
            else:
                for r in rows:
                    tag = ",".join(map(str, r["offsets"])) if r["realizable"] else "unrealizable"
                    print(f"{r['name']:6s} k={r['level']} signature={tuple(r['signature'])} offsets={tag}")
            return EXIT_OK
        if args.command == "analogue":
            return _analogue(args)
        return _run(args, write=args.command in ("compute", "export"))
    except (ConfigError, SignatureNotHyperbolicError, NotARelatorError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (cv.CutoffTooLargeError, cv.NonCompactError) as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY


if __name__ == "__main__":
    sys.exit(main())
