"""Pipeline: group -> atlas -> carve -> pairing -> checks -> report."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import domain_carver as cv
from .config import EPS_FLOOR, ConfigError, RunConfig
from .groups import (
    LiftedGroup,
    NoAdmissibleFixedPointError,
    Unrealizable,
    find_lift_offsets,
    level_of,
    lifted_group,
    orbit_enumerate,
)
from .presets import OFFSET_BOUND

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SYMMETRY_TOL = 1e-6


class VerificationError(RuntimeError):
    pass


def sig12(x: float) -> float:
    """Round to 12 significant digits (the report float format)."""
    return float(f"{x:.12g}")


def round_floats(obj):
    if isinstance(obj, float):
        return sig12(obj) if math.isfinite(obj) else None
    if isinstance(obj, (np.floating,)):
        return round_floats(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {k: round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v) for v in obj]
    return obj


@dataclass
class PipelineResult:
    config: RunConfig
    report: dict
    group: LiftedGroup | None = None
    complex: cv.PolyComplex | None = None
    timings: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.report["status"] == "ok" and all(self.report["checks"].values())

    @property
    def unrealizable(self) -> bool:
        return self.report["status"] == "unrealizable"


def resolve_group(cfg: RunConfig) -> LiftedGroup | Unrealizable:
    """Offsets from the config (searched when ``auto``) and the conjugated lift."""
    if cfg.offsets == "auto":
        found = find_lift_offsets(cfg.signature, cfg.target_level, OFFSET_BOUND)
        if isinstance(found, Unrealizable):
            return found
        offsets = tuple(found)
    else:
        offsets = tuple(cfg.offsets)
        lvl = level_of(cfg.signature, offsets)
        if cfg.level is not None and lvl != cfg.level:
            raise ConfigError(f"offsets {offsets} give level {lvl}, not the requested {cfg.level}")
    try:
        return lifted_group(cfg.signature, offsets, cfg.vertex)
    except NoAdmissibleFixedPointError as exc:
        raise ConfigError(str(exc)) from exc


def carve_adaptive(group: LiftedGroup, eps: float):
    """Carve with cutoff ``eps``, halving it until the certificate holds."""
    attempts = []
    while True:
        atlas = orbit_enumerate(group, eps)
        try:
            cx = cv.carve(atlas)
            cert = cv.certificate(cx)
            attempts.append(eps)
            if cert["passes"]:
                return cx, cert, attempts
            reason = f"certificate margin {cert['margin']:.3g} <= {cert['max_excluded_f']:.3g}"
        except cv.CutoffTooLargeError as exc:
            attempts.append(eps)
            reason = str(exc)
        if eps / 2 < EPS_FLOOR:
            raise cv.CutoffTooLargeError(f"no cutoff down to {EPS_FLOOR:g} certifies the domain: {reason}")
        log.info("eps=%g rejected (%s); halving", eps, reason)
        eps /= 2


def _unrealizable_report(cfg: RunConfig, u: Unrealizable) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "name": cfg.label(),
        "status": "unrealizable",
        "group": {"signature": list(cfg.signature), "level": cfg.target_level},
        "reason": u.reason,
        "checks": {},
    }


def run_pipeline(cfg: RunConfig, write: bool = False) -> PipelineResult:
    """Run every stage for ``cfg``; with ``write`` also export the artifacts."""
    cfg = cfg.validate()
    timings = {}
    t0 = time.perf_counter()
    group = resolve_group(cfg)
    if isinstance(group, Unrealizable):
        res = PipelineResult(cfg, _unrealizable_report(cfg, group))
        if write:
            from .export import write_artifacts
            write_artifacts(res)
        return res
    timings["group"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    cx, cert, attempts = carve_adaptive(group, cfg.epsilon)
    timings["carve"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    try:
        pairs = cv.face_pairing(cx)
        pairing_error = ""
    except cv.PairingIncompleteError as exc:
        pairs, pairing_error = [], str(exc)
    timings["pairing"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    tiling = cv.verify_tiling(cx, cfg.samples, rng, shell=1e-7) if cfg.samples else None
    timings["tiling"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    vol = cv.volume(cx)
    chart_vol = cv.chart_volume(cx)
    defect = group.k * group.signature.euler_defect
    rot = cv.rotation_residual(cx)
    refl = cv.reflection_residual(cx)
    V, E, F = cv.polyhedron_counts(cx)
    mesh = cx.mesh
    timings["measures"] = time.perf_counter() - t0

    atlas = cx.atlas
    n_cutters = 2 + (len(atlas) - 1) * len(cv._m_range(group.theta))
    checks = {
        "certificate": bool(cert["passes"]),
        "closed_mesh": bool(mesh.is_closed()),
        "pairing_complete": bool(pairs) and cv.is_involution(pairs),
        "tiling": tiling.ok() if tiling else True,
        "rotation_symmetry": bool(rot <= SYMMETRY_TOL),
    }
    report = {
        "schema_version": SCHEMA_VERSION,
        "name": cfg.label(),
        "status": "ok",
        "group": {
            "signature": list(group.signature.orders),
            "level": group.k,
            "offsets": list(group.offsets),
            "fixed_vertex": group.fixed_index + 1,
            "p": group.p,
            "theta": group.theta,
            "central_m": group.central_m,
            "relation_residual": max(group.relation_residuals().values()),
        },
        "atlas": {
            "epsilon": atlas.eps,
            "epsilon_attempts": attempts,
            "size": len(atlas),
            "points_used": len(cx.stats.used_points),
            "points_processed": cx.stats.processed,
        },
        "cutters": n_cutters,
        "certificate": cert,
        "complex": {
            "cells": len(cx.cells),
            "vertices": V,
            "edges": E,
            "faces": F,
            "face_labels": len(cx.face_labels()),
            "mesh_vertices": int(len(mesh.vertices)),
            "mesh_triangles": int(len(mesh.triangles)),
            "closed": checks["closed_mesh"],
            "euler_characteristic": mesh.euler_characteristic(),
            "components": mesh.components(),
            "max_vertex_r": float(np.max(np.sqrt(1 + cx.corner_vertices()[:, 2] ** 2))),
        },
        "volume": {
            "lorentz": vol,
            "chart": chart_vol,
            "expected": cv.expected_volume(group.signature, group.k),
            "ratio": vol / defect,
            "chart_ratio": chart_vol / defect,
        },
        "pairing": [
            {
                "face": cv.label_str(p.label),
                "partner": cv.label_str(p.partner),
                "word": cv.label_word(p.label, atlas),
                "hausdorff": p.hausdorff,
                "flag": [p.flag[0][0], p.flag[0][1], p.flag[0][2],
                         p.flag[1][0], p.flag[1][1], p.flag[1][2]],
            }
            for p in pairs
        ],
        "pairing_error": pairing_error,
        "tiling": {
            "samples": tiling.samples if tiling else 0,
            "covered": tiling.covered if tiling else 0,
            "interior_double": tiling.interior_double if tiling else 0,
            "uncertified": tiling.uncertified if tiling else 0,
            "shell": 1e-7,
            "seed": cfg.seed,
        },
        "symmetry": {
            "rotation_angle": 2 * group.theta,
            "rotation_residual": rot,
            "reflection_residual": refl,
        },
        "checks": checks,
    }
    res = PipelineResult(cfg, round_floats(report), group, cx, timings)
    if write:
        from .export import write_artifacts
        write_artifacts(res)
    return res
