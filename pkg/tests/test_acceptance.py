"""Acceptance criteria; each test records one PASS/FAIL line for the terminal summary."""
import math
import time

import numpy as np
import pytest

from lorentzfd import analogues
from lorentzfd import domain_carver as cv
from lorentzfd.config import RunConfig, make_config
from lorentzfd.cover import IDENTITY, central_power, mul_arrays, random_elements, rotation_rx
from lorentzfd.groups import Unrealizable, central_words, f_bound, find_lift_offsets, level_of, lifted_group, orbit_enumerate
from lorentzfd.halfspaces import PrismHandle, star_polygon
from lorentzfd.pipeline import run_pipeline
from lorentzfd.presets import presets
from conftest import carved


def _triple_residual(rng, n):
    g, h, k = (random_elements(rng, n) for _ in range(3))
    gh = mul_arrays(*g, *h)
    lhs = mul_arrays(*gh, *k)
    rhs = mul_arrays(*g, *mul_arrays(*h, *k))
    scale = np.maximum(1.0, lhs[2])
    return max(float(np.max(np.abs(a - b) / scale)) for a, b in zip(lhs, rhs)), (g, h, gh)


def test_criterion_1_group_law(rng, record):
    t0 = time.perf_counter()
    assoc, (g, h, gh) = _triple_residual(rng, 10_000)
    # pi is a homomorphism: the lifted product covers the SU(1,1) matrix product
    wg, wh = g[2] * np.exp(1j * g[1]), h[2] * np.exp(1j * h[1])
    z_mat = np.conj(wg) * h[0] + g[0] * wh
    w_mat = wg * wh + np.conj(g[0]) * h[0]
    w_lift = gh[2] * np.exp(1j * gh[1])
    scale = np.maximum(1.0, np.abs(w_mat))
    hom = float(np.max((np.abs(gh[0] - z_mat) + np.abs(w_lift - w_mat)) / scale))
    xs = 0.9 * np.sqrt(rng.random(100)) * np.exp(2j * math.pi * rng.random(100))
    turn = max(rotation_rx(x, 2 * math.pi).residual(central_power(1)) for x in xs)
    elapsed = time.perf_counter() - t0
    ok = assoc <= 1e-9 and hom <= 1e-9 and turn <= 1e-9 and elapsed < 5
    record("1 group law", ok, f"assoc {assoc:.2e}, hom {hom:.2e}, r_x(2pi) {turn:.2e}, {elapsed:.2f} s")
    assert ok


def test_criterion_2_star_polygons(record):
    rows = []
    ok = True
    for (p, k), n in zip([(7, 1), (4, 1), (5, 2), (7, 3)], [14, 8, 5, 14]):
        v = star_polygon(p, k)
        err = float(np.max(np.abs(np.abs(v) - 1 / math.cos(math.pi * k / (2 * p)))))
        ok &= len(v) == n and err <= 1e-9
        rows.append(f"({p},{k}):{len(v)}")
    record("2 star polygons", ok, " ".join(rows))
    assert ok


def _cover_samples(rng, n, rmax, amax):
    r = rng.uniform(0.05, rmax, n)
    z = r * np.sqrt(rng.random(n)) * 0.999 * np.exp(2j * math.pi * rng.random(n))
    return z, rng.uniform(-amax, amax, n), r


def test_criterion_3_prism_bounds(rng, record):
    g = lifted_group((2, 3, 7))
    th = g.theta
    qu = PrismHandle.for_query_window(0j, IDENTITY, th)
    # half interior points (rejection) and half boundary points (scaled by the section)
    inner = []
    while sum(len(c[0]) for c in inner) < 50_000:
        z, a, r = _cover_samples(rng, 50_000, 1.3, 2 * math.pi)
        keep = qu.contains(z, a, r)
        inner.append((z[keep], a[keep], r[keep]))
    r_in = np.concatenate([c[2] for c in inner])[:50_000]
    z, a, r = _cover_samples(rng, 50_000, 1.0, 2 * math.pi)
    r_bd = qu.sections(z, a, r) * r
    worst_u = float(max(r_in.max(), r_bd.max()) - 1 / math.cos(th / 2))

    atlas = orbit_enumerate(g, 0.1)
    worst_lo = worst_hi = -math.inf
    total = 0
    idx = np.arange(1, len(atlas))
    while total < 10_000:
        i = int(rng.choice(idx))
        x, rep = complex(atlas.points[i]), atlas.reps[i]
        q = PrismHandle.for_query_window(x, rep, th, 2 * math.pi)
        cz, ca, cr = _cover_samples(rng, 200, 1.3, math.pi)
        pz, pa, pr = mul_arrays(rep.z, rep.alpha, rep.r, cz, ca, cr)
        keep = q.contains(pz, pa, pr)
        pz, pa, pr = pz[keep], pa[keep], pr[keep]
        w = pr * np.exp(1j * pa)
        mid = np.abs(w - np.conj(x) * pz)
        worst_lo = max(worst_lo, float(np.max(np.abs(w) - np.abs(pz) - mid, initial=-math.inf)))
        worst_hi = max(worst_hi, float(np.max(mid - f_bound(abs(x), th), initial=-math.inf)))
        total += int(keep.sum())
    ok = worst_u <= 1e-9 and worst_lo <= 1e-9 and worst_hi <= 1e-9
    record("3 prism bounds", ok,
           f"Q_u max r - sec(theta/2) = {worst_u:.2e} over 1e5; Q_x lower {worst_lo:.2e}, "
           f"upper {worst_hi:.2e} over {total}")
    assert ok


@pytest.fixture(scope="module")
def e12_runs(tmp_path_factory):
    runs = []
    for j in range(2):
        out = tmp_path_factory.mktemp(f"run{j}")
        cfg = make_config(RunConfig(name="E_12", out=str(out)))
        t0 = time.perf_counter()
        res = run_pipeline(cfg, write=True)
        runs.append((res, time.perf_counter() - t0, out))
    return runs


def test_criterion_4_end_to_end(e12_runs, record):
    res, elapsed, _ = e12_runs[0]
    rep = res.report
    cx = res.complex
    compact = rep["status"] == "ok" and rep["checks"]["certificate"] and not any(
        f.label[0] == "bound" for f in cx.faces)
    closed = cx.mesh.is_closed()
    pairs = cv.face_pairing(cx)
    unmatched = len(set(cx.face_labels()) - {p.label for p in pairs})
    ok = elapsed < 120 and compact and closed and cv.is_involution(pairs) and unmatched == 0
    record("4 end-to-end E_12", ok,
           f"{elapsed:.1f} s, {rep['complex']['cells']} cells, closed={closed}, "
           f"{len(pairs)} paired faces, {unmatched} unmatched")
    assert ok


def test_criterion_5_tiling(e12, rng, record):
    rep = cv.verify_tiling(e12, 1000, rng, shell=1e-7)
    ok = rep.covered == rep.samples == 1000 and rep.interior_double == 0 and rep.uncertified == 0
    record("5 tiling", ok, f"{rep.covered}/{rep.samples} covered, {rep.interior_double} interior double covers")
    assert ok


def test_criterion_6_volume(record):
    v1 = cv.volume(carved((3, 3, 5), (0, 0, 0), 1))
    v3 = cv.volume(carved((3, 3, 5), (0, 0, 0), 3))
    vertex_gap = abs(v1 - v3) / max(v1, v3)
    ratios = []
    for sig, offs in [((2, 3, 7), (0, 0, 0)), ((3, 3, 4), (0, 0, 0)), ((3, 3, 5), (-1, -1, -1))]:
        cx = carved(sig, offs)
        grp = cx.atlas.group
        ratios.append(cv.volume(cx) / (grp.k * grp.signature.euler_defect))
    spread = max(ratios) / min(ratios) - 1
    ok = vertex_gap <= 0.01 and spread <= 0.01
    record("6 volume", ok, f"(3,3,5) vertex 1 vs 3 differ by {vertex_gap:.2e}; ratios "
           + ", ".join(f"{r:.6f}" for r in ratios) + f" (spread {spread:.2e})")
    assert ok


def test_criterion_7_symmetry(e12, record):
    res = cv.rotation_residual(e12)
    V = cv.euclideanize(e12).vertices
    ok = res <= 1e-6 and len(e12.corner_vertices()) > 0
    record("7 symmetry", ok, f"rotation by 2pi/7 Hausdorff {res:.2e} on {len(e12.corner_vertices())} "
           f"of {len(V)} mesh vertices")
    assert ok


def test_criterion_8_level_machinery(record):
    k237 = level_of((2, 3, 7), (0, 0, 0))
    offs335 = find_lift_offsets((3, 3, 5), 2, 2)
    found2 = not isinstance(offs335, Unrealizable) and level_of((3, 3, 5), offs335) == 2
    q = find_lift_offsets((2, 3, 9), 3, 20)
    unreal = isinstance(q, Unrealizable)
    cert = []
    for p in presets(max_level=2):
        if not p.realizable:
            continue
        grp = lifted_group(p.signature, p.offsets)
        found = central_words(grp, 2)
        cert.append(grp.k in found and not any(0 < m < grp.k for m in found))
    ok = k237 == 1 and found2 and unreal and all(cert)
    record("8 level machinery", ok, f"k(2,3,7)={k237}, (3,3,5) level-2 offsets {offs335}, "
           f"(2,3,9)^3 unrealizable={unreal}, minimal central word for {sum(cert)}/{len(cert)} presets")
    assert ok


def test_criterion_9_analogues(record):
    hexagon = analogues.so2_domain(6)
    rad_err = float(np.max(np.abs(hexagon.vertex_radius - 2 / math.sqrt(3))))
    arc_err = float(np.max(np.abs(hexagon.arc_lengths - math.pi / 3)))
    d = 0.8
    dom = analogues.so11_domain(d, 5)
    seg_err = max(float(np.max(np.abs(s[:, 1] - s[:, 0] - d))) for s in dom.segments.values())
    diam = float(np.ptp(analogues.naive_intersection(d, 40), axis=0).max())
    ok = rad_err <= 1e-12 and arc_err <= 1e-12 and seg_err <= 1e-12 and diam < 1e-9
    record("9 analogues", ok, f"hexagon radius err {rad_err:.1e}, arc err {arc_err:.1e}, "
           f"segment err {seg_err:.1e}, naive intersection diameter {diam:.1e}")
    assert ok


def test_criterion_10_determinism(e12_runs, record):
    (_, _, a), (_, _, b) = e12_runs
    same = {ext: (a / f"E_12.{ext}").read_bytes() == (b / f"E_12.{ext}").read_bytes()
            for ext in ("json", "obj", "svg")}
    ok = same["json"] and same["obj"]
    record("10 determinism", ok, ", ".join(f"{k} identical={v}" for k, v in same.items()))
    assert ok
