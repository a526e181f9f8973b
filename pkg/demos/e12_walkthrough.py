"""Build the fundamental domain of the level-1 lift of the (2,3,7) triangle group step by step."""
import math

import numpy as np

from lorentzfd import domain_carver as cv
from lorentzfd.groups import lifted_group, orbit_enumerate

# The lift: rotations through 2 pi / alpha_i about the triangle vertices, no central offsets.
group = lifted_group((2, 3, 7))
print(f"level k = {group.k}, fixed vertex of order p = {group.p}, theta = pi k / p = {group.theta:.6f}")
print("relation residuals:", {k: f"{v:.1e}" for k, v in group.relation_residuals().items()})

# Orbit points of u = 0 whose prisms can still reach the domain.
atlas = orbit_enumerate(group, 0.1)
print(f"atlas: {len(atlas)} orbit points with f(|x|) > {atlas.eps}")

# Carve F_e out of the wedge slab |t| <= tan(theta / 2).
cx = cv.carve(atlas)
cert = cv.certificate(cx)
print(f"F_e: {len(cx.cells)} convex cells, margin {cert['margin']:.4f} > excluded f {cert['max_excluded_f']:.4f}")
V, E, F = cv.polyhedron_counts(cx)
print(f"polyhedron: V={V} E={E} F={F}, V-E+F={V - E + F}, closed mesh: {cx.mesh.is_closed()}")

corners = cx.corner_vertices()
print(f"largest corner modulus {np.sqrt(1 + corners[:, 2] ** 2).max():.12f}, sec(pi/14) = {1 / math.cos(math.pi / 14):.12f}")

# Faces come in pairs identified by group elements.
for p in cv.face_pairing(cx):
    print(f"  {cv.label_str(p.label):>10s} -> {cv.label_str(p.partner):<10s} "
          f"word {cv.label_word(p.label, atlas):<24s} mismatch {p.hausdorff:.1e}")

vol = cv.volume(cx)
print(f"volume {vol:.8f}; divided by k (1 - sum 1/alpha) gives {vol / group.signature.euler_defect:.8f} "
      f"(pi^2 / 2 = {math.pi ** 2 / 2:.8f})")
print(f"rotation residual {cv.rotation_residual(cx):.1e}")

rep = cv.verify_tiling(cx, 500, np.random.default_rng(0))
print(f"tiling: {rep.covered}/{rep.samples} covered, {rep.interior_double} interior double covers")
