"""The two planar toy versions: a rotation group on the circle and boosts on the hyperbola."""
import math
import sys
from pathlib import Path

import numpy as np

from lorentzfd.analogues import naive_intersection, so2_domain, so11_domain
from lorentzfd.export import so2_svg, so11_svg

hexagon = so2_domain(6)
print("SO(2), m = 6: vertex radius", hexagon.vertex_radius[0], "vs 2/sqrt(3) =", 2 / math.sqrt(3))
print("  projected arcs:", np.round(hexagon.arc_lengths, 12))

d = 0.8
dom = so11_domain(d, 4)
print(f"SO(1,1), d = {d}: projected segments on the upper branch")
for k, (a, b) in zip(range(-3, 4), dom.segments[1]):
    print(f"  face {k:+d}: [{a:+.6f}, {b:+.6f}] length {b - a:.12f}")

# Intersecting every half-plane instead of taking the union collapses to the origin.
for n in (1, 5, 10, 20):
    print(f"  naive intersection, |k| <= {n}: diameter {np.ptp(naive_intersection(d, n), axis=0).max():.3e}")

if len(sys.argv) > 1:
    out = Path(sys.argv[1])
    out.mkdir(parents=True, exist_ok=True)
    (out / "so2.svg").write_text(so2_svg(hexagon))
    (out / "so11.svg").write_text(so11_svg(dom))
    print("wrote", out / "so2.svg", out / "so11.svg")
