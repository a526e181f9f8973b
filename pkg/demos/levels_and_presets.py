"""Which named groups can be realised by lifting the vertex rotations with central offsets."""
from lorentzfd.groups import central_words, find_lift_offsets, lifted_group
from lorentzfd.presets import presets

for p in presets():
    if p.realizable:
        g = lifted_group(p.signature, p.offsets)
        words = central_words(g, 1)
        print(f"{p.name:5s} k={p.level} {p.signature} offsets {p.offsets}: z0^{g.k} = {words[g.k]}")
    else:
        print(f"{p.name:5s} k={p.level} {p.signature} unrealizable: {p.reason}")

# The search visits small offsets first, so the zero lift wins whenever it has the requested level.
print(find_lift_offsets((2, 3, 7), 1, 2), find_lift_offsets((3, 3, 5), 2, 2))
