"""Composition versus family: invariant traps.

A composed map g can keep a proper closed set inside itself while the
family that produced it still moves every open set everywhere. The trap
finder grows lattice intervals under g until they stop changing.
"""

from fractions import Fraction

from nadyn.analysis import MeshParams, check_transitivity, check_weak_mixing, find_invariant_trap
from nadyn.cli import load_builtin
from nadyn.engine import Family, image_at, reduce_to_autonomous
from nadyn.intervals import mesh_cells
from nadyn.plmap import image

p = MeshParams(m=16, N=64)

for name in ("ex9", "half-trap"):
    fam = load_builtin(name).family
    red = reduce_to_autonomous(fam)
    trap = find_invariant_trap(red.g)
    print(f"{name}: g = {red.g}")
    print(f"  trap {trap}, g(trap) = {image(red.g, trap)}")
    print("  members surjective:", red.surjective)
    print("  g transitivity:", check_transitivity(Family.autonomous(red.g), p).status.value)
    print("  family transitivity:", check_transitivity(fam, p).status.value)

ht = load_builtin("half-trap").family
wm = check_weak_mixing(ht, p=p)
print("\nhalf-trap weak mixing:", wm.status.value)
U = mesh_cells(16)[3]
print(f"  cell {U}: full image at indices {wm.witness['full_indices'][3][:6]} ...")
for n in range(5, 10):
    print(f"  omega_{n}(U) = {image_at(ht, U, n)}")
print("  a narrower cell:", image_at(ht, mesh_cells(64)[0], 9), "at n = 9, width", Fraction(1, 64))
