"""Systems whose two-step composition is the identity.

Alternating a map with its inverse makes every second state the identity,
so orbits are at most two points long. That settles transitivity,
sensitivity and periodicity outright instead of at a finite scale.
"""

from nadyn.analysis import MeshParams, check_dense_periodicity, check_sensitivity, check_transitivity
from nadyn.cli import load_builtin
from nadyn.engine import identity_collapse, omega, orbit
from nadyn.exact import QAlpha
from nadyn.spaces import CirclePoint, ShiftPoint

p = MeshParams(m=8, N=32)

shift_pair = load_builtin("ex1").family
x = ShiftPoint("0011", 1)
print("shift pair, orbit of", x, "->", [str(y) for y in orbit(shift_pair, x, 4)])
print("  omega_2 is identity:", omega(shift_pair, 2).is_identity())
print("  transitivity:", check_transitivity(shift_pair, MeshParams(m=4, N=16)).status.value)

rotations = load_builtin("ex4").family
c = CirclePoint(QAlpha(0, 1))
print("\nrotation by a and -a, orbit of", c, "->", [str(y) for y in orbit(rotations, c, 4)])
v = check_dense_periodicity(rotations, p)
print("  dense periodicity:", v.status.value, "period", v.witness["period"])

twists = load_builtin("ex7").family
print("\ntwist +1 / -1, collapse index:", identity_collapse(twists))
print("  sensitivity:", check_sensitivity(twists, p).status.value)
single = type(twists).cyclic([twists.maps[0]])
print("  a single twist alone:", check_sensitivity(single, p, delta="1/4").status.value)
