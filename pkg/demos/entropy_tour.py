"""Entropy from lap counts and from open covers.

Lap counts of the tent map double at every step, so the lap estimate is
exactly log 2. Cover estimates approach it from below as the cover gets
finer; their per-step increments cancel the constant offset that H_k / k
carries at small depth.
"""

import math

from nadyn.cli import load_builtin
from nadyn.engine import Family
from nadyn.entropy import compare_family_vs_composition, lap_entropy, mesh_ladder
from nadyn.plmap import PLMap

tent = Family.autonomous(PLMap.tent())
lap = lap_entropy(tent, 12)
print("tent lap counts:", [t.count for t in lap.per_k])
print(f"  estimate {lap.limsup_est:.6f}, log 2 = {math.log(2):.6f}")

ladder = mesh_ladder(tent, 9, (2, 4, 8))
for m, est in ladder["per_mesh"].items():
    print(f"  mesh {m}: counts {[t.count for t in est.per_k]}")
    print(f"    limsup {est.limsup_est:.3f}  liminf {est.liminf_est:.3f}  increment {est.increment_est:.3f}")

cmp = compare_family_vs_composition(load_builtin("ex2").family, 10)
print("\ntwo-map family against its composition g:")
print(f"  h_F ~ {cmp.h_F.limsup_est:.4f}, h_g / 2 ~ {cmp.h_g.limsup_est / 2:.4f}, gap {cmp.gap:.4f}")
print("  lap(g^j) == lap(omega_2j):", cmp.lap_identity)
