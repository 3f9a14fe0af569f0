# Lattice polytopes and their quantized points
# ---------------------------------------------
# Every computation in this package starts from a Delzant polytope: a lattice
# polytope whose vertex cones are unimodular.  This script validates a few,
# walks the face lattice, enumerates quantized points of increasing level and
# inspects the fiber holonomy test that characterizes them.

from fractions import Fraction

from toricspec import (
    bs_points,
    delzant_violations,
    fiber_holonomy,
    hirzebruch,
    local_chart,
    polytope_to_json,
    segment,
    simplex2,
    vertices_and_faces,
)

print("== validation ==")
print("interval [0,1]:", polytope_to_json(segment()))
print("2-simplex:    ", polytope_to_json(simplex2()))

# the same triangle with a sheared facet fails: one vertex cone has det 2
bad = [((1, 0), 0), ((0, 1), 0), ((-1, -2), -2)]
print("sheared triangle violations:", [type(v).__name__ for v in delzant_violations(bad)])

print()
print("== faces of the Hirzebruch trapezoid ==")
H = hirzebruch(2)
for f in vertices_and_faces(H):
    print(f"  codim {f.codim}  active facets {f.active}  witness {tuple(map(str, f.rep_point))}")

print()
print("== quantized points by level ==")
for k in (1, 2, 3):
    pts = bs_points(simplex2(), k)
    labels = [
        f"({', '.join(str(c) for c in p.point)}; strict level {p.strict_level})"
        for p in pts
    ]
    print(f"  k={k}: {len(pts)} points:", ", ".join(labels))

print()
print("== holonomy generators over torus fibers ==")
# over a quantized point both generators are trivial; elsewhere they are not
for b, k in (((Fraction(1, 2), 0), 2), ((Fraction(1, 3), 0), 1)):
    gens, trivial = fiber_holonomy(simplex2(), b, k)
    print(f"  b=({b[0]}, {b[1]}), k={k}: generators {[f'{g:.3f}' for g in gens]}"
          f" -> quantized: {trivial}")

print()
print("== unimodular charts ==")
ch = local_chart(simplex2(), (1, 0))
print("  chart at the vertex (1,0): A =", ch.lattice_map, " c =", tuple(map(str, ch.shift)))
print("  image of (1,0):", ch.apply((1, 0)), " image of (1/2, 1/2):",
      tuple(map(str, ch.apply((Fraction(1, 2), Fraction(1, 2))))))
