"""Tour of the tree index algebra: vertices, paths, wedges, truncations.

Arrays in this package are indexed by the leaves of a depth-r tree in which
every vertex has countably many children.  Nothing infinite is ever built:
a vertex is just its coordinate path, and finite {1..m}^r truncations are
enumerated on demand.
"""

import itertools

from hexch import leaf, leaves, path, product_path, root, wedge
from hexch.tree import ProductVertex, encode_vertex

print("== vertices and paths ==")
v = leaf(1, 2, 3)
print(f"leaf {v.coords} of the depth-3 tree, canonical key {encode_vertex(v)!r}")
print("its root path:", [encode_vertex(u) for u in path(v)])
print("the root encodes as", repr(encode_vertex(root(3))))

print()
print("== the wedge statistic ==")
pairs = [
    (leaf(1, 2, 3), leaf(1, 2, 5)),
    (leaf(1, 2, 3), leaf(1, 3, 3)),
    (leaf(1, 2, 3), leaf(2, 2, 3)),
    (leaf(4, 4, 4), leaf(4, 4, 4)),
]
for a, b in pairs:
    shared = len(set(path(a)) & set(path(b)))
    print(
        f"wedge{a.coords, b.coords} = {wedge(a, b)}"
        f"  (= |p(a) & p(b)| = {shared})"
    )

print()
print("== ultrametric behaviour on leaves ==")
lv = leaves(3, 2)
worst = min(
    wedge(a, b) - min(wedge(a, c), wedge(c, b))
    for a, b, c in itertools.product(lv, repeat=3)
)
print(f"min over all triples of wedge(a,b) - min(wedge(a,c), wedge(c,b)) = {worst}")
print("(never negative: two leaves are at least as close as the farther detour)")

print()
print("== truncations ==")
print("leaves of {1..3}^1:", [u.coords for u in leaves(1, 3)])
print("leaves of {1..2}^2:", [u.coords for u in leaves(2, 2)])
print(f"|leaves of {{1..4}}^3| = {len(leaves(3, 4))} = 4^3")

print()
print("== product trees ==")
pv = ProductVertex((leaf(1), leaf(2, 2)))
pp = product_path(pv)
print(f"product path of (({pv.parts[0].coords}), {pv.parts[1].coords}) "
      f"has {len(pp)} = 2*3 entries:")
for parts in pp:
    print("   ", tuple(p.coords for p in parts))
