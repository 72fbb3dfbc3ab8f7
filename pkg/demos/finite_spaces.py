"""Interval convexity on small finite spaces.

The 5-point fence carries a convexity structure; the 4-point pseudocircle
does not, because its two closed points have two different minimal
connected supersets.  The miner confirms that nothing smaller fails.
"""
from ltgconvex.finite import factorize, fence, pseudocircle, wrap_map
from ltgconvex.intervals import c2_obstruction, check_axioms, interval_order, least_connected_table
from ltgconvex.miner import MinerConfig, mine

cs = least_connected_table(fence(5))
print("fence(5) axioms:", check_axioms(cs).to_dict())
print("interval order from 0 to 4:", interval_order(cs, 0, 4))

print("pseudocircle obstruction:", c2_obstruction(pseudocircle()))

gal = mine(MinerConfig(max_points=4, target_property="C2-fails"))
print(f"C2 fails first at {gal['minimal_size']} points; {len(gal['gallery'])} witnesses")

fac = factorize(wrap_map(2, 4))
print("wrap of the 8-point circle: fibers", fac.fibers())
