"""Local convexity upgraded to weak convexity, and where it stops."""
from fractions import Fraction as Q

from ltgconvex.etale import HelixBand, LineMap, PlanePolygon
from ltgconvex.ltg import etale_fibers, tietze_check, verify_ltg
from ltgconvex.models import CylinderPoint

square = PlanePolygon([(0, 0), (1, 0), (1, 1), (0, 1)])
L = PlanePolygon([(0, 0), (2, 0), (2, 1), (1, 1), (1, 2), (0, 2)])
band = HelixBand(1, Q(1, 8))

for name, A in [("square", square), ("L", L), ("helix band", band)]:
    rep = tietze_check(A)
    print(f"{name}: locally convex {rep['locally_convex']}, weakly convex {rep['weakly_convex']}")
print("L reflex corner:", tietze_check(L)["nonconvex_vertices"])

wrap = LineMap.segment_wrap(1)
rep = verify_ltg(wrap, pairs=[(CylinderPoint(0, 0), CylinderPoint(Q(1, 2), 0))])
w = next(iter(rep.geodesic_witnesses.values()))
print("antipodal pair on the equator: winding", w["winding"],
      "of", [a["winding"] for a in w["alternatives"]])

for k in (1, 2, 3):
    fib, _, separated = etale_fibers(LineMap.equator_loop(k), CylinderPoint(Q(1, 3), 0))
    print(f"degree {k} loop: fiber {[str(t) for t in fib]}, separated {separated}")
