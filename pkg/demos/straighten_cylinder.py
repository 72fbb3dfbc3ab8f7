"""Straighten a square wave on the flat cylinder into the winding-1 helix."""
from fractions import Fraction as Q

from ltgconvex.models import CylinderPoint, cyl_geodesic, cylinder_atlas, path_from_lift
from ltgconvex.straightening import excise_self_intersections, straighten

atlas = cylinder_atlas()
lift = [(Q(0), Q(0))]
for k in range(4):
    u = Q(k, 4)
    lift += [(u, Q(1, 2)), (u + Q(1, 8), Q(1, 2)), (u + Q(1, 8), Q(0)), (u + Q(1, 4), Q(0))]
lift.append((Q(1), Q(1)))

wave = path_from_lift("cylinder", atlas, lift)
trace = straighten(excise_self_intersections(wave, atlas), atlas)
print(f"{len(wave.points)} breakpoints -> {len(trace.final.points)} in {len(trace.steps)} steps")
print("winding:", trace.winding)
helix = cyl_geodesic(CylinderPoint(0, 0), CylinderPoint(0, 1), 1)
print("equals the helix:", trace.final == helix)
