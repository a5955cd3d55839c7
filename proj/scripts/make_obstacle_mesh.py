#!/usr/bin/env python3
"""Generate the channel-with-obstacle fixture mesh.

Unit square minus a polygonal disk of radius 0.1 centred at (0.5, 0.5).
The vertex budget is hit exactly so that the EG space has the target sizes:
velocity DoFs 2V + C and pressure DoFs C, where C = 2V - V_boundary for a
domain with one hole.

Usage: make_obstacle_mesh.py [out.msh]   (needs the `triangle` package)
"""
import math
import sys

import numpy as np
import triangle

N_SIDE = 64      # outer boundary segments per side
N_HOLE = 88      # segments on the hole
N_VERTICES = 6531
SEED = 7


def boundary():
    pts, segs = [], []
    corners = [(0, 0), (1, 0), (1, 1), (0, 1)]
    for k in range(4):
        (x0, y0), (x1, y1) = corners[k], corners[(k + 1) % 4]
        for i in range(N_SIDE):
            t = i / N_SIDE
            pts.append((x0 + t * (x1 - x0), y0 + t * (y1 - y0)))
    n = len(pts)
    segs += [(i, (i + 1) % n) for i in range(n)]
    base = len(pts)
    for i in range(N_HOLE):
        a = 2 * math.pi * i / N_HOLE
        pts.append((0.5 + 0.1 * math.cos(a), 0.5 + 0.1 * math.sin(a)))
    segs += [(base + i, base + (i + 1) % N_HOLE) for i in range(N_HOLE)]
    return np.array(pts), np.array(segs)


def mesh_with(points, segs, max_area):
    geom = {"vertices": points, "segments": segs, "holes": [(0.5, 0.5)]}
    return triangle.triangulate(geom, f"pq30a{max_area:.10f}Y")


def exact_count(points, segs):
    """Constrained Delaunay of a fixed point set (no Steiner points)."""
    geom = {"vertices": points, "segments": segs, "holes": [(0.5, 0.5)]}
    return triangle.triangulate(geom, "pYY")


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "obstacle_h7.msh"
    pts, segs = boundary()
    nb = len(pts)
    # Bisect the area bound until the quality mesh has slightly more vertices
    # than the budget, then drop interior points to hit it exactly.
    lo, hi = 1e-5, 1e-3
    for _ in range(60):
        mid = math.sqrt(lo * hi)
        m = mesh_with(pts, segs, mid)
        if len(m["vertices"]) >= N_VERTICES:
            lo = mid
        else:
            hi = mid
    m = mesh_with(pts, segs, lo)
    verts = m["vertices"]
    assert len(verts) >= N_VERTICES, len(verts)
    interior = verts[nb:]
    surplus = len(verts) - N_VERTICES
    rng = np.random.default_rng(SEED)
    if surplus:
        drop = rng.choice(len(interior), size=surplus, replace=False)
        interior = np.delete(interior, drop, axis=0)
    final = exact_count(np.vstack([pts, interior]), segs)
    v, c = final["vertices"], final["triangles"]
    assert len(v) == N_VERTICES, len(v)
    assert len(c) == 2 * N_VERTICES - nb, len(c)

    hole_area = 0.5 * N_HOLE * 0.01 * math.sin(2 * math.pi / N_HOLE)
    with open(out, "w") as f:
        f.write("# unit square minus a polygonal disk (r = 0.1, centre (0.5, 0.5))\n")
        f.write(f"# {N_SIDE} segments per outer side, {N_HOLE} on the hole\n")
        f.write(f"vertices {len(v)}\n")
        for x, y in v:
            f.write(f"{x:.17g} {y:.17g}\n")
        f.write(f"cells {len(c)}\n")
        for a, b, d in c:
            f.write(f"{a} {b} {d}\n")
        f.write(f"area {1.0 - hole_area:.17g}\n")
    print(f"{out}: {len(v)} vertices, {len(c)} cells, "
          f"velocity DoFs {2 * len(v) + len(c)}, pressure DoFs {len(c)}")


if __name__ == "__main__":
    main()
