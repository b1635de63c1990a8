"""Pure-python/numpy oriented-box IoU kernel.

Reference implementation of the hot geometry kernel; the Cython module
coopmot.geometry._native mirrors these formulas operation for operation so
both backends agree to floating-point noise.

Boxes are 7-vectors [x y z theta h w l]: centroid, yaw about z, extents.
Overlap is BEV convex-polygon clipping (Sutherland-Hodgman) times the
z-interval overlap.
"""

import math

import numpy as np

# BEV intersection areas below this are treated as zero (clipping noise).
AREA_EPS = 1e-12


def bev_corners(box7):
    """Counter-clockwise BEV rectangle corners (4, 2) of a box 7-vector."""
    x, y = box7[0], box7[1]
    theta, w, l = box7[3], box7[5], box7[6]
    c, s = math.cos(theta), math.sin(theta)
    hl, hw = 0.5 * l, 0.5 * w
    out = np.empty((4, 2), dtype=float)
    # local corners (+hl,+hw), (-hl,+hw), (-hl,-hw), (+hl,-hw)
    lx = (hl, -hl, -hl, hl)
    ly = (hw, hw, -hw, -hw)
    for k in range(4):
        out[k, 0] = c * lx[k] - s * ly[k] + x
        out[k, 1] = s * lx[k] + c * ly[k] + y
    return out


def _clip_polygon(subject, clip):
    """Clip a convex CCW polygon by a convex CCW polygon.

    Both are lists of (x, y). Returns the (possibly empty) intersection
    polygon. Points on a clip edge count as inside, so clipping a polygon
    by itself returns it unchanged.
    """
    output = list(subject)
    cx1, cy1 = clip[-1]
    for cx2, cy2 in clip:
        if not output:
            return output
        ex, ey = cx2 - cx1, cy2 - cy1
        inp = output
        output = []
        sx, sy = inp[-1]
        s_in = ex * (sy - cy1) - ey * (sx - cx1) >= 0.0  # left of edge
        for px, py in inp:
            p_in = ex * (py - cy1) - ey * (px - cx1) >= 0.0
            if p_in != s_in:
                dx, dy = px - sx, py - sy
                denom = ex * dy - ey * dx
                # denom == 0 means the segment runs along the edge line and
                # only rounding split the endpoint sides; nothing to insert
                if denom != 0.0:
                    t = (ey * (sx - cx1) - ex * (sy - cy1)) / denom
                    output.append((sx + t * dx, sy + t * dy))
            if p_in:
                output.append((px, py))
            sx, sy, s_in = px, py, p_in
        cx1, cy1 = cx2, cy2
    return output


def _polygon_area(poly):
    n = len(poly)
    if n < 3:
        return 0.0
    acc = 0.0
    x1, y1 = poly[-1]
    for x2, y2 in poly:
        acc += x1 * y2 - x2 * y1
        x1, y1 = x2, y2
    return 0.5 * abs(acc)


def bev_overlap_area(a7, b7):
    """BEV intersection area of two boxes (clipping noise clamped to 0)."""
    pa = [tuple(p) for p in bev_corners(a7)]
    pb = [tuple(p) for p in bev_corners(b7)]
    area = _polygon_area(_clip_polygon(pa, pb))
    return 0.0 if area < AREA_EPS else area


def iou3d_pair(a7, b7):
    """3D IoU of two box 7-vectors; 0.0 when disjoint.

    Box volumes are computed from the same shoelace formula as the
    intersection polygon so that the self-overlap case is exactly 1.
    """
    za0, za1 = a7[2] - 0.5 * a7[4], a7[2] + 0.5 * a7[4]
    zb0, zb1 = b7[2] - 0.5 * b7[4], b7[2] + 0.5 * b7[4]
    dz = min(za1, zb1) - max(za0, zb0)
    if dz <= 0.0:
        return 0.0
    # circumscribed-circle rejection: cheap and exact for the zero case
    ra = 0.5 * math.hypot(a7[5], a7[6])
    rb = 0.5 * math.hypot(b7[5], b7[6])
    dx, dy = a7[0] - b7[0], a7[1] - b7[1]
    if dx * dx + dy * dy > (ra + rb) * (ra + rb):
        return 0.0
    pa = [tuple(p) for p in bev_corners(a7)]
    pb = [tuple(p) for p in bev_corners(b7)]
    area = _polygon_area(_clip_polygon(pa, pb))
    if area < AREA_EPS:
        return 0.0
    inter_vol = area * dz
    vol_a = _polygon_area(pa) * (za1 - za0)
    vol_b = _polygon_area(pb) * (zb1 - zb0)
    denom = vol_a + vol_b - inter_vol
    if denom <= 0.0:
        return 1.0
    iou = inter_vol / denom
    return min(max(iou, 0.0), 1.0)


def iou3d_matrix(rows, cols):
    """Pairwise IoU matrix of two (N, 7) / (M, 7) box arrays."""
    rows = np.asarray(rows, dtype=float)
    cols = np.asarray(cols, dtype=float)
    n, m = rows.shape[0], cols.shape[0]
    out = np.zeros((n, m), dtype=float)
    for i in range(n):
        for j in range(m):
            out[i, j] = iou3d_pair(rows[i], cols[j])
    return out
