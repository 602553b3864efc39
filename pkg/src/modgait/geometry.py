"""2D convex hulls and signed point-to-polygon distances.

Used for support-polygon bookkeeping: the stability margin is the signed
distance of the CoM ground projection to the hull of the stance feet
(positive inside, negative outside).
"""

import numpy as np


def convex_hull(points):
    """Convex hull of 2D points, counterclockwise, collinear points dropped.

    Degenerate inputs are allowed: one point gives a 1-vertex "hull", all
    collinear points give the two extreme endpoints.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] != 2:
        raise ValueError("convex_hull needs a non-empty (n, 2) array")
    # Andrew's monotone chain on lexicographically sorted unique points.
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    sorted_pts = [tuple(p) for p in pts[order]]
    uniq = []
    for p in sorted_pts:
        if not uniq or p != uniq[-1]:
            uniq.append(p)
    if len(uniq) == 1:
        return np.array(uniq)
    if len(uniq) == 2:
        return np.array(uniq)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower = []
    for p in uniq:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(uniq):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 or all(cross(hull[0], hull[1], q) == 0 for q in hull[2:]):
        # All input collinear: keep the two extremes.
        return np.array([uniq[0], uniq[-1]])
    return np.array(hull)


def signed_distances_to_hull(points, hull):
    """Signed distance of each query point to a hull (positive inside).

    Degenerate hulls (a point or a segment) have no interior, so distances
    to them are always <= 0.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    hull = np.asarray(hull, dtype=float)
    if hull.ndim != 2 or hull.shape[0] == 0:
        raise ValueError("empty hull")
    if hull.shape[0] == 1:
        return -np.linalg.norm(pts - hull[0], axis=1)

    a = hull
    b = np.roll(hull, -1, axis=0)
    if hull.shape[0] == 2:
        a, b = hull[:1], hull[1:2]
    ab = b - a  # (E, 2)
    ab_len2 = np.maximum(np.einsum("ij,ij->i", ab, ab), 1e-300)
    ap = pts[:, None, :] - a[None, :, :]  # (K, E, 2)
    t = np.clip(np.einsum("kej,ej->ke", ap, ab) / ab_len2, 0.0, 1.0)
    closest = a[None, :, :] + t[..., None] * ab[None, :, :]
    seg_d = np.linalg.norm(pts[:, None, :] - closest, axis=2)
    min_d = seg_d.min(axis=1)
    if hull.shape[0] == 2:
        return -min_d
    # Inside test: CCW hull, point is inside iff left of (or on) every edge.
    cross = ab[None, :, 0] * ap[..., 1] - ab[None, :, 1] * ap[..., 0]
    inside = (cross >= 0.0).all(axis=1)
    return np.where(inside, min_d, -min_d)


def signed_distance_to_hull(point, hull):
    """Scalar version of :func:`signed_distances_to_hull`."""
    return float(signed_distances_to_hull(np.asarray(point, dtype=float)[None, :], hull)[0])
