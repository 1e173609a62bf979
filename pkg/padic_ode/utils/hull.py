"""
Exact lower convex hull over rational points
Monotone-chain variant of the polyline hull walk; all turns are decided with exact cross products
"""

from fractions import Fraction
from typing import Iterable, List, Tuple, Union

Point = Tuple[Fraction, Fraction]


def _cross(o: Point, a: Point, b: Point) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def lower_hull(points: Iterable[Tuple[Union[int, Fraction], Union[int, Fraction]]]) -> List[Point]:
    """
    Vertices of the lower convex hull, x strictly increasing.
    For equal x only the lowest point is kept; collinear middle points are dropped.
    """
    best = {}
    for x, y in points:
        x, y = Fraction(x), Fraction(y)
        if x not in best or y < best[x]:
            best[x] = y
    pts = sorted(best.items())
    hull: List[Point] = []
    for pt in pts:
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], pt) <= 0:
            hull.pop()
        hull.append(pt)
    return hull


def hull_segments(vertices: List[Point]) -> List[Tuple[Fraction, Fraction, Point, Point]]:
    """(slope, width, left, right) for each hull edge; slopes strictly increase"""
    segments = []
    for left, right in zip(vertices, vertices[1:]):
        width = right[0] - left[0]
        segments.append(((right[1] - left[1]) / width, width, left, right))
    return segments


def breakpoints_in(vertices: List[Point], lo: Fraction, hi: Fraction) -> List[Fraction]:
    """
    Sample radii for r -> min(y - x*r): both endpoints plus every hull slope inside [lo, hi].
    The function is affine between consecutive returned values.
    """
    samples = {Fraction(lo), Fraction(hi)}
    for slope, _, _, _ in hull_segments(vertices):
        if lo < slope < hi:
            samples.add(slope)
    return sorted(samples)
