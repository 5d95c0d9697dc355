"""Binocular gaze geometry: from a pair of eye rays to a focal-depth estimate.

Real gaze rays are skew, so the "intersection" is taken as the midpoint of
the common perpendicular segment between the two rays; the focal depth is
the z-coordinate of that midpoint in the head frame (x right, y up,
z forward, origin midway between the eyes).  Downstream stages work in
diopters (1/depth) because angular gaze noise maps near-uniformly to
diopter noise at every depth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

Vec3 = tuple[float, float, float]

UNIT_TOLERANCE = 1e-9
IPD_RANGE = (0.050, 0.080)


def _sub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _dot(a: Vec3, b: Vec3) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _cross(a: Vec3, b: Vec3) -> Vec3:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def _norm(a: Vec3) -> float:
    return math.sqrt(_dot(a, a))


def normalize(a: Vec3) -> Vec3:
    n = _norm(a)
    if n == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return (a[0] / n, a[1] / n, a[2] / n)


class Validity(Enum):
    """Classification of a depth estimate; only VALID carries a depth contract."""

    VALID = "Valid"
    PARALLEL = "Parallel"
    DIVERGENT = "Divergent"
    EXCESSIVE_GAP = "ExcessiveGap"
    OUT_OF_RANGE = "OutOfRange"


@dataclass(frozen=True, slots=True)
class Ray:
    """An eye ray in the head frame: origin in meters, unit direction."""

    origin: Vec3
    direction: Vec3

    def __post_init__(self):
        if abs(_norm(self.direction) - 1.0) > UNIT_TOLERANCE:
            raise ValueError(f"direction must be unit length, got |d|={_norm(self.direction)!r}")
        if self.origin[2] != 0.0:
            raise ValueError("eye ray origins lie in the frontal plane (origin.z must be 0)")

    def point_at(self, s: float) -> Vec3:
        o, d = self.origin, self.direction
        return (o[0] + s * d[0], o[1] + s * d[1], o[2] + s * d[2])


@dataclass(frozen=True, slots=True)
class GazeSample:
    """A timestamped pair of eye rays; the raw input of the pipeline."""

    timestamp: float
    left: Ray
    right: Ray

    def __post_init__(self):
        if not self.left.origin[0] < self.right.origin[0]:
            raise ValueError("left eye must lie on the -x side of the right eye")
        ipd = _norm(_sub(self.right.origin, self.left.origin))
        if not IPD_RANGE[0] <= ipd <= IPD_RANGE[1]:
            raise ValueError(f"inter-eye distance {ipd!r} m outside {IPD_RANGE}")

    @property
    def ipd(self) -> float:
        return _norm(_sub(self.right.origin, self.left.origin))


@dataclass(frozen=True, slots=True)
class GeometryConfig:
    """Tolerances for the depth solver and the nominal inter-eye distance."""

    ipd: float = 0.063
    min_depth: float = 0.05
    max_depth: float = 10.0
    parallel_tolerance: float = 1e-6  # threshold on sin^2 of the inter-ray angle
    max_ray_gap: float = 0.03

    def __post_init__(self):
        if not 0.0 < self.min_depth < self.max_depth:
            raise ValueError("require 0 < min_depth < max_depth")
        if self.parallel_tolerance <= 0.0 or self.max_ray_gap <= 0.0:
            raise ValueError("tolerances must be positive")
        if not IPD_RANGE[0] <= self.ipd <= IPD_RANGE[1]:
            raise ValueError(f"ipd {self.ipd!r} m outside {IPD_RANGE}")


@dataclass(frozen=True, slots=True)
class DepthEstimate:
    """Raw focal depth for one sample.

    depth and vergence are meaningful only when validity is VALID; consumers
    must gate on validity before using them.
    """

    timestamp: float
    depth: float
    vergence: float
    validity: Validity
    ray_gap: float

    @property
    def is_valid(self) -> bool:
        return self.validity is Validity.VALID


class ParallelRaysError(ValueError):
    """The two gaze directions are (near-)parallel; the solve is singular."""


def ray_closest_points(left: Ray, right: Ray, parallel_tolerance: float = 1e-6):
    """Closest points between two rays via the 2x2 normal equations.

    Minimizes |left(s) - right(t)| over (s, t).  With unit directions the
    system determinant is 1 - (dl.dr)^2 = sin^2 of the inter-ray angle; it is
    evaluated as |dl x dr|^2, which avoids the cancellation of 1 - b^2 for
    near-parallel rays.

    Returns (s, t, midpoint, gap): the ray parameters, the midpoint of the
    common perpendicular segment, and its length.

    Raises ParallelRaysError when sin^2 of the angle is below
    parallel_tolerance.
    """
    dl, dr = left.direction, right.direction
    b = _dot(dl, dr)
    cx = _cross(dl, dr)
    det = _dot(cx, cx)  # == 1 - b*b for unit directions
    if det < parallel_tolerance:
        raise ParallelRaysError(f"sin^2(angle)={det!r} below tolerance {parallel_tolerance!r}")

    w0 = _sub(left.origin, right.origin)
    d = _dot(dl, w0)
    e = _dot(dr, w0)
    s = (b * e - d) / det
    t = (e - b * d) / det

    p = left.point_at(s)
    q = right.point_at(t)
    midpoint = ((p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0, (p[2] + q[2]) / 2.0)
    gap = _norm(_sub(p, q))
    return s, t, midpoint, gap


def _parallel_gap(left: Ray, right: Ray) -> float:
    # distance between two parallel lines: reject w0 onto the shared direction
    w0 = _sub(left.origin, right.origin)
    along = _dot(w0, left.direction)
    perp = (
        w0[0] - along * left.direction[0],
        w0[1] - along * left.direction[1],
        w0[2] - along * left.direction[2],
    )
    return _norm(perp)


def estimate_depth(sample: GazeSample, config: GeometryConfig = GeometryConfig()) -> DepthEstimate:
    """Classify and solve one gaze sample into a DepthEstimate.

    Never raises on geometric degeneracy; everything is reported through the
    validity field.  Precedence: Parallel, Divergent, ExcessiveGap,
    OutOfRange, Valid.
    """
    try:
        s, t, midpoint, gap = ray_closest_points(sample.left, sample.right, config.parallel_tolerance)
    except ParallelRaysError:
        return DepthEstimate(
            timestamp=sample.timestamp,
            depth=math.nan,
            vergence=math.nan,
            validity=Validity.PARALLEL,
            ray_gap=_parallel_gap(sample.left, sample.right),
        )

    depth = midpoint[2]
    vergence = 1.0 / depth if depth > 0.0 else math.nan

    # Range bounds carry a 1e-12 relative guard so that a fixation exactly at
    # min_depth/max_depth is not tipped out of range by solver roundoff.
    if s <= 0.0 or t <= 0.0:
        validity = Validity.DIVERGENT
    elif gap > config.max_ray_gap:
        validity = Validity.EXCESSIVE_GAP
    elif not config.min_depth * (1.0 - 1e-12) <= depth <= config.max_depth * (1.0 + 1e-12):
        validity = Validity.OUT_OF_RANGE
    else:
        validity = Validity.VALID

    return DepthEstimate(
        timestamp=sample.timestamp,
        depth=depth,
        vergence=vergence,
        validity=validity,
        ray_gap=gap,
    )


def depth_to_diopters(depth: float) -> float:
    """Convert a depth in meters to vergence in diopters (1/m)."""
    if depth <= 0.0:
        raise ValueError(f"depth must be positive, got {depth!r}")
    return 1.0 / depth


def diopters_to_depth(vergence: float) -> float:
    """Convert vergence in diopters back to depth in meters."""
    if vergence <= 0.0:
        raise ValueError(f"vergence must be positive, got {vergence!r}")
    return 1.0 / vergence


def fixation_sample(target: Vec3, ipd: float = 0.063, timestamp: float = 0.0) -> GazeSample:
    """Noiseless sample of both eyes fixating a target point (head frame)."""
    half = ipd / 2.0
    left_origin: Vec3 = (-half, 0.0, 0.0)
    right_origin: Vec3 = (half, 0.0, 0.0)
    return GazeSample(
        timestamp=timestamp,
        left=Ray(left_origin, normalize(_sub(target, left_origin))),
        right=Ray(right_origin, normalize(_sub(target, right_origin))),
    )
