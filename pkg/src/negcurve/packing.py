"""Reduction of a cap family to a Euclidean ball system and the explicit
exponential counting bound.

Pipeline: restrict a family to caps of angular radius <= pi/2 (reflecting
the larger half through x0 -> -x0 when needed), check the reduced pair
conditions

    (ii*)  theta_i < delta_ij      (no center inside another ball)
    (iii)  delta_ij <= theta_i + theta_j   (every two closed balls touch),

transcribe the angular data into a system of balls B(z_i, theta_i) whose
pairwise distances are the angular separations, rescale so the minimum
center distance is 1, and split the system at distance 2 from the first
pivot center.  The near part is counted by the fixed formula 2^(n+1); the
far part by a spherical-cap measure argument built on the exclusion-cone
aperture 2*arctan(sqrt(15)/7).  Doubling for the discarded hemisphere
gives the total, and fitting (u, v) over a horizon of ranks produces a
single closed-form envelope u * v^(n+1).

Geometry behind the cone constant: for two far balls at center distances
k, r >= 2 from the pivot, the touching/exclusion constraints force the
center separation d above both k - 1 and r - 1, which caps the cosine of
the subtended angle at (k^2 + 2r - 1)/(2kr) and its mirror image.  The
joint supremum 7/8 is attained at k = r = 2, giving a minimum subtended
angle arccos(7/8) = arctan(sqrt(15)/7) and hence an excluded cone of full
aperture 2*arctan(sqrt(15)/7) around each far center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize

from .conditions import TOL_BOUNDARY, ModelFamily
from .klein import CapRep, cap_angular_distance

#: horizon of ranks over which the (u, v) envelope constants are fitted
FIT_HORIZON = 64


# ---------------------------------------------------------------------------
# ball systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Ball:
    """An open Euclidean ball, center in R^n."""

    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")


@dataclass(frozen=True, eq=False)
class BallSystem:
    """Balls plus the authoritative pairwise center-distance matrix.

    Systems built from caps carry the spherical angular separations as
    distances (the transcription keeps theta and delta as plain Euclidean
    quantities), so the matrix, not the stored coordinates, defines the
    geometry.  ``scale`` accumulates rescaling factors for bookkeeping.
    """

    balls: tuple[Ball, ...]
    dist: np.ndarray
    n: int
    scale: float = 1.0

    def __len__(self) -> int:
        return len(self.balls)

    @property
    def radii(self) -> np.ndarray:
        return np.array([b.radius for b in self.balls])

    def min_distance(self) -> float:
        if len(self.balls) < 2:
            raise ValueError("need at least two balls")
        d = self.dist[np.triu_indices(len(self.balls), k=1)]
        return float(np.min(d))

    def check_valid(self, tol: float = TOL_BOUNDARY) -> list[tuple[int, int, str]]:
        """Violations of the system invariants, as (i, j, which) triples.

        Valid systems satisfy, for every pair: no center lies in the
        other open ball (delta_ij >= radius_j) and the closed balls
        intersect (delta_ij <= radius_i + radius_j).
        """
        bad = []
        k = len(self.balls)
        r = self.radii
        for i in range(k):
            for j in range(i + 1, k):
                d = self.dist[i, j]
                if d < max(r[i], r[j]) - tol:
                    bad.append((i, j, "center-inside"))
                if d > r[i] + r[j] + tol:
                    bad.append((i, j, "disjoint-closures"))
        return bad


def ball_system_from_points(points, radii) -> BallSystem:
    """A plain Euclidean system: distances computed from the coordinates."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise ValueError("points must be a 2-d array")
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.linalg.norm(diff, axis=-1)
    balls = tuple(
        Ball(center=tuple(map(float, p)), radius=float(r))
        for p, r in zip(pts, radii, strict=True)
    )
    return BallSystem(balls=balls, dist=dist, n=pts.shape[1])


# ---------------------------------------------------------------------------
# family reductions
# ---------------------------------------------------------------------------

def hemisphere_filter(fam: ModelFamily) -> ModelFamily:
    """Keep the caps on one side of theta = pi/2, at least half the family.

    The side theta <= pi/2 wins ties; when theta > pi/2 holds a strict
    majority, that side is reflected through x0 -> -x0 (an isometry fixing
    all pairwise data within a side), i.e. theta -> pi - theta with the
    same foot.
    """
    if len(fam) == 0:
        raise ValueError("cannot filter an empty family")
    small = [c for c in fam.caps if c.theta <= math.pi / 2]
    large = [c for c in fam.caps if c.theta > math.pi / 2]
    if len(small) >= len(large):
        return ModelFamily(small)
    return ModelFamily(
        [CapRep(z=c.z, theta=math.pi - c.theta) for c in large]
    )


def _require_hemisphere(fam: ModelFamily, tol: float) -> None:
    for idx, cap in enumerate(fam.caps):
        if cap.theta > math.pi / 2 + tol:
            raise ValueError(
                f"family is not hemisphere-filtered: cap {idx} has "
                f"theta = {cap.theta:.6f} > pi/2"
            )


def reduce_ii_star(fam: ModelFamily, tol: float = TOL_BOUNDARY) -> list[tuple[tuple[int, int], bool, float]]:
    """Verdict of theta_i < delta_ij (+ guard band) for every ordered pair.

    Requires a hemisphere-filtered family; there the full angular
    condition (ii) implies this reduced form.
    """
    _require_hemisphere(fam, tol)
    out = []
    k = len(fam)
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            delta = cap_angular_distance(fam.caps[i], fam.caps[j])
            margin = delta - fam.caps[i].theta
            out.append(((i, j), margin >= -tol, margin))
    return out


def to_ball_system(fam: ModelFamily, tol: float = TOL_BOUNDARY) -> BallSystem:
    """Transcribe caps into balls: radii = theta, distances = delta.

    Rejects families violating the reduced center condition or the
    touching condition, naming the offending pair.
    """
    _require_hemisphere(fam, tol)
    k = len(fam)
    if k == 0:
        raise ValueError("cannot transcribe an empty family")
    dist = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            delta = cap_angular_distance(fam.caps[i], fam.caps[j])
            ti, tj = fam.caps[i].theta, fam.caps[j].theta
            if delta < max(ti, tj) - tol:
                raise ValueError(
                    f"pair ({i}, {j}) violates the center condition: "
                    f"delta = {delta:.6f} < max theta = {max(ti, tj):.6f}"
                )
            if delta > ti + tj + tol:
                raise ValueError(
                    f"pair ({i}, {j}) violates the touching condition: "
                    f"delta = {delta:.6f} > theta_i + theta_j = {ti + tj:.6f}"
                )
            dist[i, j] = dist[j, i] = delta
    balls = tuple(
        Ball(center=cap.z, radius=cap.theta) for cap in fam.caps
    )
    return BallSystem(balls=balls, dist=dist, n=fam.caps[0].n)


def normalize_scale(sys: BallSystem) -> BallSystem:
    """Rescale so the minimum center distance is exactly 1.

    The system invariants are scale-invariant, so validity is preserved;
    coincident centers are rejected.
    """
    dmin = sys.min_distance()
    if dmin <= 0.0:
        raise ValueError("coincident centers cannot be normalized")
    f = 1.0 / dmin
    balls = tuple(
        Ball(center=tuple(f * c for c in b.center), radius=f * b.radius)
        for b in sys.balls
    )
    return BallSystem(balls=balls, dist=sys.dist * f, n=sys.n, scale=sys.scale * f)


@dataclass(frozen=True)
class PartitionResult:
    """Near/far split of a normalized system at distance 2 from the pivot."""

    pivot: tuple[int, int]
    near: tuple[int, ...]
    far: tuple[int, ...]


def partition(sys: BallSystem, tol: float = 1e-9) -> PartitionResult:
    """Split at center distance 2 from the first pivot ball's center.

    The pivot pair realizes the minimum distance (ties broken by lowest
    index pair); centers at distance exactly 2 go to the far side.
    Requires a normalized system.
    """
    dmin = sys.min_distance()
    if abs(dmin - 1.0) > tol:
        raise ValueError(
            f"partition requires a normalized system (min distance 1), got {dmin!r}"
        )
    k = len(sys.balls)
    pivot = None
    for i in range(k):
        for j in range(i + 1, k):
            if abs(sys.dist[i, j] - dmin) <= 1e-12:
                pivot = (i, j)
                break
        if pivot:
            break
    assert pivot is not None
    d0 = sys.dist[pivot[0]]
    near = tuple(int(i) for i in range(k) if d0[i] < 2.0)
    far = tuple(int(i) for i in range(k) if d0[i] >= 2.0)
    return PartitionResult(pivot=pivot, near=near, far=far)


# ---------------------------------------------------------------------------
# counting constants
# ---------------------------------------------------------------------------

def near_bound(n: int) -> int:
    """The fixed near-count 2^(n+1).

    Reported as-is; see :func:`near_bound_volume` for the bound a plain
    volume argument actually certifies (which is larger for n >= 2, and
    achievable point configurations do exceed 2^(n+1) at n = 2).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    return 2 ** (n + 1)


def near_bound_volume(n: int) -> int:
    """Rigorous near-count via volumes: spacing-1 points in the open
    radius-2 ball give disjoint half-radius balls inside radius 5/2, so
    the count is at most 5^n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 5**n


def far_cone_angle() -> float:
    """Full aperture 2*arctan(sqrt(15)/7) of the cone each far ball
    excludes around its direction; half of it, arccos(7/8), is the
    guaranteed pairwise angle between far centers seen from the pivot."""
    return 2.0 * math.atan(math.sqrt(15.0) / 7.0)


def cap_fraction(n: int, alpha: float) -> float:
    """Normalized surface measure of a spherical cap of angular radius
    ``alpha`` on S^(n-1), by quadrature of sin^(n-2)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 < alpha <= math.pi:
        raise ValueError("alpha must lie in (0, pi]")
    if n == 1:
        # S^0 is two points; a cap of radius < pi is a single point
        return 0.5 if alpha < math.pi else 1.0
    if n == 2:
        return alpha / math.pi
    power = n - 2
    num, num_err = integrate.quad(
        lambda t: math.sin(t) ** power, 0.0, alpha, epsabs=0.0, epsrel=1e-12
    )
    den, den_err = integrate.quad(
        lambda t: math.sin(t) ** power, 0.0, math.pi, epsabs=0.0, epsrel=1e-12
    )
    return num / den


@lru_cache(maxsize=None)
def far_bound(n: int) -> int:
    """Count of pairwise-separated far directions: ceil of the reciprocal
    cap fraction at radius half the exclusion-cone aperture."""
    if n < 1:
        raise ValueError("n must be >= 1")
    frac = cap_fraction(n, far_cone_angle() / 2.0)
    return math.ceil(1.0 / frac)


@lru_cache(maxsize=None)
def fit_constants(horizon: int = FIT_HORIZON) -> tuple[float, float]:
    """Envelope constants (u, v) with u * v^(n+1) >= total count for every
    n up to ``horizon``.

    v is the worst growth ratio of the far count (floored at 2, the near
    count's own ratio); u then absorbs the finitely many prefactors.
    """
    totals = [2 * (near_bound(k) + far_bound(k)) for k in range(1, horizon + 1)]
    ratios = [far_bound(k + 1) / far_bound(k) for k in range(1, horizon)]
    v = max(2.0, max(ratios))
    u = max(t / v ** (k + 1) for k, t in zip(range(1, horizon + 1), totals))
    for k, t in zip(range(1, horizon + 1), totals):
        assert u * v ** (k + 1) >= t
    return u, v


@dataclass(frozen=True)
class BoundReport:
    """The explicit counting bound at rank rho = n + 1."""

    n: int
    rho: int
    near_bound: int
    far_bound: int
    hemisphere_factor: int
    total: int
    u: float
    v: float
    envelope: float
    horizon: int
    near_bound_volume: int

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "rho": self.rho,
            "near_bound": self.near_bound,
            "far_bound": self.far_bound,
            "hemisphere_factor": self.hemisphere_factor,
            "total": self.total,
            "u": self.u,
            "v": self.v,
            "envelope": self.envelope,
            "horizon": self.horizon,
            "near_bound_volume": self.near_bound_volume,
        }


def total_bound(n: int, horizon: int = FIT_HORIZON) -> BoundReport:
    """Total family-size bound 2 * (near + far) with the fitted envelope."""
    nb = near_bound(n)
    fb = far_bound(n)
    u, v = fit_constants(horizon)
    total = 2 * (nb + fb)
    return BoundReport(
        n=n,
        rho=n + 1,
        near_bound=nb,
        far_bound=fb,
        hemisphere_factor=2,
        total=total,
        u=u,
        v=v,
        envelope=u * v ** (n + 1),
        horizon=horizon,
        near_bound_volume=near_bound_volume(n),
    )


# ---------------------------------------------------------------------------
# cone-separation verification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConeSeparationReport:
    """Minimum subtended angle among far centers, against the cone constant.

    ``min_angle`` is the smallest comparison angle at the pivot center
    between two far centers (law of cosines on the distance matrix);
    ``min_aperture`` is twice that, the excluded-cone aperture the pair
    realizes.  The check passes when the aperture clears the constant
    within ``tol``.
    """

    min_angle: float
    min_aperture: float
    witness: tuple[int, int]
    threshold: float
    tol: float
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "min_angle": self.min_angle,
            "min_aperture": self.min_aperture,
            "witness": list(self.witness),
            "threshold": self.threshold,
            "tol": self.tol,
            "passed": self.passed,
        }


def verify_cone_separation(
    sys: BallSystem, part: PartitionResult, tol: float = 1e-6
) -> ConeSeparationReport:
    """Check every far pair subtends at least half the cone aperture at the
    pivot (equivalently, realizes aperture >= far_cone_angle() - tol)."""
    if not part.far:
        raise ValueError("the far set is empty")
    z0 = part.pivot[0]
    best = None
    for a_pos, i in enumerate(part.far):
        for j in part.far[a_pos + 1 :]:
            d0i = sys.dist[z0, i]
            d0j = sys.dist[z0, j]
            dij = sys.dist[i, j]
            cos_ang = (d0i * d0i + d0j * d0j - dij * dij) / (2.0 * d0i * d0j)
            ang = math.acos(min(1.0, max(-1.0, cos_ang)))
            if best is None or ang < best[0]:
                best = (ang, (i, j))
    if best is None:
        raise ValueError("need at least two far balls to compare")
    threshold = far_cone_angle()
    aperture = 2.0 * best[0]
    return ConeSeparationReport(
        min_angle=best[0],
        min_aperture=aperture,
        witness=best[1],
        threshold=threshold,
        tol=tol,
        passed=aperture >= threshold - tol,
    )


def cone_separation_infimum(
    grid: int = 400, span: float = 40.0
) -> tuple[float, float, tuple[float, float]]:
    """Numerically minimize the far-pair angle over the constraint system.

    Two far centers at distances k, r >= 2 from the pivot must keep their
    separation d above both k - 1 and r - 1 (each center stays outside
    the other's ball, whose radius exceeds its pivot distance minus the
    pivot radius < 1).  Eliminating d caps cos(angle) by
    min((k^2 + 2r - 1)/(2kr), (r^2 + 2k - 1)/(2kr)); the returned triple
    is (min_angle, aperture, argmin (k, r)) from a dense grid scan plus a
    local polish.
    """
    ks = np.linspace(2.0, span, grid)
    rs = np.linspace(2.0, span, grid)
    kk, rr = np.meshgrid(ks, rs, indexing="ij")
    f1 = (kk * kk + 2.0 * rr - 1.0) / (2.0 * kk * rr)
    f2 = (rr * rr + 2.0 * kk - 1.0) / (2.0 * kk * rr)
    cos_max = np.minimum(1.0, np.minimum(f1, f2))
    idx = np.unravel_index(np.argmax(cos_max), cos_max.shape)
    k0, r0 = float(kk[idx]), float(rr[idx])

    def neg_cos(x):
        k, r = x
        a = (k * k + 2.0 * r - 1.0) / (2.0 * k * r)
        b = (r * r + 2.0 * k - 1.0) / (2.0 * k * r)
        return -min(a, b)

    res = optimize.minimize(
        neg_cos,
        x0=[k0, r0],
        bounds=[(2.0, None), (2.0, None)],
        method="L-BFGS-B",
    )
    cos_best = min(1.0, max(float(np.max(cos_max)), -float(res.fun)))
    angle = math.acos(cos_best)
    arg = (float(res.x[0]), float(res.x[1]))
    return angle, 2.0 * angle, arg
