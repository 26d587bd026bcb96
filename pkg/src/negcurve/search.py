"""Search for large cap families satisfying the pairwise conditions.

A family of caps is valid when every pair passes the angular conditions
(ii) and (iii); valid families are exactly the cliques of the
compatibility graph over a candidate set.  The searches here produce
certified configurations whose size is a lower bound for the largest
valid family in dimension n (the pi/2-separation kissing count of the
model): a deterministic seeded greedy over grid-plus-random candidates,
and an exact branch-and-bound maximum clique for candidate sets small
enough to afford it.

Candidate generation always includes the 2n cross-polytope directions
with theta = pi/2, the natural extremal stratum: those caps are pairwise
compatible, so every run certifies at least 2n.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import mpmath
import numpy as np

from ._runtime import thread_count
from .conditions import TOL_BOUNDARY, ModelFamily, check_ii, check_iii
from .errors import DegenerateCapPairError
from .klein import CapRep
from .packing import total_bound

#: decimal digits used when re-verifying certificates
CERTIFY_DPS = 60

#: certificates reject margins below this (absorbs working-precision
#: residue on exact-boundary pairs)
CERTIFY_FLOOR = mpmath.mpf("-1e-30")

#: the double closest to pi/2; certificates read it as the exact right
#: angle, since the extremal stratum theta = pi/2 is exact by construction
#: and no double can represent it
RIGHT_ANGLE = math.pi / 2


@dataclass(frozen=True)
class SearchParams:
    """Knobs for the configuration search."""

    n: int
    seed: int = 20240601
    restarts: int = 8
    candidate_grid: float = math.pi / 12
    random_candidates: int = 64
    max_clique_cutoff: int = 256

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("search requires n >= 2")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not self.candidate_grid > 0:
            raise ValueError("candidate_grid must be positive")


@dataclass(frozen=True)
class CertificateEntry:
    indices: tuple[int, ...]
    condition: str
    margin: float


@dataclass(frozen=True)
class Certificate:
    """High-precision re-verification of a configuration.

    All pair margins are recomputed at ``digits`` significant digits from
    the stored coordinates; the certificate is valid when no margin falls
    below the tiny negative floor reserved for exact-boundary pairs.
    """

    valid: bool
    digits: int
    min_margin: float
    worst: CertificateEntry | None
    violations: tuple[CertificateEntry, ...]

    def to_json_dict(self) -> dict:
        return {
            "valid": self.valid,
            "digits": self.digits,
            "min_margin": self.min_margin,
            "worst": None
            if self.worst is None
            else {
                "indices": list(self.worst.indices),
                "condition": self.worst.condition,
                "margin": self.worst.margin,
            },
            "violations": [
                {
                    "indices": list(v.indices),
                    "condition": v.condition,
                    "margin": v.margin,
                }
                for v in self.violations
            ],
        }


@dataclass(frozen=True)
class Configuration:
    """A cap family together with its certificate."""

    caps: ModelFamily
    certificate: Certificate

    def __len__(self) -> int:
        return len(self.caps)


@dataclass(frozen=True)
class SearchResult:
    best: Configuration
    size: int
    method: str
    elapsed: float

    def to_json_dict(self) -> dict:
        # elapsed is intentionally omitted: reports must be byte-identical
        # across reruns with the same inputs and seed
        return {
            "size": self.size,
            "method": self.method,
            "caps": [
                {"z": [float(x) for x in cap.z], "theta": float(cap.theta)}
                for cap in self.best.caps.caps
            ],
            "certificate": self.best.certificate.to_json_dict(),
        }


def compatible(c1: CapRep, c2: CapRep, tol: float = TOL_BOUNDARY) -> bool:
    """Pairwise compatibility: conditions (ii) and (iii) both hold.

    Caps with coincident feet are never compatible here (the pair checks
    reject them as degenerate, but a total relation is needed to build
    the compatibility graph).
    """
    try:
        return check_ii(c1, c2, tol).holds and check_iii(c1, c2, tol).holds
    except DegenerateCapPairError:
        return False


def certify(caps: ModelFamily, digits: int = CERTIFY_DPS) -> Certificate:
    """Recompute every pair margin at high precision.

    An empty or single-cap family certifies vacuously.  Fails when any
    margin drops below the floor, naming the pair and the condition.
    """
    k = len(caps)
    if k < 2:
        return Certificate(
            valid=True, digits=digits, min_margin=math.inf, worst=None, violations=()
        )
    entries: list[CertificateEntry] = []
    with mpmath.workdps(digits):
        zs = [[mpmath.mpf(x) for x in cap.z] for cap in caps.caps]
        thetas = [
            mpmath.pi / 2 if cap.theta == RIGHT_ANGLE else mpmath.mpf(cap.theta)
            for cap in caps.caps
        ]
        for i in range(k):
            for j in range(i + 1, k):
                dot = mpmath.fsum(a * b for a, b in zip(zs[i], zs[j]))
                dot = max(mpmath.mpf(-1), min(mpmath.mpf(1), dot))
                delta = mpmath.acos(dot)
                m_ii = mpmath.cos(thetas[i]) * mpmath.cos(thetas[j]) - mpmath.cos(delta)
                m_iii = thetas[i] + thetas[j] - delta
                entries.append(CertificateEntry((i, j), "ii", float(m_ii)))
                entries.append(CertificateEntry((i, j), "iii", float(m_iii)))
    violations = tuple(
        e for e in entries if e.margin < float(CERTIFY_FLOOR)
    )
    worst = min(entries, key=lambda e: e.margin)
    return Certificate(
        valid=not violations,
        digits=digits,
        min_margin=worst.margin,
        worst=worst,
        violations=violations,
    )


# ---------------------------------------------------------------------------
# candidate generation
# ---------------------------------------------------------------------------

def _snap_direction(z) -> tuple[float, ...]:
    """Canonicalize grid directions: trig residue near 0 or +/-1 becomes
    exact, so symmetry-axis points dedupe onto their exact forms."""
    out = []
    for x in z:
        if abs(x) < 1e-12:
            x = 0.0
        elif abs(abs(x) - 1.0) < 1e-12:
            x = math.copysign(1.0, x)
        out.append(float(x))
    norm = math.sqrt(sum(x * x for x in out))
    return tuple(x / norm for x in out)


def _cross_polytope(n: int) -> list[tuple[float, ...]]:
    dirs = []
    for axis in range(n):
        for sign in (1.0, -1.0):
            z = [0.0] * n
            z[axis] = sign
            dirs.append(tuple(z))
    return dirs


def _grid_directions(n: int, grid: float) -> list[tuple[float, ...]]:
    if n == 2:
        count = max(4, int(round(2.0 * math.pi / grid)))
        return [
            _snap_direction(
                (math.cos(2.0 * math.pi * k / count),
                 math.sin(2.0 * math.pi * k / count))
            )
            for k in range(count)
        ]
    if n == 3:
        out = [(0.0, 0.0, 1.0), (0.0, 0.0, -1.0)]
        n_polar = max(2, int(round(math.pi / grid)))
        n_azim = max(4, int(round(2.0 * math.pi / grid)))
        for a in range(1, n_polar):
            phi = math.pi * a / n_polar
            for b in range(n_azim):
                psi = 2.0 * math.pi * b / n_azim
                out.append(
                    _snap_direction(
                        (
                            math.sin(phi) * math.cos(psi),
                            math.sin(phi) * math.sin(psi),
                            math.cos(phi),
                        )
                    )
                )
        return out
    # higher dimensions: grids explode, rely on axes plus random augmentation
    return []


def candidate_caps(params: SearchParams, rng: np.random.Generator) -> list[CapRep]:
    """Cross-polytope axes and a uniform grid at theta = pi/2, plus random
    directions paired with random radii in (0, pi/2]."""
    n = params.n
    seen: set[tuple] = set()
    caps: list[CapRep] = []

    def push(z, theta):
        key = tuple(round(x, 9) for x in z) + (round(theta, 9),)
        if key in seen:
            return
        seen.add(key)
        caps.append(CapRep(z=tuple(float(x) for x in z), theta=float(theta)))

    for z in _cross_polytope(n):
        push(z, math.pi / 2)
    for z in _grid_directions(n, params.candidate_grid):
        push(z, math.pi / 2)
    if params.random_candidates:
        pts = rng.normal(size=(params.random_candidates, n))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        half = params.random_candidates // 2
        thetas = np.concatenate(
            [
                np.full(half, math.pi / 2),
                rng.uniform(0.0, math.pi / 2, size=params.random_candidates - half),
            ]
        )
        thetas = np.clip(thetas, 1e-6, math.pi / 2)
        for z, theta in zip(pts, thetas):
            push(z, float(theta))
    return caps


def _greedy_order(caps: list[CapRep]) -> list[int]:
    # larger caps constrain most, so place them first; feet break ties
    return sorted(range(len(caps)), key=lambda i: (-caps[i].theta, caps[i].z))


def _greedy_clique(caps: list[CapRep], tol: float) -> list[int]:
    chosen: list[int] = []
    for idx in _greedy_order(caps):
        if all(compatible(caps[idx], caps[j], tol) for j in chosen):
            chosen.append(idx)
    return chosen


def _config_key(caps: list[CapRep]) -> str:
    payload = sorted(
        ([round(x, 12) for x in cap.z], round(cap.theta, 12)) for cap in caps
    )
    blob = json.dumps(payload, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def greedy_max(params: SearchParams, tol: float = TOL_BOUNDARY) -> SearchResult:
    """Best greedy clique over ``restarts`` independently seeded candidate
    draws; deterministic for a fixed seed regardless of thread scheduling
    (the reduction is max by size with certificate-hash tie-break)."""
    t0 = time.perf_counter()
    seeds = np.random.SeedSequence(params.seed).spawn(params.restarts)

    def run(seq) -> tuple[int, str, list[CapRep]]:
        rng = np.random.default_rng(seq)
        caps = candidate_caps(params, rng)
        picked = [caps[i] for i in _greedy_clique(caps, tol)]
        return len(picked), _config_key(picked), picked

    workers = min(thread_count(), params.restarts)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, seeds))
    else:
        outcomes = [run(s) for s in seeds]
    size, _, best_caps = max(outcomes, key=lambda o: (o[0], o[1]))

    family = ModelFamily(best_caps)
    cert = certify(family)
    result = SearchResult(
        best=Configuration(caps=family, certificate=cert),
        size=size,
        method="greedy",
        elapsed=time.perf_counter() - t0,
    )
    limit = total_bound(params.n).total
    if result.size > limit:
        raise AssertionError(
            f"search produced {result.size} caps, above the counting bound {limit}"
        )
    return result


# ---------------------------------------------------------------------------
# exact maximum clique
# ---------------------------------------------------------------------------

def _adjacency_masks(caps: list[CapRep], tol: float) -> list[int]:
    k = len(caps)
    masks = [0] * k
    for i in range(k):
        for j in range(i + 1, k):
            if compatible(caps[i], caps[j], tol):
                masks[i] |= 1 << j
                masks[j] |= 1 << i
    return masks


def _max_clique_bitset(masks: list[int]) -> list[int]:
    """Branch and bound with greedy-coloring bounds on bitset adjacency."""
    k = len(masks)
    best: list[int] = []

    def color_order(p: int) -> list[tuple[int, int]]:
        order = []
        color = 0
        while p:
            color += 1
            avail = p
            while avail:
                v = (avail & -avail).bit_length() - 1
                avail &= avail & ~masks[v] & ~(1 << v)
                p &= ~(1 << v)
                order.append((v, color))
        return order

    def expand(r: list[int], p: int):
        nonlocal best
        for v, bound in reversed(color_order(p)):
            if len(r) + bound <= len(best):
                return
            r.append(v)
            np_ = p & masks[v]
            if np_:
                expand(r, np_)
            elif len(r) > len(best):
                best = list(r)
            r.pop()
            p &= ~(1 << v)

    expand([], (1 << k) - 1)
    return best


def exact_max(
    params: SearchParams, candidates: list[CapRep], tol: float = TOL_BOUNDARY
) -> SearchResult:
    """True maximum clique over an explicit candidate set.

    Refuses candidate sets above ``params.max_clique_cutoff`` (fall back
    to :func:`greedy_max` there).
    """
    if len(candidates) > params.max_clique_cutoff:
        raise ValueError(
            f"{len(candidates)} candidates exceed the exact-search cutoff "
            f"{params.max_clique_cutoff}; use greedy_max instead"
        )
    t0 = time.perf_counter()
    masks = _adjacency_masks(candidates, tol)
    chosen = sorted(_max_clique_bitset(masks))
    family = ModelFamily([candidates[i] for i in chosen])
    cert = certify(family)
    return SearchResult(
        best=Configuration(caps=family, certificate=cert),
        size=len(chosen),
        method="exact",
        elapsed=time.perf_counter() - t0,
    )
