import math

import numpy as np
import pytest

from negcurve.conditions import ModelFamily
from negcurve.klein import CapRep
from negcurve.packing import total_bound
from negcurve.search import (
    SearchParams,
    candidate_caps,
    certify,
    compatible,
    exact_max,
    greedy_max,
)

RNG = np.random.default_rng(555)

HALF = math.pi / 2


def circle_cap(angle, theta=HALF):
    return CapRep(z=(math.cos(angle), math.sin(angle)), theta=theta)


def square_caps():
    # exact feet: the cross-polytope directions on the circle
    return [
        CapRep(z=(1.0, 0.0), theta=HALF),
        CapRep(z=(0.0, 1.0), theta=HALF),
        CapRep(z=(-1.0, 0.0), theta=HALF),
        CapRep(z=(0.0, -1.0), theta=HALF),
    ]


def octahedron_caps():
    out = []
    for axis in range(3):
        for sign in (1.0, -1.0):
            z = [0.0, 0.0, 0.0]
            z[axis] = sign
            out.append(CapRep(z=tuple(z), theta=HALF))
    return out


def brute_force_max_clique(caps):
    """Independent oracle: enumerate every feasible subset recursively."""
    k = len(caps)
    compat = [[compatible(caps[i], caps[j]) for j in range(k)] for i in range(k)]
    best = 0

    def extend(clique, cands):
        nonlocal best
        best = max(best, len(clique))
        for pos, v in enumerate(cands):
            if all(compat[v][u] for u in clique):
                extend(clique + [v], cands[pos + 1 :])

    extend([], list(range(k)))
    return best


def test_compatible_examples():
    a, b = circle_cap(0.0), circle_cap(HALF)
    assert compatible(a, b)  # delta = pi/2: both boundary conditions hold

    antipodal = circle_cap(math.pi)
    assert compatible(a, antipodal)  # delta = pi boundary of (iii)

    close = circle_cap(math.pi / 4)
    assert not compatible(a, close)  # fails (ii)

    same_foot = CapRep(z=(1.0, 0.0), theta=0.3)
    assert not compatible(a, same_foot)  # degenerate pair is incompatible


def test_certify_square():
    cert = certify(ModelFamily(square_caps()))
    assert cert.valid
    # boundary pairs: margins are numerically zero
    assert abs(cert.min_margin) < 1e-30 or cert.min_margin >= 0


def test_certify_perturbed_square_fails():
    caps = square_caps()
    caps[0] = circle_cap(0.01)  # slide one foot toward its neighbour? no:
    # moving z0 by +0.01 rad toward z1 shrinks delta(0,1) below pi/2
    cert = certify(ModelFamily(caps))
    assert not cert.valid
    assert any(
        v.condition == "ii" and set(v.indices) == {0, 1} for v in cert.violations
    )


def test_certify_empty_and_single():
    assert certify(ModelFamily([])).valid
    assert certify(ModelFamily([circle_cap(0.5)])).valid


def test_greedy_square_bound_n2():
    params = SearchParams(n=2, seed=1, restarts=4, candidate_grid=math.pi / 180)
    result = greedy_max(params)
    assert result.size >= 4
    assert result.best.certificate.valid
    assert result.method == "greedy"
    assert result.size <= total_bound(2).total


def test_greedy_octahedron_bound_n3():
    params = SearchParams(n=3, seed=1, restarts=4)
    result = greedy_max(params)
    assert result.size >= 6
    assert result.best.certificate.valid
    assert result.size <= total_bound(3).total


def test_greedy_deterministic():
    params = SearchParams(n=2, seed=99, restarts=3)
    a = greedy_max(params)
    b = greedy_max(params)
    assert a.to_json_dict() == b.to_json_dict()


def test_greedy_monotone_in_restarts():
    sizes = []
    for restarts in (1, 2, 4, 8):
        params = SearchParams(n=3, seed=7, restarts=restarts)
        sizes.append(greedy_max(params).size)
    assert sizes == sorted(sizes)


def test_greedy_respects_thread_env(monkeypatch):
    params = SearchParams(n=2, seed=5, restarts=4)
    base = greedy_max(params).to_json_dict()
    monkeypatch.setenv("NEGCURVE_THREADS", "4")
    threaded = greedy_max(params).to_json_dict()
    assert base == threaded


def test_exact_max_square_with_blocker():
    caps = square_caps() + [circle_cap(0.7)]  # within pi/2 of the first cap
    params = SearchParams(n=2, max_clique_cutoff=64)
    result = exact_max(params, caps)
    assert result.size == 4
    assert result.best.certificate.valid
    assert result.size == brute_force_max_clique(caps)


def test_exact_max_octahedron():
    params = SearchParams(n=3, max_clique_cutoff=64)
    result = exact_max(params, octahedron_caps())
    assert result.size == 6


def test_exact_max_single_candidate():
    params = SearchParams(n=2)
    assert exact_max(params, [circle_cap(0.0)]).size == 1


def test_exact_max_cutoff():
    params = SearchParams(n=2, max_clique_cutoff=3)
    with pytest.raises(ValueError, match="greedy_max"):
        exact_max(params, square_caps())


def random_candidates(rng, n, count):
    caps = []
    for _ in range(count):
        z = rng.normal(size=n)
        z /= np.linalg.norm(z)
        theta = HALF if rng.random() < 0.5 else float(rng.uniform(0.2, HALF))
        caps.append(CapRep(z=tuple(z), theta=theta))
    return caps


def test_exact_max_matches_brute_force():
    params = SearchParams(n=3, max_clique_cutoff=64)
    for trial in range(25):
        count = int(RNG.integers(4, 15))
        caps = random_candidates(RNG, 3, count)
        assert exact_max(params, caps).size == brute_force_max_clique(caps)


def test_candidate_caps_include_cross_polytope():
    params = SearchParams(n=4, seed=3)
    caps = candidate_caps(params, np.random.default_rng(3))
    axes = {tuple(c.z) for c in caps if c.theta == HALF}
    for axis in range(4):
        for sign in (1.0, -1.0):
            z = [0.0] * 4
            z[axis] = sign
            assert tuple(z) in axes


def test_search_result_json_excludes_elapsed():
    params = SearchParams(n=2, seed=1, restarts=1)
    blob = greedy_max(params).to_json_dict()
    assert "elapsed" not in blob
    assert blob["size"] == len(blob["caps"])
