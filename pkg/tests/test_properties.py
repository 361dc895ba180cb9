"""Hypothesis property tests for the structural invariants of every module."""
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ergolab.boweneye import SaddleParams, eta_measure, fraction_limit_points, simulate
from ergolab.config import ExperimentConfig
from ergolab.decompose import acyclic_condensation, attractors_and_basins, build_transition_graph
from ergolab.ergopt import block_lengths, construct_oscillating_orbit, enumerate_periodic_orbits, max_birkhoff_over_periodic
from ergolab.grid import GridPartition
from ergolab.growing import growing_times, horseshoe_search, pre_ball, truncated_distance
from ergolab.orbitstats import (
    EmpiricalMeasure, TestFunctionFamily, birkhoff_series, empirical_measure, measure_distance,
    omega_limit_estimate, statistical_omega_limit, statistical_spectrum,
)
from ergolab.systems import CIRCLE, INTERVAL, SymbolicDoubling, make_system, orbit

unit = st.floats(0.0, 1.0, exclude_max=True, allow_nan=False)
open_unit = st.floats(0.001, 0.999, allow_nan=False)
M = 16
masses = arrays(np.float64, M, elements=st.floats(0.0, 1.0, allow_nan=False)).filter(lambda a: a.sum() > 0)
FAM = TestFunctionFamily.harmonics(CIRCLE, 8)
GRID = GridPartition.of(CIRCLE, M)


def _measure(a):
    return EmpiricalMeasure(GRID, a / a.sum(), 1)


# --- systems ---------------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(st.sampled_from(["doubling", "tent", "logistic", "manneville_pomeau", "contraction"]), unit)
def test_one_dim_images_in_space(family, x):
    s = make_system(family)
    assert s.space.contains(s.step(x))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 53), st.lists(st.tuples(st.text("01", min_size=1, max_size=3), st.integers(1, 5)), min_size=1, max_size=4))
def test_symbolic_shift_agrees_with_doubling(B, blocks):
    from ergolab.symbolic import BlockProgram
    s = SymbolicDoubling(program=BlockProgram(tuple(blocks), B))
    pts = orbit(s, 0, 20)
    assert np.all(np.abs(np.mod(2 * pts[:-1], 1.0) - pts[1:]) <= 2.0 ** -(B - 1))


@settings(max_examples=50, deadline=None)
@given(open_unit)
def test_exact_doubling_orbit_is_an_orbit(x):
    # consecutive points of the exact route differ from float doubling by at most 2^-52
    pts = orbit(make_system("doubling"), x, 200)
    assert np.all(np.abs(np.mod(2 * pts[:-1], 1.0) - pts[1:]) <= 2.0 ** -51)


# --- orbitstats ------------------------------------------------------------

@settings(max_examples=200, deadline=None)
@given(masses, masses, masses)
def test_metric_axioms(a, b, c):
    mu, nu, la = _measure(a), _measure(b), _measure(c)
    d = measure_distance(mu, nu, FAM)
    assert measure_distance(mu, mu, FAM) == 0.0
    assert d >= 0.0
    assert d == measure_distance(nu, mu, FAM)
    assert d <= measure_distance(mu, la, FAM) + measure_distance(la, nu, FAM) + 1e-15
    if d == 0.0:
        np.testing.assert_allclose(mu.integrals(FAM), nu.integrals(FAM), atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["doubling", "logistic", "tent", "manneville_pomeau"]), open_unit)
def test_statistical_omega_inside_omega(family, x):
    assume(abs(x - 0.5) > 1e-9)
    s = make_system(family)
    N = 20_000
    burn = N // 2
    sp = statistical_spectrum(s, x, N, 32, burn_in=burn)
    assert statistical_omega_limit(sp) <= omega_limit_estimate(s, x, N, 32, 0.5)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(2_000, 50_000))
def test_periodic_gap_bound(k, N):
    D = 2 ** k - 1
    assume(D > 1)
    x0 = 1 / D
    phi = lambda x: 0.5 * (1 + np.cos(2 * np.pi * x))
    rep = birkhoff_series(make_system("doubling"), x0, phi, N)
    assert rep.limsup >= rep.liminf
    assert rep.gap <= k * 1.0 / rep.tail_start + 1e-12


@settings(max_examples=30, deadline=None)
@given(open_unit, st.floats(1.01, 1.1))
def test_measure_independent_of_schedule(x, ratio):
    assume(abs(x - 0.5) > 1e-9)
    s = make_system("logistic")
    a = empirical_measure(s, x, 5000, 32, burn_in=100)
    sp = statistical_spectrum(s, x, 5000, 32, ratio=ratio, burn_in=100)
    b = empirical_measure(s, x, 5000, 32, burn_in=100)
    np.testing.assert_array_equal(a.masses, b.masses)
    assert a.masses.sum() == pytest.approx(1.0, abs=1e-12)
    assert sp.checkpoints[-1] == 4900


@settings(max_examples=30, deadline=None)
@given(open_unit)
def test_birkhoff_reverse_order(x):
    assume(abs(x - 0.5) > 1e-9)
    s = make_system("logistic")
    phi = lambda y: 0.5 * (1 + np.sin(2 * np.pi * y))
    rep = birkhoff_series(s, x, phi, 10_000)
    vals = phi(orbit(s, x, 10_000))
    assert rep.averages[-1] == pytest.approx(math.fsum(vals[::-1].tolist()) / 10_000, rel=1e-9)
    lo, hi = float(vals.min()), float(vals.max())
    assert lo - 1e-12 <= rep.liminf <= rep.limsup <= hi + 1e-12


# --- ergopt ----------------------------------------------------------------

@pytest.mark.parametrize("family,P", [("doubling", 10), ("cat_map", 6)])
def test_orbits_close_exactly(family, P):
    s = make_system(family)
    for o in enumerate_periodic_orbits(s, P):
        x = o.points[0]
        for _ in range(o.period):
            if family == "doubling":
                x = (2 * x) % 1
            else:
                (a, b), (c, d) = s.matrix
                x = ((a * x[0] + b * x[1]) % 1, (c * x[0] + d * x[1]) % 1)
        assert x == o.points[0]
        assert all(isinstance(v, Fraction) for p in o.points for v in (p if isinstance(p, tuple) else (p,)))


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 7), st.sampled_from(["cos", "sin"]))
def test_max_monotone_in_period(shift, kind):
    trig = np.cos if kind == "cos" else np.sin
    phi = lambda x: 0.5 * (1 + trig(2 * np.pi * (x + shift / 8)))
    d = make_system("doubling")
    vals = [max_birkhoff_over_periodic(d, phi, P).value for P in range(1, 10)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


@settings(max_examples=30, deadline=None)
@given(st.floats(2.0, 8.0), st.lists(st.sampled_from(["0", "01", "001", "011"]), min_size=2, max_size=3, unique=True))
def test_block_end_guarantee(rho, words):
    # block-end running averages from the exact bookkeeping, with phi the orbit average per word
    avg = {"0": 1.0, "01": 0.25, "001": 0.3765, "011": 0.3765}
    periods = [len(w) for w in words]
    plan = block_lengths(periods, rho, 10 ** 5, "geometric")
    total, s = 0, 0.0
    for k, (t, reps) in enumerate(plan):
        L = reps * periods[t]
        total += L
        s += avg[words[t]] * L
        if k >= 1 and L < 10 ** 5 and total < 10 ** 5:
            assert abs(s / total - avg[words[t]]) <= 1.0 / rho + max(periods) / L + 1e-12


# --- decompose -------------------------------------------------------------

@settings(max_examples=15, deadline=None)
@given(st.floats(0.6, 1.0), st.sampled_from([32, 64, 128]), st.integers(0, 1))
def test_graph_structure(t, m, padding):
    g = build_transition_graph(make_system("logistic", t=t), m, padding=padding)
    cond, order = acyclic_condensation(g)
    rep = attractors_and_basins(g)
    n_comp, labels = g.scc_labels
    out_deg = np.diff(cond.indptr)
    for a in rep.attractors:
        assert out_deg[labels[next(iter(a))]] == 0
    covered = set().union(*rep.basins) | rep.undecided
    assert covered == set(range(g.n_cells))
    if all(rep.fat):
        r = min(rep.inscribed_radius)
        assert rep.count <= INTERVAL.diameter / (2 * r)


@settings(max_examples=10, deadline=None)
@given(st.floats(0.6, 1.0))
def test_attractors_grow_with_padding(t):
    s = make_system("logistic", t=t)
    a0 = attractors_and_basins(build_transition_graph(s, 128, padding=0)).attractors
    a1 = attractors_and_basins(build_transition_graph(s, 128, padding=1)).attractors
    union = frozenset().union(*a1)
    assert all(a <= union for a in a0)


@pytest.mark.parametrize("family,params", [("doubling", {}), ("tent", {}), ("logistic", {"t": 1.0})])
def test_omega_minus_attractors_has_no_block(family, params):
    g = build_transition_graph(make_system(family, **params), 64)
    rep = attractors_and_basins(g)
    rest = rep.omega - frozenset().union(*rep.attractors)
    cells = sorted(rest)
    assert not any(c + 1 in rest for c in cells)


# --- growing ---------------------------------------------------------------

@settings(max_examples=20, deadline=None)
@given(open_unit)
def test_growing_witness_rechecked(x):
    import mpmath
    assume(abs(x - 0.5) > 1e-9)
    s = make_system("logistic")
    delta = 0.05
    rec = growing_times(s, x, delta, 60, pre_balls=False)
    ys = orbit(s, x, 61)
    for n, q in zip(rec.times, rec.centers):
        assert abs(ys[n] - q) < delta / 2
        pb = pre_ball(s, x, n, delta)
        assert pb.left <= x <= pb.right
        if pb.diameter < 1e-9:
            continue  # double endpoints no longer pin the image down
        lo, hi = max(0.0, q - delta), min(1.0, q + delta)
        # exact inverse branches chosen by the float orbit; a forward check is
        # no use here since the float orbit only shadows a true orbit. The code
        # anchors on rounded orbit points and solves a rounded quadratic, so each
        # step may add some ulps, and
        # a value error e at z moves z by at most min(e / |f'(z)|, sqrt(e) / 2)
        eps = np.finfo(float).eps
        with mpmath.workdps(80):
            ends = [mpmath.mpf(lo), mpmath.mpf(hi)]
            errs = [0.0, 0.0]
            for y in ys[n - 1::-1]:
                sign = -1 if y < 0.5 else 1
                ends = [(1 + sign * mpmath.sqrt(1 - v)) / 2 for v in ends]
                errs = [min((e + 16 * eps) / max(abs(float(8 * z - 4)), 1e-300), np.sqrt(e + 16 * eps) / 2)
                        for e, z in zip(errs, ends)]
            ends = [float(v) for v in ends]
        if ends[0] > ends[1]:
            ends, errs = ends[::-1], errs[::-1]
        assert ends[0] == pytest.approx(pb.left, abs=errs[0] + 1e-15)
        assert ends[1] == pytest.approx(pb.right, abs=errs[1] + 1e-15)


@settings(max_examples=20, deadline=None)
@given(open_unit, st.floats(0.01, 0.2))
def test_growing_times_monotone_in_radius(x, delta):
    s = make_system("logistic")
    big = set(growing_times(s, x, delta, 300, pre_balls=False).times)
    small = set(growing_times(s, x, delta / 2, 300, pre_balls=False).times)
    assert big <= small


@settings(max_examples=30, deadline=None)
@given(open_unit, st.integers(1, 12), st.floats(0.01, 0.2))
def test_affine_pre_ball_diameter(x, n, delta):
    for fam in ("doubling", "tent"):
        pb = pre_ball(make_system(fam), x, n, delta, 0.5)
        if pb is not None and 0 < pb.q - delta and pb.q + delta < 1:
            assert pb.diameter == pytest.approx(2 * delta * 2.0 ** -n, rel=1e-9)


@settings(max_examples=100, deadline=None)
@given(arrays(np.float64, 20, elements=unit), st.floats(1e-4, 0.1))
def test_truncated_distance(y, dt):
    s = make_system("logistic")
    d = truncated_distance(s, y, dt)
    with np.errstate(divide="ignore"):
        assert np.all(-np.log(d) >= 0)
    far = np.abs(y - 0.5) > dt
    assert np.all(d[far] == 1.0)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.3, 0.7), st.floats(0.05, 0.2), st.sampled_from(["doubling", "tent", "logistic"]))
def test_horseshoe_pairs(p, eps, family):
    s = make_system(family)
    hs = horseshoe_search(s, p, eps, 5)
    assume(hs is not None)
    (a, b), (c, d) = sorted([hs.U0, hs.U1])
    assert b < c
    for (u, v), n in ((hs.U0, hs.n0), (hs.U1, hs.n1)):
        if s.space.periodic[0]:
            lift = lambda z: z
            for _ in range(n):
                lift = (lambda f: (lambda z: s.lift(f(z))))(lift)
            ends = sorted([lift(u), lift(v)])
            assert ends[1] - ends[0] == pytest.approx(2 * eps, abs=1e-9)
        else:
            ends = sorted(float(orbit(s, e, n + 1)[-1]) for e in (u, v))
            assert ends == pytest.approx([max(0.0, p - eps), min(1.0, p + eps)], abs=1e-9)


# --- boweneye --------------------------------------------------------------

pos = st.floats(0.2, 5.0)


@settings(max_examples=100, deadline=None)
@given(pos, pos)
def test_geometric_sojourns(r, ap):
    p = SaddleParams(-r * ap, ap, -r * ap, ap)
    tr = simulate(p, 30)
    np.testing.assert_allclose(tr.log_s, np.arange(30) * math.log(r), rtol=1e-12, atol=1e-12)


@settings(max_examples=100, deadline=None)
@given(pos, pos, pos, pos, st.floats(0.1, 10.0))
def test_scaling_invariance(am, ap, bm, bp, c):
    p = SaddleParams(-am, ap, -bm, bp)
    q = SaddleParams(-c * am, c * ap, -c * bm, c * bp, s1=c)
    np.testing.assert_allclose(simulate(p, 60).fraction_A, simulate(q, 60).fraction_A, rtol=1e-9)
    assert eta_measure(p).c_A == pytest.approx(eta_measure(q).c_A)
    hi, lo = fraction_limit_points(p, 100)
    tail = simulate(p, 100).fraction_A[49:]
    assert 0 < lo <= tail.min() + 1e-15 and tail.max() <= hi + 1e-15 and hi < 1


@settings(max_examples=50, deadline=None)
@given(st.floats(1.5, 4.0), st.floats(1.5, 4.0))
def test_divergent_cycles_oscillate(a, b):
    p = SaddleParams.of((-a, 1), (-b, 1))
    assert p.rho > 1
    hi, lo = fraction_limit_points(p, 200)
    assert hi - lo > 0.05
    assert simulate(p, 200).log_time_total[-1] > 50


# --- config ----------------------------------------------------------------

words = st.text("abcdefghij_", min_size=1, max_size=8)
values = st.one_of(st.integers(-10 ** 6, 10 ** 6), st.floats(-1e3, 1e3, allow_nan=False), st.booleans(),
                   st.lists(st.integers(-9, 9), max_size=4), words)


@settings(max_examples=200, deadline=None)
@given(st.dictionaries(words, values, max_size=5), st.dictionaries(words, values, max_size=5),
       st.integers(0, 2 ** 32))
def test_config_round_trip(system, schedule, seed):
    cfg = ExperimentConfig("spectrum", system=system, schedule=schedule, seed=seed)
    text = cfg.to_text()
    again = ExperimentConfig.parse(text)
    assert again == cfg
    assert again.to_text() == text
