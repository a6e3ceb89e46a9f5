import math

import numpy as np
import pytest

import oracles
from cnlslab.classify import (
    Region,
    classify,
    energy_trapping,
    k_region_equivalence,
    kzero_scaling_witness,
    uniform_k_bounds,
)
from cnlslab.corpus import corpus_fields, make_family
from cnlslab.functionals import report, scale_H1inv
from cnlslab.grid import RadialField, sample_profile
from cnlslab.groundstate import eval_Wa
from cnlslab.profiles import GaussianProfile


def sub_threshold_members(p, grid, bundle, seed=7):
    out = []
    for label, u in corpus_fields(p, grid, seed=seed):
        rep = report(u, p)
        if math.isfinite(rep.e_a) and rep.e_a < bundle.m_a and rep.kinetic_sq > 1e-12:
            out.append((label, u, rep))
    return out


def test_scatter_example(p30, grid30, bundle30):
    u = eval_Wa(p30, grid30).scaled(0.5)
    v = classify(u, p30, bundle30)
    assert v.region is Region.SCATTER_SUB
    kin = oracles.ground_kinetic_sq(3, 1.0)
    assert abs(v.kinetic_margin - 0.75 * kin) / kin < 1e-8
    assert v.energy_margin > 0


def test_blowup_example(p30, grid30, bundle30):
    u = scale_H1inv(eval_Wa(p30, grid30).scaled(1.2), 100.0)
    v = classify(u, p30, bundle30)
    assert v.region is Region.BLOWUP_SUB
    assert v.kinetic_margin < 0
    assert v.energy_margin > 0


def test_ground_state_itself_is_above_threshold(p30, grid30, bundle30):
    # E^c(W) = m exactly, but the combined energy adds the positive
    # perturbative term, so the verdict is AboveThreshold with a note
    u = eval_Wa(p30, grid30)
    v = classify(u, p30, bundle30)
    assert v.region is Region.ABOVE_THRESHOLD
    assert "perturbative" in v.note or "critical-only" in v.note
    rep = v.report
    assert abs(rep.e_a_crit - bundle30.m_a) / bundle30.m_a < 1e-6


def test_ground_state_orbit_detection(p30, grid30, bundle30):
    # a synthetic datum with E_a within tol of m_a and matching kinetic norm:
    # scale the critical-only-threshold structure by hand through tol_E
    u = eval_Wa(p30, grid30)
    rep = report(u, p30)
    v = classify(u, p30, bundle30, tol_E=rep.e_a - bundle30.m_a + 1e-6)
    assert v.region is Region.GROUND_STATE_ORBIT


def test_tol_validation(p30, grid30, bundle30):
    with pytest.raises(ValueError):
        classify(eval_Wa(p30, grid30), p30, bundle30, tol_E=0.0)


def test_m_a_consistency(p3n, grid3n, bundle3n):
    rep = report(eval_Wa(p3n, grid3n), p3n)
    assert abs(rep.e_a_crit - bundle3n.m_a) / bundle3n.m_a < 1e-6


def test_variational_ratio(p3n, grid3n, bundle3n):
    # kinetic_sq/||W||^2 <= E_c/m for data with kinetic below the ground state
    for label, u in corpus_fields(p3n, grid3n):
        rep = report(u, p3n)
        if not math.isfinite(rep.e_a_crit) or rep.kinetic_sq > bundle3n.kinetic_sq:
            continue
        if rep.kinetic_sq < 1e-12:
            continue
        lhs = rep.kinetic_sq / bundle3n.kinetic_sq
        rhs = rep.e_a_crit / bundle3n.m_a
        assert lhs <= rhs * (1 + 1e-9) + 1e-12, label


def test_k_region_equivalence_examples(p30, grid30, bundle30):
    half = eval_Wa(p30, grid30).scaled(0.5)
    assert k_region_equivalence(half, p30, bundle30)
    conc = scale_H1inv(eval_Wa(p30, grid30).scaled(1.2), 100.0)
    assert k_region_equivalence(conc, p30, bundle30)
    with pytest.raises(ValueError):
        k_region_equivalence(eval_Wa(p30, grid30), p30, bundle30)  # E >= m


def test_k_region_equivalence_corpus(p3n, grid3n, bundle3n):
    for label, u, rep in sub_threshold_members(p3n, grid3n, bundle3n):
        assert k_region_equivalence(u, p3n, bundle3n), label


def test_uniform_k_bounds_examples(p30, grid30, bundle30):
    conc = scale_H1inv(eval_Wa(p30, grid30).scaled(1.2), 100.0)
    res = uniform_k_bounds(conc, p30, bundle30)
    assert res.branch == "negative" and res.bound_ok
    # K <= -(2d/(d-2)) (m - E): both sides negative, K well below
    assert res.k_a < res.bound < 0

    half = eval_Wa(p30, grid30).scaled(0.5)
    res2 = uniform_k_bounds(half, p30, bundle30)
    assert res2.branch == "positive" and res2.bound_ok
    b1, b2 = res2.positive_branches
    assert res2.bound == min(b1, b2)
    assert res2.k_a >= res2.bound


def test_uniform_k_bounds_corpus(p3n, grid3n, bundle3n):
    n_neg = 0
    for label, u, rep in sub_threshold_members(p3n, grid3n, bundle3n):
        res = uniform_k_bounds(u, p3n, bundle3n)
        assert res.bound_ok, (label, res)
        if res.branch == "negative":
            n_neg += 1
    assert n_neg >= 1  # the corpus covers the negative-K branch


def test_uniform_k_bounds_precondition(p3n, grid3n, bundle3n):
    with pytest.raises(ValueError):
        uniform_k_bounds(eval_Wa(p3n, grid3n), p3n, bundle3n)


def test_scaling_witness(p3n, grid3n, bundle3n):
    found = 0
    for label, u, rep in sub_threshold_members(p3n, grid3n, bundle3n):
        if rep.k_a >= 0:
            continue
        w = kzero_scaling_witness(u, p3n, bundle3n)
        assert abs(w.k_at_star) < 1e-6, label
        assert w.h_at_star >= bundle3n.m_a * (1 - 1e-3), (label, w)
        found += 1
    assert found >= 1


def test_scaling_witness_requires_negative_k(p3n, grid3n, bundle3n):
    small = sample_profile(GaussianProfile(0.1, 1.0), grid3n)
    with pytest.raises(ValueError):
        kzero_scaling_witness(small, p3n, bundle3n)


def test_energy_trapping_predicate(bundle3n):
    ref = bundle3n.kinetic_sq
    below = [0.3 * ref, 0.4 * ref, 0.35 * ref]
    assert energy_trapping(below, bundle3n).ok
    crossing = [0.5 * ref, 1.5 * ref]
    res = energy_trapping(crossing, bundle3n)
    assert not res.ok and "crossed" in res.note
    boundary = [ref, ref]
    res2 = energy_trapping(boundary, bundle3n)
    assert not res2.ok and "boundary" in res2.note
    above = [2.0 * ref, 1.7 * ref]
    res3 = energy_trapping(above, bundle3n)
    assert res3.ok and res3.note == "above"
