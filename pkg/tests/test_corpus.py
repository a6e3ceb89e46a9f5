import numpy as np
import pytest

from cnlslab.corpus import FAMILY_NAMES, corpus_fields, make_family, window_for
from cnlslab.functionals import report
from cnlslab.grid import sample_profile
from cnlslab.profiles import GroundStateProfile


def test_family_names_complete():
    assert set(FAMILY_NAMES) == {"scaled_ground", "gaussian", "bump"}


def test_unknown_family_rejected(p3n, grid3n):
    with pytest.raises(ValueError, match="unknown family"):
        make_family("vortex", p3n, grid3n)


def test_scaled_ground_is_windowed(p3n, grid3n):
    u = make_family("scaled_ground", p3n, grid3n, c=1.0, s=1.0)
    raw = sample_profile(GroundStateProfile(p3n), grid3n)
    win = window_for(grid3n)
    # untouched inside the window start, exactly zero beyond its end
    inner = grid3n.nodes < win.r1
    outer = grid3n.nodes > win.r2
    assert np.allclose(u.values[inner], raw.values[inner])
    assert np.all(u.values[outer] == 0)


def test_windowed_family_has_finite_energy(p3n, grid3n):
    # at beta = 1/2 the raw ground state's perturbative mass diverges;
    # the windowed family datum is an honest finite-energy field
    rep = report(make_family("scaled_ground", p3n, grid3n, c=0.5), p3n)
    assert np.isfinite(rep.e_a) and np.isfinite(rep.mass)


def test_gaussian_and_bump_families(p3n, grid3n):
    g = make_family("gaussian", p3n, grid3n, c=2.0, s=1.5)
    assert abs(g.values[0].real - 2.0) < 1e-4
    b = make_family("bump", p3n, grid3n, c=1.0, s=5.0)
    assert np.all(np.abs(b.values[grid3n.nodes > 5.0]) == 0)


def test_corpus_deterministic(p3n, grid3n):
    a = corpus_fields(p3n, grid3n, seed=3)
    b = corpus_fields(p3n, grid3n, seed=3)
    assert [lab for lab, _ in a] == [lab for lab, _ in b]
    for (_, ua), (_, ub) in zip(a, b):
        assert np.array_equal(ua.values, ub.values)
    c = corpus_fields(p3n, grid3n, seed=4)
    changed = any(
        not np.array_equal(ua.values, uc.values)
        for (la, ua), (lc, uc) in zip(a, c)
        if la.startswith("random")
    )
    assert changed


def test_corpus_spans_regions(p3n, grid3n, bundle3n):
    # the corpus contains scattering-side, blow-up-side and near-threshold data
    import math

    from cnlslab.classify import classify

    regions = set()
    for label, u in corpus_fields(p3n, grid3n):
        rep = report(u, p3n)
        if math.isfinite(rep.e_a):
            regions.add(classify(u, p3n, bundle3n).region.value)
    assert "ScatterSub" in regions
    assert "BlowupSub" in regions


def test_all_corpus_fields_profile_backed(p3n, grid3n):
    for label, u in corpus_fields(p3n, grid3n):
        assert u.profile is not None, label
