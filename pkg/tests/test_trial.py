import math

import numpy as np
import pytest

from gpelab.errors import OutOfRegime, UnderResolved
from gpelab.grid import Grid2D, integrate_values
from gpelab.trial import (
    LemmaAParams,
    TrialParams,
    build_trial_pair,
    bump_field,
    demonstrate_unbounded,
    kinetic_minus_quartic,
    lemma_a_brute_force,
    lemma_a_minimize,
    same_trap_upper_bound,
    smooth_cutoff,
)


@pytest.fixture(scope="module")
def trial_grid():
    # resolves tau = 40 cores: h = 1/160
    return Grid2D(6.0, 1920)


def test_smooth_cutoff_shape():
    t = np.linspace(0, 3, 301)
    w = smooth_cutoff(t)
    assert np.all(w[t <= 1.0] == 1.0)
    assert np.all(w[t >= 2.0] == 0.0)
    assert np.all(np.diff(w) <= 1e-12)
    assert smooth_cutoff(1.5) == pytest.approx(0.5)


def test_params_validation():
    with pytest.raises(ValueError):
        TrialParams(tau=0.5)
    with pytest.raises(ValueError):
        TrialParams(tau=10.0, c0=0.5)
    with pytest.raises(ValueError):
        TrialParams(tau=10.0, direction=(1.0, 1.0))
    p = TrialParams(tau=10.0)
    c1, c2 = p.displaced_center(1), p.displaced_center(2)
    assert c1[0] == pytest.approx(p.offset)
    assert c2[0] == pytest.approx(-p.offset)


def test_normalization_defect_small(profile):
    for tau in (10.0, 20.0, 40.0):
        assert TrialParams(tau=tau).normalization_defect(profile) < 1e-8


def test_trial_pair_unit_mass_nonnegative(profile, trial_grid):
    pair = build_trial_pair(TrialParams(tau=40.0), profile, trial_grid)
    for f in (pair.u1, pair.u2):
        assert integrate_values(trial_grid, f.values**2) == pytest.approx(1.0, abs=1e-12)
        assert np.all(f.values >= 0)


def test_under_resolved(profile):
    with pytest.raises(UnderResolved):
        build_trial_pair(TrialParams(tau=40.0), profile, Grid2D(6.0, 128))


def test_kinetic_quartic_budget(profile, trial_grid):
    # int |grad phi|^2 - (a/2) int phi^4 = (1 - a/a*) tau^2 up to cutoff error
    tau = 40.0
    pair = build_trial_pair(TrialParams(tau=tau), profile, trial_grid)
    for a_frac in (0.9, 1.1):
        a = a_frac * profile.mass
        got = kinetic_minus_quartic(pair.u1, a)
        assert abs(got - (1 - a_frac) * tau**2) < 0.01 * tau**2


def test_overlap_decay(profile):
    # int phi1^2 phi2^2 <= 4 tau^{2-2C0} with C0=3
    for tau, n in ((20.0, 960), (40.0, 1920), (80.0, 3840)):
        grid = Grid2D(6.0, n)
        pair = build_trial_pair(TrialParams(tau=tau), profile, grid)
        ov = integrate_values(grid, pair.u1.values**2 * pair.u2.values**2)
        assert ov <= 4.0 * tau ** (2 - 2 * 3.0)


def test_bump_field(profile):
    grid = Grid2D(6.0, 512)
    eta = bump_field(grid, (2.5, 0.0))
    assert integrate_values(grid, eta.values**2) == pytest.approx(1.0, abs=1e-12)
    assert np.all(eta.values[grid.radius_from((2.5, 0.0)) >= 1.0] == 0.0)


def test_unbounded_ladder(profile, trial_grid):
    astar = profile.mass
    ladder = demonstrate_unbounded(1.1 * astar, trial_grid, profile)
    assert [t for t, _ in ladder] == [10.0, 20.0, 40.0]
    energies = [e for _, e in ladder]
    assert all(b < a for a, b in zip(energies, energies[1:]))
    assert energies[-1] < -4.0
    # dominant term -(a1/a* - 1) tau^2 within a factor 2
    assert 0.5 * 0.1 * 40.0**2 < -energies[-1] < 2.0 * 0.1 * 40.0**2


def test_unbounded_truncates_ladder(profile):
    coarse = Grid2D(6.0, 1024)  # h = 1/85.3 resolves tau <= ~21
    ladder = demonstrate_unbounded(1.1 * profile.mass, coarse, profile)
    assert [t for t, _ in ladder] == [10.0, 20.0]


def test_critical_coupling_bounded(profile, trial_grid):
    # at a1 = a* the tau^2 term cancels; energies stay bounded and approach
    # the trap value at the concentration point
    ladder = demonstrate_unbounded(profile.mass, trial_grid, profile)
    energies = [e for _, e in ladder]
    assert max(abs(e) for e in energies) < 50.0
    assert abs(energies[-1]) < abs(energies[0])


def test_same_trap_bound_scaling(profile):
    grid = Grid2D(8.0, 512)
    astar = profile.mass
    ratios = []
    for frac in (0.97, 0.98, 0.99, 0.995):
        a = frac * astar
        tau, e = same_trap_upper_bound(a, a, 2.0, grid, profile)
        gap = astar - a
        assert tau == pytest.approx(gap**-0.25 * math.log(1 / gap) ** 0.5)
        ratios.append(e / (gap**0.5 * math.log(1 / gap)))
    assert max(ratios) < 10.0
    assert min(ratios) > 0.0


def test_lemma_a_matches_brute_force(profile):
    astar = profile.mass
    params = LemmaAParams(1e4, 1.0, 2.0, 0.999 * astar, astar)
    s1, fmin = lemma_a_minimize(params)
    s_brute = lemma_a_brute_force(params)
    assert s1 == pytest.approx(s_brute, rel=1e-6)
    assert fmin > 0
    assert s1 > math.e**3


def test_lemma_a_bracket_and_grid(profile):
    astar = profile.mass
    for kappa in (1e4, 1e6):
        for m in (1.0, 4.0):
            for p in (1.0, 2.0):
                for frac in (0.99, 0.999):
                    params = LemmaAParams(kappa, m, p, frac * astar, astar)
                    s1, _ = lemma_a_minimize(params)  # bracket asserted inside
                    assert s1 == pytest.approx(
                        lemma_a_brute_force(params, n=10**5), rel=1e-6
                    )


def test_lemma_a_bound_grows_with_m(profile):
    astar = profile.mass
    gap = 0.001 * astar
    denom = gap**0.5 * math.log(1 / gap)
    prev = 0.0
    for m in (1.0, 4.0, 16.0):
        _, fmin = lemma_a_minimize(LemmaAParams(1e4, m, 2.0, astar - gap, astar))
        ratio = fmin / denom
        assert ratio > prev > -1
        prev = ratio


def test_lemma_a_out_of_regime(profile):
    astar = profile.mass
    with pytest.raises(OutOfRegime):
        lemma_a_minimize(LemmaAParams(1.0, 1.0, 2.0, 0.999 * astar, astar))
    with pytest.raises(ValueError):
        LemmaAParams(1.0, 1.0, 2.0, 2.0 * astar, astar)
