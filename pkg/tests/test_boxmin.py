import numpy as np
import pytest

import fkmt
from fkmt import ChainConfig, ConstraintBox


def test_box_validation():
    with pytest.raises(ValueError):
        ConstraintBox(0, np.array([1.0, 0.0]), np.array([0.0, 1.0]))
    with pytest.raises(ValueError):
        ConstraintBox(0, np.zeros(3), np.ones(3), pinned={5: 0.5})
    with pytest.raises(ValueError):
        ConstraintBox(0, np.zeros(3), np.ones(3), pinned={1: 2.0})


def test_minimize_from_ground_state_stays(pot, ground, gap):
    box = ConstraintBox.uniform(-30, 30, gap.v0, gap.w0)
    init = ChainConfig.constant(gap.v0, -30, 30)
    rep = fkmt.minimize(init, box, pot, ground=ground)
    assert rep.converged
    assert rep.iterations == 0
    assert abs(rep.energy) <= 1e-12
    assert np.all(rep.profile.values == gap.v0)


def test_minimize_front_matches_oracle(fam_up, oracle_front_energy):
    # Doubled-window coordinate-descent reference at tol 1e-12.
    assert fam_up.report.converged
    assert fam_up.report.residual_sup <= 1e-10
    assert fam_up.energy == pytest.approx(oracle_front_energy, abs=1e-8)
    # Monotone up to the ordering tolerance that quotients solver noise.
    assert np.all(np.diff(fam_up.base.values) >= -1e-9)


def test_minimize_all_pinned_is_vacuous(pot, ground):
    lo, hi = -5, 5
    pins = {i: 0.25 for i in range(lo, hi + 1)}
    box = ConstraintBox.uniform(lo, hi, 0.0, 1.0, pinned=pins)
    init = ChainConfig(lo, hi, np.full(11, 0.25), 0.0, 0.0)
    rep = fkmt.minimize(init, box, pot, ground=ground)
    assert rep.converged
    assert rep.iterations == 0
    assert rep.residual_sup == 0.0
    assert rep.pinned_residual_sup is not None
    assert rep.pinned_residual_sup > 0.1  # 0.25 is far from an equilibrium
    assert np.all(rep.profile.values == 0.25)


def test_energy_equals_recomputed_total(standard_solution, pot, ground):
    recomputed = fkmt.J1_total(standard_solution.profile, pot, ground).total
    assert standard_solution.energy == pytest.approx(recomputed, abs=1e-10)


def test_feasibility_and_monotone_energy(pot, ground, gap):
    # Instrumented run: every iterate feasible, energy nonincreasing.
    from fkmt.boxmin import _Problem, _pg_step

    rng = np.random.default_rng(31)
    lo, hi = -20, 20
    box = ConstraintBox.uniform(lo, hi, gap.v0, gap.w0)
    vals = rng.uniform(gap.v0, gap.w0, hi - lo + 1)
    init = ChainConfig(lo, hi, vals, gap.v0, gap.v0)
    prob = _Problem(init, box, pot, ground)
    x = prob.x0.copy()
    e = prob.energy(x)
    t_mem = 1.0
    for _ in range(60):
        g = prob.residual(x)
        g[~prob.free] = 0.0
        x_new, e_new, t_used = _pg_step(prob, x, e, g, t_mem)
        assert np.all(x_new >= box.lower - 1e-15)
        assert np.all(x_new <= box.upper + 1e-15)
        assert e_new <= e + 1e-12
        x, e = x_new, e_new
        t_mem = min(1.0, 2.0 * t_used)


def test_gauss_seidel_sweep_monotone_on_random_starts(pot, ground, gap):
    rng = np.random.default_rng(32)
    box = ConstraintBox.uniform(-15, 15, gap.v0, gap.w0)
    for _ in range(100):
        vals = rng.uniform(gap.v0, gap.w0, 31)
        u = ChainConfig(-15, 15, vals, gap.v0, gap.v0)
        before = fkmt.J1_total(u, pot, ground).total
        after = fkmt.J1_total(
            fkmt.gauss_seidel_sweep(u, box, pot, ground), pot, ground
        ).total
        assert after <= before + 1e-12


def test_gauss_seidel_fixed_point_at_solution(pot, ground, gap, fam_up):
    # Polish the front to a tighter tolerance first; at an (effectively)
    # exact solution one more sweep must not move anything.
    box = ConstraintBox.uniform(-60, 60, gap.v0, gap.w0)
    polished = fkmt.minimize(
        fam_up.base, box, pot, tol=1e-13, ground=ground
    ).profile
    swept = fkmt.gauss_seidel_sweep(polished, box, pot, ground)
    assert np.max(np.abs(swept.values - polished.values)) <= 1e-12


def test_gauss_seidel_decreases_hard_step(pot, ground, gap):
    i = np.arange(-10, 11)
    u = ChainConfig(-10, 10, np.where(i < 0, 0.0, 1.0), gap.v0, gap.w0)
    box = ConstraintBox.uniform(-10, 10, gap.v0, gap.w0)
    before = fkmt.J1_total(u, pot, ground).total
    after = fkmt.J1_total(
        fkmt.gauss_seidel_sweep(u, box, pot, ground), pot, ground
    ).total
    assert after < before - 1e-3


def test_no_convergence_report(pot, ground, gap):
    box = ConstraintBox.uniform(-30, 30, gap.v0, gap.w0)
    i = np.arange(-30, 31)
    init = ChainConfig(-30, 30, np.clip((i + 10) / 20.0, 0, 1), gap.v0, gap.w0)
    rep = fkmt.minimize(init, box, pot, ground=ground, max_iter=1)
    assert not rep.converged
    assert rep.iterations == 1
    assert rep.residual_sup > 1e-10


def test_determinism_bitwise(pot, ground, gap):
    rng = np.random.default_rng(33)
    vals = rng.uniform(0, 1, 41)
    init = ChainConfig(-20, 20, vals, gap.v0, gap.v0)
    box = ConstraintBox.uniform(-20, 20, gap.v0, gap.w0)
    rep1 = fkmt.minimize(init, box, pot, ground=ground)
    rep2 = fkmt.minimize(init, box, pot, ground=ground)
    assert np.array_equal(rep1.profile.values, rep2.profile.values)
    assert rep1.energy == rep2.energy
    assert rep1.iterations == rep2.iterations


def test_comparison_principle_touching_solutions(pot, ground, gap):
    # Two separate relaxations of the same unconstrained problem from
    # different starts in the same basin: the converged profiles are
    # ordered (to tolerance) and touching, hence coincident.
    lo, hi = -40, 40
    box = ConstraintBox.uniform(lo, hi, gap.v0, gap.w0)
    i = np.arange(lo, hi + 1)
    ramp = ChainConfig(lo, hi, np.clip((i + 20.5) / 40.0, 0, 1), gap.v0, gap.w0)
    smooth = ChainConfig(
        lo, hi, 0.5 * (1 + np.tanh((i + 0.5) / 1.5)), gap.v0, gap.w0
    )
    u = fkmt.minimize(ramp, box, pot, tol=1e-12, ground=ground).profile
    v = fkmt.minimize(smooth, box, pot, tol=1e-12, ground=ground).profile
    d = u.values - v.values
    assert np.max(np.abs(d)) <= 1e-9  # ordered within noise and touching
    assert np.max(np.abs(d)) <= 1e-7  # hence equal on the whole window


def test_active_sites_recorded(pot, ground, gap, fam_up):
    rep = fam_up.report
    # Deep tail sites sit on the lower/upper box faces.
    assert rep.active_sites
    assert all(isinstance(s, int) for s in rep.active_sites)


@pytest.mark.parametrize("n,lam", [(2, 2.0), (2, 5.0), (4, 1.0)])
def test_stiff_potentials_converge(n, lam):
    # Regression: without a stability cap on the step, gradient noise is
    # amplified at machine-precision energy plateaus and the residual
    # stalls around 1e-9 for stiff wells.
    pot = fkmt.make_fk_example(n, lam)
    ground = fkmt.compute_c0(pot)
    gap = fkmt.find_periodic_and_gap(pot, ground)
    fam = fkmt.find_heteroclinic(
        gap, "ascending", (-60, 60), pot, ground=ground, max_iter=5000
    )
    assert fam.report.converged
    assert fam.report.residual_sup <= 1e-10
    assert fam.energy > 0
