import numpy as np
import pytest

import fkmt
from fkmt import ChainConfig, Ordering
from fkmt.diagnostics import MissingLevel, TailNotInGap


def test_birkhoff_monotone_front(fam_up):
    verdicts = fkmt.birkhoff_check(fam_up.base, 8)
    assert fkmt.birkhoff_ok(verdicts)
    assert verdicts[1] is Ordering.GREATER  # shift(u, 1)(i) = u(i+1) >= u(i)
    assert verdicts[-1] is Ordering.LESS


def test_birkhoff_constant():
    verdicts = fkmt.birkhoff_check(ChainConfig.constant(0.3, -3, 3), 5)
    assert all(v is Ordering.EQUAL for v in verdicts.values())
    assert fkmt.birkhoff_ok(verdicts)


def test_birkhoff_bump_crosses(standard_solution):
    verdicts = fkmt.birkhoff_check(standard_solution.profile, 8)
    assert not fkmt.birkhoff_ok(verdicts)
    assert any(v is Ordering.CROSSING for v in verdicts.values())


def test_birkhoff_shift_equivariance(standard_solution):
    u = standard_solution.profile
    v1 = fkmt.birkhoff_check(u, 6)
    v2 = fkmt.birkhoff_check(fkmt.shift(u, 9), 6)
    assert {k: o.value for k, o in v1.items()} == {
        k: o.value for k, o in v2.items()
    }


def test_asymptotics_front(fam_up, gap):
    res = fkmt.asymptotics_check(fam_up.base, gap)
    assert (res.left_target, res.right_target) == ("v0", "w0")
    assert res.left_decay <= 1e-8
    assert res.right_decay <= 1e-8


def test_asymptotics_homoclinic(standard_solution, gap):
    res = fkmt.asymptotics_check(standard_solution.profile, gap)
    assert (res.left_target, res.right_target) == ("v0", "v0")


def test_asymptotics_w0_homoclinic(gap, pot, ground, fam_up, fam_down, rho):
    pat = fkmt.TransitionPattern(
        kind=fkmt.TransitionKind.HOMOCLINIC_W0_2K,
        l=3, m=(0, 10, 30, 40), rho=rho,
    )
    rep = fkmt.solve_multitransition(
        pat, gap, pot, fam_up=fam_up, fam_down=fam_down, ground=ground
    )
    res = fkmt.asymptotics_check(rep.profile, gap)
    assert (res.left_target, res.right_target) == ("w0", "w0")


def test_asymptotics_rejects_foreign_tail(gap):
    u = ChainConfig(0, 0, [0.25], 0.25, 0.0)
    with pytest.raises(TailNotInGap):
        fkmt.asymptotics_check(u, gap)


def test_submodularity_equal_configs_zero_margin(pot, gap):
    rng = np.random.default_rng(41)
    vals = rng.uniform(0, 1, 30)
    u = ChainConfig(0, 29, vals, vals[0], vals[-1])
    mn, mx = fkmt.pointwise_min_max(u, u)
    m = (
        fkmt.J1_window(mn, -2, 31, pot, 0.0)
        + fkmt.J1_window(mx, -2, 31, pot, 0.0)
        - 2 * fkmt.J1_window(u, -2, 31, pot, 0.0)
    )
    assert m == 0.0


def test_submodularity_ordered_pair_zero_margin(pot):
    rng = np.random.default_rng(42)
    a = rng.uniform(0, 0.4, 30)
    b = a + rng.uniform(0.1, 0.5, 30)
    u = ChainConfig(0, 29, a, a[0], a[-1])
    v = ChainConfig(0, 29, b, b[0], b[-1])
    mn, mx = fkmt.pointwise_min_max(u, v)
    m = (
        fkmt.J1_window(mn, -2, 31, pot, 0.0)
        + fkmt.J1_window(mx, -2, 31, pot, 0.0)
        - fkmt.J1_window(u, -2, 31, pot, 0.0)
        - fkmt.J1_window(v, -2, 31, pot, 0.0)
    )
    assert m == 0.0  # min = u and max = v exactly


def test_submodularity_audit_crossing_pairs(pot, gap):
    assert fkmt.submodularity_audit(pot, gap, trials=200, seed=43) <= 1e-12


def test_level_summary_checks(
    fam_up, fam_down, gap, pot, ground, rho, standard_solution
):
    d_up = fkmt.solve_pinned_level(
        gap, rho, "ascending", pot, (-60, 60), fam_up, ground=ground
    )
    d_down = fkmt.solve_pinned_level(
        gap, rho, "descending", pot, (-60, 60), fam_down, ground=ground
    )
    levels = fkmt.level_summary(
        [fam_up.report, fam_down.report, d_up, d_down, standard_solution]
    )
    assert levels.all_ok
    assert levels.c1_up + levels.c1_down > 1e-4
    assert levels.d1_up > levels.c1_up
    assert levels.b_levels
    names = [name for name, _, _ in levels.checks]
    assert "front_level_sum_positive" in names


def test_level_summary_missing_front_raises(fam_up):
    with pytest.raises(MissingLevel):
        fkmt.level_summary([fam_up.report])


def test_run_diagnostics_round_trip(
    standard_solution, standard_pattern, gap, pot, ground, fam_up
):
    diag = fkmt.run_diagnostics(
        standard_solution, gap, pot, ground, seed=7,
        pattern=standard_pattern, others=[fam_up.report],
    )
    d = diag.to_dict()
    back = fkmt.DiagnosticsReport.from_dict(d)
    assert back.to_dict() == d
    assert not diag.birkhoff_ok
    assert diag.strict_constraints
    assert diag.residual_sup <= 1e-10
    assert diag.asymptotic_left == "v0"
    assert diag.ordering_vs and diag.ordering_vs[0][0] == "c1_up"


def test_run_diagnostics_deterministic(
    standard_solution, standard_pattern, gap, pot, ground
):
    kw = dict(seed=7, pattern=standard_pattern, others=[])
    d1 = fkmt.run_diagnostics(standard_solution, gap, pot, ground, **kw)
    d2 = fkmt.run_diagnostics(standard_solution, gap, pot, ground, **kw)
    assert d1.to_dict() == d2.to_dict()


def test_aligned_distance_translates_are_close(fam_up):
    moved = fkmt.shift(fam_up.base, 11)
    assert fkmt.aligned_distance(moved, fam_up.base, max_shift=16) <= 1e-12
