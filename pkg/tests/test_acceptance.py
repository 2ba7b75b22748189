"""Acceptance gate: one test per criterion, at its stated tolerance.

Each test prints a PASS line on success (and the terminal summary hook in
conftest.py repeats one verdict line per criterion); tolerances and runtime
bounds are pinned here, not configurable.
"""

import json
import time

import numpy as np
import pytest

import fkmt
import oracles
from fkmt import ChainConfig, ConstraintBox, Ordering
from fkmt.archive import SolutionArchive, archives_equal_modulo_volatile
from fkmt.cli import main

SEED = 20250808


def _report(n, detail):
    print(f"ACCEPTANCE {n} PASS: {detail}")


def test_criterion_01_hypothesis_suite(pot, ground):
    t0 = time.perf_counter()
    hyp = fkmt.check_hypotheses(pot, samples=1000, seed=SEED)
    assert hyp.shift_pass and hyp.shift_worst <= 1e-12
    assert hyp.coupling_pass
    assert hyp.gradient_pass and hyp.gradient_worst_rel <= 1e-6

    rng = np.random.default_rng(SEED + 1)
    h = 1e-5
    worst = 0.0
    for _ in range(50):
        vals = rng.uniform(0, 1, 13)
        u = ChainConfig(-6, 6, vals, 0.0, 0.0)
        g = fkmt.gradient(u, pot, (-6, 6))
        scale = max(1.0, float(np.max(np.abs(g))))
        for j in (0, 4, 8, 12):
            up, dn = vals.copy(), vals.copy()
            up[j] += h
            dn[j] -= h
            fd = (
                fkmt.J1_total(u.with_values(up), pot, ground).total
                - fkmt.J1_total(u.with_values(dn), pot, ground).total
            ) / (2 * h)
            worst = max(worst, abs(fd - g[j]) / scale)
    assert worst <= 1e-6
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    _report(1, f"hypotheses pass, grad fd err {worst:.2e}, {elapsed:.2f}s")


def test_criterion_02_submodularity(pot, gap):
    t0 = time.perf_counter()
    worst = fkmt.submodularity_audit(pot, gap, trials=200, seed=SEED)
    elapsed = time.perf_counter() - t0
    assert worst <= 1e-12
    assert elapsed < 5.0
    _report(2, f"worst margin {worst:.2e}, {elapsed:.2f}s")


def test_criterion_03_periodic_level(pot, ground, gap):
    t0 = time.perf_counter()
    box = ConstraintBox.uniform(-30, 30, gap.v0, gap.w0)

    rep = fkmt.minimize(
        ChainConfig.constant(gap.v0, -30, 30), box, pot, ground=ground
    )
    assert rep.converged
    assert abs(rep.energy) <= 1e-12
    assert np.max(np.abs(rep.profile.values - gap.v0)) == 0.0

    # Random in-slab start drawn below the on-site crest, so plain descent
    # reaches the uniform ground state rather than a pinned multi-kink
    # local minimum.
    rng = np.random.default_rng(SEED + 2)
    vals = rng.uniform(gap.v0, gap.v0 + 0.45 * gap.rho_bar, 61)
    init = ChainConfig(-30, 30, vals, gap.v0, gap.v0)
    rep2 = fkmt.minimize(init, box, pot, ground=ground)
    assert rep2.converged
    assert rep2.energy <= 1e-8
    dist = min(
        float(np.max(np.abs(rep2.profile.values - m)))
        for m in (gap.v0, gap.w0)
    )
    assert dist <= 1e-4
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    _report(3, f"constant level 0, random-init energy {rep2.energy:.2e}, "
               f"{elapsed:.2f}s")


def test_criterion_04_heteroclinic_front(pot, ground, gap, oracle_front_energy):
    t0 = time.perf_counter()
    up = fkmt.find_heteroclinic(gap, "ascending", (-60, 60), pot, ground=ground)
    down = fkmt.find_heteroclinic(
        gap, "descending", (-60, 60), pot, ground=ground
    )
    assert up.report.converged and up.report.residual_sup <= 1e-10
    assert np.all(np.diff(up.base.values) >= -1e-9)
    assert up.energy == pytest.approx(oracle_front_energy, abs=1e-8)
    assert up.energy + down.energy > 1e-4
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    _report(4, f"c1={up.energy:.12f} vs oracle {oracle_front_energy:.12f}, "
               f"sum {up.energy + down.energy:.6f}, {elapsed:.2f}s")


def test_criterion_05_pinned_level(pot, ground, gap, fam_up, fam_down, rho):
    t0 = time.perf_counter()
    d_up = fkmt.solve_pinned_level(
        gap, rho, "ascending", pot, (-60, 60), fam_up, ground=ground
    )
    d_down = fkmt.solve_pinned_level(
        gap, rho, "descending", pot, (-60, 60), fam_down, ground=ground
    )
    m_up = d_up.energy - fam_up.energy
    m_down = d_down.energy - fam_down.energy
    assert m_up >= 1e-6
    assert m_down >= 1e-6
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0
    _report(5, f"margins {m_up:.3e}/{m_down:.3e}, {elapsed:.2f}s")


def test_criterion_06_theorem_instance(
    pot, ground, gap, fam_up, fam_down, rho, standard_pattern
):
    t0 = time.perf_counter()
    rep = fkmt.solve_multitransition(
        standard_pattern, gap, pot, window=(-40, 120),
        fam_up=fam_up, fam_down=fam_down, ground=ground,
    )
    assert rep.converged
    assert rep.strict_constraints and rep.min_slack > 1e-6
    assert rep.residual_sup <= 1e-10

    diag = fkmt.run_diagnostics(
        rep, gap, pot, ground, seed=SEED, pattern=standard_pattern
    )
    assert diag.residual_sup <= 1e-10  # raw defect, constraint regions included

    assert rep.profile.left_tail == gap.v0
    assert rep.profile.right_tail == gap.v0
    assert rep.profile.values[0] == gap.v0
    assert rep.profile.values[-1] == gap.v0

    total = fam_up.energy + fam_down.energy
    assert rep.energy >= max(fam_up.energy, fam_down.energy) - 1e-9
    assert rep.energy <= total + 1e-3

    # Concatenation bound, cross-checked with the independent evaluator.
    concat = fkmt.concatenate_fronts(
        standard_pattern, gap, fam_up, fam_down, (-40, 120)
    )
    bound_pkg = fkmt.J1_total(concat, pot, ground).total
    bound_oracle = oracles.window_energy(concat.window(-44, 124), 1.0, 2)
    assert bound_pkg == pytest.approx(bound_oracle, abs=1e-12)
    assert rep.energy <= bound_oracle + 1e-12
    elapsed = time.perf_counter() - t0
    assert elapsed < 300.0
    _report(6, f"b={rep.energy:.12f}, slack {rep.min_slack:.3f}, "
               f"residual {rep.residual_sup:.2e}, {elapsed:.2f}s")


def test_criterion_07_birkhoff_verdicts(standard_solution, fam_up):
    t0 = time.perf_counter()
    v_multi = fkmt.birkhoff_check(standard_solution.profile, 8)
    assert any(o is Ordering.CROSSING for o in v_multi.values())
    v_front = fkmt.birkhoff_check(fam_up.base, 8)
    assert fkmt.birkhoff_ok(v_front)
    elapsed = time.perf_counter() - t0
    assert elapsed < 10.0
    crossings = sorted(k for k, o in v_multi.items() if o is Ordering.CROSSING)
    _report(7, f"multitransition crossings {crossings[:4]}..., front ordered, "
               f"{elapsed:.2f}s")


def test_criterion_08_generalized_patterns(
    pot, ground, gap, fam_up, fam_down, rho
):
    t0 = time.perf_counter()
    four = fkmt.TransitionPattern(
        kind=fkmt.TransitionKind.HOMOCLINIC_V0_2K,
        l=5, m=(0, 20, 60, 80, 140, 160, 200, 220), rho=rho,
    )
    rep4 = fkmt.solve_multitransition(
        four, gap, pot, fam_up=fam_up, fam_down=fam_down, ground=ground
    )
    assert rep4.converged and rep4.strict_constraints
    assert rep4.min_slack > 1e-6
    asym4 = fkmt.asymptotics_check(rep4.profile, gap)
    assert (asym4.left_target, asym4.right_target) == ("v0", "v0")
    want4 = 2 * (fam_up.energy + fam_down.energy)
    assert rep4.energy == pytest.approx(want4, abs=1e-3)

    three = fkmt.TransitionPattern(
        kind=fkmt.TransitionKind.HETEROCLINIC_V0_W0_2K1,
        l=5, m=(0, 20, 60, 80, 140, 160), rho=rho,
    )
    rep3 = fkmt.solve_multitransition(
        three, gap, pot, fam_up=fam_up, fam_down=fam_down, ground=ground
    )
    assert rep3.converged and rep3.strict_constraints
    assert rep3.min_slack > 1e-6
    asym3 = fkmt.asymptotics_check(rep3.profile, gap)
    assert (asym3.left_target, asym3.right_target) == ("v0", "w0")
    want3 = 2 * fam_up.energy + fam_down.energy
    assert rep3.energy == pytest.approx(want3, abs=1e-3)
    elapsed = time.perf_counter() - t0
    assert elapsed < 900.0
    _report(8, f"4-transition b={rep4.energy:.9f}, "
               f"3-transition b={rep3.energy:.9f}, {elapsed:.2f}s")


def test_criterion_09_sweep_trend(pot, ground, gap, fam_up, fam_down, rho):
    t0 = time.perf_counter()
    reports = {}
    for s in (20, 40, 80):
        pat = fkmt.TransitionPattern(
            kind=fkmt.TransitionKind.HOMOCLINIC_V0_2K,
            l=5, m=(0, s, 3 * s, 4 * s), rho=rho,
        )
        reports[s] = fkmt.solve_multitransition(
            pat, gap, pot, fam_up=fam_up, fam_down=fam_down, ground=ground
        )
    total = fam_up.energy + fam_down.energy
    b = {s: reports[s].energy for s in (20, 40, 80)}
    assert b[40] <= b[20] + 1e-9
    assert b[80] <= b[40] + 1e-9
    for s in (20, 40, 80):
        assert b[s] >= max(fam_up.energy, fam_down.energy) - 1e-9
        assert b[s] <= total + 1e-3

    dists = []
    for si, sj in ((20, 40), (20, 80), (40, 80)):
        d = fkmt.aligned_distance(
            reports[si].profile, reports[sj].profile, max_shift=256
        )
        dists.append(d)
        assert d > 1e-3
    elapsed = time.perf_counter() - t0
    assert elapsed < 1200.0
    _report(9, f"b={b[20]:.12f}/{b[40]:.12f}/{b[80]:.12f} -> sum {total:.12f}, "
               f"min distance {min(dists):.3f}, {elapsed:.2f}s")


def test_criterion_10_determinism_and_round_trip(tmp_path):
    cfg = tmp_path / "run.cfg"
    outdir = tmp_path / "out"
    cfg.write_text(
        f"""
[run]
seed = 424242

[potential]
kind = fk_cosine
n = 2
lambda = 1.0

[problem]
kind = homoclinic_v0_2k
m = 0 20 60 80
l = 5
rho = auto
window = -40 120

[output]
directory = {outdir}
"""
    )
    assert main(["solve", str(cfg)]) == 0
    first = (outdir / "archive.json").read_bytes()
    (tmp_path / "first.json").write_bytes(first)
    assert main(["solve", str(cfg)]) == 0

    a = SolutionArchive.load(tmp_path / "first.json")
    b = SolutionArchive.load(outdir / "archive.json")
    assert archives_equal_modulo_volatile(a, b)

    back = SolutionArchive.from_dict(json.loads(a.canonical_json()))
    assert back.canonical_json() == a.canonical_json()

    assert main(["verify", str(outdir / "archive.json")]) == 0
    data = json.loads((outdir / "archive.json").read_text())
    data["reports"][0]["profile"]["values"][60] += 1e-3
    bad = tmp_path / "perturbed.json"
    bad.write_text(json.dumps(data))
    assert main(["verify", str(bad)]) == 1
    _report(10, "bitwise determinism, round trip, verify 0/1")
