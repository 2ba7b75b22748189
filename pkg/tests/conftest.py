import pytest

import fkmt

SEED = 20250808


@pytest.fixture(scope="session")
def pot():
    return fkmt.make_fk_example(2, 1.0)


@pytest.fixture(scope="session")
def ground(pot):
    return fkmt.compute_c0(pot)


@pytest.fixture(scope="session")
def gap(pot, ground):
    return fkmt.find_periodic_and_gap(pot, ground)


@pytest.fixture(scope="session")
def fam_up(pot, ground, gap):
    return fkmt.find_heteroclinic(gap, "ascending", (-60, 60), pot, ground=ground)


@pytest.fixture(scope="session")
def fam_down(pot, ground, gap):
    return fkmt.find_heteroclinic(gap, "descending", (-60, 60), pot, ground=ground)


@pytest.fixture(scope="session")
def rho(fam_up, fam_down, gap):
    return fkmt.choose_rho(fam_up, fam_down, gap)


@pytest.fixture(scope="session")
def standard_pattern(rho):
    return fkmt.TransitionPattern(
        kind=fkmt.TransitionKind.HOMOCLINIC_V0_2K,
        l=5,
        m=(0, 20, 60, 80),
        rho=rho,
    )


@pytest.fixture(scope="session")
def standard_solution(standard_pattern, gap, pot, ground, fam_up, fam_down):
    return fkmt.solve_multitransition(
        standard_pattern, gap, pot, window=(-40, 120),
        fam_up=fam_up, fam_down=fam_down, ground=ground,
    )


@pytest.fixture(scope="session")
def oracle_front_energy():
    import oracles

    return oracles.front_energy(1.0, 2, window=(-120, 120), tol=1e-12)


def _criterion_items(terminalreporter):
    items = []
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance" in nodeid and "::test_criterion_" in nodeid:
                items.append((nodeid.split("::")[-1], status))
    return sorted(set(items))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    items = _criterion_items(terminalreporter)
    if not items:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in items:
        verdict = "PASS" if status == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict} {name}")
