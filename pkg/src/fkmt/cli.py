"""Command-line front end: gap, solve, verify, sweep.

Orchestrates the pipeline (gap detection, basic fronts, radius selection,
pinned levels, multitransition solve, diagnostics), persists archives and
plot-ready CSV profiles, and re-verifies stored archives.

Exit codes: 0 success, 1 verify mismatch, 2 infeasible or invalid problem,
3 no convergence (partial archive written), 4 gap condition failed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .archive import SolutionArchive
from .boxmin import NoConvergence, SolveReport
from .chains import GapPair
from .config import ConfigError, RunConfig, parse_config
from .diagnostics import aligned_distance, level_summary, run_diagnostics
from .energy import compute_c0
from .problems import (
    GapConditionFailed,
    RhoSelectionFailed,
    TransitionKind,
    TransitionPattern,
    choose_rho,
    find_heteroclinic,
    find_periodic_and_gap,
    solve_multitransition,
    solve_pinned_level,
)
from .stencil import make_fk_example, make_table_example

EXIT_OK = 0
EXIT_VERIFY_MISMATCH = 1
EXIT_INVALID = 2
EXIT_NO_CONVERGENCE = 3
EXIT_GAP_FAILED = 4


def build_potential(cfg: RunConfig):
    if cfg.potential_kind == "fk_cosine":
        return make_fk_example(cfg.n, cfg.lam)
    return make_table_example(cfg.n, cfg.table)


def _fmt(x: float) -> str:
    return f"{x:g}"


def _safe_name(label: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in label)


def _write_outputs(cfg: RunConfig, archive: SolutionArchive, name: str) -> Path:
    outdir = Path(cfg.directory)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / f"{name}.json"
    if "json" in cfg.formats:
        archive.save(path)
    if "csv" in cfg.formats:
        from .chains import ChainConfig

        for rep in archive.reports:
            profile = ChainConfig.from_dict(rep["profile"])
            csv_path = outdir / f"{name}_{_safe_name(rep['label'])}.csv"
            csv_path.write_text(profile.to_csv())
    return path


def _others(reports: list[SolveReport], label: str) -> list[SolveReport]:
    return [r for r in reports if r.label != label]


def _diagnose_all(
    cfg: RunConfig,
    reports: list[SolveReport],
    gap: GapPair,
    pot,
    ground,
    pattern: TransitionPattern | None,
) -> list[dict]:
    out = []
    for rep in reports:
        pat = pattern if rep.label.startswith("b:") else None
        diag = run_diagnostics(
            rep, gap, pot, ground, seed=cfg.seed, pattern=pat,
            others=_others(reports, rep.label),
        )
        out.append(diag.to_dict())
    return out


def cmd_gap(config_path: str) -> int:
    try:
        cfg = parse_config(config_path)
    except ConfigError as exc:
        print(f"ERROR config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    pot = build_potential(cfg)
    ground = compute_c0(pot)
    archive = SolutionArchive.fresh(cfg.to_dict(), cfg.seed)
    archive.levels["c0"] = ground.value
    try:
        gap = find_periodic_and_gap(pot, ground)
    except GapConditionFailed as exc:
        print(f"ERROR gap condition: {exc}", file=sys.stderr)
        return EXIT_GAP_FAILED
    archive.gap = {"v0": gap.v0, "w0": gap.w0, "rho_bar": gap.rho_bar}
    print(
        f"v0={_fmt(gap.v0)} w0={_fmt(gap.w0)} "
        f"rho_bar={_fmt(gap.rho_bar)} c0={_fmt(ground.value)}"
    )
    _write_outputs(cfg, archive, "gap")
    return EXIT_OK


def _run_solve(cfg: RunConfig, pattern: TransitionPattern):
    """Full pipeline; returns (archive, exit_code)."""
    pot = build_potential(cfg)
    ground = compute_c0(pot)
    archive = SolutionArchive.fresh(cfg.to_dict(), cfg.seed)
    archive.levels["c0"] = ground.value

    try:
        gap = find_periodic_and_gap(pot, ground)
    except GapConditionFailed as exc:
        print(f"ERROR gap condition: {exc}", file=sys.stderr)
        return archive, EXIT_GAP_FAILED
    archive.gap = {"v0": gap.v0, "w0": gap.w0, "rho_bar": gap.rho_bar}

    solve_kw = dict(
        tol=cfg.tol, max_iter=cfg.max_iter,
        algorithm=cfg.algorithm, ground=ground,
    )
    reports: list[SolveReport] = []
    try:
        fam_up = find_heteroclinic(
            gap, "ascending", cfg.front_window, pot, **solve_kw
        )
        reports.append(fam_up.report)
        fam_down = find_heteroclinic(
            gap, "descending", cfg.front_window, pot, **solve_kw
        )
        reports.append(fam_down.report)
        archive.levels["c1_up"] = fam_up.energy
        archive.levels["c1_down"] = fam_down.energy

        rho = cfg.rho if cfg.rho is not None else choose_rho(fam_up, fam_down, gap)
        archive.levels["rho"] = list(rho)
        # Non-attainment is certified against the computed fronts only; a
        # wider front family could in principle attain these radii.
        archive.levels["rho_basis"] = "sampled translates of computed fronts"
        pattern = dataclasses.replace(pattern, rho=tuple(rho))

        d1_up = solve_pinned_level(
            gap, rho, "ascending", pot, cfg.front_window, fam_up, **solve_kw
        )
        reports.append(d1_up)
        d1_down = solve_pinned_level(
            gap, rho, "descending", pot, cfg.front_window, fam_down, **solve_kw
        )
        reports.append(d1_down)
        archive.levels["d1_up"] = d1_up.energy
        archive.levels["d1_down"] = d1_down.energy

        if pattern.kind is not TransitionKind.BASIC_HETEROCLINIC:
            brep = solve_multitransition(
                pattern, gap, pot, window=cfg.window,
                fam_up=fam_up, fam_down=fam_down, **solve_kw,
            )
            reports.append(brep)
            archive.levels["b"] = brep.energy
    except RhoSelectionFailed as exc:
        print(f"ERROR rho selection: {exc}", file=sys.stderr)
        archive.reports = [r.to_dict() for r in reports]
        return archive, EXIT_INVALID
    except NoConvergence as exc:
        reports.append(exc.report)
        archive.reports = [r.to_dict() for r in reports]
        print(f"ERROR {exc}", file=sys.stderr)
        return archive, EXIT_NO_CONVERGENCE

    archive.reports = [r.to_dict() for r in reports]
    archive.diagnostics = _diagnose_all(cfg, reports, gap, pot, ground, pattern)
    levels = level_summary(reports)
    archive.level_checks = levels.checks
    for name, ok, margin in levels.checks:
        if not ok:
            print(f"WARN level check {name} failed (margin {margin:.3e})")
    for rep_d, diag_d in zip(archive.reports, archive.diagnostics):
        if diag_d["strict_constraints"] is False:
            print(
                f"WARN active constraint in {rep_d['label']} "
                f"(min slack {diag_d['min_slack']:.3e})"
            )
    return archive, EXIT_OK


def cmd_solve(config_path: str) -> int:
    try:
        cfg = parse_config(config_path)
        pattern = cfg.pattern()
    except ConfigError as exc:
        print(f"ERROR config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    archive, code = _run_solve(cfg, pattern)
    _write_outputsafe(cfg, archive)
    return code


def _write_outputsafe(cfg: RunConfig, archive: SolutionArchive) -> None:
    try:
        path = _write_outputs(cfg, archive, "archive")
        if "json" in cfg.formats:
            print(f"archive written to {path}")
    except OSError as exc:
        print(f"ERROR writing outputs: {exc}", file=sys.stderr)


def cmd_verify(archive_path: str) -> int:
    try:
        archive = SolutionArchive.load(archive_path)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"ERROR reading archive: {exc}", file=sys.stderr)
        return EXIT_VERIFY_MISMATCH
    if not archive.reports:
        print("archive has no solutions; nothing to verify")
        return EXIT_OK

    cfg_d = archive.config
    cfg = RunConfig(
        seed=archive.seed,
        potential_kind=cfg_d["potential"]["kind"],
        n=cfg_d["potential"]["n"],
        r=cfg_d["potential"]["r"],
        lam=cfg_d["potential"]["lambda"],
        table=tuple(cfg_d["potential"]["table"]),
        problem_kind=cfg_d["problem"]["kind"],
        m=tuple(cfg_d["problem"]["m"]),
        l=cfg_d["problem"]["l"],
        gap_direction=cfg_d["gap"]["direction"],
    )
    pot = build_potential(cfg)
    ground = compute_c0(pot)
    gap = GapPair(
        v0=archive.gap["v0"], w0=archive.gap["w0"],
        rho_bar=archive.gap["rho_bar"],
    )
    pattern = None
    if "rho" in archive.levels and cfg.problem_kind != "basic_heteroclinic":
        pattern = TransitionPattern(
            kind=TransitionKind(cfg.problem_kind),
            l=cfg.l, m=cfg.m, rho=tuple(archive.levels["rho"]),
        )

    reports = [SolveReport.from_dict(d) for d in archive.reports]
    if len(archive.diagnostics) != len(reports):
        print("verify FAILED: diagnostics block count mismatch")
        return EXIT_VERIFY_MISMATCH
    for rep, stored in zip(reports, archive.diagnostics):
        pat = pattern if rep.label.startswith("b:") else None
        diag = run_diagnostics(
            rep, gap, pot, ground, seed=archive.seed, pattern=pat,
            others=_others(reports, rep.label),
        )
        new_js = json.dumps(diag.to_dict(), sort_keys=True)
        old_js = json.dumps(stored, sort_keys=True)
        if new_js != old_js:
            print(f"verify FAILED for {rep.label}")
            return EXIT_VERIFY_MISMATCH
    print(f"verify OK ({len(reports)} solutions)")
    return EXIT_OK


def cmd_sweep(config_path: str) -> int:
    try:
        cfg = parse_config(config_path)
        if not cfg.separations or not cfg.l_values:
            raise ConfigError("sweep needs [sweep] separations and l_values")
        cells = []
        for l in cfg.l_values:
            for s in cfg.separations:
                pat = TransitionPattern(
                    kind=TransitionKind.HOMOCLINIC_V0_2K,
                    l=l, m=(0, s, 3 * s, 4 * s),
                )
                cells.append((s, l, pat))
    except (ConfigError, ValueError) as exc:
        print(f"ERROR config: {exc}", file=sys.stderr)
        return EXIT_INVALID

    pot = build_potential(cfg)
    ground = compute_c0(pot)
    try:
        gap = find_periodic_and_gap(pot, ground)
    except GapConditionFailed as exc:
        print(f"ERROR gap condition: {exc}", file=sys.stderr)
        return EXIT_GAP_FAILED

    solve_kw = dict(
        tol=cfg.tol, max_iter=cfg.max_iter,
        algorithm=cfg.algorithm, ground=ground,
    )
    try:
        fam_up = find_heteroclinic(
            gap, "ascending", cfg.front_window, pot, **solve_kw
        )
        fam_down = find_heteroclinic(
            gap, "descending", cfg.front_window, pot, **solve_kw
        )
        rho = cfg.rho if cfg.rho is not None else choose_rho(fam_up, fam_down, gap)
    except (NoConvergence, RhoSelectionFailed) as exc:
        print(f"ERROR preparing fronts: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE if isinstance(exc, NoConvergence) else EXIT_INVALID

    def run_cell(cell):
        s, l, pat = cell
        pat = dataclasses.replace(pat, rho=tuple(rho))
        try:
            rep = solve_multitransition(
                pat, gap, pot, window=None,
                fam_up=fam_up, fam_down=fam_down, **solve_kw,
            )
            return s, l, pat, rep, EXIT_OK
        except NoConvergence as exc:
            return s, l, pat, exc.report, EXIT_NO_CONVERGENCE

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(run_cell, cells))
    else:
        results = [run_cell(c) for c in cells]

    worst = EXIT_OK
    rows = []
    cell_reports = []
    for s, l, pat, rep, code in results:
        worst = max(worst, code)
        cell = SolutionArchive.fresh(cfg.to_dict(), cfg.seed)
        cell.gap = {"v0": gap.v0, "w0": gap.w0, "rho_bar": gap.rho_bar}
        cell.levels = {
            "c0": ground.value,
            "c1_up": fam_up.energy,
            "c1_down": fam_down.energy,
            "rho": list(rho),
            "rho_basis": "sampled translates of computed fronts",
            "b": rep.energy,
        }
        all_reports = [fam_up.report, fam_down.report, rep]
        cell.reports = [r.to_dict() for r in all_reports]
        if code == EXIT_OK:
            cell.diagnostics = _diagnose_all(
                cfg, all_reports, gap, pot, ground, pat
            )
        _write_outputs(cfg, cell, f"sweep_s{s}_l{l}")
        rows.append((s, l, rep.energy, rep.min_slack, code))
        cell_reports.append((s, l, rep))

    c1_sum = fam_up.energy + fam_down.energy
    print(f"c1_up={fam_up.energy!r} c1_down={fam_down.energy!r} sum={c1_sum!r}")
    print("separation l b_level min_slack status")
    for s, l, b, slack, code in rows:
        print(f"{s} {l} {b!r} {slack:.3e} {'ok' if code == 0 else 'FAIL'}")

    trend_ok = True
    for l in cfg.l_values:
        seq = [b for s, ll, b, _, code in rows if ll == l and code == 0]
        for prev, nxt in zip(seq, seq[1:]):
            if nxt > prev + 1e-9:
                trend_ok = False
    # Distinctness concerns different marker vectors; cells that differ
    # only in l share markers and may relax to the same profile.
    distinct_min = None
    for i in range(len(cell_reports)):
        for j in range(i + 1, len(cell_reports)):
            si, li, ri = cell_reports[i]
            sj, lj, rj = cell_reports[j]
            if si != sj:
                d = aligned_distance(ri.profile, rj.profile)
                distinct_min = d if distinct_min is None else min(distinct_min, d)
    distinct_ok = distinct_min is None or distinct_min > 1e-3
    print(f"trend_nonincreasing={trend_ok} distinct_min={distinct_min!r}")

    summary = {
        "rows": [
            {"separation": s, "l": l, "b": b, "min_slack": slack, "exit": code}
            for s, l, b, slack, code in rows
        ],
        "c1_up": fam_up.energy,
        "c1_down": fam_down.energy,
        "trend_nonincreasing": trend_ok,
        "distinct_min": distinct_min,
        "distinct_ok": distinct_ok,
    }
    outdir = Path(cfg.directory)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "sweep_summary.json").write_text(
        json.dumps(summary, sort_keys=True, indent=1) + "\n"
    )
    return worst


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="fkmt",
        description="multitransition solver for generalized "
        "Frenkel-Kontorova chains",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("gap", "detect adjacent uniform ground states"),
        ("solve", "run the full constrained-minimization pipeline"),
        ("sweep", "solve a grid of marker separations and lengths"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("config", help="path to the run config file")
    pv = sub.add_parser("verify", help="recheck diagnostics of an archive")
    pv.add_argument("archive", help="path to a stored archive")

    args = parser.parse_args(argv)
    if args.command == "gap":
        return cmd_gap(args.config)
    if args.command == "solve":
        return cmd_solve(args.config)
    if args.command == "sweep":
        return cmd_sweep(args.config)
    return cmd_verify(args.archive)


if __name__ == "__main__":
    sys.exit(main())
