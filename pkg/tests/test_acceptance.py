"""Acceptance criteria, one test per criterion, printing a PASS line each.

Two profiles, selected by the DARKCAVITY_PROFILE environment variable:

  ci    (default) desk-scale: the size sweep stops at 41x41 and checks
        monotonicity only; a few ensembles use fewer seeds where the
        statistical tolerance leaves ample headroom.  Roughly 1-1.5 h on
        two cores.
  full  the criteria exactly as stated (size sweep to 71x71 with the
        slope-band check; 10 seeds everywhere).  Several hours.

Run with `pytest tests/test_acceptance.py -v -s` to see the PASS lines.
"""

import math
import os
from dataclasses import replace

import numpy as np
import pytest

from darkcavity import (
    ExperimentPlan,
    HBAR_C_EV_NM,
    LatticeSpec,
    Realization,
    RunConfig,
    ShellSpec,
    assemble,
    calibrate,
    classify_states,
    derive_seed,
    diagonalize,
    molecule_positions,
    run_plan,
    run_single,
    shell_filter,
    trace_check,
    wavevector_grid,
    write_results,
)
from darkcavity.geometry import CavityConfig, PhotonMode
from darkcavity.hamiltonian import HamiltonianMatrix

PROFILE = os.environ.get("DARKCAVITY_PROFILE", "ci").lower()
FULL = PROFILE == "full"

WORKERS = min(2, os.cpu_count() or 1)
BLAS_THREADS = 1  # deterministic cells regardless of the worker count

SEEDS_10 = tuple(derive_seed(2026, i) for i in range(10))
RESONANT_L_Z = 309.96  # hbar*omega_{c,0} = 2.000 eV


def report(criterion, passed, detail):
    print(f"ACCEPTANCE {criterion}: {'PASS' if passed else 'FAIL'}  {detail}")
    assert passed, f"{criterion}: {detail}"


def run_ensemble(config, seeds):
    plan = ExperimentPlan(kind="single_run", axis=(), base=config, seeds=tuple(seeds))
    return run_plan(plan, workers=WORKERS, blas_threads=BLAS_THREADS)


def pr_by_seed(result, axis_value):
    return {
        c.seed: c.dark_pr_mean
        for c in result.cells
        if c.axis_value == axis_value and c.status == "ok"
    }


def paired_diff(result, low, high):
    """Mean and standard error of PR(high) - PR(low) over shared seeds."""
    a = pr_by_seed(result, low)
    b = pr_by_seed(result, high)
    seeds = sorted(set(a) & set(b))
    diffs = np.array([b[s] - a[s] for s in seeds])
    se = diffs.std(ddof=1) / math.sqrt(len(diffs)) if len(diffs) > 1 else 0.0
    return float(diffs.mean()), float(se)


class TestCriterion1Oracles:
    def test_c1a_two_level_detuned(self):
        omega_e, omega_c, g = 2.0, 2.0661, 0.1
        mode = PhotonMode(
            m_x=0, m_y=0, polarization="p", k_x=0.0, k_y=0.0,
            omega=omega_c, l_z=300.0, omega0=omega_c,
        )
        ham = HamiltonianMatrix(
            matrix=np.array([[omega_e, g], [g, omega_c]], dtype=complex),
            n_molecules=1,
            modes=(mode,),
        )
        eigen = diagonalize(ham)
        half_sum = (omega_e + omega_c) / 2.0
        split = math.sqrt((omega_c - omega_e) ** 2 / 4.0 + g**2)
        err = np.abs(eigen.eigenvalues - [half_sum - split, half_sum + split]).max()
        report("1a", err < 1e-10, f"two-level eigenvalues match closed form, max |dE| = {err:.2e}")

    def _aligned_system(self, n_side, l_z):
        lattice = LatticeSpec(n_x=n_side, n_y=n_side, n_z=1)
        cavity = CavityConfig.for_lattice(lattice, l_z=l_z)
        sites = molecule_positions(lattice, cavity)
        modes = shell_filter(wavevector_grid(lattice, cavity), ShellSpec(0))
        n = lattice.n_molecules
        calib = calibrate(0.2, n, 1.0 / math.sqrt(3.0), reference_energy=2.0)
        real = Realization(
            energies=np.full(n, 2.0),
            dipole_units=np.tile([0.0, 1.0, 0.0], (n, 1)),
            offsets=np.zeros((n, 2)),
        )
        return diagonalize(assemble(sites, real, modes, calib)), calib, modes, n

    def test_c1b_collective_limit(self):
        eigen, calib, modes, n = self._aligned_system(19, l_z=300.0)  # 361 molecules
        w = eigen.eigenvalues
        n_at_omega_e = int(np.sum(np.abs(w - 2.0) <= 1e-10))
        omega_c = modes[0].omega
        uncoupled_err = np.abs(w - omega_c).min()

        resonant, calib_r, _, _ = self._aligned_system(19, l_z=HBAR_C_EV_NM * math.pi / 2.0)
        wr = resonant.eigenvalues
        split_err = abs((wr.max() - wr.min()) - 2.0 * calib_r.g0 * math.sqrt(n))
        ok = n_at_omega_e == n - 1 and uncoupled_err <= 1e-10 and split_err <= 1e-8
        report(
            "1b",
            ok,
            f"collective limit: {n_at_omega_e}/{n - 1} levels at the molecular energy, "
            f"uncoupled mode off by {uncoupled_err:.1e}, splitting off by {split_err:.1e}",
        )

    def test_c1c_decoupled_limit(self):
        config = RunConfig(lattice=LatticeSpec(n_x=11, n_y=11, n_z=1), target_rabi=0.0)
        out = run_single(config, seed=3)
        fractions = np.array([r.photon_fraction for r in out.records])
        binary = bool(np.all((fractions == 0.0) | (fractions == 1.0)))
        n = config.lattice.n_molecules
        ok = binary and out.summary.dark_count == n
        report("1c", ok, f"decoupled limit: binary fractions, dark count {out.summary.dark_count}/{n}")


def gap_config(l_z):
    return RunConfig(
        lattice=LatticeSpec(n_x=41, n_y=41, n_z=1),
        l_z=l_z,
        sigma_e=0.0,
        orientational=True,
    )


GAP_SEEDS = SEEDS_10 if FULL else SEEDS_10[:6]


class TestCriterion2And3Calibration:
    def test_c2_resonant_rabi_closure(self):
        result = run_ensemble(gap_config(RESONANT_L_Z), GAP_SEEDS)
        assert all(c.status == "ok" for c in result.cells)
        gap = result.axis_meta[None]["gap_mean"]
        report(
            "2",
            abs(gap - 0.200) <= 0.006,
            f"resonant 41x41 mean k=0 gap = {gap:.4f} eV vs 0.200 +/- 0.006 ({len(GAP_SEEDS)} seeds)",
        )

    def test_c3_detuned_gap(self):
        result = run_ensemble(gap_config(300.0), GAP_SEEDS)
        assert all(c.status == "ok" for c in result.cells)
        gap = result.axis_meta[None]["gap_mean"]
        expected = math.sqrt(0.0661**2 + 0.2**2)
        report(
            "3",
            abs(gap - expected) <= 0.008,
            f"detuned 41x41 mean k=0 gap = {gap:.4f} eV vs {expected:.4f} +/- 0.008",
        )


class TestCriterion4SizeScaling:
    def test_c4_size_sweep(self):
        sizes = (11, 21, 31, 41, 51, 71) if FULL else (11, 21, 31, 41)
        seeds = SEEDS_10 if FULL else SEEDS_10[:4]
        plan = ExperimentPlan(
            kind="size_sweep",
            axis=sizes,
            base=RunConfig(lattice=LatticeSpec(n_x=11, n_y=11, n_z=1)),
            seeds=seeds,
        )
        result = run_plan(plan, workers=WORKERS, blas_threads=BLAS_THREADS)
        assert all(c.status == "ok" for c in result.cells)
        means = [result.stats[v].mean for v in sizes]
        monotone = all(b > a for a, b in zip(means, means[1:]))
        detail = f"mean dark PR over sizes {sizes}: " + ", ".join(f"{m:.2f}" for m in means)
        if FULL:
            slope_ok = result.fit is not None and 0.005 <= result.fit.slope <= 0.02
            report(
                "4",
                monotone and slope_ok,
                detail + f"; slope {result.fit.slope if result.fit else float('nan'):.4f} in [0.005, 0.02]",
            )
        else:
            report("4", monotone, detail + " (ci profile: monotonicity only)")


@pytest.fixture(scope="module")
def disorder_sweep_plan():
    return ExperimentPlan(
        kind="disorder_sweep",
        axis=(0.005, 0.01, 0.02),
        base=RunConfig(lattice=LatticeSpec(n_x=31, n_y=31, n_z=1)),
        seeds=SEEDS_10,
    )


@pytest.fixture(scope="module")
def disorder_sweep_result(disorder_sweep_plan):
    return run_plan(disorder_sweep_plan, workers=WORKERS, blas_threads=BLAS_THREADS)


class TestCriterion5Disorder:
    def test_c5_pr_decreases_with_disorder(self, disorder_sweep_result):
        result = disorder_sweep_result
        assert all(c.status == "ok" for c in result.cells)
        sigmas = result.axis_values
        means = [result.stats[v].mean for v in sigmas]
        monotone = all(b < a for a, b in zip(means, means[1:]))
        gaps_exceed_se = True
        details = []
        for low, high in zip(sigmas, sigmas[1:]):
            drop, se = paired_diff(result, low, high)  # PR(high) - PR(low), expected < 0
            gaps_exceed_se &= -drop > se
            details.append(f"{low}->{high}: drop {-drop:.2f} vs SE {se:.2f}")
        # well beyond the 3-4 molecule delocalization of few-mode 1D models
        beyond_1d = result.stats[0.01].mean > 4.0
        report(
            "5",
            monotone and gaps_exceed_se and beyond_1d,
            f"mean PR {', '.join(f'{m:.2f}' for m in means)} over sigma {sigmas}; " + "; ".join(details),
        )


class TestCriterion6Layers:
    def test_c6_layer_convergence(self):
        plan = ExperimentPlan(
            kind="layer_sweep",
            axis=(1, 3, 5, 7),
            base=RunConfig(lattice=LatticeSpec(n_x=21, n_y=21, n_z=1)),
            seeds=SEEDS_10,
        )
        result = run_plan(plan, workers=WORKERS, blas_threads=BLAS_THREADS)
        assert all(c.status == "ok" for c in result.cells)
        pr5 = result.stats[5].mean
        pr7 = result.stats[7].mean
        change = abs(pr7 - pr5) / pr5
        report(
            "6",
            change < 0.10,
            f"layer sweep 21x21: PR(5) = {pr5:.2f}, PR(7) = {pr7:.2f}, relative change {change:.3f} < 0.10",
        )


class TestCriterion7Shells:
    def test_c7_shell_sweep(self):
        shells = (0, 5, 10, 20)
        plan = ExperimentPlan(
            kind="shell_sweep",
            axis=shells,
            base=RunConfig(lattice=LatticeSpec(n_x=41, n_y=41, n_z=1)),
            seeds=SEEDS_10,
        )
        result = run_plan(plan, workers=WORKERS, blas_threads=BLAS_THREADS)
        assert all(c.status == "ok" for c in result.cells)
        means = [result.stats[v].mean for v in shells]
        monotone = all(b > a for a, b in zip(means, means[1:]))
        lows = [result.axis_meta[v]["omega_shell_min"] for v in shells]
        highs = [result.axis_meta[v]["omega_shell_max"] for v in shells]
        ranges_increase = all(b > a for a, b in zip(lows, lows[1:])) and all(
            b > a for a, b in zip(highs, highs[1:])
        )
        report(
            "7",
            monotone and ranges_increase,
            f"shell PR {', '.join(f'{m:.2f}' for m in means)} increasing; "
            f"energy ranges {[f'{lo:.1f}-{hi:.1f}' for lo, hi in zip(lows, highs)]} increasing",
        )


class TestCriterion8CavityLength:
    def test_c8_cavity_lengths(self):
        lengths = (260.0, 300.0, 340.0)
        plan = ExperimentPlan(
            kind="cavity_length_sweep",
            axis=lengths,
            base=RunConfig(lattice=LatticeSpec(n_x=31, n_y=31, n_z=1)),
            seeds=SEEDS_10,
        )
        result = run_plan(plan, workers=WORKERS, blas_threads=BLAS_THREADS)
        assert all(c.status == "ok" for c in result.cells)
        omegas = [result.axis_meta[v]["omega_min"] for v in lengths]
        omega_err = max(abs(w - e) for w, e in zip(omegas, (2.384, 2.066, 1.823)))
        trend_ok = True
        details = []
        for low, high in zip(lengths, lengths[1:]):
            rise, se = paired_diff(result, low, high)  # expected >= 0 within one SE
            trend_ok &= rise >= -se
            details.append(f"{low:.0f}->{high:.0f}: rise {rise:.2f} vs SE {se:.2f}")
        report(
            "8",
            omega_err <= 0.005 and trend_ok,
            f"lowest mode energies {[f'{w:.3f}' for w in omegas]} (max err {omega_err:.4f}); " + "; ".join(details),
        )


class TestCriterion9NumericalContract:
    def test_c9_contract_verified_explicitly(self):
        config = RunConfig(lattice=LatticeSpec(n_x=21, n_y=21, n_z=1))
        lattice, cavity = config.lattice, config.cavity()
        sites = molecule_positions(lattice, cavity)
        modes = wavevector_grid(lattice, cavity)
        from darkcavity import DisorderSpec, eta_factor, position_array, sample_realization

        eta = eta_factor(position_array(sites)[:, 2], cavity.l_z)
        calib = calibrate(0.2, lattice.n_molecules, eta, reference_energy=2.0)
        real = sample_realization(config.disorder_spec(seed=SEEDS_10[0]), lattice)
        ham = assemble(sites, real, modes, calib)
        eigen = diagonalize(ham, check=False)

        h_norm = np.linalg.norm(ham.matrix)
        residual = np.linalg.norm(
            ham.matrix @ eigen.eigenvectors - eigen.eigenvectors * eigen.eigenvalues, axis=0
        ).max()
        residual_ok = residual <= 1e-8 * h_norm
        trace_ok = trace_check(ham, eigen)
        records = classify_states(eigen, modes)
        m = len(modes)
        fraction_sum = sum(r.photon_fraction for r in records)
        completeness_ok = abs(fraction_sum - m) <= 1e-8 * m
        dark_prs = [r.pr for r in records if r.classification == "dark"]
        bounds_ok = all(1.0 - 1e-9 <= pr <= lattice.n_molecules + 1e-9 for pr in dark_prs)
        ok = residual_ok and trace_ok and completeness_ok and bounds_ok
        report(
            "9",
            ok,
            f"21x21 run: residual {residual:.2e} <= 1e-8*||H||_F = {1e-8 * h_norm:.2e}, "
            f"trace ok, |sum fractions - M| = {abs(fraction_sum - m):.2e}, "
            f"{len(dark_prs)} dark PRs within [1, N]",
        )

    def test_c9_contract_enforced_on_every_run(self):
        # run_single re-checks the same contract internally on every cell.
        out = run_single(RunConfig(lattice=LatticeSpec(n_x=5, n_y=5, n_z=1)), seed=1)
        m = out.summary.n_modes
        assert abs(out.summary.photon_fraction_sum - m) <= 1e-8 * m


class TestCriterion10Determinism:
    def test_c10_worker_count_invariance(self, tmp_path, disorder_sweep_plan, disorder_sweep_result):
        if FULL:
            plan = disorder_sweep_plan
            serial = run_plan(plan, workers=1, blas_threads=BLAS_THREADS)
            threaded = disorder_sweep_result
        else:
            plan = replace(disorder_sweep_plan, seeds=SEEDS_10[:3])
            serial = run_plan(plan, workers=1, blas_threads=BLAS_THREADS)
            threaded = run_plan(plan, workers=2, blas_threads=BLAS_THREADS)
        a = write_results(serial, tmp_path / "serial", plan)
        b = write_results(threaded, tmp_path / "threaded", plan)
        identical_csv = a["cells"].read_bytes() == b["cells"].read_bytes()
        identical_summary = (tmp_path / "serial" / "summary.json").read_bytes() == (
            tmp_path / "threaded" / "summary.json"
        ).read_bytes()
        report(
            "10",
            identical_csv and identical_summary,
            f"results CSV byte-identical across worker counts 1 and 2 "
            f"({len(plan.seeds)} seeds{'' if FULL else ', ci profile'})",
        )
