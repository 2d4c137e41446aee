"""Acceptance suite: one test per criterion, each printing a pass line.

Run as ``pytest -s tests/test_acceptance.py`` to see the per-criterion lines.
All tolerances are fixed here; nothing is calibrated at runtime.
"""

import json
import math
import time

import numpy as np
import pytest
from scipy import stats

from weibsup.core import Metric, PointSet, RandomStream, diameter
from weibsup.gamma import (
    build_greedy_tree,
    chaining_bound,
    gamma_exact_small,
    gamma_from_tree,
    gaussian_gamma2_proxy,
    intersect_trees,
    sudakov_lower,
)
from weibsup.harness import (
    InstanceFamily,
    RunConfig,
    counterexample_run,
    run,
    standard_suite,
    truncation_check,
    verify_main_bound,
)
from weibsup.laws import (
    WeibullLaw,
    exact_abs_moment,
    product_tail,
    sample_symmetric_weibull,
    symmetric_weibull,
)
from weibsup.mcsup import (
    Driver,
    esup_mc,
    esup_rep_mc,
    order_stat_tail,
    probe_schedule_check,
)

L2 = Metric.l2()
LINF = Metric.linf()

SUITE_SEED = 1811  # fixed seeded suite: 20 gaussian clouds, m=32, n=8


def _report(num: int, text: str) -> None:
    print(f"[PASS] criterion {num:2d}: {text}")


def test_criterion_01_sampler_law_ks():
    started = time.perf_counter()
    for r in (0.5, 1.0, 1.5):
        x = np.abs(sample_symmetric_weibull(WeibullLaw(r), RandomStream(4242, 17), size=100_000))
        ks = stats.kstest(x, lambda t: 1.0 - np.exp(-np.clip(t, 0.0, None) ** r)).statistic
        assert ks < 0.01, f"KS distance {ks:.4f} at r={r}"
    elapsed = time.perf_counter() - started
    assert elapsed < 5.0, f"sampler check took {elapsed:.1f}s"
    _report(1, f"KS < 0.01 for r in (0.5, 1, 1.5) in {elapsed:.2f}s")


def test_criterion_02_exact_moments():
    stream = RandomStream(777)
    worst = 0.0
    for i, r in enumerate((0.5, 1.0, 2.0)):
        x = np.abs(symmetric_weibull(stream.child(i).generator(), r, 100_000))
        for p in (1.0, 2.0, 4.0):
            vals = x**p
            se = vals.std(ddof=1) / math.sqrt(vals.size)
            dev = abs(vals.mean() - exact_abs_moment(r, p)) / se
            worst = max(worst, dev)
            assert dev < 3.0, f"E|X|^{p} off by {dev:.2f} stderr at r={r}"
    _report(2, f"MC moments within 3 stderr of Gamma(1+p/r); worst {worst:.2f}")


def test_criterion_03_coupling_sandwich():
    for r in (0.5, 0.75, 1.0):
        for t in np.arange(2.0, 8.0 + 1e-9, 0.5):
            value = product_tail(r, float(t), quadrature_tol=1e-8)
            lo = math.exp(-2.0 * t**r)
            hi = 2.0 * math.exp(-(t**r) / 2.0)
            assert lo <= value <= hi, f"sandwich broken at r={r}, t={t}"
    _report(3, "exp(-2t^r) <= P(|gY|>=t) <= 2exp(-t^r/2) on the full grid")


def test_criterion_04_gamma_oracle_equivalence():
    rng = np.random.default_rng(424242)
    worst = 0.0
    for _ in range(50):
        m = int(rng.integers(5, 9))
        ps = PointSet(rng.standard_normal((m, 3)))
        tree = build_greedy_tree(ps, L2)
        for alpha in (2.0, 1.0):
            greedy = gamma_from_tree(tree, alpha, L2).value
            exact = gamma_exact_small(ps, L2, alpha).value
            assert greedy >= exact - 1e-12
            ratio = greedy / exact
            worst = max(worst, ratio)
            assert ratio <= 3.0, f"greedy/exact = {ratio:.3f} at m={m}, alpha={alpha}"
    for _ in range(20):
        m = int(rng.integers(1, 5))
        ps = PointSet(rng.standard_normal((m, 3)))
        d = diameter(ps, range(m), L2)
        assert gamma_from_tree(build_greedy_tree(ps, L2), 2.0, L2).value == d
        assert gamma_exact_small(ps, L2, 2.0).value == d
    _report(4, f"greedy >= exact on 50 sets, worst greedy/exact {worst:.3f} <= 3.0")


def test_criterion_05_gamma2_cross_method_consistency():
    suite = standard_suite(base_seed=SUITE_SEED)
    c1s, c2s = [], []
    for i, ps in enumerate(suite):
        sud = sudakov_lower(ps, L2).value
        proxy = gaussian_gamma2_proxy(ps, 20_000, RandomStream(901).child(i)).value
        greedy = gamma_from_tree(build_greedy_tree(ps, L2), 2.0, L2).value
        c1s.append(proxy / sud)
        c2s.append(greedy / proxy)
    spread1 = max(c1s) / min(c1s)
    spread2 = max(c2s) / min(c2s)
    assert spread1 <= 8.0, f"C1 spread {spread1:.2f}"
    assert spread2 <= 8.0, f"C2 spread {spread2:.2f}"
    _report(5, f"sudakov <= C1 proxy <= C2 greedy; spreads {spread1:.2f}, {spread2:.2f} <= 8")


def test_criterion_06_permuted_weight_bound_windows():
    started = time.perf_counter()
    cfg = RunConfig(
        name="main_bound",
        families=(
            InstanceFamily("hypercube_subset", seed=101, n=8, m=64),
            InstanceFamily("gaussian_cloud", seed=102, n=16, m=64, scale=1.0),
            InstanceFamily("scaled_basis", seed=103, n=32, decay="harmonic"),
        ),
        r_values=(0.5, 0.75, 1.0),
        samples=20_000,
        num_perms=20,
        seed=7,
    )
    reports = verify_main_bound(cfg)
    by_family: dict[str, list[float]] = {}
    for rep in reports:
        ratio = rep.ratios["esup_weibull_over_epi_gamma2"]
        assert ratio is not None
        assert 1.0 / 64.0 <= ratio <= 64.0, f"{rep.instance} r={rep.r}: ratio {ratio:.4f}"
        by_family.setdefault(rep.instance, []).append(ratio)
    worst_sweep = 1.0
    for ratios in by_family.values():
        worst_sweep = max(worst_sweep, max(ratios) / min(ratios))
        assert max(ratios) / min(ratios) <= 16.0
    elapsed = time.perf_counter() - started
    assert elapsed < 600.0
    _report(6, f"all 9 ratios in [1/64, 64]; worst sweep spread {worst_sweep:.2f} <= 16 "
               f"({elapsed:.1f}s)")


def test_criterion_07_counterexample_exact():
    reports = counterexample_run(0.5, [2**8, 2**10, 2**12, 2**14])
    ratios = [rep.ratios["simplified_lower_over_esup"] for rep in reports]
    for prev, nxt in zip(ratios, ratios[1:]):
        assert nxt == 2.0 * prev, f"quadrupling n did not exactly double: {prev} -> {nxt}"
    assert ratios[1] == 8.0, f"ratio at n=1024 is {ratios[1]}, expected exactly 8"
    _report(7, f"simplified ratios {ratios}: exact doubling, 8.0 at n=1024")


def test_criterion_08_representation_equivalence():
    suite = standard_suite(base_seed=SUITE_SEED)
    lo, hi, worst_rel_se = math.inf, 0.0, 0.0
    for i, ps in enumerate(suite):
        for j, r in enumerate((0.5, 1.0)):
            stream = RandomStream(1717).child(i).child(j)
            est = esup_mc(ps, Driver.weibull(r), 20_000, stream.child(0))
            rep = esup_rep_mc(ps, r, 20_000, stream.child(1))
            ratio = rep.mean / est.mean
            lo, hi = min(lo, ratio), max(hi, ratio)
            for side in (est, rep):
                rel = side.stderr / side.mean
                worst_rel_se = max(worst_rel_se, rel)
                assert rel < 0.02, f"stderr {rel:.3%} of mean at instance {i}, r={r}"
            assert 1.0 / 16.0 <= ratio <= 16.0
    _report(8, f"rep/esup in [{lo:.3f}, {hi:.3f}] within [1/16, 16]; "
               f"worst stderr {worst_rel_se:.2%} < 2%")


def test_criterion_09_chaining_dominance():
    suite = standard_suite(base_seed=SUITE_SEED)
    worst = math.inf
    for i, ps in enumerate(suite):
        tree = intersect_trees(build_greedy_tree(ps, L2), build_greedy_tree(ps, LINF))
        for j, r in enumerate((0.5, 1.0, 1.5, 2.0)):
            est = esup_mc(ps, Driver.weibull(r), 20_000, RandomStream(1818).child(i).child(j))
            bound = chaining_bound(ps, r, tree)
            assert bound >= est.mean - 3.0 * est.stderr, f"instance {i}, r={r}"
            worst = min(worst, bound / est.mean)
    _report(9, f"chaining bound dominates esup on all 80 instances (min margin {worst:.2f}x)")


def test_criterion_10_order_statistic_probes():
    # empirical frequencies vs the binomial closed form
    n, s, draws = 64, 2.0, 40_000
    rng = RandomStream(33).generator()
    mags = (-np.log1p(-rng.random((draws, n)))) ** (1.0 / s)
    ystar = -np.sort(-mags, axis=1)
    for k, u in ((2, 1.6), (8, 1.2), (32, 0.6)):
        exact = order_stat_tail(n, s, k, u)
        freq = float((ystar[:, k - 1] >= u).mean())
        se = math.sqrt(exact * (1.0 - exact) / draws)
        assert abs(freq - exact) < 3.0 * se, f"k={k}, u={u}"
    # lower-flavor schedules
    z_sums = []
    for n_probe in (512, 4096):
        chk = probe_schedule_check(n_probe, s, "lower")
        assert chk.ok and chk.z_sum < 0.5
        z_sums.append(chk.z_sum)
    # upper-flavor Markov bounds
    for tau in (1.5, 2.0):
        for n_probe in (512, 4096):
            chk = probe_schedule_check(n_probe, s, "upper", tau=tau)
            assert chk.ok
    _report(10, f"frequencies match binomial; z-sums {[f'{z:.3f}' for z in z_sums]} < 1/2; "
                "Markov bounds hold for tau in (1.5, 2)")


def test_criterion_11_contraction_and_truncation():
    suite = standard_suite(base_seed=SUITE_SEED)
    base = suite[0]
    mask_rng = np.random.default_rng(5150)
    for i in range(20):
        b = mask_rng.uniform(0.5, 1.5, base.dim)
        a = b * mask_rng.uniform(0.0, 1.0, base.dim)
        stream = RandomStream(2020).child(i)
        est_a = esup_mc(PointSet(base.points * a), Driver.weibull(1.0), 20_000, stream)
        est_b = esup_mc(PointSet(base.points * b), Driver.weibull(1.0), 20_000, stream)
        combined = math.hypot(est_a.stderr, est_b.stderr)
        assert est_a.mean <= est_b.mean + 3.0 * combined, f"mask pair {i}"

    cfg = RunConfig(
        name="main_bound",
        families=tuple(
            InstanceFamily("gaussian_cloud", seed=SUITE_SEED + i, n=8, m=32)
            for i in range(4)
        ),
        r_values=(0.5, 1.0),
        samples=20_000,
        seed=3,
    )
    for rep in truncation_check(cfg, 1.0):
        assert rep.ratios["esup_full_over_esup_prefix"] == 1.0
    worst = 0.0
    for rep in truncation_check(cfg, 0.25):
        ratio = rep.ratios["esup_full_over_esup_prefix"]
        worst = max(worst, ratio)
        assert ratio <= 8.0
    _report(11, f"contraction holds on 20 mask pairs; truncation theta=1 exact, "
                f"theta=1/4 worst ratio {worst:.2f} <= 8")


def test_criterion_12_determinism(tmp_path):
    out = tmp_path / "det_report.json"
    cfg = {
        "name": "main_bound",
        "families": [
            {"kind": "gaussian_cloud", "n": 8, "m": 16, "seed": 5},
            {"kind": "hypercube_subset", "n": 6, "m": 20, "seed": 6},
        ],
        "r_values": [0.5, 1.0],
        "samples": 6000,
        "num_perms": 5,
        "seed": 99,
        "out": str(out),
    }
    cfg_path = tmp_path / "det_cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    assert run(str(cfg_path), workers=1) == 0
    first = out.read_bytes()
    assert run(str(cfg_path), workers=4) == 0
    second = out.read_bytes()
    assert run(str(cfg_path), workers=2) == 0
    third = out.read_bytes()
    assert first == second == third
    _report(12, "report files byte-identical across worker counts 1, 4, 2")
