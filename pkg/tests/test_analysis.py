import numpy as np
import pytest

from modgait.analysis import (
    ArchiveEntry,
    ParetoArchive,
    compare_archives,
    ols_regression,
    pareto_filter,
    regress_load,
    regularized_incomplete_beta,
    t_test_p_value,
)
from modgait.errors import ConfigError, InsufficientDataError
from oracles import brute_force_fronts


def make_archive(genomes, loads, metadata=None, speeds=None, stabilities=None):
    n = len(genomes)
    speeds = np.zeros(n) if speeds is None else speeds
    stabilities = np.zeros(n) if stabilities is None else stabilities
    entries = [
        ArchiveEntry(
            genome=np.asarray(g, dtype=float),
            objectives=np.array([-s, -st, l]),
        )
        for g, s, st, l in zip(genomes, speeds, stabilities, loads)
    ]
    return ParetoArchive(entries=entries, metadata=metadata or {})


def random_hex_genomes(n, rng):
    from modgait.gait import gait_bounds

    lo, hi = gait_bounds("tetrapod")
    return lo + rng.random((n, lo.size)) * (hi - lo)


def test_incomplete_beta_against_mpmath():
    import mpmath

    mpmath.mp.dps = 50
    for a, b in ((0.5, 0.5), (2.5, 0.5), (5.0, 0.5), (15.0, 0.5), (60.0, 0.5)):
        for x in (0.01, 0.2, 0.5, 0.8, 0.99):
            ref = float(mpmath.betainc(a, b, 0, x, regularized=True))
            assert abs(regularized_incomplete_beta(a, b, x) - ref) < 1e-12


def test_p_value_against_high_precision_reference():
    import mpmath

    mpmath.mp.dps = 50
    for dof in (1, 2, 5, 10, 30, 120):
        for t in (0.1, 0.5, 1.0, 2.0, 5.0, 10.0):
            x = dof / (dof + t * t)
            ref = float(mpmath.betainc(dof / 2.0, 0.5, 0, x, regularized=True))
            assert abs(t_test_p_value(t, dof) - ref) < 1e-10


def test_p_value_against_scipy():
    from scipy import stats

    for dof in (3, 17, 89):
        for t in (0.3, 1.7, 3.2):
            assert t_test_p_value(t, dof) == pytest.approx(
                2 * stats.t.sf(t, dof), abs=1e-12
            )


def test_ols_matches_normal_equations(rng):
    X = rng.normal(size=(60, 6))
    y = X @ rng.normal(size=6) + 0.5 + rng.normal(scale=0.3, size=60)
    report = ols_regression(X, y)
    Xd = np.hstack([np.ones((60, 1)), X])
    beta = np.linalg.solve(Xd.T @ Xd, Xd.T @ y)
    assert abs(report.intercept - beta[0]) < 1e-8
    got = np.array([v.coef for v in report.variables])
    assert np.abs(got - beta[1:]).max() < 1e-8
    assert 0.0 <= report.r_squared <= 1.0
    assert report.dof == 60 - 6 - 1


def test_exact_linear_recovery(rng):
    genomes = random_hex_genomes(40, rng)
    H = genomes[:, 12]
    archive = make_archive(genomes, 2.0 * H + 1.0)
    report = regress_load(archive)
    by_name = {v.name: v for v in report.variables}
    assert by_name["height_m"].coef == pytest.approx(2.0, abs=1e-10)
    assert by_name["height_m"].p_value < 1e-10
    assert by_name["height_m"].significant
    for name, v in by_name.items():
        if name != "height_m":
            assert abs(v.coef) < 1e-8
    assert report.intercept == pytest.approx(1.0, abs=1e-8)
    assert report.r_squared == pytest.approx(1.0, abs=1e-12)


def test_variable_grouping(rng):
    archive = make_archive(random_hex_genomes(40, rng), rng.random(40))
    report = regress_load(archive)
    groups = [v.group for v in report.variables]
    assert groups == ["duty/height"] * 2 + ["strides"] * 6 + ["speeds"] * 6


def test_monte_carlo_significance_calibration():
    # Pure-noise response: each variable should reject at about the 5% level.
    rng = np.random.default_rng(0)
    hits = trials = 0
    for _ in range(300):
        X = rng.normal(size=(91, 5))
        y = rng.normal(size=91)
        report = ols_regression(X, y)
        hits += sum(v.significant for v in report.variables)
        trials += len(report.variables)
    rate = hits / trials
    assert 0.03 < rate < 0.07


def test_collinear_column_aliased(rng):
    X = rng.normal(size=(50, 4))
    X = np.column_stack([X, X[:, 0] + 2.0 * X[:, 1]])  # exact linear combo
    y = rng.normal(size=50)
    report = ols_regression(X, y)
    assert report.variables[4].aliased
    assert not any(v.aliased for v in report.variables[:4])
    assert any("aliased" in n for n in report.notes)


def test_degenerate_archive_flagged(rng):
    genome = random_hex_genomes(1, rng)[0]
    archive = make_archive(np.tile(genome, (20, 1)), rng.random(20))
    report = regress_load(archive)
    assert report.degenerate
    assert all(v.aliased for v in report.variables)


def test_too_few_observations(rng):
    archive = make_archive(random_hex_genomes(10, rng), rng.random(10))
    with pytest.raises(InsufficientDataError):
        regress_load(archive)
    with pytest.raises(InsufficientDataError):
        regress_load(ParetoArchive(entries=[]))


def test_observation_order_invariance(rng):
    genomes = random_hex_genomes(40, rng)
    loads = rng.random(40)
    a = regress_load(make_archive(genomes, loads))
    perm = rng.permutation(40)
    b = regress_load(make_archive(genomes[perm], loads[perm]))
    for va, vb in zip(a.variables, b.variables):
        assert va.coef == pytest.approx(vb.coef, abs=1e-10)
        assert va.p_value == pytest.approx(vb.p_value, abs=1e-10)


def test_report_serialization(rng):
    report = regress_load(make_archive(random_hex_genomes(40, rng), rng.random(40)))
    d = report.to_dict()
    assert d["n_observations"] == 40
    assert len(d["variables"]) == 14
    text = report.to_text()
    assert "height_m" in text and "R^2" in text


def test_pareto_filter_single_entry():
    e = ArchiveEntry(genome=np.zeros(2), objectives=np.array([1.0, 2.0, 3.0]))
    assert pareto_filter([e]) == [e]


def test_pareto_filter_dominated_chain():
    entries = [
        ArchiveEntry(genome=np.zeros(1), objectives=np.array([float(i)] * 3))
        for i in range(5)
    ]
    kept = pareto_filter(entries)
    assert len(kept) == 1 and kept[0] is entries[0]


def test_pareto_filter_drops_infeasible():
    good = ArchiveEntry(genome=np.zeros(1), objectives=np.array([5.0, 5.0, 5.0]))
    bad = ArchiveEntry(genome=np.zeros(1), objectives=np.array([0.0, 0.0, 0.0]),
                       violation=1.0)
    assert pareto_filter([good, bad]) == [good]


def test_pareto_filter_matches_brute_force(rng):
    entries = [
        ArchiveEntry(genome=np.zeros(1), objectives=rng.random(3)) for _ in range(100)
    ]
    kept = pareto_filter(entries)
    F = np.array([e.objectives for e in entries])
    oracle = brute_force_fronts(F)[0]
    ids = [id(e) for e in entries]
    assert sorted(ids.index(id(e)) for e in kept) == oracle


def test_compare_identical_archives(rng):
    meta = {"morphology": "hex", "gait": "tetrapod", "terrain": {"kind": "flat"}, "seed": 1}
    a = make_archive(random_hex_genomes(5, rng), [1.0, 2.0, 3.0, 4.0, 5.0],
                     metadata=meta)
    out = compare_archives(a, a)
    assert all(v == 0 for v in out["delta"].values())
    assert out["with_load"]["min_load"] == 1.0
    assert out["with_load"]["median_load"] == 3.0


def test_compare_ordering(rng):
    meta = {"morphology": "hex", "gait": "tetrapod", "terrain": {"kind": "flat"}, "seed": 1}
    a = make_archive(random_hex_genomes(3, rng), [1.0, 1.5, 2.0], metadata=meta)
    b = make_archive(random_hex_genomes(3, rng), [4.0, 5.0, 6.0], metadata=meta)
    out = compare_archives(a, b)
    assert out["delta"]["min_load"] == pytest.approx((1.0 - 4.0) / 4.0)
    assert out["delta"]["min_load"] < 0


def test_compare_metadata_mismatch(rng):
    a = make_archive(random_hex_genomes(2, rng), [1.0, 2.0],
                     metadata={"morphology": "hex", "gait": "wave", "terrain": {}, "seed": 1})
    b = make_archive(random_hex_genomes(2, rng), [1.0, 2.0],
                     metadata={"morphology": "hex", "gait": "tetrapod", "terrain": {}, "seed": 1})
    with pytest.raises(ConfigError):
        compare_archives(a, b)
