"""Edge decisions, partition selection, and graph metrics."""

import numpy as np
import pytest

from conftest import small_config, twelve_node_config
from lrdnet.errors import DegenerateRestriction, InsufficientData
from lrdnet.model import DirectedGraph, LrdnModel, random_model, true_graph
from lrdnet.polymat import PolynomialMatrix
from lrdnet.sim import simulate
from lrdnet.topology import (
    EdgeTestResult,
    Partition,
    apply_partition,
    compare_graphs,
    inverse_factor_support_check,
    decide_graph,
    edge_test,
    edge_test_table,
    partition_select,
    support_graph,
    write_edge_tests_csv,
)
from lrdnet.wiener import estimate_h, estimate_s, exact_filters
from test_sim import white_model


def fit_both(ts, order):
    return estimate_h(ts, order=order), estimate_s(ts, order=order)


class TestEdgeTest:
    def test_noiseless_null_group_is_rejected_cleanly(self):
        # deterministic-block row with an absent edge: zero norm, decision False
        model = random_model(small_config(seed=1))
        absent = np.argwhere(~model.g_ml.support())
        if absent.size == 0:
            pytest.skip("support draw left no absent deterministic edge")
        i, j = absent[0]
        ts = simulate(model, num_samples=2000, seed=31)
        h_est = estimate_h(ts, order=model.g_ml.degree)
        res = edge_test(h_est, target=int(i) + 1, source=model.m + int(j) + 1, alpha=0.01)
        assert not res.decision
        assert res.p_value == 1.0
        assert res.coeff_norm < 1e-8

    def test_noiseless_present_edge_detected(self):
        model = random_model(small_config(seed=1))
        present = np.argwhere(model.g_ml.support())
        i, j = present[0]
        ts = simulate(model, num_samples=2000, seed=32)
        h_est = estimate_h(ts, order=model.g_ml.degree)
        res = edge_test(h_est, target=int(i) + 1, source=model.m + int(j) + 1, alpha=0.01)
        assert res.decision
        assert res.p_value == 0.0
        assert res.coeff_norm > 0.3

    def test_power_at_detectability_margin(self):
        # a lag coefficient of 0.35 is reliably flagged at T = 2000
        rejects = 0
        trials = 60
        for trial in range(trials):
            cfg = small_config(
                seed=trial,
                m=1,
                l=2,
                degree_ml=1,
                degree_l=2,
                support_ml=np.array([[True, True]]),
                support_l=np.array([[True, True], [False, True]]),
                coeff_min=0.3,
                coeff_max=0.35,
            )
            model = random_model(cfg)
            ts = simulate(model, num_samples=2000, seed=6000 + trial)
            s_est = estimate_s(ts, order=4)
            rejects += int(edge_test(s_est, target=2, source=3, alpha=0.05).decision)
        assert rejects / trials >= 0.97

    def test_f_fallback_on_misspecified_deterministic_row(self):
        # with the order too small the relation leaves real residuals, so the
        # deterministic shortcut must not fire and the F path takes over
        coeffs = np.zeros((3, 1, 1))
        coeffs[2, 0, 0] = 0.9
        model = LrdnModel(
            m=1,
            l=1,
            g_ml=PolynomialMatrix(coeffs),
            g_l=PolynomialMatrix(np.array([[[0.0]], [[0.5]]])),
            sigma_l=np.ones(1),
        )
        ts = simulate(model, num_samples=4000, seed=33)
        h_est = estimate_h(ts, order=1)
        res = edge_test(h_est, target=1, source=2, alpha=0.01)
        assert np.isfinite(res.statistic)
        assert res.decision  # lag 0..1 still carries predictive content

    def test_statistic_matches_explicit_nested_refit(self):
        # independent oracle: rebuild both designs and compute the textbook
        # ((RSS_r - RSS_f)/g) / (RSS_f/dof) statistic from scratch
        from scipy import stats as sps

        from lrdnet.wiener import _lagged_design

        model = random_model(small_config(seed=4))
        ts = simulate(model, num_samples=3000, seed=55)
        p = 3
        est = estimate_s(ts, order=p)
        X_full = _lagged_design(ts.y_l, p)
        Y = ts.y_l[p:]
        for i in range(ts.l):
            drop = i * (p + 1)
            keep = np.delete(np.arange(ts.l * (p + 1)), drop)
            X = X_full[:, keep]
            bf, *_ = np.linalg.lstsq(X, Y[:, i], rcond=None)
            rss_f = float(np.sum((Y[:, i] - X @ bf) ** 2))
            for j in range(ts.l):
                res = edge_test(est, target=ts.m + i + 1, source=ts.m + j + 1, alpha=0.05)
                gidx = est.regressor_groups[(i, j)]
                Xr = X[:, np.delete(np.arange(X.shape[1]), gidx)]
                br, *_ = np.linalg.lstsq(Xr, Y[:, i], rcond=None)
                rss_r = float(np.sum((Y[:, i] - Xr @ br) ** 2))
                g = len(gidx)
                dof = X.shape[0] - X.shape[1]
                f_oracle = ((rss_r - rss_f) / g) / (rss_f / dof)
                assert abs(res.statistic - f_oracle) <= 1e-9 * max(1.0, f_oracle)
                assert abs(res.p_value - float(sps.f.sf(f_oracle, g, dof))) < 1e-10

    def test_degenerate_restriction_guard(self):
        model = random_model(small_config(seed=2))
        ts = simulate(model, num_samples=1000, seed=34)
        s_est = estimate_s(ts, order=2)
        s_est.gram_inv_blocks[(0, 1)] = np.zeros_like(s_est.gram_inv_blocks[(0, 1)])
        with pytest.raises(DegenerateRestriction):
            edge_test(s_est, target=model.m + 1, source=model.m + 2, alpha=0.01)

    def test_node_range_validation(self):
        model = random_model(small_config(seed=2))
        ts = simulate(model, num_samples=1000, seed=35)
        h_est = estimate_h(ts, order=2)
        with pytest.raises(ValueError):
            edge_test(h_est, target=model.m + 1, source=model.m + 1, alpha=0.01)
        with pytest.raises(ValueError):
            edge_test(h_est, target=1, source=1, alpha=0.01)

    def test_result_invariants(self):
        r = EdgeTestResult(source=3, target=1, statistic=2.0, p_value=0.2, coeff_norm=0.1, decision=False)
        assert 0.0 <= r.p_value <= 1.0
        with pytest.raises(ValueError):
            EdgeTestResult(source=3, target=1, statistic=2.0, p_value=1.5, coeff_norm=0.1, decision=True)


class TestDecideGraph:
    def test_population_route_recovers_true_graph(self):
        for seed in range(10):
            model = random_model(small_config(seed=seed))
            g = support_graph(exact_filters(model), m=model.m)
            assert g == true_graph(model)

    def test_benchmark_recovery_at_small_sample(self):
        hits = 0
        for trial in range(5):
            model = random_model(twelve_node_config(seed=500 + trial))
            ts = simulate(model, num_samples=200, seed=600 + trial)
            h_est, s_est = fit_both(ts, order=2)
            decided = decide_graph(h_est, s_est, alpha=0.01, correction="bonferroni")
            hits += int(decided == true_graph(model))
        assert hits >= 4

    def test_pure_noise_node_gets_no_in_edges(self):
        model = random_model(twelve_node_config(seed=77))
        ts = simulate(model, num_samples=2000, seed=78)
        h_est, s_est = fit_both(ts, order=2)
        decided = decide_graph(h_est, s_est, alpha=0.01, correction="bonferroni")
        node = model.m + 4  # pinned full-rank channel
        assert not any(i == node for i, _ in decided.edges)

    def test_decided_graph_is_directional(self):
        # one-way influence must not come back as a reverse edge
        coeffs = np.zeros((2, 2, 2))
        coeffs[1, 0, 1] = 0.6
        model = LrdnModel(
            m=1,
            l=2,
            g_ml=PolynomialMatrix(np.array([[[0.5, 0.0]]])),
            g_l=PolynomialMatrix(coeffs),
            sigma_l=np.ones(2),
        )
        ts = simulate(model, num_samples=4000, seed=79)
        h_est, s_est = fit_both(ts, order=3)
        decided = decide_graph(h_est, s_est, alpha=0.01)
        assert (2, 3) in decided.edges
        assert (3, 2) not in decided.edges

    def test_table_covers_all_pairs_and_csv_round_trips(self, tmp_path):
        model = random_model(small_config(seed=3))
        ts = simulate(model, num_samples=1500, seed=80)
        h_est, s_est = fit_both(ts, order=2)
        table = edge_test_table(h_est, s_est, alpha=0.05)
        assert len(table) == (model.m + model.l) * model.l
        path = tmp_path / "edges.csv"
        write_edge_tests_csv(table, path, comment="seed=80")
        lines = path.read_text().splitlines()
        assert lines[0] == "# seed=80"
        assert lines[1] == "source,target,F,p,norm,decision"
        assert len(lines) == 2 + len(table)

    def test_monotone_exact_match_in_sample_size(self):
        rates = []
        for T in (200, 500, 2000):
            hits = 0
            for trial in range(8):
                model = random_model(twelve_node_config(seed=900 + trial))
                ts = simulate(model, num_samples=T, seed=1300 + trial)
                h_est, s_est = fit_both(ts, order=2)
                decided = decide_graph(h_est, s_est, alpha=0.01, correction="bonferroni")
                hits += int(decided == true_graph(model))
            rates.append(hits / 8)
        assert rates[0] <= rates[1] <= rates[2]
        assert rates[2] >= 0.9


class TestCompareGraphs:
    def test_identical(self):
        g = DirectedGraph(num_nodes=3, m=1, edges=frozenset({(1, 2), (2, 3)}))
        metrics = compare_graphs(g, g)
        assert metrics.precision == metrics.recall == 1.0
        assert metrics.exact_match
        assert not metrics.precision_by_convention

    def test_empty_estimate_flags_convention(self):
        truth = DirectedGraph(num_nodes=3, m=1, edges=frozenset({(1, 2), (2, 3)}))
        empty = DirectedGraph(num_nodes=3, m=1, edges=frozenset())
        metrics = compare_graphs(empty, truth)
        assert metrics.recall == 0.0
        assert metrics.precision == 1.0
        assert metrics.precision_by_convention
        assert not metrics.exact_match

    def test_counts(self):
        truth = DirectedGraph(num_nodes=30, m=5, edges=frozenset((i, 6) for i in range(1, 26)))
        est_edges = set((i, 6) for i in range(1, 25)) | {(26, 6)}
        est = DirectedGraph(num_nodes=30, m=5, edges=frozenset(est_edges))
        metrics = compare_graphs(est, truth)
        assert metrics.true_positives == 24
        assert metrics.precision == metrics.recall == 0.96
        assert not metrics.exact_match

    def test_node_count_mismatch(self):
        a = DirectedGraph(num_nodes=3, m=1, edges=frozenset())
        b = DirectedGraph(num_nodes=4, m=1, edges=frozenset())
        with pytest.raises(ValueError):
            compare_graphs(a, b)


class TestInverseFactorSupport:
    def test_white_noise_block(self):
        assert inverse_factor_support_check(white_model())

    def test_random_models(self):
        for seed in range(20):
            assert inverse_factor_support_check(random_model(small_config(seed=seed)))

    def test_sparse_filter_dense_factor_contrast(self):
        # the factor's impulse response is dense while the projection filter
        # keeps the generating sparsity
        model = random_model(twelve_node_config(seed=42))
        assert inverse_factor_support_check(model)
        from lrdnet.model import reduced_form

        w = reduced_form(model).w_factor
        s = exact_filters(model).s
        off = ~np.eye(model.l, dtype=bool)
        assert w.support(1e-9)[off].sum() > s.support(1e-9)[off].sum()


class TestPartitionSelect:
    def test_all_channels_full_rank(self):
        # three coupled full-rank channels, nothing deterministic
        cfg = small_config(seed=12, m=1, l=3)
        model = random_model(cfg)
        ts = simulate(model, num_samples=4000, seed=90)
        part = partition_select(ts.y_l, max_lag=6)
        assert part.l_indices == (1, 2, 3)
        assert part.m_indices == ()

    def test_duplicated_channel_selects_one(self):
        rng = np.random.default_rng(4)
        base = rng.standard_normal((3000, 2))
        y = np.hstack([base[:, :1], base[:, :1], base[:, 1:]])  # ch2 duplicates ch1
        part = partition_select(y, max_lag=4)
        assert len(set(part.l_indices) & {1, 2}) == 1
        assert 3 in part.l_indices

    def test_benchmark_shape_recovery(self):
        from lrdnet.topology import _window_design

        for trial in range(6):
            model = random_model(twelve_node_config(seed=3000 + trial))
            ts = simulate(model, num_samples=2000, seed=4000 + trial)
            part = partition_select(ts.data, max_lag=8)
            assert len(part.l_indices) == 4
            sel = [i - 1 for i in part.l_indices]
            rest = [i - 1 for i in part.m_indices]
            X = _window_design(ts.data, sel, 8)
            targets = ts.data[8:, rest]
            beta, *_ = np.linalg.lstsq(X, targets, rcond=None)
            rms = np.sqrt(np.mean((targets - X @ beta) ** 2))
            assert rms < 1e-6

    def test_sample_budget_guard(self):
        with pytest.raises(InsufficientData):
            partition_select(np.zeros((100, 4)), max_lag=8)

    def test_apply_partition_reorders_columns(self):
        rng = np.random.default_rng(5)
        y = rng.standard_normal((50, 3))
        part = Partition(l_indices=(1, 3), m_indices=(2,), rank_gap=100.0)
        ts = apply_partition(y, part)
        assert ts.m == 1 and ts.l == 2
        assert np.array_equal(ts.data[:, 0], y[:, 1])
        assert np.array_equal(ts.data[:, 1], y[:, 0])
        assert np.array_equal(ts.data[:, 2], y[:, 2])

    def test_partition_blocks_must_not_overlap(self):
        with pytest.raises(ValueError):
            Partition(l_indices=(1, 2), m_indices=(2, 3), rank_gap=10.0)
