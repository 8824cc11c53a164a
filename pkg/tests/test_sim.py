"""Trajectory generation: distributional checks, determinism, CSV round trip."""

import numpy as np
import pytest

from conftest import small_config
from lrdnet.errors import InsufficientData
from lrdnet.model import LrdnModel, random_model, reduced_form
from lrdnet.polymat import PolynomialMatrix, vstack
from lrdnet.sim import (
    TimeSeries,
    read_csv,
    simulate,
    simulate_from_factor,
    timeseries_from_csv,
    write_csv,
)
from test_model import ar1_model


def white_model(m=2, l=2):
    return LrdnModel(
        m=m,
        l=l,
        g_ml=PolynomialMatrix.zeros(m, l),
        g_l=PolynomialMatrix.zeros(l, l),
        sigma_l=np.ones(l),
    )


class TestSimulate:
    def test_white_noise_case(self):
        T = 4000
        ts = simulate(white_model(), num_samples=T, seed=1)
        assert not ts.y_m.any()
        cov = ts.y_l.T @ ts.y_l / T
        assert np.abs(cov - np.eye(2)).max() < 4 / np.sqrt(T)

    def test_ar1_stationary_variance(self):
        # AR(1) with a = 0.5 and unit noise has variance 1 / (1 - 0.25)
        ts = simulate(ar1_model(a=0.5), num_samples=10_000, seed=2)
        var = ts.y_l.var()
        assert abs(var - 4.0 / 3.0) < 0.05 * 4.0 / 3.0

    def test_bit_identical_replay(self):
        model = random_model(small_config(seed=4))
        a = simulate(model, num_samples=256, burn_in=100, seed=9)
        b = simulate(model, num_samples=256, burn_in=100, seed=9)
        assert np.array_equal(a.data, b.data)

    def test_deterministic_block_is_exact_fir_of_full_rank_block(self):
        # the defining relation holds samplewise, not just in law
        model = random_model(small_config(seed=5))
        ts = simulate(model, num_samples=3000, burn_in=600, seed=3)
        g = model.g_ml
        p = g.degree
        T = ts.num_samples
        X = np.hstack([
            np.vstack([np.zeros((k, model.l)), ts.y_l[: T - k]]) for k in range(p + 1)
        ])
        beta, *_ = np.linalg.lstsq(X[p:], ts.y_m[p:], rcond=None)
        resid = ts.y_m[p:] - X[p:] @ beta
        assert np.sqrt(np.mean(resid**2)) < 1e-8

    def test_stationarity_proxy_split_means(self):
        model = random_model(small_config(seed=6))
        ts = simulate(model, num_samples=20_000, seed=11)
        half = ts.num_samples // 2
        for j in range(model.m + model.l):
            a = ts.data[:half, j]
            b = ts.data[half:, j]
            se = np.sqrt(a.var() / half + b.var() / half)
            assert abs(a.mean() - b.mean()) < 5 * 3 * se  # 5 SEs with IID-SE inflation margin

    def test_invalid_model_rejected(self):
        from lrdnet.errors import InvalidModel

        with pytest.raises(InvalidModel):
            simulate(ar1_model(a=1.2), num_samples=10)


class TestSimulateFromFactor:
    def test_trivial_stack(self):
        tf = vstack(PolynomialMatrix.zeros(2, 2), PolynomialMatrix.identity(2))
        ts = simulate_from_factor(tf, np.ones(2), num_samples=500, burn_in=0, seed=5)
        assert not ts.y_m.any()
        rng = np.random.default_rng(5)
        expected = rng.standard_normal((500, 2))
        assert np.allclose(ts.y_l, expected)

    def test_ma1_lag_one_autocovariance(self):
        # y(t) = e(t) + e(t-1): lag-1 autocovariance equals 1
        tf = vstack(
            PolynomialMatrix.zeros(1, 1),
            PolynomialMatrix(np.array([[[1.0]], [[1.0]]])),
        )
        ts = simulate_from_factor(tf, np.ones(1), num_samples=10_000, seed=6)
        y = ts.y_l[:, 0]
        acov1 = np.mean(y[1:] * y[:-1])
        assert abs(acov1 - 1.0) < 0.05

    def test_matches_recursion_route(self):
        model = random_model(small_config(seed=8))
        rf = reduced_form(model, horizon=256)
        T, burn = 600, 400
        a = simulate(model, num_samples=T, burn_in=burn, seed=13)
        b = simulate_from_factor(rf.full_transfer, model.sigma_l, num_samples=T, burn_in=burn, seed=13)
        assert np.abs(a.data - b.data).max() < 1e-8

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            simulate_from_factor(PolynomialMatrix.identity(2), np.ones(3), num_samples=10)


class TestCsv:
    def test_round_trip_with_sidecar(self, tmp_path):
        model = random_model(small_config(seed=10))
        ts = simulate(model, num_samples=64, burn_in=50, seed=21)
        path = tmp_path / "data.csv"
        write_csv(ts, path, metadata={"burn_in": 50, "model_hash": "abc"})
        data, meta = read_csv(path)
        assert np.array_equal(data, ts.data)
        assert meta["m"] == model.m and meta["l"] == model.l
        assert meta["burn_in"] == 50
        assert meta["rng"] == "numpy-default-pcg64"
        back = timeseries_from_csv(path)
        assert np.array_equal(back.data, ts.data)
        assert back.seed == 21

    def test_header_text(self, tmp_path):
        ts = TimeSeries(data=np.zeros((2, 3)), m=1, l=2)
        path = tmp_path / "d.csv"
        write_csv(ts, path)
        assert path.read_text().splitlines()[0] == "t,y1,y2,y3"

    def test_empty_csv_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,y1\n")
        with pytest.raises(InsufficientData):
            read_csv(path)
