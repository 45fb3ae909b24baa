import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from lrvtail.bandwidth import ell_andrews_ar1, ell_tail
from lrvtail.core import bartlett_kernel
from lrvtail.generators import ARMA11, GeomAR1
from lrvtail.montecarlo import (
    CSV_COLUMNS,
    AR1Chain,
    McResult,
    McRunConfig,
    emit,
    heatmap_rows,
    read_csv,
    replicate,
    run_hac_experiment,
    run_mcmc_experiment,
    run_mean_test_experiment,
    run_multi_model_experiment,
    run_table_experiment,
    true_optimal_bandwidths,
)


class _Draw:
    def __call__(self, rng):
        return rng.standard_normal(3)


class TestReplicate:
    def test_workers_bit_identical(self):
        one = replicate(_Draw(), 37, seed=5, workers=1)
        two = replicate(_Draw(), 37, seed=5, workers=2)
        assert_array_equal(one, two)
        assert one.shape == (37, 3)

    def test_prefix_stable(self):
        # replication r depends only on (seed, r)
        assert_array_equal(replicate(_Draw(), 10, 5, 1), replicate(_Draw(), 20, 5, 1)[:10])

    def test_env_default(self, monkeypatch):
        monkeypatch.setenv("LRVTAIL_WORKERS", "2")
        assert_array_equal(replicate(_Draw(), 9, 1), replicate(_Draw(), 9, 1, workers=1))

    def test_invalid(self):
        with pytest.raises(ValueError):
            replicate(_Draw(), 0, 1)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            McRunConfig(ARMA11(0.2), replications=0)
        with pytest.raises(ValueError):
            McRunConfig(ARMA11(0.2), policy="oracle")
        with pytest.raises(ValueError):
            McRunConfig(ARMA11(0.2), estimators=("tail", "nope"))


class TestTrueOptimal:
    def test_ar1(self):
        bw = true_optimal_bandwidths(ARMA11(0.5, 0.0), 400)
        assert_allclose(bw["phi_star"], 0.5, rtol=1e-14)
        assert abs(bw["xi1"]) < 1e-12
        assert bw["un"] == ell_andrews_ar1(0.5, 400) == 11
        assert bw["tail"] == 1
        # prewhitening at the true phi leaves white noise
        assert abs(bw["phi_star_z"]) < 1e-12 and bw["pw"] == 1

    def test_arma(self):
        a, b = 0.2, -0.6
        bw = true_optimal_bandwidths(ARMA11(a, b), 400)
        phi_star = (a + b) * (1 + a * b) / (1 + b * b + 2 * a * b)
        assert_allclose(bw["phi_star"], phi_star, rtol=1e-12)
        kappa = 2 * (a + b) * (1 + a * b) / ((1 + b) ** 2 * (1 - a * a))
        xi = kappa - 2 * phi_star / (1 - phi_star**2)
        assert_allclose(bw["xi1"], xi, rtol=1e-12)
        assert bw["tail"] == ell_tail(xi, bartlett_kernel(), 400)


class TestTable:
    def test_bit_reproducible(self):
        cfg1 = McRunConfig(ARMA11(0.4, 0.0), 100, 40, seed=3, workers=1)
        cfg2 = McRunConfig(ARMA11(0.4, 0.0), 100, 40, seed=3, workers=2)
        r1, r2 = run_table_experiment(cfg1, keep_values=True), run_table_experiment(cfg2, keep_values=True)
        assert_array_equal(r1.values, r2.values)
        assert_array_equal(r1.mse100, r2.mse100)
        assert r1.rows() == r2.rows()

    def test_mse_dominates_bias(self):
        for policy in ("true_optimal", "plugin_parametric", "plugin_nonparametric"):
            res = run_table_experiment(McRunConfig(ARMA11(0.8, -0.6), 200, 200, policy=policy, seed=1))
            assert np.all(res.mse100 / 100 >= (res.bias10 / 10) ** 2 - 1e-15)

    def test_summary_formulas(self):
        res = run_table_experiment(McRunConfig(ARMA11(0.3, 0.0), 150, 60, seed=2), keep_values=True)
        v = res.v
        vals = res.values
        assert_allclose(res.mse100, 100 * ((vals - v) ** 2).mean(0) / v**2, rtol=1e-12)
        assert_allclose(res.bias10, 10 * (vals.mean(0) / v - 1), rtol=1e-12)
        assert res["tail"]["mse100"] == res.mse100[3]
        assert [r["estimator"] for r in res.rows()] == ["para", "un", "pw", "tail"]
        assert res.rows()[0]["a"] == 0.3

    @pytest.mark.slow
    def test_mc_se_rate(self):
        gen = ARMA11(0.4, 0.0)
        small = run_table_experiment(McRunConfig(gen, 200, 1000, estimators=("un", "tail"), seed=4))
        big = run_table_experiment(McRunConfig(gen, 200, 4000, estimators=("un", "tail"), seed=5))
        ratio = small.mc_se / big.mc_se
        assert np.all((1.7 <= ratio) & (ratio <= 2.3)), ratio

    @pytest.mark.slow
    def test_white_noise_para_unbiased(self):
        res = run_table_experiment(McRunConfig(ARMA11(0.0, 0.0), 400, 2000, estimators=("para",), seed=6))
        assert abs(res["para"]["bias10"]) < 0.3

    def test_non_arma_generator(self):
        res = run_table_experiment(McRunConfig(GeomAR1(0.3), 200, 20, estimators=("un", "tail"),
                                               policy="plugin_nonparametric", seed=7))
        assert res.a is None and np.all(np.isfinite(res.mse100))


class TestOtherExperiments:
    def test_mean_test_structure(self):
        out = run_mean_test_experiment(phis=(0.0, 0.9), mus=(0.0,), n=100, replications=50, calibration_reps=200,
                                       seed=1)
        assert set(out["critical_values"]) == {"para", "un", "lug", "pw", "tail", "sn"}
        assert [r["phi"] for r in out["rows"]] == [0.0, 0.9]
        for r in out["rows"]:
            for k in ("para", "un", "lug", "pw", "tail", "sn"):
                assert 0.0 <= r[k] <= 100.0

    def test_multi_model_structure(self):
        rows = run_multi_model_experiment(cs=(0.0, 1.0), n=100, replications=20, seed=2)
        assert len(rows) == 6
        assert all(r["rmse"] >= abs(r["bias"]) - 1e-12 for r in rows)

    def test_hac_structure(self):
        rows = run_hac_experiment(0.2, deltas=(0.0, 0.5), n=200, replications=20, seed=3)
        assert len(rows) == 8
        for r in rows:
            assert 0.0 <= r["rejection"] <= 1.0
            assert_allclose(r["mc_se"], math.sqrt(max(r["rejection"] * (1 - r["rejection"]), 1e-12) / 20))

    def test_mcmc_structure(self):
        rows = run_mcmc_experiment(0.5, replications=10, epsilon=0.2, seed=4)
        assert [r["method"] for r in rows] == ["un", "pw", "tail"]
        assert all(0 <= r["coverage"] <= 1 and r["mean_n"] >= 100 for r in rows)

    def test_ar1_chain_continues(self):
        rng = np.random.default_rng(0)
        chain = AR1Chain(0.5, 1.0, rng)
        a, b = chain(1000), chain(1000)
        x = np.concatenate([a, b])
        # the split is invisible to the lag-one autocorrelation
        r1 = np.corrcoef(x[:-1], x[1:])[0, 1]
        assert abs(r1 - 0.5) < 0.1
        assert chain.lrv == 4.0

    def test_heatmap(self):
        rows = heatmap_rows([0.2, 0.4], [0.0, 0.3])
        assert len(rows) == 4 and {"a", "b"} <= set(rows[0])
        assert len(heatmap_rows()) == 39 * 39


class TestEmit:
    def _rows(self):
        return run_table_experiment(McRunConfig(ARMA11(0.4, 0.0), 100, 30, seed=8)).rows()

    def test_header_only(self, tmp_path):
        p = tmp_path / "empty.csv"
        emit([], p)
        assert p.read_text() == ",".join(CSV_COLUMNS) + "\n"

    def test_round_trip(self, tmp_path):
        rows = self._rows()
        p = tmp_path / "r.csv"
        emit(rows, p)
        back = read_csv(p)
        assert list(back[0]) == list(CSV_COLUMNS)
        for r, s in zip(rows, back):
            assert r["estimator"] == s["estimator"]
            for c in ("a", "b", "n", "mse100", "bias10", "mc_se"):
                assert abs(r[c] - s[c]) <= 1e-12 * max(1.0, abs(r[c]))

    def test_byte_identical(self, tmp_path):
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        emit(self._rows(), p1)
        emit(self._rows(), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_json_mirrors_csv(self, tmp_path):
        rows = self._rows()
        p = tmp_path / "r.json"
        emit(rows, p, "json")
        data = json.loads(p.read_text())
        assert [list(d) for d in data] == [list(CSV_COLUMNS)] * len(rows)
        assert data[0]["mse100"] == rows[0]["mse100"]

    def test_mc_result_accepted(self, tmp_path):
        res = run_table_experiment(McRunConfig(ARMA11(0.4, 0.0), 100, 5, seed=9))
        assert isinstance(res, McResult)
        emit(res, tmp_path / "x.csv")
        assert len(read_csv(tmp_path / "x.csv")) == 4

    def test_errors(self, tmp_path):
        with pytest.raises(OSError, match="nowhere"):
            emit([], tmp_path / "nowhere" / "x.csv")
        with pytest.raises(ValueError):
            emit([], tmp_path / "x.txt", "xml")
