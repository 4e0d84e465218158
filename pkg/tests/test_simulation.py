import numpy as np
import pytest

from ivbounds.bounds import theta_profile
from ivbounds.simulation import (
    coverage_experiment,
    gen_illustration,
    gen_margin,
    illustration_lambda1,
    illustration_pi,
    illustration_truth,
    margin_truth,
    rmse_experiment,
    width_comparison,
)


class TestMarginDesign:
    def test_perfect_compliance(self):
        d = gen_margin(2000, 0)
        np.testing.assert_array_equal(d.a, d.z)

    def test_instrument_follows_propensity(self):
        d = gen_margin(200_000, 1)
        lam = margin_truth().lambda1_fn(d.x)
        for lo, hi in ((0.0, 0.33), (0.33, 0.66), (0.66, 1.0)):
            m = (d.x[:, 0] >= lo) & (d.x[:, 0] < hi)
            assert d.z[m].mean() == pytest.approx(lam[m].mean(), abs=0.01)

    def test_outcome_mean_is_half_margin(self):
        # P(Y=1 | X, A) = {A(1-X) + (1-A)X} / 2 after integrating the
        # uniform mixing variable.
        d = gen_margin(400_000, 2)
        m = (d.x[:, 0] < 0.2) & (d.a == 1)
        assert d.y[m].mean() == pytest.approx(np.mean(1 - d.x[m, 0]) / 2, abs=0.01)

    def test_truth_cells_are_conditional_laws(self):
        d = gen_margin(100, 3)
        _, pi = margin_truth().evaluate(d)
        np.testing.assert_allclose(pi.sum(axis=(1, 2)), 1.0, atol=1e-12)

    def test_conditional_bounds_collapse(self):
        # Both conditional bound functions equal 1/2 - x, so the marginal
        # bounds vanish.
        x = np.linspace(0.01, 0.99, 201)[:, None]
        _, pi = margin_truth().evaluate(type("d", (), {"x": x})())
        prof = theta_profile(pi)
        np.testing.assert_allclose(prof.gamma_l, 0.5 - x[:, 0], atol=1e-12)
        np.testing.assert_allclose(prof.gamma_u, 0.5 - x[:, 0], atol=1e-12)

    def test_empirical_cells_match_truth(self):
        d = gen_margin(400_000, 4)
        m = (d.x[:, 0] > 0.4) & (d.x[:, 0] < 0.6)
        sub_z0 = m & (d.z == 0)
        emp = np.mean(d.y[sub_z0] == 1)
        truth = np.mean(d.x[sub_z0, 0] / 2)
        assert emp == pytest.approx(truth, abs=0.01)


class TestIllustrationDesign:
    def test_truth_values(self):
        t = illustration_truth()
        assert t["ate"] == pytest.approx(0.11725, abs=5e-4)
        assert t["lower"] == pytest.approx(0.1085, abs=5e-4)
        assert t["upper"] == pytest.approx(0.1185, abs=5e-4)
        assert 0.0 < t["lower"] <= t["ate"] <= t["upper"]

    def test_closed_form_cells_match_sampled_data(self):
        d = gen_illustration(400_000, 5)
        pi = illustration_pi(d.x)
        sel = (d.x[:, 0] == 1) & (np.abs(d.x[:, 1]) < 0.4) & (d.z == 1)
        emp = np.mean((d.y[sel] == 1) & (d.a[sel] == 1))
        assert emp == pytest.approx(pi[sel][:, 1, 1, 1].mean(), abs=0.01)

    def test_instrument_is_fair_coin(self):
        d = gen_illustration(100_000, 6)
        assert d.z.mean() == pytest.approx(0.5, abs=0.01)
        np.testing.assert_allclose(illustration_lambda1(d.x), 0.5)

    def test_adjusted_strictly_narrower_and_positive(self):
        w = width_comparison()
        lo_un, hi_un = w["none"]
        lo_adj, hi_adj = w["full"]
        assert lo_un < 0.0 < hi_un              # unadjusted covers 0
        assert lo_adj > 0.0                     # adjusted excludes 0
        assert hi_adj - lo_adj < hi_un - lo_un  # strictly narrower

    def test_partial_adjustment_between(self):
        w = width_comparison()
        width = {k: v[1] - v[0] for k, v in w.items()}
        assert width["full"] <= width["x2_only"] + 1e-9 <= width["none"] + 1e-9

    def test_appendix_compat_drops_tail_strata(self):
        d = gen_illustration(50_000, 7, appendix_compat=True)
        # without always/never-takers, exposure among |x2| > 0.99 follows
        # the complier/defier rule rather than being constant
        tail = d.x[:, 1] >= 0.99
        assert np.any(d.a[tail] != 1)
        t = illustration_truth(appendix_compat=True)
        assert t["ate"] != pytest.approx(illustration_truth()["ate"], abs=1e-4)

    def test_determinism(self):
        a = gen_illustration(500, 8)
        b = gen_illustration(500, 8)
        np.testing.assert_array_equal(a.y, b.y)
        np.testing.assert_array_equal(a.x, b.x)


class TestExperiments:
    def test_rmse_rows_schema(self):
        rows = rmse_experiment([500], [0.3], reps=20, seed=0)
        assert len(rows) == 1
        row = rows[0]
        for key in ("rmse_lower_direct", "rmse_lower_lse", "rmse_lower_plugin",
                    "rmse_upper_direct", "bias_lower_plugin"):
            assert key in row
        assert row["n"] == 500 and row["reps"] == 20

    def test_rmse_seed_determinism(self):
        a = rmse_experiment([500], [0.3], reps=5, seed=1)
        b = rmse_experiment([500], [0.3], reps=5, seed=1)
        assert a == b

    def test_coverage_experiment_sane(self):
        out = coverage_experiment(500, reps=40, r=0.3, seed=2)
        assert 0.0 <= out["coverage_direct"] <= 1.0
        assert 0.0 <= out["coverage_lse"] <= 1.0
