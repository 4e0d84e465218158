import numpy as np
import pytest

from ivbounds.continuous import (
    OutcomeTransform,
    augment,
    averaged_variance,
    continuous_bounds,
    threshold_draw,
    threshold_mean_estimate,
)
from ivbounds.crossfit import ClosedFormNuisance, cross_fit
from ivbounds.data import Dataset
from ivbounds.estimators import direct_bounds
from ivbounds.learners import parse_learner_spec
from ivbounds.simulation import (
    gen_illustration,
    illustration_lambda1,
    illustration_pi,
)


class TestOutcomeTransform:
    def test_unit_mapping(self):
        tr = OutcomeTransform(-2.0, 6.0)
        np.testing.assert_allclose(tr.to_unit(np.array([-2.0, 2.0, 6.0])),
                                   [0.0, 0.5, 1.0])
        assert tr.range == 8.0

    def test_from_data(self):
        tr = OutcomeTransform.from_data(np.array([3.0, 9.0, 5.0]))
        assert (tr.low, tr.high) == (3.0, 9.0)

    def test_degenerate_range(self):
        with pytest.raises(ValueError):
            OutcomeTransform(1.0, 1.0).to_unit(np.array([1.0]))


class TestThresholds:
    def test_strictly_inside_unit_interval(self):
        w = threshold_draw(100_000, seed=0, replicate=0)
        assert w.min() > 0.0 and w.max() < 1.0

    def test_replicates_are_independent_streams(self):
        a = threshold_draw(100, 0, 0)
        b = threshold_draw(100, 0, 1)
        assert not np.allclose(a, b)
        np.testing.assert_array_equal(a, threshold_draw(100, 0, 0))


class TestAugment:
    def make(self):
        return Dataset(x=np.zeros((4, 1)), z=[0, 1, 0, 1], a=[0, 1, 0, 1],
                       y=[0.0, 2.5, 5.0, 1.0], outcome_kind="bounded-continuous")

    def test_binary_pseudo_outcome(self):
        aug = augment(self.make(), OutcomeTransform(0.0, 5.0), seed=1, replicate=0)
        assert aug.outcome_kind == "binary"
        assert set(np.unique(aug.y)) <= {0.0, 1.0}

    def test_extremes_map_deterministically(self):
        aug = augment(self.make(), OutcomeTransform(0.0, 5.0), seed=1, replicate=0)
        assert aug.y[0] == 1.0  # y at the lower endpoint is below any threshold
        assert aug.y[2] == 0.0  # y at the upper endpoint is above any threshold

    def test_out_of_range_lists_rows(self):
        with pytest.raises(ValueError) as exc:
            augment(self.make(), OutcomeTransform(0.0, 2.0), seed=1, replicate=0)
        assert "rows" in str(exc.value)


class TestContinuousBounds:
    def test_matches_binary_pipeline_exactly(self):
        data = gen_illustration(1500, 2)
        nuis = ClosedFormNuisance(illustration_lambda1, illustration_pi)
        lam1, pi = nuis.evaluate(data)
        binary = direct_bounds(data, lam1, pi)

        class Pseudo:
            def evaluate(self, d):
                l1, p = nuis.evaluate(d)
                return l1, p[:, ::-1]  # pseudo outcome is 1 - y for binary data

        cont = continuous_bounds(data, lambda aug: Pseudo(), m=1, seed=2,
                                 transform=OutcomeTransform(0.0, 1.0))
        assert cont.lower == pytest.approx(binary.lower, abs=1e-12)
        assert cont.upper == pytest.approx(binary.upper, abs=1e-12)
        assert cont.var_lower == pytest.approx(binary.var_lower, abs=1e-12)

    def test_fitted_nuisances_identity(self):
        # Same identity with refit learners: label-symmetric learners make
        # the pseudo-outcome fit the exact relabeling of the binary fit.
        data = gen_illustration(600, 3)
        spec = parse_learner_spec("constant")
        known = parse_learner_spec("known:0.5")
        nuis = cross_fit(data, 3, spec, known, seed=3)
        lam1, pi = nuis.evaluate(data)
        binary = direct_bounds(data, lam1, pi)
        cont = continuous_bounds(
            data, lambda aug: cross_fit(aug, 3, spec, known, seed=3),
            m=1, seed=3, transform=OutcomeTransform(0.0, 1.0))
        assert cont.lower == pytest.approx(binary.lower, abs=1e-12)
        assert cont.upper == pytest.approx(binary.upper, abs=1e-12)

    def test_more_replicates_shrink_variance(self):
        rng = np.random.default_rng(4)
        data = gen_illustration(1200, 5)
        cont_y = data.replace_outcome(rng.random(1200), "bounded-continuous")
        nuis = ClosedFormNuisance(illustration_lambda1, illustration_pi)

        class Fixed:
            def evaluate(self, d):
                # crude but valid nuisances: empirical cells pooled by arm
                l1 = np.full(d.n, 0.5)
                pi = np.zeros((d.n, 2, 2, 2))
                for z in (0, 1):
                    m = d.z == z
                    for y in (0, 1):
                        for a in (0, 1):
                            pi[:, y, a, z] = np.mean((d.y[m] == y) & (d.a[m] == a))
                return l1, pi

        v1 = continuous_bounds(cont_y, lambda aug: Fixed(), m=1, seed=6).var_lower
        v20 = continuous_bounds(cont_y, lambda aug: Fixed(), m=20, seed=6).var_lower
        assert v20 < v1

    def test_invalid_m(self):
        data = gen_illustration(100, 7)
        with pytest.raises(ValueError):
            continuous_bounds(data, lambda aug: None, m=0, seed=0)


class TestAveragedVariance:
    @pytest.mark.parametrize("law,mu,sigma2", [
        ("bernoulli", 0.3, 0.3 * 0.7),
        ("point", 0.4, 0.0),
        ("uniform", 0.5, 1.0 / 12.0),
    ])
    @pytest.mark.parametrize("m", [1, 20])
    def test_matches_monte_carlo(self, law, mu, sigma2, m):
        n, reps = 200, 2000
        rng = np.random.default_rng(8)
        ests = []
        for rep in range(reps):
            if law == "bernoulli":
                t = (rng.random(n) < mu).astype(float)
            elif law == "point":
                t = np.full(n, mu)
            else:
                t = rng.random(n)
            ests.append(threshold_mean_estimate(t, m, seed=10_000 + rep))
        emp = np.var(ests)
        assert emp == pytest.approx(averaged_variance(mu, sigma2, n, m), rel=0.15)

    def test_limit_is_sigma2_over_n(self):
        assert averaged_variance(0.5, 0.02, 100, 10**9) == pytest.approx(0.0002)
