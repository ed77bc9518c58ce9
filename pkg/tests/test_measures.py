import math

import numpy as np
import pytest
import scipy.integrate

import lshlab as L
from lshlab.errors import (
    EvaluationFailure,
    InvalidParameter,
    TypeConditionViolation,
)
from lshlab.measures import Density


def mass(mu, **spec_overrides):
    spec = L.default_spec(mu, **spec_overrides)
    value, _ = L.integrate(lambda pts: np.ones(pts.shape[0]), mu, spec)
    return value


class TestBuiltins:
    def test_gaussian_normalization(self, gauss1):
        assert gauss1.norm_const == pytest.approx(math.sqrt(2 * math.pi), rel=1e-12)
        assert mass(gauss1) == pytest.approx(1.0, abs=1e-10)

    def test_two_sided_exponential(self):
        mu = L.gen_exponential(c=1.0, a=1.0, dim=1)
        x = np.array([[0.3], [-1.7], [2.4]])
        assert mu.pdf(x) == pytest.approx(0.5 * np.exp(-np.abs(x[:, 0])), rel=1e-10)
        assert mass(mu) == pytest.approx(1.0, abs=1e-10)

    def test_poly_tail_against_arctan_antiderivative(self):
        mu = L.poly_tail(1.0)
        # independent oracle: adaptive quadrature of the unnormalized density
        # over [-X, X] must match the arctan antiderivative
        for X in (1.0, 10.0, 250.0):
            val, _ = scipy.integrate.quad(lambda x: 1.0 / (1.0 + x * x), -X, X)
            assert val == pytest.approx(2.0 * math.atan(X), rel=1e-10)
        assert mu.norm_const == pytest.approx(math.pi, rel=1e-10)
        assert mass(mu) == pytest.approx(1.0, abs=1e-9)

    def test_uniform_ball_mass(self):
        mu = L.uniform_ball(1.5, dim=1)
        assert mass(mu) == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize(
        "kind,params,dim",
        [
            ("poly_tail", {"alpha": 0.5}, 1),
            ("poly_tail", {"alpha": 1.0}, 2),
            ("gaussian", {"sigma": -1.0}, 1),
            ("gaussian", {"sigma": 0.0}, 1),
            ("gen_exponential", {"c": -2.0, "a": 1.0}, 1),
            ("uniform_ball", {"radius": 0.0}, 1),
        ],
    )
    def test_out_of_range_parameters_rejected(self, kind, params, dim):
        with pytest.raises(InvalidParameter):
            L.make_builtin(kind, params, dim)

    def test_make_builtin_dispatch(self):
        mu = L.make_builtin("gaussian", {"sigma": 2.0}, 1)
        assert mu.params == (2.0,)
        with pytest.raises(InvalidParameter):
            L.make_builtin("lebesgue", {}, 1)
        with pytest.raises(InvalidParameter):
            L.make_builtin("gaussian", {"spread": 1.0}, 1)


class TestEval:
    def test_standard_gaussian_values(self, gauss1):
        assert gauss1.pdf(np.array([0.0])) == pytest.approx(0.3989422804014327, rel=1e-12)
        # frozen from direct formula evaluation exp(-1/2)/sqrt(2 pi)
        assert gauss1.pdf(np.array([1.0])) == pytest.approx(0.24197072451914337, rel=1e-12)

    def test_outside_support_is_zero(self):
        mu = L.uniform_ball(1.0, dim=1)
        assert mu.pdf(np.array([2.0])) == 0.0

    def test_overflow_reported_not_silent(self, gauss1):
        spiked = Density(
            dim=1,
            norm_const=1.0,
            truncation_radius=8.0,
            rotation_invariant=True,
            provenance="builtin",
            strictly_positive=True,
            label="spiked",
            _log_density=lambda pts: 1600.0 * np.exp(-1e6 * pts[:, 0] ** 2),
        )
        with pytest.raises(EvaluationFailure) as err:
            spiked.pdf(np.array([0.0]))
        assert err.value.point is not None

    def test_non_finite_point_rejected(self, gauss1):
        with pytest.raises(InvalidParameter):
            gauss1.pdf(np.array([math.inf]))

    def test_rotation_invariance_flag(self, gauss1, gauss2, rng):
        flagged = [
            gauss2,
            L.gen_exponential(1.0, 1.0, 2),
            L.mix(L.gaussian(1.0, 2), L.gen_exponential(1.0, 1.0, 2), 0.3),
            L.convolve_measures(gauss1, L.gen_exponential(1.0, 2.0, 1)),
        ]
        for mu in flagged:
            assert mu.rotation_invariant
            pts = 0.5 * rng.standard_normal((16, mu.dim))
            for theta in (0.3, 1.2, 2.6):
                if mu.dim == 1:
                    u = np.array([[-1.0]])
                else:
                    u = np.array(
                        [
                            [math.cos(theta), -math.sin(theta)],
                            [math.sin(theta), math.cos(theta)],
                        ]
                    )
                assert mu.pdf(pts) == pytest.approx(mu.pdf(pts @ u.T), rel=1e-6)


class TestRegularityConstant:
    def test_gaussian_c0_attained_at_origin(self, gauss1):
        # analytic ratio exp(-(a^2-1)x^2/2) <= 1 with max at 0
        assert L.regularity_constant(gauss1, 0, 2.0, 0.0) == pytest.approx(1.0, abs=1e-8)

    def test_poly_tail_c0(self):
        mu = L.poly_tail(1.0)
        assert L.regularity_constant(mu, 0, 1.5, 0.0) == pytest.approx(1.0, abs=1e-8)

    def test_gaussian_p2_calculus_value(self, gauss1):
        # sup of x^2 exp(-3x^2/2) at x^2 = 2/3
        expected = (2.0 / 3.0) * math.exp(-1.0)
        assert L.regularity_constant(gauss1, 2, 2.0, 0.0) == pytest.approx(expected, abs=1e-4)

    def test_poly_tail_type1_violation_with_witness(self):
        mu = L.poly_tail(1.0)
        with pytest.raises(TypeConditionViolation) as err:
            L.regularity_constant(mu, 1, 2.0, 0.0)
        assert err.value.witness is not None

    def test_monotone_in_s(self, gauss1):
        for a in (1.2, 1.7, 2.5):
            vals = [L.regularity_constant(gauss1, 0, a, s) for s in (0.0, 0.3, 0.8, 1.5)]
            assert all(v2 >= v1 - 1e-12 for v1, v2 in zip(vals, vals[1:]))

    def test_compact_support_rejected(self):
        mu = L.uniform_ball(1.0, dim=1)
        with pytest.raises(InvalidParameter):
            L.regularity_constant(mu, 0, 2.0, 0.0)

    def test_a_below_one_rejected(self, gauss1):
        with pytest.raises(InvalidParameter):
            L.regularity_constant(gauss1, 0, 0.9, 0.0)


class TestTypeReport:
    def test_gaussian_type1(self, gauss1):
        rep = L.type_report(gauss1, 1.0, [1.5, 2.0], [0.0, 1.0])
        assert rep.numerically_type_p
        assert len(rep.entries) == 4
        assert all(math.isfinite(v) and v > 0 for _, _, v in rep.entries)
        assert rep.uniform_near_one == pytest.approx(1.0, abs=1e-8)

    def test_poly_tail_flagged_with_witness(self):
        mu = L.poly_tail(1.0)
        rep = L.type_report(mu, 1.0, [2.0], [0.0])
        assert not rep.numerically_type_p
        assert rep.violations and rep.violations[0][2] is not None

    def test_gaussian_shaped_type4(self):
        mu = L.gen_exponential(c=1.0, a=2.0, dim=1)
        rep = L.type_report(mu, 4.0, [1.5, 2.0], [0.0])
        assert rep.numerically_type_p

    def test_type_q_implies_type_p(self):
        mu = L.gen_exponential(c=1.0, a=2.0, dim=1)
        rep_q = L.type_report(mu, 2.0, [1.5, 2.0], [0.0, 0.5])
        rep_p = L.type_report(mu, 1.0, [1.5, 2.0], [0.0, 0.5])
        assert rep_q.numerically_type_p and rep_p.numerically_type_p

    def test_empty_lists_rejected(self, gauss1):
        with pytest.raises(InvalidParameter):
            L.type_report(gauss1, 0.0, [], [0.0])

    def test_report_serializes(self, gauss1):
        rep = L.type_report(gauss1, 0.0, [1.5], [0.0])
        d = rep.to_dict()
        assert d["numerically_type_p"] and d["grid_spec"]["dim"] == 1


class TestMix:
    def test_endpoint_is_first_component(self, gauss1):
        other = L.gen_exponential(1.0, 1.0, 1)
        mixed = L.mix(gauss1, other, 0.0)
        x = np.linspace(-3, 3, 11).reshape(-1, 1)
        assert mixed.pdf(x) == pytest.approx(gauss1.pdf(x), rel=1e-9)

    def test_self_mix_idempotent(self, gauss1):
        mixed = L.mix(gauss1, gauss1, 0.5)
        x = np.linspace(-4, 4, 17).reshape(-1, 1)
        assert mixed.pdf(x) == pytest.approx(gauss1.pdf(x), rel=1e-9)

    def test_mixture_constant_bounded_by_max(self, gauss1):
        # two unit gaussians recentered by perturbation
        left = L.shift(gauss1, [-0.5])
        right = L.shift(gauss1, [0.5])
        mixed = L.mix(left, right, 0.5)
        for a in (1.3, 2.0):
            c_mix = L.regularity_constant(mixed, 0, a, 0.0)
            c_max = max(
                L.regularity_constant(left, 0, a, 0.0),
                L.regularity_constant(right, 0, a, 0.0),
            )
            assert c_mix <= c_max * (1.0 + 1e-9)

    def test_dim_mismatch(self, gauss1, gauss2):
        with pytest.raises(InvalidParameter):
            L.mix(gauss1, gauss2, 0.5)

    def test_weight_out_of_range(self, gauss1):
        with pytest.raises(InvalidParameter):
            L.mix(gauss1, gauss1, 1.5)


class TestProduct:
    def test_gaussian_factorization(self, gauss1, rng):
        prod = L.product(gauss1, gauss1)
        assert prod.dim == 2
        pts = rng.standard_normal((12, 2))
        expected = np.exp(-np.sum(pts**2, axis=1) / 2) / (2 * math.pi)
        assert prod.pdf(pts) == pytest.approx(expected, rel=1e-10)
        assert prod.rotation_invariant

    @pytest.mark.parametrize("s", [0.0, 0.5])
    def test_type_p_bound_on_shared_grid(self, gauss1, s):
        prod = L.product(gauss1, gauss1)
        p = 2.0
        a = 2.0
        lhs = L.regularity_constant(prod, p, a, s)
        cp1 = L.regularity_constant(gauss1, p, a, s)
        c01 = L.regularity_constant(gauss1, 0, a, s)
        rhs = 2 ** (p - 1) * (cp1 * c01 + c01 * cp1)
        assert lhs <= rhs * (1.0 + 1e-6)

    def test_product_with_vanishing_density_rejected_for_regularity(self, gauss1):
        prod = L.product(gauss1, L.uniform_ball(1.0, dim=1))
        with pytest.raises(InvalidParameter):
            L.regularity_constant(prod, 0, 2.0, 0.0)


class TestConvolution:
    def test_gaussian_convolution_closed_form(self, gauss1):
        conv = L.convolve_measures(gauss1, gauss1)
        xs = np.linspace(-5, 5, 201).reshape(-1, 1)
        exact = np.exp(-xs[:, 0] ** 2 / 4.0) / math.sqrt(4 * math.pi)
        assert np.max(np.abs(conv.pdf(xs) - exact)) <= 1e-6
        assert mass(conv, scheme="tensor_trapezoid", nodes_per_axis=2049) == pytest.approx(
            1.0, abs=1e-6
        )

    def test_approximate_identity(self, gauss1):
        narrow = L.gaussian(0.05, 1)
        conv = L.convolve_measures(narrow, gauss1)
        xs = np.linspace(-4, 4, 101).reshape(-1, 1)
        blurred = np.exp(-xs[:, 0] ** 2 / (2 * 1.0025)) / math.sqrt(2 * math.pi * 1.0025)
        assert np.max(np.abs(conv.pdf(xs) - blurred)) <= 1e-5

    def test_near_one_constant_bound(self, gauss1):
        conv = L.convolve_measures(gauss1, gauss1)
        eps = 0.25
        rep = L.type_report(conv, 0.0, [1.1], [0.0], eps=eps)
        sup1 = L.type_report(gauss1, 0.0, [1.1], [0.0], eps=eps).uniform_near_one
        bound = (1.0 + eps) ** 1 * sup1 * sup1
        assert rep.uniform_near_one <= bound * (1.0 + 1e-6)

    def test_exponential_type_bound(self, gauss1):
        conv = L.convolve_measures(gauss1, gauss1)
        p, a, s = 2.0, 2.0, 0.0
        lhs = L.regularity_constant(conv, p, a, s)
        rhs = (
            2 ** (p - 1)
            * a**1
            * (
                L.regularity_constant(gauss1, p, a, s) * L.regularity_constant(gauss1, 0, a, 0.0)
                + L.regularity_constant(gauss1, 0, a, s) * L.regularity_constant(gauss1, p, a, 0.0)
            )
        )
        assert lhs <= rhs * (1.0 + 1e-6)

    def test_dim_cap_advises_monte_carlo(self):
        mu4 = L.product(L.gaussian(1.0, 2), L.gaussian(1.0, 2))
        with pytest.raises(InvalidParameter, match="monte_carlo"):
            L.convolve_measures(mu4, mu4)

    def test_dim_mismatch(self, gauss1, gauss2):
        with pytest.raises(InvalidParameter):
            L.convolve_measures(gauss1, gauss2)


class TestPerturbation:
    def test_bounded_weight_controls_constants(self, gauss1):
        # w(x) = 1 + 0.5 cos(x) has bounds C = 0.5, D = 1.5
        weighted = L.perturb(
            gauss1, lambda pts: np.log1p(0.5 * np.cos(pts[:, 0])), label="1+cos/2"
        )
        ratio_bound = 1.5 / 0.5
        for p, a in ((0.0, 1.5), (2.0, 2.0)):
            c2 = L.regularity_constant(weighted, p, a, 0.0)
            c1 = L.regularity_constant(gauss1, p, a, 0.0)
            assert c2 <= ratio_bound * c1 * (1.0 + 1e-9)

    def test_perturbation_preserves_type_report(self, gauss1):
        weighted = L.perturb(
            gauss1, lambda pts: np.log1p(0.5 * np.cos(pts[:, 0])), label="1+cos/2"
        )
        base = L.type_report(gauss1, 1.0, [1.5, 2.0], [0.0])
        pert = L.type_report(weighted, 1.0, [1.5, 2.0], [0.0])
        assert base.numerically_type_p and pert.numerically_type_p

    def test_perturbation_mass_renormalized(self, gauss1):
        weighted = L.perturb(gauss1, lambda pts: 0.3 * np.sin(pts[:, 0]), label="sin")
        assert mass(weighted) == pytest.approx(1.0, abs=1e-9)

    def test_rejection_sampler_matches_density(self, gauss1):
        weighted = L.perturb(
            gauss1, lambda pts: np.log1p(0.5 * np.cos(pts[:, 0])), label="1+cos/2"
        )
        rng = np.random.default_rng(5)
        xs = weighted.sample(rng, 40_000)
        # first moment oracle by adaptive quadrature
        spec = L.default_spec(weighted)
        m1, _ = L.integrate(lambda pts: pts[:, 0], weighted, spec)
        assert xs.mean() == pytest.approx(m1, abs=0.02)
