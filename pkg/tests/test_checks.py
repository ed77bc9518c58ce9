import math

import numpy as np
import pytest

import lshlab as L
from lshlab.checks import SHC_NOTE
from lshlab.errors import InvalidParameter


class TestSlsi:
    def test_equality_family_zero_deficit(self, gauss1, gh_spec):
        for lam in (0.4, 0.8, 1.2):
            rep = L.check_slsi(L.log_linear([lam]), gauss1, 1.0, gh_spec)
            assert rep.passed
            assert abs(rep.quantities["deficit"]) <= 1e-6

    def test_cosh_strictly_positive_deficit(self, gauss1, gh_spec):
        rep = L.check_slsi(L.cosh_field(0.8), gauss1, 1.0, gh_spec)
        assert rep.passed
        assert rep.quantities["deficit"] > 0

    def test_constant_field_exact_zero(self, gauss1, gh_spec):
        rep = L.check_slsi(L.constant(3.0, 1), gauss1, 1.0, gh_spec)
        assert rep.passed
        assert rep.quantities["deficit"] == pytest.approx(0.0, abs=1e-12)

    def test_below_sharp_constant_fails(self, gauss1, gh_spec):
        rep = L.check_slsi(L.log_linear([1.2]), gauss1, 0.9, gh_spec)
        assert not rep.passed
        assert rep.quantities["deficit"] < -10 * rep.tolerance

    def test_monotone_in_c(self, gauss1, gh_spec):
        f = L.cosh_field(0.9)
        outcomes = [L.check_slsi(f, gauss1, c, gh_spec).passed for c in (0.5, 1.0, 2.0)]
        for earlier, later in zip(outcomes, outcomes[1:]):
            assert later or not earlier

    def test_uncertified_field_rejected(self, gauss1, gh_spec):
        f = L.raw_field(lambda pts: np.exp(pts[:, 0]), 1, label="raw")
        with pytest.raises(InvalidParameter):
            L.check_slsi(f, gauss1, 1.0, gh_spec)

    def test_non_rotation_invariant_needs_override(self, gauss1, gh_spec):
        shifted = L.shift(gauss1, [0.4])
        f = L.cosh_field(0.5)
        with pytest.raises(InvalidParameter):
            L.check_slsi(f, shifted, 2.0)
        rep = L.check_slsi(f, shifted, 2.0, allow_non_rotation_invariant=True)
        assert rep.kind == "slsi"

    def test_scale_covariance_of_outcome(self, gauss1, gh_spec):
        f = L.cosh_field(0.8)
        for t in (0.25, 5.0):
            a = L.check_slsi(f, gauss1, 1.0, gh_spec).passed
            b = L.check_slsi(L.scale(f, t), gauss1, 1.0, gh_spec).passed
            assert a == b


class TestShc:
    def test_equality_family_at_sharp_constant(self, gauss1, gh_spec):
        lam = 0.8
        rep = L.check_shc(L.log_linear([lam]), gauss1, 1.0, spec=gh_spec)
        assert rep.passed
        expected = math.exp(lam**2 / 2)
        for row in rep.quantities["rows"]:
            assert row["alpha"] == pytest.approx(expected, rel=1e-6)
        assert SHC_NOTE in rep.notes

    def test_constant_field_all_equalities(self, gauss1, gh_spec):
        rep = L.check_shc(L.constant(1.0, 1), gauss1, 1.0, spec=gh_spec)
        assert rep.passed
        for row in rep.quantities["rows"]:
            assert row["alpha"] == pytest.approx(1.0, rel=1e-10)

    def test_half_constant_counterexample(self, gauss1, gh_spec):
        # with c = 1/2, q(r) = r^-4 and alpha(r) = e^{lam^2/(2 r^2)} > alpha(1)
        lam = 1.0
        rep = L.check_shc(L.log_linear([lam]), gauss1, 0.5, spec=gh_spec)
        assert not rep.passed
        assert not rep.quantities["alpha_monotone"]
        rows = {row["r"]: row for row in rep.quantities["rows"] if not row["skipped"]}
        for r, row in rows.items():
            assert row["alpha"] == pytest.approx(
                math.exp(lam**2 / (2 * r**2)), rel=1e-6
            )

    def test_row_skipped_on_overflowing_exponent(self, gauss1, gh_spec):
        rep = L.check_shc(
            L.log_linear([1.0]), gauss1, 0.05, r_grid=(0.5, 1.0), spec=gh_spec
        )
        assert rep.quantities["skipped_rows"] >= 1

    def test_monotone_in_c(self, gauss1, gh_spec):
        f = L.log_linear([1.0])
        outcomes = [
            L.check_shc(f, gauss1, c, spec=gh_spec).passed for c in (0.9, 1.0, 1.5)
        ]
        for earlier, later in zip(outcomes, outcomes[1:]):
            assert later or not earlier

    def test_scale_covariance_of_outcome(self, gauss1, gh_spec):
        for c in (0.9, 1.0):
            base = L.check_shc(L.log_linear([1.0]), gauss1, c, spec=gh_spec).passed
            scaled = L.check_shc(
                L.scale(L.log_linear([1.0]), 3.0), gauss1, c, spec=gh_spec
            ).passed
            assert base == scaled

    def test_passing_shc_implies_nonnegative_bracket(self, gauss1, gh_spec):
        # consistency at r = 1: the bracket reduces to the sLSI deficit
        for f in (L.log_linear([0.8]), L.cosh_field(0.8)):
            rep = L.check_shc(f, gauss1, 1.0, spec=gh_spec)
            if rep.passed:
                val, err = L.functionals.hc_bracket_with_error(f, gauss1, 1.0, 1.0, gh_spec)
                assert val >= -(1e-6 + 3 * err)


class TestGeneralShc:
    def test_p_equals_q_reduces_to_identity(self, gauss1, gh_spec):
        rep = L.check_general_shc(L.cosh_field(0.7), gauss1, 1.0, 2.0, 2.0, gh_spec)
        assert rep.quantities["r_star"] == 1.0
        assert rep.passed

    def test_gaussian_equality_case(self, gauss1, gh_spec):
        lam = 0.8
        rep = L.check_general_shc(L.log_linear([lam]), gauss1, 1.0, 1.0, 2.0, gh_spec)
        assert rep.passed
        assert rep.quantities["r_star"] == pytest.approx(math.sqrt(0.5), rel=1e-12)
        top = rep.quantities["rows"][0]
        assert top["lhs"] == pytest.approx(top["rhs"], rel=1e-9)

    def test_sub_unit_exponents_accepted(self, gauss1, gh_spec):
        rep = L.check_general_shc(L.cosh_field(0.5), gauss1, 1.0, 0.5, 1.0, gh_spec)
        assert rep.kind == "general_shc"
        assert rep.passed

    def test_invalid_exponent_order(self, gauss1, gh_spec):
        with pytest.raises(InvalidParameter):
            L.check_general_shc(L.cosh_field(0.5), gauss1, 1.0, 2.0, 1.0, gh_spec)


class TestDilationBound:
    @pytest.mark.parametrize("p", [1.0, 2.0])
    @pytest.mark.parametrize("r", [0.6, 0.8])
    def test_gaussian_battery(self, gauss1, gh_spec, p, r):
        for f in (L.log_linear([0.8]), L.cosh_field(0.8)):
            rep = L.check_dilation_bound(f, gauss1, p, r, gh_spec)
            assert rep.passed
            assert rep.quantities["lhs"] <= rep.quantities["rhs"] + rep.tolerance
            # gaussian ratio sup is 1, so the bound is r^{-n/p} ||f||_p
            assert rep.quantities["regularity_constant"] == pytest.approx(1.0, abs=1e-8)

    def test_r_equal_one_trivial(self, gauss1, gh_spec):
        rep = L.check_dilation_bound(L.cosh_field(0.6), gauss1, 2.0, 1.0, gh_spec)
        assert rep.passed
        assert rep.quantities["regularity_constant"] >= 1.0 - 1e-9

    def test_constant_field(self, gauss1, gh_spec):
        rep = L.check_dilation_bound(L.constant(1.0, 1), gauss1, 2.0, 0.8, gh_spec)
        assert rep.passed
        assert rep.quantities["lhs"] == pytest.approx(1.0, rel=1e-9)

    def test_compact_support_inconclusive(self, gh_spec):
        ball = L.uniform_ball(1.0, 1)
        rep = L.check_dilation_bound(L.cosh_field(0.5), ball, 2.0, 0.8)
        assert rep.inconclusive and not rep.passed


class TestDilatedConvolutionBound:
    def test_holds_with_measured_slack(self, gauss1, gh_spec):
        phi = L.mollifier(1, 4)
        rep = L.check_dilated_convolution_bound(
            L.log_linear([0.5]), gauss1, 2.0, phi, 0.8, gh_spec
        )
        assert rep.passed
        assert rep.quantities["slack"] > 0

    def test_p_one_uses_sup_norm(self, gauss1, gh_spec):
        phi = L.mollifier(1, 4)
        rep = L.check_dilated_convolution_bound(
            L.cosh_field(0.5), gauss1, 1.0, phi, 0.8, gh_spec
        )
        assert rep.passed
        assert rep.quantities["mollifier_norm"] == pytest.approx(phi.sup_value, rel=1e-12)

    def test_p_below_one_rejected(self, gauss1, gh_spec):
        with pytest.raises(InvalidParameter):
            L.check_dilated_convolution_bound(
                L.cosh_field(0.5), gauss1, 0.5, L.mollifier(1, 2), 0.8, gh_spec
            )

    @pytest.mark.parametrize("p", [1.0, 2.0])
    def test_rescaling_quantity_constant_across_scales(self, p):
        # Vol(supp phi) * ||phi||_{p'}^p is scale-free for the bump family
        def quantity(phi):
            p_conj = math.inf if p == 1.0 else p / (p - 1.0)
            return phi.vol_support * phi.lebesgue_norm(p_conj) ** p

        q2, q8 = quantity(L.mollifier(1, 2)), quantity(L.mollifier(1, 8))
        assert abs(q2 - q8) / abs(q2) <= 1e-8


class TestDensityApproximation:
    def test_smooth_surrogate_reaches_target(self, gauss1, gh_spec):
        f = L.log_linear([0.25])
        for p in (1.0, 2.0):
            rep = L.check_density_approximation(f, gauss1, p, spec=gh_spec)
            assert rep.passed
            assert rep.quantities["best_error"] <= 0.01 * rep.quantities["norm_p"]
            assert rep.quantities["energies_finite"]

    def test_constant_field_zero_error(self, gauss1, gh_spec):
        rep = L.check_density_approximation(
            L.constant(1.0, 1), gauss1, 2.0, k_list=(1, 2), r_list=(0.9, 0.99),
            spec=gh_spec
        )
        assert rep.passed
        assert rep.quantities["best_error"] <= 1e-9

    def test_two_step_split_both_vanish(self, gauss1, gh_spec):
        # ||(f * phi_k)_r - f_r|| -> 0 in k and ||f_r - f|| -> 0 as r -> 1
        f = L.log_linear([0.25])
        split = L.check_density_approximation(f, gauss1, 2.0, spec=gh_spec).quantities[
            "split_errors_along_k"
        ]
        errs = [row["error"] for row in split]
        assert all(e2 < e1 for e1, e2 in zip(errs, errs[1:]))
        gaps = []
        for r in (0.9, 0.99):
            fr = L.dilate(f, r)
            val, _ = L.integrate(
                lambda pts: np.abs(fr(pts) - f(pts)) ** 2, gauss1, gh_spec
            )
            gaps.append(math.sqrt(val))
        assert gaps[1] < gaps[0]


class TestMonotonicityChecks:
    def test_squared_norm_euler_scaling(self):
        for dim in (2, 3):
            rep = L.check_radial_euler_scaling(L.squared_norm(dim))
            assert rep.passed

    def test_exponential_bessel_monotone(self):
        rep = L.check_spherical_monotonicity(L.log_linear([1.0, 0.0]))
        assert rep.passed

    def test_radial_convex_profiles(self):
        for f in (L.exp_norm_sq(0.3, 2), L.exp_norm_sq(0.2, 3)):
            assert L.check_spherical_monotonicity(f).passed
            assert L.check_radial_euler_scaling(f).passed

    def test_non_subharmonic_is_inconclusive(self):
        f = L.raw_field(lambda pts: np.exp(-np.sum(pts**2, axis=1)), 2, label="bump")
        rep = L.check_spherical_monotonicity(f)
        assert rep.inconclusive

    def test_non_invariant_is_inconclusive(self):
        f = L.log_linear([1.0, 0.0])
        rep = L.check_radial_euler_scaling(f)
        assert rep.inconclusive

    def test_averaged_field_satisfies_euler_scaling(self):
        favg = L.spherical_average(L.log_linear([0.8, 0.0]))
        rep = L.check_radial_euler_scaling(favg)
        assert rep.passed


class TestBestConstant:
    def test_gaussian_slsi_sharp_value(self, gauss1, gh_spec):
        battery = [L.log_linear([lam]) for lam in (0.4, 0.8, 1.2)]
        c_star = L.best_constant(battery, gauss1, "slsi", spec=gh_spec)
        assert c_star == pytest.approx(1.0, abs=1e-3)

    def test_gaussian_shc_sharp_value(self, gauss1, gh_spec):
        battery = [L.log_linear([lam]) for lam in (0.4, 0.8, 1.2)]
        c_star = L.best_constant(battery, gauss1, "shc", spec=gh_spec)
        assert c_star == pytest.approx(1.0, abs=1e-3)

    def test_constants_battery_vacuous(self, gauss1, gh_spec):
        c_star = L.best_constant([L.constant(2.0, 1)], gauss1, "slsi", spec=gh_spec)
        assert c_star == 0.25

    def test_no_passing_c_reports_range_max(self, gauss1, gh_spec):
        battery = [L.log_linear([0.8])]
        c_star = L.best_constant(battery, gauss1, "slsi", c_range=(0.25, 0.5),
                                 spec=gh_spec)
        assert c_star == 0.5

    def test_empty_battery_rejected(self, gauss1):
        with pytest.raises(InvalidParameter):
            L.best_constant([], gauss1, "slsi")

    def test_default_battery_composition(self):
        battery = L.default_battery(1)
        certs = {f.certificate for f in battery}
        assert {"log_linear", "exp_subharmonic", "power", "product", "mollified"} <= certs


class TestReportShape:
    def test_report_round_trips_to_json(self, gauss1, gh_spec):
        import json

        rep = L.check_shc(L.log_linear([0.8]), gauss1, 1.0, spec=gh_spec)
        blob = json.dumps(rep.to_dict(), sort_keys=True)
        parsed = json.loads(blob)
        assert parsed["check_id"] == rep.check_id
        assert parsed["spec"]["scheme"] == "gauss_hermite"
        assert parsed["inputs"]["measure"] == gauss1.label

    def test_pass_iff_deficit_above_negative_tolerance(self, gauss1, gh_spec):
        rep = L.check_slsi(L.cosh_field(0.8), gauss1, 1.0, gh_spec)
        assert rep.passed == (rep.quantities["deficit"] >= -rep.tolerance)
