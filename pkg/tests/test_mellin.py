import math

import numpy as np
import pytest

from gpdlab import conical as co
from gpdlab import mellin as me


def wedge_symbol_closed_form(alpha, a, lam):
    # residue evaluation of the ray-coupling integral on the weight line
    mu = a + 1.0 - 1j * lam
    return np.sin((1 - mu) * (math.pi - alpha)) / (2 * np.sin(mu * math.pi))


def sech_symbol_closed_form(a, lam):
    z = a + 1.0 - 1j * lam
    return (math.pi / 2) / np.sin(math.pi * z / 2)


class TestWedgeKernel:
    def test_flat_wedge_is_zero(self):
        k = me.wedge_double_layer_kernel(math.pi)
        for t in (0.01, 0.5, 1.0, 7.3, 250.0):
            assert np.max(np.abs(k(t))) < 1e-14

    def test_pointwise_oracle_right_angle(self):
        # direct kernel evaluation at x=(1,0), y=(0,1); inward normal at y
        k = me.wedge_double_layer_kernel(math.pi / 2)
        direct = me.double_layer_kernel_value((1.0, 0.0), (0.0, 1.0), (1.0, 0.0))
        assert abs(k(1.0)[0, 1] - direct) < 1e-12

    def test_pointwise_oracle_along_rays(self):
        alpha = 2.1
        k = me.wedge_double_layer_kernel(alpha)
        e2 = (math.cos(alpha), math.sin(alpha))
        inward_at_ray2 = (math.sin(alpha), -math.cos(alpha))
        for t in (0.2, 1.0, 3.7):
            x = (t, 0.0)
            direct = me.double_layer_kernel_value(x, e2, inward_at_ray2)
            assert abs(k(t)[0, 1] - direct) < 1e-12

    def test_orientation_flip_negates(self):
        for alpha in (0.7, 2.0, 2.8):
            k1 = me.wedge_double_layer_kernel(alpha)
            k2 = me.wedge_double_layer_kernel(2 * math.pi - alpha)
            for t in (0.3, 1.0, 2.5):
                assert np.max(np.abs(k1(t) + k2(t))) < 1e-13

    def test_diagonal_vanishes(self):
        k = me.wedge_double_layer_kernel(1.0)
        assert k(0.8)[0, 0] == 0.0 and k(0.8)[1, 1] == 0.0

    def test_angle_range_enforced(self):
        with pytest.raises(me.MellinError):
            me.wedge_double_layer_kernel(0.0)
        with pytest.raises(me.MellinError):
            me.wedge_double_layer_kernel(2 * math.pi)

    def test_decay_bound_holds(self):
        for alpha in (0.4, math.pi / 2, 2.5, 4.0):
            k = me.wedge_double_layer_kernel(alpha)
            d = k.decay
            for t in (1e-3, 0.2, 1.0, 5.0, 1e3):
                bound = d.c0 * t if t <= 1 else d.c_inf / t
                assert np.max(np.abs(k(t))) <= bound + 1e-15


class TestTransform:
    def test_zero_kernel_zero_family(self):
        fam = me.mellin_transform(me.wedge_double_layer_kernel(math.pi), 0.5, np.array([0.0, 2.0]))
        assert all(np.max(np.abs(fam.value(l))) == 0.0 for l in (0.0, 2.0))

    def test_sech_kernel_closed_form(self):
        fam = me.mellin_transform(me.sech_test_kernel(), 0.5, np.array([-4.0, -1.0, 0.0, 0.5, 3.0]))
        for lam in fam.grid():
            assert abs(fam.value(lam)[0, 0] - sech_symbol_closed_form(0.5, lam)) < 1e-8

    def test_sech_other_weight(self):
        fam = me.mellin_transform(me.sech_test_kernel(), 0.25, np.array([0.0, 1.5]))
        for lam in (0.0, 1.5):
            assert abs(fam.value(lam)[0, 0] - sech_symbol_closed_form(0.25, lam)) < 1e-8

    def test_wedge_closed_form_various_angles(self):
        for alpha in (0.8, math.pi / 2, 3 * math.pi / 5, 2.5, 3 * math.pi / 2):
            fam = me.mellin_transform(
                me.wedge_double_layer_kernel(alpha), 0.5, np.array([0.0, 1.0, 4.0])
            )
            for lam in (0.0, 1.0, 4.0):
                want = wedge_symbol_closed_form(alpha, 0.5, lam)
                assert abs(fam.value(lam)[0, 1] - want) < 1e-8

    def test_dual_quadrature_agreement(self):
        # independent scheme: direct t-integration without the log substitution
        k = me.wedge_double_layer_kernel(math.pi / 2)
        fam = me.mellin_transform(k, 0.5, np.array([0.0, 0.7, 2.0]))
        for lam in (0.0, 0.7, 2.0):
            direct = me.mellin_transform_direct(k, 0.5, lam)
            assert np.max(np.abs(fam.value(lam) - direct)) < 1e-9

    def test_square_corner_at_zero_is_plain_integral(self):
        k = me.wedge_double_layer_kernel(math.pi / 2)
        fam = me.mellin_transform(k, 0.5, np.array([0.0]))
        direct = me.mellin_transform_direct(k, 0.5, 0.0)
        assert np.max(np.abs(fam.value(0.0) - direct)) < 1e-9

    def test_tightened_tolerance_is_stable(self):
        # quadrature-convergence proxy: tightening the error budget moves
        # the samples by less than the declared tolerance
        k = me.wedge_double_layer_kernel(2.2)
        lams = np.array([0.0, 1.3, 5.0])
        loose = me.mellin_transform(k, 0.5, lams, abs_tol=1e-9)
        tight = me.mellin_transform(k, 0.5, lams, abs_tol=1e-11)
        for lam in lams:
            assert np.max(np.abs(loose.value(lam) - tight.value(lam))) < 1e-9

    @pytest.mark.parametrize("weight", [0.0, 0.5])
    def test_adjoint_kernel_gives_adjoint_symbol(self, weight):
        # on the Haar-unitary line (weight 0) the adjoint kernel is the
        # plain conjugate-transpose-reflect conj(k(1/t))^T
        base = me.sech_test_kernel()

        def fn(t):
            return np.array(
                [[0.0, (1.0 + 0.5j) * base.fn(t)[0, 0]], [(0.3 - 0.2j) * base.fn(t)[0, 0], 0.0]]
            )

        kern = me.MellinKernel("m", 2, fn, me.KernelDecay(1.0, 2.0, 1.0, 2.0), "mixed")
        adj = me.adjoint_kernel(kern, weight)
        if weight == 0.0:
            for t in (0.4, 1.0, 2.7):
                assert np.max(np.abs(adj(t) - np.conj(fn(1.0 / t)).T)) < 1e-14
        lams = np.array([0.0, 0.9, 2.4])
        fam = me.mellin_transform(kern, weight, lams)
        fam_adj = me.mellin_transform(adj, weight, lams)
        for lam in lams:
            assert np.max(np.abs(fam_adj.value(lam) - fam.value(lam).conj().T)) < 1e-9

    def test_non_integrable_rejected(self):
        k = me.MellinKernel(
            "bad", 1, lambda t: np.array([[1.0 / t]]), me.KernelDecay(-1.0, 1.0, 1.0, 1.0)
        )
        with pytest.raises(me.NonIntegrableError):
            me.mellin_transform(k, 0.5)

    def test_tail_bound_decreasing_and_effective(self):
        fam = me.mellin_transform(
            me.wedge_double_layer_kernel(math.pi / 2), 0.5, np.array([0.0, 30.0, 60.0])
        )
        assert fam.tail_bound(50.0) < fam.tail_bound(25.0)
        # the bound dominates the actual symbol out in the tail
        for lam in (30.0, 60.0):
            assert np.linalg.norm(fam.value(lam), 2) <= fam.tail_bound(lam)


class TestScan:
    def test_zero_symbol_returns_exactly_c(self):
        fam = me.mellin_transform(me.wedge_double_layer_kernel(math.pi), 0.5)
        for c in (0.3, 0.5, 1.0):
            res = me.invertibility_scan(fam, c)
            assert res.min_sigma == c
            assert res.invertible

    def test_symbol_hitting_minus_c_flags_zero(self):
        k = me.forced_zero_kernel(0.5)
        fam = me.mellin_transform(k, 0.5)
        res = me.invertibility_scan(fam, 0.5)
        assert res.min_sigma < 1e-9
        assert not res.invertible
        assert abs(res.argmin_lambda) < 1e-9

    def test_square_corner_golden_minimum(self):
        # analytic value: |1/2 - sin(pi/4)/2| at lam = 0
        fam = me.mellin_transform(me.wedge_double_layer_kernel(math.pi / 2), 0.5)
        res = me.invertibility_scan(fam, 0.5)
        assert res.invertible
        assert res.min_sigma == pytest.approx(0.5 - math.sqrt(2) / 4, abs=1e-8)
        assert abs(res.argmin_lambda) < 0.2

    def test_monotone_in_c_for_zero_kernel(self):
        fam = me.mellin_transform(me.wedge_double_layer_kernel(math.pi), 0.5)
        minima = [me.invertibility_scan(fam, c).min_sigma for c in (0.25, 0.5, 0.75, 1.25)]
        assert minima == [0.25, 0.5, 0.75, 1.25]

    def test_zero_constant_rejected(self):
        fam = me.mellin_transform(me.sech_test_kernel(), 0.5, np.array([0.0]))
        with pytest.raises(me.MellinError):
            me.invertibility_scan(fam, 0.0)

    def test_tail_cap_raises(self):
        fam = me.mellin_transform(me.sech_test_kernel(), 0.5, np.array([0.0, 1.0]))
        with pytest.raises(me.TailBoundError):
            me.invertibility_scan(fam, 1e-9, lambda_cap=50.0)


class TestVerdict:
    def test_square_is_fredholm(self):
        v = me.fredholm_verdict(co.unit_square(), c=0.5)
        assert v.elliptic and v.is_fredholm and v.witness is None
        assert set(v.scans) == {"v0", "v1", "v2", "v3"}
        golden = 0.5 - math.sqrt(2) / 4
        for s in v.scans.values():
            assert s.min_sigma == pytest.approx(golden, abs=1e-8)

    def test_zero_constant_not_elliptic(self):
        v = me.fredholm_verdict(co.unit_square(), c=0.0)
        assert not v.elliptic and not v.is_fredholm
        assert all(s is None for s in v.scans.values())

    def test_adversarial_kernel_fails_with_witness(self):
        kz = me.forced_zero_kernel(0.5)
        v = me.fredholm_verdict(co.unit_square(), c=0.5, kernels={"v2": kz})
        assert not v.is_fredholm
        assert v.witness == "v2"
        assert not v.scans["v2"].invertible
        assert v.scans["v0"].invertible

    def test_missing_kernel_for_wide_vertex(self):
        v = co.Vertex("w", co.RayBase((0.0, 1.0, 2.0)))
        d = co.LayerDomain(2, (v,))
        with pytest.raises(me.MissingKernelError):
            me.fredholm_verdict(d, c=0.5)

    def test_three_dimensional_numerics_unsupported(self):
        with pytest.raises(me.UnsupportedDimensionError):
            me.fredholm_verdict(co.cone_3d(), c=0.5)

    def test_artificial_vertex_contributes_exactly_c(self):
        art = co.Vertex("art", co.RayBase((0.0, math.pi), interior_angle=math.pi))
        d = co.LayerDomain(2, (art,))
        v = me.fredholm_verdict(d, c=0.5)
        assert v.is_fredholm
        assert v.scans["art"].min_sigma == 0.5

    def test_weight_auto_is_half(self):
        v = me.fredholm_verdict(co.unit_square(), c=0.5, weight="auto")
        assert v.weight == 0.5


class TestStraightCone:
    def test_symmetric_kernel_identical_families(self):
        k = me.symmetric_dilation_kernel()
        lams = np.array([-3.0, -1.0, 0.0, 1.0, 3.0])
        near, far = me.straight_cone_families(k, 0.5, lams)
        for lam in lams:
            assert np.max(np.abs(near.value(lam) - far.value(lam))) < 1e-10
        s_near = me.invertibility_scan(near, 0.5)
        s_far = me.invertibility_scan(far, 0.5)
        assert s_near.invertible == s_far.invertible
        assert s_near.min_sigma == pytest.approx(s_far.min_sigma, abs=1e-9)

    def test_symmetric_kernel_closed_form(self):
        # symbol pi sech(pi lam / 2) on the line a = 1/2
        fam = me.mellin_transform(me.symmetric_dilation_kernel(), 0.5, np.array([0.0, 1.0]))
        for lam in (0.0, 1.0):
            want = math.pi / math.cosh(math.pi * lam / 2)
            assert abs(fam.value(lam)[0, 0] - want) < 1e-8

    def test_reflection_mirrors_the_dual_variable(self):
        # for any kernel the far-end symbol is the near symbol at -lam
        k = me.sech_test_kernel()
        near, far = me.straight_cone_families(k, 0.4, np.array([-2.0, -0.5, 0.5, 2.0]))
        for lam in (-2.0, -0.5, 0.5, 2.0):
            assert np.max(np.abs(far.value(lam) - near.value(-lam))) < 1e-9
