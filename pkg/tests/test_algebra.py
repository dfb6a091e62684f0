import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import gpdlab as gl
from gpdlab import algebra as al

import gen


def pair3():
    return gl.build_pair(range(3))


def as_matrix(e, n=3):
    m = np.zeros((n, n), dtype=complex)
    for (x, y), c in e.as_dict().items():
        m[x, y] = c
    return m


def convolve_bruteforce(a, b):
    # independent oracle: triple loop over arrows and explicit factorizations
    g = a.groupoid
    out = {}
    for gp in g.arrows:
        for h in g.arrows:
            if g.is_composable(gp, h):
                k = g.mul(gp, h)
                out[k] = out.get(k, 0) + a.coeff(gp) * b.coeff(h)
    return al.AlgebraElement.from_dict(g, out)


class TestConvolution:
    def test_delta_convolution(self):
        g = pair3()
        d1 = al.AlgebraElement.delta(g, (0, 1))
        d2 = al.AlgebraElement.delta(g, (1, 2))
        prod = al.convolve(d1, d2)
        assert prod.as_dict() == {(0, 2): 1.0}
        # non-composable order gives zero
        assert al.convolve(d2, d1).as_dict() == {}

    def test_pair_convolution_is_matrix_multiplication(self):
        g = pair3()
        rng = np.random.default_rng(1)
        for _ in range(20):
            a, b = al.random_element(g, rng), al.random_element(g, rng)
            lhs = as_matrix(al.convolve(a, b))
            rhs = as_matrix(a) @ as_matrix(b)
            assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_matches_bruteforce_oracle_on_random_groupoids(self):
        rng = np.random.default_rng(2)
        for _ in range(15):
            g = gen.random_groupoid(rng, max_arrows=40)
            if g.n_arrows == 0:
                continue
            a, b = al.random_element(g, rng), al.random_element(g, rng)
            fast = al.convolve(a, b)
            slow = convolve_bruteforce(a, b)
            assert np.max(np.abs(fast.vec - slow.vec)) < 1e-12

    def test_one_object_z2_formula(self):
        g = gl.build_group_bundle(["*"], gl.GroupTable.cyclic(2))
        a = al.AlgebraElement.from_dict(g, {("*", 0): 2.0, ("*", 1): 3.0})
        b = al.AlgebraElement.from_dict(g, {("*", 0): 5.0, ("*", 1): 7.0})
        prod = al.convolve(a, b)
        # (a0 b0 + a1 b1, a0 b1 + a1 b0)
        assert prod.coeff(("*", 0)) == pytest.approx(2 * 5 + 3 * 7)
        assert prod.coeff(("*", 1)) == pytest.approx(2 * 7 + 3 * 5)

    def test_mismatched_groupoids_rejected(self):
        with pytest.raises(al.AlgebraError):
            al.convolve(
                al.AlgebraElement.zero(pair3()), al.AlgebraElement.zero(pair3())
            )


class TestStarAndNorms:
    def test_star_of_delta(self):
        g = pair3()
        assert al.star(al.AlgebraElement.delta(g, (0, 1))).as_dict() == {(1, 0): 1.0}

    def test_delta_l1_norm(self):
        g = pair3()
        assert al.l1_norm(al.AlgebraElement.delta(g, (0, 1))) == 1.0

    def test_all_ones_pair2(self):
        g = gl.build_pair(range(2))
        assert al.l1_norm(al.AlgebraElement(g, np.ones(4))) == 2.0

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=0, max_value=10**6))
    def test_l1_submultiplicative_and_star_isometric(self, seed):
        rng = np.random.default_rng(seed)
        g = gen.random_groupoid(rng, max_arrows=40)
        if g.n_arrows == 0:
            return
        a, b = al.random_element(g, rng), al.random_element(g, rng)
        assert al.l1_norm(al.convolve(a, b)) <= al.l1_norm(a) * al.l1_norm(b) + 1e-10
        assert al.l1_norm(al.star(a)) == pytest.approx(al.l1_norm(a))
        assert np.max(np.abs(al.star(al.star(a)).vec - a.vec)) == 0.0

    def test_reduced_norm_pair_is_sigma_max(self):
        g = pair3()
        rng = np.random.default_rng(3)
        a = al.random_element(g, rng)
        oracle = np.linalg.svd(as_matrix(a), compute_uv=False)[0]
        assert al.reduced_norm(a) == pytest.approx(oracle, abs=1e-12)

    def test_reduced_norm_z2(self):
        g = gl.build_group_bundle(["*"], gl.GroupTable.cyclic(2))
        a = al.AlgebraElement.from_dict(g, {("*", 0): 1.0, ("*", 1): 1.0})
        # eigenvalues a0 +- a1
        assert al.reduced_norm(a) == pytest.approx(2.0)

    def test_unit_element_norm_one(self):
        rng = np.random.default_rng(4)
        for _ in range(5):
            g = gen.random_groupoid(rng, max_arrows=40)
            if g.n_units == 0:
                continue
            assert al.reduced_norm(al.AlgebraElement.unit(g)) == pytest.approx(1.0)


class TestRegularRep:
    def test_unit_maps_to_identity(self):
        g = pair3()
        m = al.regular_rep(al.AlgebraElement.unit(g), 1).matrix
        assert np.array_equal(m, np.eye(3))

    def test_pair_rep_is_coefficient_matrix(self):
        g = pair3()
        rng = np.random.default_rng(5)
        a = al.random_element(g, rng)
        rep = al.regular_rep(a, 0)
        mat = as_matrix(a)
        perm = [r for (r, d) in rep.fiber]  # fiber arrows are (y, 0)
        assert np.max(np.abs(rep.matrix - mat[np.ix_(perm, perm)])) < 1e-12

    def test_star_homomorphism_laws(self):
        rng = np.random.default_rng(6)
        for _ in range(60):
            g = gen.random_groupoid(rng, max_arrows=50)
            if g.n_units == 0:
                continue
            x = g.units[int(rng.integers(g.n_units))]
            a, b = al.random_element(g, rng), al.random_element(g, rng)
            pa = al.regular_rep(a, x).matrix
            pb = al.regular_rep(b, x).matrix
            pab = al.regular_rep(al.convolve(a, b), x).matrix
            assert np.max(np.abs(pab - pa @ pb)) < 1e-10
            pstar = al.regular_rep(al.star(a), x).matrix
            assert np.max(np.abs(pstar - pa.conj().T)) < 1e-12
            assert al.operator_norm(pa) <= al.l1_norm(a) + 1e-10

    def test_cstar_identity(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            g = gen.random_groupoid(rng, max_arrows=50)
            if g.n_arrows == 0:
                continue
            a = al.random_element(g, rng)
            lhs = al.reduced_norm(al.convolve(al.star(a), a))
            assert abs(lhs - al.reduced_norm(a) ** 2) < 1e-10 * max(1.0, lhs)

    def test_unknown_unit(self):
        with pytest.raises(gl.GroupoidError):
            al.regular_rep(al.AlgebraElement.zero(pair3()), 99)


class TestRestriction:
    def toy(self):
        du = gl.build_disjoint_union(
            [gl.build_pair(range(3)), gl.build_group_bundle(["z"], gl.GroupTable.cyclic(2))]
        )
        return du, [(1, "z")]

    def test_interior_support_restricts_to_zero(self):
        g, f = self.toy()
        a = al.AlgebraElement.delta(g, (0, (0, 1)))
        restricted, report = al.restrict_boundary(a, f)
        assert np.max(np.abs(restricted.vec)) == 0.0
        assert report.ok

    def test_kernel_dimension_counts(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            g = gen.random_groupoid(rng, max_arrows=60)
            part = gl.orbits_and_isotropy(g, check=False)
            if len(part.orbits) < 2:
                continue
            f = part.orbits[0]
            a = al.random_element(g, rng)
            _, report = al.restrict_boundary(a, f)
            assert report.kernel_dim == report.ideal_arrow_count
            assert report.kernel_dim + report.restricted_dim == report.total_dim
            assert report.ok

    def test_non_invariant_subset_rejected(self):
        g = pair3()
        a = al.AlgebraElement.zero(g)
        with pytest.raises(al.AlgebraError, match="invariant"):
            al.restrict_boundary(a, [0])

    def test_boundary_restriction_matches_block(self):
        g, f = self.toy()
        rng = np.random.default_rng(9)
        a = al.random_element(g, rng)
        restricted, _ = al.restrict_boundary(a, f)
        # the regular representation at the boundary unit only sees the
        # restricted coefficients
        full_rep = al.regular_rep(a, (1, "z")).matrix
        red_rep = al.regular_rep(restricted, (1, "z")).matrix
        assert np.max(np.abs(full_rep - red_rep)) == 0.0


class TestBlocksAndInvertibility:
    def test_pair_block_is_coefficient_matrix(self):
        g = pair3()
        rng = np.random.default_rng(10)
        a = al.random_element(g, rng)
        dec = al.block_decompose(g)
        (block,) = dec.matrices(a)
        svals = np.linalg.svd(as_matrix(a), compute_uv=False)
        assert np.allclose(np.linalg.svd(block, compute_uv=False), svals)

    def test_bundle_blocks_are_circulant(self):
        g = gl.build_group_bundle(["a", "b"], gl.GroupTable.cyclic(2))
        a = al.AlgebraElement.from_dict(
            g, {("a", 0): 1.0, ("a", 1): 2.0, ("b", 0): 3.0, ("b", 1): 4.0}
        )
        dec = al.block_decompose(g)
        mats = dec.matrices(a)
        assert np.allclose(mats[0], np.array([[1.0, 2.0], [2.0, 1.0]]))
        assert np.allclose(mats[1], np.array([[3.0, 4.0], [4.0, 3.0]]))

    def test_blockwise_norm_equals_reduced_norm(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            g = gen.random_groupoid(rng, max_arrows=50)
            if g.n_arrows == 0:
                continue
            a = al.random_element(g, rng)
            assert al.block_decompose(g).norm(a) == pytest.approx(al.reduced_norm(a))

    def test_block_map_is_multiplicative(self):
        rng = np.random.default_rng(12)
        g = gl.build_product(gl.build_pair(range(2)), gl.build_group_bundle(["z"], gl.GroupTable.cyclic(3)))
        dec = al.block_decompose(g)
        for _ in range(100):
            a, b = al.random_element(g, rng), al.random_element(g, rng)
            prod_blocks = dec.matrices(al.convolve(a, b))
            for mp, ma, mb in zip(prod_blocks, dec.matrices(a), dec.matrices(b)):
                assert np.max(np.abs(mp - ma @ mb)) < 1e-10

    def test_unit_invertible_nilpotent_not(self):
        g = pair3()
        assert al.invertible(al.AlgebraElement.unit(g), method="blocks")
        assert al.invertible(al.AlgebraElement.unit(g), method="solve")
        nilp = al.AlgebraElement.from_dict(g, {(0, 1): 1.0, (1, 2): 2.0})
        assert not al.invertible(nilp, method="blocks")
        assert not al.invertible(nilp, method="solve")

    def test_two_routes_agree_and_inverse_verifies(self):
        rng = np.random.default_rng(13)
        for _ in range(40):
            g = gen.random_groupoid(rng, max_arrows=40)
            if g.n_arrows == 0:
                continue
            a = al.random_element(g, rng)
            via_blocks = al.invertible(a, method="blocks")
            inv = al.solve_inverse(a)
            assert via_blocks == (inv is not None)
            if inv is not None:
                unit = al.AlgebraElement.unit(g)
                assert np.max(np.abs(al.convolve(a, inv).vec - unit.vec)) < 1e-7
