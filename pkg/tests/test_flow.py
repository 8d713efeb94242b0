import unittest
import numpy as np
from numpy.testing import assert_allclose, assert_array_equal
from context import geodl
from geodl.geodesic import (
    Subspace,
    orthonormalize,
    cs_decompose,
    geodesic_point
)


def random_pair(seed, dd, nn):
    rng = np.random.default_rng(seed)
    return orthonormalize(rng.normal(size=(dd, nn))), orthonormalize(rng.normal(size=(dd, nn)))


class TestOrthogonalLines(unittest.TestCase):
    def setUp(self):
        self.e1 = Subspace(np.array([[1.0], [0.0]]))
        self.e2 = Subspace(np.array([[0.0], [1.0]]))

    def test_factors(self):
        dec = cs_decompose(self.e1, self.e2)
        assert_allclose(dec.u1, [[1.0]])
        assert_allclose(dec.u2, [[1.0]])
        assert_allclose(dec.v, [[-1.0]])
        assert_allclose(dec.omegas, [np.pi / 2], atol=1e-15)

    def test_midpoint_is_bisector(self):
        dec = cs_decompose(self.e1, self.e2)
        mid = geodesic_point(dec, 0.5)
        assert_allclose(mid[:, 0], np.array([1.0, -1.0]) / np.sqrt(2.0), atol=1e-12)

    def test_path(self):
        dec = cs_decompose(self.e1, self.e2)
        for nu in (0.0, 0.3, 1.0):
            pi = geodesic_point(dec, nu)
            assert_allclose(pi[:, 0], [np.cos(nu * np.pi / 2), -np.sin(nu * np.pi / 2)], atol=1e-12)


class TestCSDecompose(unittest.TestCase):
    def test_factorisations(self):
        p_old, p_new = random_pair(0, 7, 3)
        dec = cs_decompose(p_old, p_new)
        aa = p_old.basis.T @ p_new.basis
        bb = dec.complement.T @ p_new.basis
        assert_allclose(aa, dec.u1 @ np.diag(dec.gammas) @ dec.v.T, atol=1e-10)
        assert_allclose(bb, -dec.u2 @ np.diag(dec.sigmas) @ dec.v.T, atol=1e-10)
        assert_allclose(dec.u2.T @ dec.u2, np.eye(3), atol=1e-10)
        assert_allclose(dec.gammas ** 2 + dec.sigmas ** 2, np.ones(3), atol=1e-14)

    def test_angles_sorted_in_range(self):
        p_old, p_new = random_pair(1, 9, 4)
        omegas = cs_decompose(p_old, p_new).omegas
        self.assertTrue(np.all(np.diff(omegas) >= 0))
        self.assertTrue(np.all(omegas >= 0) and np.all(omegas <= np.pi / 2))

    def test_identical_subspaces(self):
        p_old, _ = random_pair(2, 6, 2)
        dec = cs_decompose(p_old, p_old)
        assert_allclose(dec.omegas, np.zeros(2), atol=1e-7)
        assert_allclose(dec.u2, np.zeros((4, 2)))

    def test_forced_zero_angles(self):
        for dd, nn in ((8, 6), (16, 14)):
            dec = cs_decompose(*random_pair(5, dd, nn))
            assert_array_equal(dec.omegas[:2 * nn - dd], np.zeros(2 * nn - dd))
            self.assertTrue(np.all(dec.omegas[2 * nn - dd:] > 0))
            self.assertTrue(np.all(np.diff(dec.omegas) >= 0))

    def test_role_swap(self):
        for seed, (dd, nn) in enumerate(((8, 2), (8, 3), (16, 7), (8, 6), (16, 14), (32, 30))):
            for trial in range(5):
                p_old, p_new = random_pair(100 * seed + trial, dd, nn)
                fwd, bwd = cs_decompose(p_old, p_new), cs_decompose(p_new, p_old)
                self.assertLessEqual(np.max(np.abs(fwd.omegas - bwd.omegas)), 1e-8)

    def test_dimension_mismatch(self):
        p_old, _ = random_pair(3, 6, 2)
        _, p_new = random_pair(3, 6, 3)
        with self.assertRaises(ValueError):
            cs_decompose(p_old, p_new)
        _, p_other = random_pair(3, 7, 2)
        with self.assertRaises(ValueError):
            cs_decompose(p_old, p_other)

    def test_artifacts_read_only(self):
        dec = cs_decompose(*random_pair(4, 5, 2))
        with self.assertRaises(ValueError):
            dec.omegas[0] = 1.0


class TestGeodesicPoint(unittest.TestCase):
    def test_endpoints_and_orthonormality(self):
        for seed, (dd, nn) in enumerate(((8, 2), (16, 7), (5, 3))):
            p_old, p_new = random_pair(10 + seed, dd, nn)
            dec = cs_decompose(p_old, p_new)
            start = geodesic_point(dec, 0.0)
            end = geodesic_point(dec, 1.0)
            self.assertLess(np.linalg.norm(start @ start.T - p_old.projector()), 1e-6)
            self.assertLess(np.linalg.norm(end @ end.T - p_new.projector()), 1e-6)
            for nu in (0.0, 0.25, 0.5, 0.75, 1.0):
                pi = geodesic_point(dec, nu)
                assert_allclose(pi.T @ pi, np.eye(nn), atol=1e-8)

    def test_nu_outside_unit_interval(self):
        dec = cs_decompose(*random_pair(5, 4, 1))
        for nu in (-0.1, 1.5):
            with self.assertRaises(ValueError):
                geodesic_point(dec, nu)


if __name__ == '__main__':
    unittest.main()
