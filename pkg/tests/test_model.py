import unittest
import numpy as np
from numpy.testing import assert_allclose
from context import geodl
from geodl.nn.model import (
    ModelState,
    init_model,
    encode,
    class_probabilities,
    cosine_logits,
    cosine_logits_backward,
    forward,
    encoder_backward
)


def make_state(w1, b1, w2, b2, phi):
    return ModelState(w1=w1, b1=b1, w2=w2, b2=b2, phi=phi, seen_classes=list(range(len(phi))))


class TestEncode(unittest.TestCase):
    def test_zero_weights(self):
        theta = make_state(np.zeros((4, 3)), np.zeros(4), np.zeros((2, 4)), np.zeros(2), np.eye(2))
        assert_allclose(encode(theta, np.array([1.0, -2.0, 3.0])), np.zeros(2))

    def test_bias_passthrough(self):
        cc = np.array([0.5, -1.5, 2.0])
        theta = make_state(np.zeros((3, 5)), np.zeros(3), np.eye(3), cc, np.eye(3))
        assert_allclose(encode(theta, np.ones(5)), cc)

    def test_matches_straight_line(self):
        rng = np.random.default_rng(0)
        theta = init_model(rng, 6, 5, 3, 4)
        theta.b1 = rng.normal(size=5)
        theta.b2 = rng.normal(size=3)
        xx = rng.normal(size=6)
        hidden = [np.tanh(sum(theta.w1[jj, kk] * xx[kk] for kk in range(6)) + theta.b1[jj]) for jj in range(5)]
        expected = [sum(theta.w2[ii, jj] * hidden[jj] for jj in range(5)) + theta.b2[ii] for ii in range(3)]
        assert_allclose(encode(theta, xx), expected, rtol=0, atol=1e-12)

    def test_batch_rows(self):
        rng = np.random.default_rng(1)
        theta = init_model(rng, 4, 3, 2, 2)
        xx = rng.normal(size=(5, 4))
        zz = encode(theta, xx)
        self.assertEqual(zz.shape, (5, 2))
        assert_allclose(zz[2], encode(theta, xx[2]), atol=1e-15)

    def test_linear_bypass(self):
        rng = np.random.default_rng(2)
        theta = init_model(rng, 4, 0, 2, 3)
        self.assertTrue(theta.linear)
        xx = rng.normal(size=4)
        assert_allclose(encode(theta, xx), theta.w2 @ xx + theta.b2, atol=1e-15)

    def test_non_finite_input(self):
        theta = init_model(np.random.default_rng(3), 2, 2, 2, 2)
        with self.assertRaises(ValueError):
            encode(theta, np.array([np.nan, 0.0]))


class TestClassProbabilities(unittest.TestCase):
    def test_symmetric_prototypes(self):
        probs = class_probabilities(np.array([1.0, 0.0]), np.array([[1.0, 1.0], [1.0, -1.0]]))
        assert_allclose(probs, [0.5, 0.5], atol=1e-15)

    def test_aligned_and_opposite(self):
        zz = np.array([0.3, -1.2, 2.0])
        probs = class_probabilities(zz, np.vstack([zz, -zz]))
        ee = np.exp(1.0)
        assert_allclose(probs, [ee / (ee + 1 / ee), (1 / ee) / (ee + 1 / ee)], atol=1e-10)
        assert_allclose(probs, [0.88080, 0.11920], atol=1e-5)

    def test_scale_invariant_and_normalised(self):
        rng = np.random.default_rng(4)
        phi = rng.normal(size=(5, 3))
        zz = rng.normal(size=3)
        probs = class_probabilities(zz, phi)
        self.assertAlmostEqual(probs.sum(), 1.0, delta=1e-12)
        assert_allclose(class_probabilities(10.0 * zz, phi), probs, atol=1e-12)

    def test_no_prototypes(self):
        with self.assertRaises(ValueError):
            class_probabilities(np.ones(2), np.zeros((0, 2)))


class TestBackward(unittest.TestCase):
    def test_cosine_logits_backward(self):
        rng = np.random.default_rng(5)
        zz, phi = rng.normal(size=(3, 4)), rng.normal(size=(2, 4))
        weights = rng.normal(size=(3, 2))
        dz, dphi = cosine_logits_backward(zz, phi, weights)
        hh = 1e-6
        for ii in range(3):
            for kk in range(4):
                step = np.zeros_like(zz)
                step[ii, kk] = hh
                fd = (np.sum(weights * cosine_logits(zz + step, phi))
                      - np.sum(weights * cosine_logits(zz - step, phi))) / (2 * hh)
                self.assertAlmostEqual(dz[ii, kk], fd, delta=1e-8)
        for cc in range(2):
            for kk in range(4):
                step = np.zeros_like(phi)
                step[cc, kk] = hh
                fd = (np.sum(weights * cosine_logits(zz, phi + step))
                      - np.sum(weights * cosine_logits(zz, phi - step))) / (2 * hh)
                self.assertAlmostEqual(dphi[cc, kk], fd, delta=1e-8)

    def test_encoder_backward(self):
        rng = np.random.default_rng(6)
        theta = init_model(rng, 3, 4, 2, 2)
        xx = rng.normal(size=(5, 3))
        weights = rng.normal(size=(5, 2))
        _, hidden = forward(theta, xx)
        grads = encoder_backward(theta, xx, hidden, weights)
        hh = 1e-6
        for name in ("w1", "b1", "w2", "b2"):
            value = getattr(theta, name)
            fd = np.zeros_like(value)
            for idx in np.ndindex(value.shape):
                orig = value[idx]
                value[idx] = orig + hh
                plus = np.sum(weights * forward(theta, xx)[0])
                value[idx] = orig - hh
                minus = np.sum(weights * forward(theta, xx)[0])
                value[idx] = orig
                fd[idx] = (plus - minus) / (2 * hh)
            assert_allclose(grads[name], fd, atol=1e-8)


class TestModelState(unittest.TestCase):
    def test_copy_and_fingerprint(self):
        theta = init_model(np.random.default_rng(7), 3, 4, 2, 2)
        clone = theta.copy()
        self.assertEqual(clone.fingerprint(), theta.fingerprint())
        clone.w2[0, 0] += 1.0
        self.assertNotEqual(clone.fingerprint(), theta.fingerprint())
        self.assertTrue(theta.is_finite())

    def test_add_prototypes(self):
        theta = init_model(np.random.default_rng(8), 3, 4, 2, 2)
        theta.add_prototypes(np.array([[1.0, 0.0]]), [2])
        self.assertEqual(theta.num_classes, 3)
        self.assertEqual(theta.seen_classes, [0, 1, 2])
        with self.assertRaises(ValueError):
            theta.add_prototypes(np.ones((2, 3)), [3, 4])

    def test_init_is_seeded(self):
        one = init_model(np.random.default_rng(9), 3, 4, 2, 2)
        two = init_model(np.random.default_rng(9), 3, 4, 2, 2)
        self.assertEqual(one.fingerprint(), two.fingerprint())
        self.assertEqual(one.input_dim, 3)
        self.assertEqual(one.feature_dim, 2)


if __name__ == '__main__':
    unittest.main()
