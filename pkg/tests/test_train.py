import unittest
import numpy as np
from numpy.testing import assert_allclose
from context import geodl
from geodl.nn.model import ModelState, init_model
from geodl.nn.train_net import (
    DivergenceError,
    HyperParams,
    learning_rate,
    sgd_step,
    train_base,
    incremental_step,
    distillation_terms,
    update_memory
)
from geodl.task.stream import TaskStream, make_task_stream
from geodl.tools.metrics import evaluate


def small_stream(noise_sigma=0.5, seed=0):
    return make_task_stream(TaskStream(
        input_dim=5, classes_total=6, base_classes=2, tasks=2, classes_per_task=2,
        per_class_train=16, per_class_test=8, noise_sigma=noise_sigma, seed=seed))


def small_hyper(**changes):
    data = dict(lr=0.1, epochs_base=5, epochs_incr=3, batch=8, subspace_n=2, memory_per_class=4)
    data.update(changes)
    return HyperParams(**data)


def base_model(stream, hyper, seed=0):
    theta = init_model(np.random.default_rng(seed), 5, 6, 3, 2)
    return train_base(stream[0], hyper, theta, np.random.default_rng(seed + 100))


class TestLearningRate(unittest.TestCase):
    def test_schedule(self):
        hyper = HyperParams(lr=0.05, lr_decay=0.1)
        self.assertAlmostEqual(learning_rate(hyper, 0, 60), 0.05)
        self.assertAlmostEqual(learning_rate(hyper, 29, 60), 0.05)
        self.assertAlmostEqual(learning_rate(hyper, 30, 60), 0.005)
        self.assertAlmostEqual(learning_rate(hyper, 45, 60), 0.0005)
        self.assertAlmostEqual(learning_rate(hyper, 0, 1), 0.05)


class TestSGDStep(unittest.TestCase):
    def test_hand_computed_update(self):
        # linear encoder W2 = I, one sample x = e1 of class 0, prototypes e1 and e2
        theta = ModelState(w1=None, b1=None, w2=np.eye(2), b2=np.zeros(2),
                           phi=np.eye(2), seen_classes=[0, 1])
        sgd_step(theta, np.array([[1.0, 0.0]]), np.array([0]), 1.0, HyperParams())
        gg = 1.0 / (np.e + 1.0)
        assert_allclose(theta.w2, [[1.0, 0.0], [-gg, 1.0]], atol=1e-8)
        assert_allclose(theta.b2, [0.0, -gg], atol=1e-8)
        assert_allclose(theta.phi, [[1.0, 0.0], [-gg, 1.0]], atol=1e-8)

    def test_matches_finite_differences(self):
        from scipy.special import log_softmax
        from geodl.nn.model import forward, cosine_logits
        rng = np.random.default_rng(1)
        theta = init_model(rng, 4, 3, 2, 3)
        xx, yy = rng.normal(size=(6, 4)), rng.integers(0, 3, size=6)

        def loss_of(state):
            zz, _ = forward(state, xx)
            return -np.mean(log_softmax(cosine_logits(zz, state.phi), axis=1)[np.arange(6), yy])

        stepped = theta.copy()
        sgd_step(stepped, xx, yy, 1.0, HyperParams())
        hh = 1e-6
        for name, value in theta.params().items():
            grad = value - stepped.params()[name]
            for idx in np.ndindex(value.shape):
                plus, minus = theta.copy(), theta.copy()
                plus.params()[name][idx] += hh
                minus.params()[name][idx] -= hh
                fd = (loss_of(plus) - loss_of(minus)) / (2 * hh)
                self.assertAlmostEqual(grad[idx], fd, delta=1e-8)


class TestTrainBase(unittest.TestCase):
    def test_zero_epochs(self):
        stream = small_stream()
        theta = init_model(np.random.default_rng(0), 5, 6, 3, 2)
        model, memory = train_base(stream[0], small_hyper(epochs_base=0), theta, np.random.default_rng(1))
        self.assertEqual(model.fingerprint(), theta.fingerprint())
        self.assertEqual(memory.classes, [0, 1])

    def test_deterministic(self):
        stream = small_stream()
        one, _ = base_model(stream, small_hyper())
        two, _ = base_model(stream, small_hyper())
        self.assertEqual(one.fingerprint(), two.fingerprint())

    def test_separable_data(self):
        stream = small_stream(noise_sigma=0.0)
        model, _ = base_model(stream, small_hyper(epochs_base=300))
        self.assertEqual(evaluate(model, stream[0].x_train, stream[0].y_train), 1.0)

    def test_exemplars_within_budget(self):
        _, memory = base_model(small_stream(), small_hyper())
        self.assertEqual(len(memory), 8)
        for label in memory.classes:
            self.assertLessEqual(len(memory.store[label]), 4)

    def test_divergence(self):
        stream = small_stream()
        theta = init_model(np.random.default_rng(0), 5, 6, 3, 2)
        theta.w2[0, 0] = np.inf
        with np.errstate(all="ignore"):
            with self.assertRaises(DivergenceError) as ctx:
                train_base(stream[0], small_hyper(), theta, np.random.default_rng(1))
        self.assertEqual(ctx.exception.step, 0)
        self.assertEqual(ctx.exception.phase, 0)


class TestIncrementalStep(unittest.TestCase):
    def setUp(self):
        self.stream = small_stream()
        self.hyper = small_hyper()
        self.model, self.memory = base_model(self.stream, self.hyper)

    def test_old_model_untouched(self):
        before = self.model.fingerprint()
        for mode in ("none", "lwf", "cosine", "geodl"):
            new = incremental_step(self.model, self.stream[1], self.memory, self.hyper, mode,
                                   np.random.default_rng(0))
            self.assertEqual(new.num_classes, 4)
            self.assertEqual(new.seen_classes, [0, 1, 2, 3])
        self.assertEqual(self.model.fingerprint(), before)

    def test_zero_beta_matches_none(self):
        hyper = small_hyper(beta=0.0)
        plain = incremental_step(self.model, self.stream[1], self.memory, hyper, "none", np.random.default_rng(0))
        for mode in ("lwf", "cosine", "geodl"):
            other = incremental_step(self.model, self.stream[1], self.memory, hyper, mode, np.random.default_rng(0))
            self.assertEqual(other.fingerprint(), plain.fingerprint())

    def test_zero_learning_rate(self):
        hyper = small_hyper(lr=0.0)
        for mode in ("lwf", "cosine", "geodl"):
            new = incremental_step(self.model, self.stream[1], self.memory, hyper, mode, np.random.default_rng(0))
            for name, value in self.model.params().items():
                assert_allclose(new.params()[name][:len(value)], value, rtol=0, atol=0)

    def test_prototypes_start_unit_norm(self):
        hyper = small_hyper(epochs_incr=0)
        new = incremental_step(self.model, self.stream[1], self.memory, hyper, "geodl", np.random.default_rng(0))
        assert_allclose(np.linalg.norm(new.phi[2:], axis=1), np.ones(2), atol=1e-12)

    def test_rejects_seen_classes(self):
        with self.assertRaises(ValueError):
            incremental_step(self.model, self.stream[0], self.memory, self.hyper, "none", np.random.default_rng(0))
        with self.assertRaises(ValueError):
            incremental_step(self.model, self.stream[1], self.memory, self.hyper, "bogus", np.random.default_rng(0))

    def test_memory_update(self):
        new = incremental_step(self.model, self.stream[1], self.memory, self.hyper, "geodl", np.random.default_rng(0))
        update_memory(self.memory, new, self.stream[1])
        self.assertEqual(self.memory.classes, [0, 1, 2, 3])
        self.assertLessEqual(len(self.memory), 4 * 4)


class TestDistillationTerms(unittest.TestCase):
    def setUp(self):
        self.stream = small_stream()
        self.hyper = small_hyper()
        self.model, _ = base_model(self.stream, self.hyper)
        self.xx = self.stream[1].x_train[:8]

    def test_copied_encoder_geodl_equals_cosine(self):
        copy = self.model.copy()
        geo = distillation_terms(self.model, copy, self.xx, self.hyper, "geodl", 1.0)
        cos = distillation_terms(self.model, copy, self.xx, self.hyper, "cosine", 1.0)
        self.assertAlmostEqual(geo.loss, cos.loss, delta=1e-6)

    def test_none_and_zero_weight(self):
        for mode, beta_ad in (("none", 1.0), ("geodl", 0.0)):
            term = distillation_terms(self.model, self.model.copy(), self.xx, self.hyper, mode, beta_ad)
            self.assertEqual(term.loss, 0.0)
            self.assertIsNone(term.dz)
            self.assertIsNone(term.dlogits_old)

    def test_single_sample_batch_skips_geodl(self):
        with self.assertLogs("geodl.nn.train_net", level="WARNING"):
            term = distillation_terms(self.model, self.model.copy(), self.xx[:1], self.hyper, "geodl", 1.0)
        self.assertIsNone(term.dz)

    def test_lwf_gradient_on_old_logits(self):
        new = self.model.copy()
        new.add_prototypes(np.array([[1.0, 0.0, 0.0]]), [2])
        term = distillation_terms(self.model, new, self.xx, self.hyper, "lwf", 2.0)
        self.assertEqual(term.dlogits_old.shape, (8, 2))
        self.assertGreaterEqual(term.loss, 0.0)


if __name__ == '__main__':
    unittest.main()
