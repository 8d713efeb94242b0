import unittest
import numpy as np
from context import geodl
from geodl.nn.model import ModelState, init_model
from geodl.select.herding import ExemplarMemory
from geodl.task.stream import TaskStream, make_task_stream
from geodl.tools.metrics import ExperimentReport, compute_metrics, evaluate, evaluate_nme


def identity_model(phi):
    dim = phi.shape[1]
    return ModelState(w1=None, b1=None, w2=np.eye(dim), b2=np.zeros(dim),
                      phi=np.array(phi, dtype=float), seen_classes=list(range(len(phi))))


class TestComputeMetrics(unittest.TestCase):
    def test_examples(self):
        report = compute_metrics([0.9, 0.8, 0.7], 0.95, 0.6)
        self.assertAlmostEqual(report.average_accuracy, 0.8)
        self.assertAlmostEqual(report.forgetting_rate, 0.35)
        self.assertEqual(report.accuracies(), [0.95, 0.9, 0.8, 0.7])

    def test_single_task(self):
        report = compute_metrics([0.5], 0.5, 0.7, mode="geodl", seed=3)
        self.assertAlmostEqual(report.average_accuracy, 0.5)
        self.assertAlmostEqual(report.forgetting_rate, -0.2)
        self.assertEqual((report.mode, report.seed), ("geodl", 3))

    def test_empty(self):
        with self.assertRaises(ValueError):
            compute_metrics([], 0.9, 0.9)

    def test_dict_roundtrip(self):
        report = compute_metrics([0.9, 0.8], 0.95, 0.6, mode="lwf", seed=1,
                                 config_hash="abc", wall_ms=[0.0, 0.0, 0.0])
        self.assertEqual(ExperimentReport.from_dict(report.to_dict()), report)


class TestEvaluate(unittest.TestCase):
    def test_prototypes_at_class_means(self):
        stream = make_task_stream(TaskStream(noise_sigma=0.0, seed=1))
        model = identity_model(stream.class_means)
        xx, yy = stream.test_union(5)
        self.assertEqual(evaluate(model, xx, yy), 1.0)

    def test_chance_level(self):
        scores = []
        for seed in range(20):
            rng = np.random.default_rng(seed)
            model = init_model(rng, 4, 0, 3, 2)
            xx = rng.normal(size=(1000, 4))
            yy = np.repeat([0, 1], 500)
            scores.append(evaluate(model, xx, yy))
        self.assertAlmostEqual(np.mean(scores), 0.5, delta=0.05)

    def test_errors(self):
        model = identity_model(np.eye(2))
        with self.assertRaises(ValueError):
            evaluate(model, np.zeros((0, 2)), np.zeros(0))
        with self.assertRaises(ValueError):
            evaluate(model, np.ones((3, 2)), np.zeros(2))
        with self.assertRaises(ValueError):
            evaluate(model, np.ones((1, 2)), np.array([2]))


class TestEvaluateNME(unittest.TestCase):
    def test_exemplar_means(self):
        model = identity_model(np.eye(2))
        memory = ExemplarMemory(2, 2)
        memory.add(0, np.array([[1.0, 0.1], [1.0, -0.1]]))
        memory.add(1, np.array([[0.1, 1.0], [-0.1, 1.0]]))
        xx = np.array([[2.0, 0.5], [0.3, 3.0], [1.0, 0.9]])
        self.assertEqual(evaluate_nme(model, memory, xx, np.array([0, 1, 0])), 1.0)

    def test_missing_class(self):
        model = identity_model(np.eye(2))
        memory = ExemplarMemory(2, 2)
        memory.add(0, np.ones((1, 2)))
        with self.assertRaises(ValueError):
            evaluate_nme(model, memory, np.ones((1, 2)), np.array([0]))


if __name__ == '__main__':
    unittest.main()
