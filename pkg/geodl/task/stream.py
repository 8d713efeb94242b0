import dataclasses
from dataclasses import dataclass
from typing import List
import numpy as np
from sklearn.preprocessing import StandardScaler
from geodl.constants import class_mean_scale, stream_tag_data


@dataclass(frozen=True)
class TaskStream:
    """Desk-scale class-incremental problem: Gaussian classes around seeded means.

    Labels are assigned after one seeded shuffle of the classes, so the base
    task owns labels 0..base_classes-1 and task t the next classes_per_task.
    """
    input_dim: int = 16
    classes_total: int = 20
    base_classes: int = 10
    tasks: int = 5
    classes_per_task: int = 2
    per_class_train: int = 100
    per_class_test: int = 50
    noise_sigma: float = 3.0
    seed: int = 0
    master_seed: int = 1993

    def __post_init__(self):
        if self.base_classes + self.tasks * self.classes_per_task != self.classes_total:
            raise ValueError(
                "inconsistent class counts: "
                f"{self.base_classes} + {self.tasks} * {self.classes_per_task} != {self.classes_total}")
        for key in ("input_dim", "base_classes", "classes_per_task", "per_class_train", "per_class_test"):
            if getattr(self, key) < 1:
                raise ValueError(f"{key} must be >= 1, got {getattr(self, key)}")
        if self.tasks < 0:
            raise ValueError(f"tasks must be >= 0, got {self.tasks}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")

    @classmethod
    def from_config(cls, cfg, seed: int) -> "TaskStream":
        return cls(
            input_dim=cfg.input_dim,
            classes_total=cfg.classes_total,
            base_classes=cfg.base_classes,
            tasks=cfg.tasks,
            classes_per_task=cfg.classes_per_task,
            per_class_train=cfg.per_class_train,
            per_class_test=cfg.per_class_test,
            noise_sigma=cfg.noise_sigma,
            seed=seed,
            master_seed=cfg.master_seed
        )

    def phase_classes(self, phase: int) -> List[int]:
        if not 0 <= phase <= self.tasks:
            raise ValueError(f"phase must lie in [0, {self.tasks}], got {phase}")
        if phase == 0:
            return list(range(self.base_classes))
        start = self.base_classes + (phase - 1) * self.classes_per_task
        return list(range(start, start + self.classes_per_task))


@dataclass(frozen=True, eq=False)
class TaskData:
    """Train and test samples of one phase; rows are samples, labels are class indices."""
    phase: int
    classes: List[int]
    x_train: np.ndarray
    y_train: np.ndarray
    x_test: np.ndarray
    y_test: np.ndarray

    def class_train(self, label: int) -> np.ndarray:
        return self.x_train[self.y_train == label]


@dataclass(frozen=True, eq=False)
class RealizedStream:
    spec: TaskStream
    class_means: np.ndarray
    class_order: np.ndarray
    phases: List[TaskData]

    def __len__(self):
        return len(self.phases)

    def __getitem__(self, phase: int) -> TaskData:
        return self.phases[phase]

    def test_union(self, upto: int):
        """Test samples of every class seen in phases 0..upto."""
        chosen = self.phases[:upto + 1]
        return (np.vstack([pp.x_test for pp in chosen]),
                np.concatenate([pp.y_test for pp in chosen]))


def make_task_stream(
        spec: TaskStream
    ) -> RealizedStream:
    """Draw the datasets D_0..D_T of a TaskStream.

    Parameters
    ----------
    spec : TaskStream
        Counts, noise level and seeds of the stream.

    Returns
    -------
    RealizedStream
        `class_means[i]` is the mean of label i; `class_order[i]` is the
        index the class had before the shuffle.
    """
    rng = np.random.default_rng([spec.master_seed, spec.seed, stream_tag_data])
    raw_means = rng.normal(size=(spec.classes_total, spec.input_dim)) * class_mean_scale
    order = rng.permutation(spec.classes_total)
    means = raw_means[order]

    phases = []
    for phase in range(spec.tasks + 1):
        classes = spec.phase_classes(phase)
        x_train, y_train, x_test, y_test = [], [], [], []
        for label in classes:
            noise = rng.normal(size=(spec.per_class_train + spec.per_class_test, spec.input_dim))
            samples = means[label] + spec.noise_sigma * noise
            x_train.append(samples[:spec.per_class_train])
            x_test.append(samples[spec.per_class_train:])
            y_train.append(np.full(spec.per_class_train, label, dtype=int))
            y_test.append(np.full(spec.per_class_test, label, dtype=int))
        phases.append(TaskData(
            phase=phase,
            classes=classes,
            x_train=np.vstack(x_train),
            y_train=np.concatenate(y_train),
            x_test=np.vstack(x_test),
            y_test=np.concatenate(y_test)
        ))
    return RealizedStream(spec=spec, class_means=means, class_order=order, phases=phases)


def standardize_stream(
        stream: RealizedStream
    ) -> RealizedStream:
    """Rescale every phase with the per-feature mean and scale of the base training set.

    Later phases reuse the base statistics, so no sample of D_1..D_T is seen
    before its phase. `class_means` is mapped the same way.
    """
    scaler = StandardScaler().fit(stream[0].x_train)
    phases = [dataclasses.replace(pp, x_train=scaler.transform(pp.x_train), x_test=scaler.transform(pp.x_test))
              for pp in stream.phases]
    return dataclasses.replace(stream, class_means=scaler.transform(stream.class_means), phases=phases)


def realize_stream(cfg, seed: int) -> RealizedStream:
    """The stream one run of `cfg` trains on, standardized when `cfg.standardize` is set."""
    stream = make_task_stream(TaskStream.from_config(cfg, seed))
    return standardize_stream(stream) if cfg.standardize else stream
