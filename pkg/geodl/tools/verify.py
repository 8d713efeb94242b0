import os
import sys
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional
import numpy as np
from geodl.constants import verify_suites, stream_tag_model, stream_tag_train
from geodl.geodesic import (
    Subspace,
    orthonormalize,
    cs_decompose,
    geodesic_point,
    geodesic_kernel,
    kernel_quadrature_oracle,
    lambda_coefficients
)
from geodl.nn.losses import (
    FeaturePair,
    adaptive_beta,
    geodl_loss,
    geodl_loss_grad,
    cosine_distill_loss,
    lwf_loss
)
from geodl.nn.model import init_model
from geodl.nn.train_net import (
    HyperParams,
    train_base,
    incremental_step,
    distillation_terms
)
from geodl.task.stream import realize_stream
from geodl.tools.experiment import run_experiment
from geodl.utils.config import ExperimentConfig


logging.basicConfig(
    format="%(asctime)s | %(levelname)s | %(name)s | %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S",
    level=os.environ.get("LOGLEVEL", "INFO").upper(),
    stream=sys.stdout,
)
logger = logging.getLogger(__name__)


@dataclass
class PropertyResult:
    suite: str
    name: str
    measured: float
    tolerance: float
    passed: bool

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.suite:8s} {self.name}: measured {self.measured:.3e} (tolerance {self.tolerance:.1e})"


def _below(suite: str, name: str, measured: float, tolerance: float) -> PropertyResult:
    measured = float(measured)
    return PropertyResult(suite, name, measured, tolerance, bool(measured < tolerance))


def random_subspace(rng: np.random.Generator, d: int, n: int) -> Subspace:
    return orthonormalize(rng.normal(size=(d, n)))


def subspace_pairs(seed: int = 0, count: int = 100):
    """Seeded (P_old, P_new) pairs cycling over d in {8, 16, 32} and n in {2, 4, d/2 - 1}."""
    rng = np.random.default_rng(seed)
    shapes = [(dd, nn) for dd in (8, 16, 32) for nn in sorted({2, 4, dd // 2 - 1})]
    for ii in range(count):
        dd, nn = shapes[ii % len(shapes)]
        yield random_subspace(rng, dd, nn), random_subspace(rng, dd, nn)


def swap_pairs(seed: int = 1, count: int = 30):
    """Seeded pairs for the role-swap check, including n > d/2 where some angles are forced to zero."""
    rng = np.random.default_rng(seed)
    shapes = [(8, 2), (16, 7), (8, 6), (16, 14), (32, 30)]
    for ii in range(count):
        dd, nn = shapes[ii % len(shapes)]
        yield random_subspace(rng, dd, nn), random_subspace(rng, dd, nn)


def orthogonal_lines_kernel() -> np.ndarray:
    e1 = Subspace(np.array([[1.0], [0.0]]))
    e2 = Subspace(np.array([[0.0], [1.0]]))
    return geodesic_kernel(cs_decompose(e1, e2)).q


def check_geometry(cfg: ExperimentConfig) -> List[PropertyResult]:
    quad_err, asym, min_eig, same_err, end_err, orth_err = 0.0, 0.0, np.inf, 0.0, 0.0, 0.0
    conv_err, same_quad_err = 0.0, 0.0
    for p_old, p_new in subspace_pairs():
        dec = cs_decompose(p_old, p_new)
        q = geodesic_kernel(dec).q
        oracle = kernel_quadrature_oracle(dec, cfg.quadrature_steps)
        fine = kernel_quadrature_oracle(dec, 2 * cfg.quadrature_steps - 1)
        conv_err = max(conv_err, np.max(np.abs(oracle - fine)))
        same_quad = kernel_quadrature_oracle(cs_decompose(p_old, p_old), cfg.quadrature_steps)
        same_quad_err = max(same_quad_err, np.max(np.abs(same_quad - p_old.projector())))
        quad_err = max(quad_err, np.linalg.norm(q - 2.0 * oracle) / np.linalg.norm(q))
        asym = max(asym, np.max(np.abs(q - q.T)))
        min_eig = min(min_eig, np.min(np.linalg.eigvalsh(q)))
        same = geodesic_kernel(cs_decompose(p_old, p_old)).q
        same_err = max(same_err, np.linalg.norm(same - 2.0 * p_old.projector()))
        for nu, target in ((0.0, p_old), (1.0, p_new)):
            pi = geodesic_point(dec, nu)
            end_err = max(end_err, np.linalg.norm(pi @ pi.T - target.projector()))
        for nu in (0.0, 0.25, 0.5, 0.75, 1.0):
            pi = geodesic_point(dec, nu)
            orth_err = max(orth_err, np.max(np.abs(pi.T @ pi - np.eye(pi.shape[1]))))

    swap_omega, swap_eig = 0.0, 0.0
    for p_old, p_new in swap_pairs():
        fwd, bwd = cs_decompose(p_old, p_new), cs_decompose(p_new, p_old)
        swap_omega = max(swap_omega, np.max(np.abs(fwd.omegas - bwd.omegas)))
        eig_fwd = np.linalg.eigvalsh(geodesic_kernel(fwd).q)
        eig_bwd = np.linalg.eigvalsh(geodesic_kernel(bwd).q)
        swap_eig = max(swap_eig, np.max(np.abs(eig_fwd - eig_bwd)))

    lines = orthogonal_lines_kernel()
    expected = np.array([[1.0, -2.0 / np.pi], [-2.0 / np.pi, 1.0]])
    lines_loss = geodl_loss(FeaturePair(np.array([1.0, 0.0]), np.array([0.0, 1.0])), lines, epsilon=0.0)

    # both branches at the same angles around the switch point
    omegas = np.array([0.999e-6, 1.0e-6, 1.001e-6])
    taylor = np.array([1.0 - (2.0 * omegas) ** 2 / 6.0, -omegas])
    exact = np.array([np.sin(2.0 * omegas) / (2.0 * omegas), (np.cos(2.0 * omegas) - 1.0) / (2.0 * omegas)])
    cont = np.max(np.abs(taylor - exact))
    lam = lambda_coefficients([0.0, np.pi / 4, np.pi / 2])
    lam_expected = np.array([
        [2.0, 1.0 + 2.0 / np.pi, 1.0],
        [0.0, -2.0 / np.pi, -2.0 / np.pi],
        [0.0, 1.0 - 2.0 / np.pi, 1.0],
    ])
    lam_err = np.max(np.abs(np.array([lam.lambda1, lam.lambda2, lam.lambda3]) - lam_expected))

    suite = "geometry"
    return [
        _below(suite, "closed-form Q = 2 x quadrature, max relative error", quad_err, 1e-6),
        _below(suite, "Q symmetric, max |Q - Q^T|", asym, 1e-10),
        PropertyResult(suite, "Q positive semi-definite, min eigenvalue", float(min_eig), -1e-8, bool(min_eig >= -1e-8)),
        _below(suite, "identical subspaces, |Q - 2PP^T|_F", same_err, 1e-8),
        _below(suite, "flow endpoints span P_old and P_new", end_err, 1e-6),
        _below(suite, "flow points column-orthonormal", orth_err, 1e-8),
        _below(suite, "quadrature converged, max change at twice the steps", conv_err, 1e-9),
        _below(suite, "identical subspaces, quadrature = PP^T", same_quad_err, 1e-10),
        _below(suite, "role swap, max omega difference", swap_omega, 1e-8),
        _below(suite, "role swap, max Q eigenvalue difference", swap_eig, 1e-8),
        _below(suite, "orthogonal lines Q = [[1, -2/pi], [-2/pi, 1]]", np.max(np.abs(lines - expected)), 1e-12),
        _below(suite, "orthogonal lines loss = 1 + 2/pi", abs(lines_loss - (1.0 + 2.0 / np.pi)), 1e-12),
        _below(suite, "lambda continuous at the small-angle switch", cont, 1e-8),
        _below(suite, "lambda exact at 0, pi/4, pi/2", lam_err, 1e-12),
    ]


def _fd_grad(fun: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    grad = np.zeros_like(x)
    for ii in range(len(x)):
        step = np.zeros_like(x)
        step[ii] = h
        grad[ii] = (fun(x + step) - fun(x - step)) / (2.0 * h)
    return grad


def check_losses(cfg: ExperimentConfig) -> List[PropertyResult]:
    rng = np.random.default_rng(7)
    scale_err, eye_err, grad_err, sym_err, range_err = 0.0, 0.0, 0.0, 0.0, 0.0
    for ii in range(50):
        dd = (8, 64)[ii % 2]
        q = geodesic_kernel(cs_decompose(random_subspace(rng, dd, 3), random_subspace(rng, dd, 3))).q
        z_old, z_new = rng.normal(size=dd), rng.normal(size=dd)
        pair = FeaturePair(z_old, z_new)
        cc = float(rng.uniform(0.1, 10.0))
        base = geodl_loss(pair, q)
        scale_err = max(scale_err, abs(geodl_loss(pair, cc * q) - base))
        eye_err = max(eye_err, abs(geodl_loss(pair, 2.0 * np.eye(dd)) - cosine_distill_loss(pair)))
        sym_err = max(sym_err, abs(geodl_loss(FeaturePair(z_new, z_old), q) - base))
        range_err = max(range_err, -base, base - 2.0, 0.0)
        grad = geodl_loss_grad(pair, q).grad
        fd = _fd_grad(lambda zz: geodl_loss(FeaturePair(z_old, zz), q), z_new)
        grad_err = max(grad_err, np.linalg.norm(grad - fd) / max(np.linalg.norm(fd), 1e-300))

    drop = 0.0
    logits_old = rng.normal(size=5)
    floor = lwf_loss(logits_old, logits_old)
    for _ in range(20):
        direction = rng.normal(size=5)
        drop = max(drop, floor - lwf_loss(logits_old, logits_old + 0.1 * direction))

    suite = "losses"
    return [
        _below(suite, "kernel-scale invariance, max |L(cQ) - L(Q)|", scale_err, 1e-10),
        _below(suite, "Q = 2I recovers the cosine loss", eye_err, 1e-9),
        _below(suite, "gradient vs central finite differences, max relative error", grad_err, 1e-5),
        _below(suite, "symmetric in (z_old, z_new)", sym_err, 1e-12),
        _below(suite, "loss within [0, 2]", range_err, 1e-9),
        _below(suite, "lwf minimal at equal logits", drop, 1e-9),
        _below(suite, "adaptive beta 6 sqrt(10/50)", abs(adaptive_beta(6.0, 10, 50) - 6.0 * np.sqrt(0.2)), 1e-12),
    ]


def small_config(**changes) -> ExperimentConfig:
    """A problem small enough to train in well under a second."""
    data = dict(
        input_dim=6, hidden_dim=8, feature_dim=4, classes_total=6, base_classes=2,
        tasks=2, classes_per_task=2, per_class_train=20, per_class_test=10,
        epochs_base=4, epochs_incr=3, batch=8, subspace_n=2, memory_per_class=4,
        modes=["none", "geodl"], seeds=[0, 1]
    )
    data.update(changes)
    return ExperimentConfig.from_dict(data)


def _trained_base(cfg: ExperimentConfig, seed: int = 0):
    stream = realize_stream(cfg, seed)
    model = init_model(np.random.default_rng([cfg.master_seed, seed, stream_tag_model]),
                       cfg.input_dim, cfg.hidden_dim, cfg.feature_dim, cfg.base_classes)
    rng = np.random.default_rng([cfg.master_seed, seed, stream_tag_train])
    model, memory = train_base(stream[0], HyperParams.from_config(cfg), model, rng)
    return stream, model, memory, rng


def check_sim(cfg: ExperimentConfig, full: bool = False) -> List[PropertyResult]:
    small = small_config()
    suite = "sim"
    results = []

    first = run_experiment(small, "geodl", 3).to_dict()
    again = run_experiment(small, "geodl", 3).to_dict()
    results.append(PropertyResult(suite, "identical reports on rerun", 0.0, 0.0, first == again))

    zero = run_experiment(small.replace(beta=0.0), "geodl", 3)
    plain = run_experiment(small, "none", 3)
    gap = np.max(np.abs(np.array(zero.accuracies()) - np.array(plain.accuracies())))
    results.append(PropertyResult(suite, "beta = 0 geodl matches none", float(gap), 0.0, bool(gap == 0.0)))

    stream, model, memory, rng = _trained_base(small)
    hyper = HyperParams.from_config(small)
    before = model.fingerprint()
    new = incremental_step(model, stream[1], memory, hyper, "geodl", rng)
    results.append(PropertyResult(suite, "old model untouched by an increment", 0.0, 0.0, before == model.fingerprint()))
    expected = small.base_classes + small.classes_per_task
    results.append(PropertyResult(suite, "prototype count after one increment",
                                  float(new.num_classes), float(expected), new.num_classes == expected))
    results.append(PropertyResult(suite, "memory within budget", float(len(memory)),
                                  float(small.memory_per_class * len(memory.classes)),
                                  len(memory) <= small.memory_per_class * len(memory.classes)))

    x = stream[1].x_train[:small.batch]
    loss_geo = distillation_terms(model, model.copy(), x, hyper, "geodl", 1.0).loss
    loss_cos = distillation_terms(model, model.copy(), x, hyper, "cosine", 1.0).loss
    results.append(_below(suite, "copied encoder, first-batch geodl = cosine", abs(loss_geo - loss_cos), 1e-6))

    frozen = HyperParams.from_config(small.replace(lr=0.0))
    drift = 0.0
    for mode in ("lwf", "cosine", "geodl"):
        stepped = incremental_step(model, stream[1], memory, frozen, mode, np.random.default_rng(0))
        for name, value in model.params().items():
            drift = max(drift, np.max(np.abs(stepped.params()[name][:len(value)] - value)))
    results.append(PropertyResult(suite, "lr = 0 leaves every parameter in place",
                                  float(drift), 0.0, bool(drift == 0.0)))

    if full:
        results.extend(check_directional(cfg))
    return results


def check_directional(cfg: ExperimentConfig) -> List[PropertyResult]:
    """Mean forgetting of geodl below none by more than one pooled standard error."""
    reports: Dict[str, List] = {mode: [run_experiment(cfg, mode, ss) for ss in cfg.seeds]
                                for mode in ("none", "geodl")}
    forget = {mm: np.array([rr.forgetting_rate for rr in reports[mm]]) for mm in reports}
    acc = {mm: np.array([rr.average_accuracy for rr in reports[mm]]) for mm in reports}
    ns = len(cfg.seeds)
    pooled = np.sqrt((np.var(forget["none"], ddof=1) + np.var(forget["geodl"], ddof=1)) / ns) if ns > 1 else 0.0
    gap = forget["none"].mean() - forget["geodl"].mean()
    suite = "sim"
    return [
        PropertyResult(suite, "mean forgetting gap none - geodl over one pooled standard error",
                       float(gap), float(pooled), bool(gap > pooled)),
        PropertyResult(suite, "mean average accuracy geodl - none",
                       float(acc["geodl"].mean() - acc["none"].mean()), 0.0,
                       bool(acc["geodl"].mean() >= acc["none"].mean())),
    ]


def run_suite(
        suite: str,
        cfg: Optional[ExperimentConfig] = None,
        full: bool = False
    ) -> List[PropertyResult]:
    """Run one property suite (or all of them) and collect the measured values."""
    if suite not in verify_suites:
        raise ValueError(f"unknown suite {suite!r}, expected one of {', '.join(verify_suites)}")
    cfg = ExperimentConfig() if cfg is None else cfg
    results = []
    if suite in ("geometry", "all"):
        results.extend(check_geometry(cfg))
    if suite in ("losses", "all"):
        results.extend(check_losses(cfg))
    if suite in ("sim", "all"):
        results.extend(check_sim(cfg, full=full))
    return results


def format_report(results: List[PropertyResult]) -> str:
    passed = sum(rr.passed for rr in results)
    lines = [rr.line() for rr in results]
    lines.append(f"{passed}/{len(results)} properties passed")
    return "\n".join(lines)
