"""
Fidelity-cost training of re-uploading QNNs.

Label +1 is mapped to |0> and label -1 to |1> on qubit 0. For one qubit the
per-point fidelity |<label|state>|^2 is exactly the qubit-0 marginal, so the
n-qubit cost and the decision rule both read the same quantity.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np
from tqdm import tqdm

from nqklab.config import TrainConfig
from nqklab.data import FeatureTable
from nqklab.logging_setup import progress_disabled
from nqklab.qsim import _probs_first_qubit_zero
from nqklab.reupload import EncodedPoint, QnnParams, extend_params, init_params, qnn_states

logger = logging.getLogger(__name__)

# Four-term shift rule for controlled rotations (generator spectrum {0, +-1/2})
_SHIFT_A = np.pi / 2
_SHIFT_B = 3 * np.pi / 2
_COEF_A = (np.sqrt(2) + 1) / (4 * np.sqrt(2))
_COEF_B = (np.sqrt(2) - 1) / (4 * np.sqrt(2))


@dataclass
class TrainHistory:
    initial_cost: float
    cost_per_epoch: List[float]
    best_cost: float
    best_params: QnnParams
    config: Optional[TrainConfig] = None

    def to_dict(self) -> Dict:
        return {
            'initial_cost': self.initial_cost,
            'cost_per_epoch': list(self.cost_per_epoch),
            'best_cost': self.best_cost,
            'best_params': self.best_params.to_dict(),
            'config': self.config.model_dump() if self.config is not None else None,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'TrainHistory':
        return cls(
            initial_cost=float(data['initial_cost']),
            cost_per_epoch=[float(c) for c in data['cost_per_epoch']],
            best_cost=float(data['best_cost']),
            best_params=QnnParams.from_dict(data['best_params']),
            config=TrainConfig(**data['config']) if data.get('config') else None,
        )


@dataclass(frozen=True)
class AdamState:
    params: np.ndarray
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def start(cls, params: np.ndarray) -> 'AdamState':
        params = np.asarray(params, dtype=np.float64)
        return cls(params.copy(), np.zeros_like(params), np.zeros_like(params), 0)


def _check_labels(labels: np.ndarray) -> None:
    if labels.size == 0:
        raise ValueError("fidelity cost needs at least one data point")
    if not np.all(np.isin(labels, (-1, 1))):
        raise ValueError("labels must be +1 or -1")


def _cost_from_states(states: np.ndarray, labels: np.ndarray) -> float:
    p0 = _probs_first_qubit_zero(states)
    fid = np.where(labels == 1, p0, 1.0 - p0)
    return float(np.mean(1.0 - fid))


def _batch_cost(params: QnnParams, features: np.ndarray, labels: np.ndarray) -> float:
    return _cost_from_states(qnn_states(params, features), labels)


def fidelity_cost(params: QnnParams, data: FeatureTable) -> float:
    """Mean of 1 - fidelity between each point's output and its label state."""
    labels = np.asarray(data.labels)
    _check_labels(labels)
    return _batch_cost(params, data.features, labels)


def _cost_fn(params: QnnParams, features: np.ndarray, labels: np.ndarray) -> Callable[[np.ndarray], float]:
    def cost(flat: np.ndarray) -> float:
        return _batch_cost(params.with_flat(flat), features, labels)
    return cost


def _finite_diff(cost: Callable[[np.ndarray], float], x: np.ndarray, step: float) -> np.ndarray:
    grad = np.zeros_like(x)
    for i in range(x.size):
        shift = np.zeros_like(x)
        shift[i] = step
        grad[i] = (cost(x + shift) - cost(x - shift)) / (2 * step)
    return grad


def _parameter_shift(cost: Callable[[np.ndarray], float], x: np.ndarray, n_single: int) -> np.ndarray:
    """Two-term rule for the single-qubit angles, four-term rule for the couplings."""
    grad = np.zeros_like(x)
    for i in range(x.size):
        unit = np.zeros_like(x)
        unit[i] = 1.0
        if i < n_single:
            grad[i] = (cost(x + _SHIFT_A * unit) - cost(x - _SHIFT_A * unit)) / 2
        else:
            grad[i] = (_COEF_A * (cost(x + _SHIFT_A * unit) - cost(x - _SHIFT_A * unit))
                       - _COEF_B * (cost(x + _SHIFT_B * unit) - cost(x - _SHIFT_B * unit)))
    return grad


def _gradient(params: QnnParams, features: np.ndarray, labels: np.ndarray, config: TrainConfig) -> np.ndarray:
    cost = _cost_fn(params, features, labels)
    x = params.flat()
    if config.gradient_method == 'parameter-shift':
        return _parameter_shift(cost, x, params.theta.size)
    return _finite_diff(cost, x, config.fd_step)


def gradient(params: QnnParams, data: FeatureTable, config: TrainConfig) -> np.ndarray:
    """
    Gradient of the fidelity cost over all trainable angles, theta then phi.

    Args:
        params: Point of evaluation
        data: Labelled features
        config: Selects central differences (step fd_step) or the parameter-shift rule

    Returns:
        Vector of length params.n_parameters
    """
    labels = np.asarray(data.labels)
    _check_labels(labels)
    return _gradient(params, data.features, labels, config)


def adam_step(state: AdamState, grad: np.ndarray, config: TrainConfig) -> AdamState:
    """One bias-corrected Adam update."""
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != state.params.shape or state.m.shape != state.params.shape:
        raise ValueError(f"shape mismatch: params {state.params.shape}, gradient {grad.shape}, "
                         f"moments {state.m.shape}")
    t = state.t + 1
    m = config.adam_beta1 * state.m + (1.0 - config.adam_beta1) * grad
    v = config.adam_beta2 * state.v + (1.0 - config.adam_beta2) * (grad * grad)
    m_hat = m / (1.0 - config.adam_beta1 ** t)
    v_hat = v / (1.0 - config.adam_beta2 ** t)
    params = state.params - config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_eps)
    return AdamState(params, m, v, t)


def _batches(n_points: int, batch_size: Optional[int], rng: np.random.Generator) -> List[np.ndarray]:
    if batch_size is None or batch_size >= n_points:
        return [np.arange(n_points)]
    order = rng.permutation(n_points)
    return [order[i:i + batch_size] for i in range(0, n_points, batch_size)]


def train_qnn(init: QnnParams, data: FeatureTable, config: TrainConfig) -> TrainHistory:
    """
    Mini-batch Adam on the fidelity cost, keeping the best parameters seen.

    The full-data cost is evaluated before training and after every epoch;
    the returned best_cost is the minimum of those evaluations, so it never
    exceeds the initial cost.
    """
    features = np.asarray(data.features, dtype=np.float64)
    labels = np.asarray(data.labels)
    _check_labels(labels)
    rng = np.random.default_rng(config.seed)

    initial_cost = _batch_cost(init, features, labels)
    best_cost, best_flat = initial_cost, init.flat()
    state = AdamState.start(init.flat())
    costs: List[float] = []

    logger.info("🚀 Training %d-qubit QNN (%d layers, %d angles) on %d points, initial cost %.5f",
                init.n_qubits, init.n_layers, init.n_parameters, labels.size, initial_cost)
    for epoch in tqdm(range(config.epochs), desc=f"{init.n_qubits}q epochs", leave=False,
                      disable=progress_disabled(logger)):
        for idx in _batches(labels.size, config.batch_size, rng):
            current = init.with_flat(state.params)
            grad = _gradient(current, features[idx], labels[idx], config)
            state = adam_step(state, grad, config)
        if not np.all(np.isfinite(state.params)):
            logger.error("Non-finite parameters after epoch %d; keeping best-seen parameters", epoch + 1)
            break
        cost = _batch_cost(init.with_flat(state.params), features, labels)
        costs.append(cost)
        if cost < best_cost:
            best_cost, best_flat = cost, state.params.copy()
        logger.debug("epoch %d cost %.6f (best %.6f)", epoch + 1, cost, best_cost)

    logger.info("✅ Finished %d-qubit QNN: best cost %.5f", init.n_qubits, best_cost)
    return TrainHistory(initial_cost, costs, best_cost, init.with_flat(best_flat), config)


def qnn_probabilities(params: QnnParams, features: np.ndarray) -> np.ndarray:
    return _probs_first_qubit_zero(qnn_states(params, np.atleast_2d(features)))


def predict_labels(params: QnnParams, features: np.ndarray) -> np.ndarray:
    """+1 where P(qubit 0 = |0>) > 1/2, otherwise -1 (ties go to -1)."""
    return np.where(qnn_probabilities(params, features) > 0.5, 1, -1)


def qnn_predict(params: QnnParams, point: EncodedPoint) -> int:
    return int(predict_labels(params, point.features[None, :])[0])


def qnn_accuracy(params: QnnParams, data: FeatureTable) -> float:
    return float(np.mean(predict_labels(params, data.features) == np.asarray(data.labels)))


def scale_qnn(data: FeatureTable, n_max: int, config: TrainConfig, n_layers: int,
              init: Optional[QnnParams] = None, extension_noise: float = 0.0,
              topology: str = 'star') -> List[TrainHistory]:
    """
    Grow a QNN one qubit at a time, retraining all angles at every size.

    Each stage starts from the previous stage's best parameters extended with
    zero couplings, whose cost equals that best cost, so best costs are
    non-increasing over the returned histories.

    Args:
        data: Labelled features in [-1, 1]
        n_max: Largest qubit count
        config: Optimiser settings; stage k trains with seed config.seed + k - 1
        n_layers: QNN depth
        init: Optional 1-qubit starting point; drawn uniformly from the seed otherwise
        extension_noise: Gaussian width added to the copied angles of each new qubit
        topology: Coupling layout, 'star' or 'chain'

    Returns:
        One TrainHistory per qubit count 1..n_max
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    rng = np.random.default_rng(config.seed)
    params = init if init is not None else init_params(1, n_layers, rng, topology=topology)
    histories: List[TrainHistory] = []
    for n in range(1, n_max + 1):
        if n > 1:
            params = extend_params(histories[-1].best_params, noise=extension_noise, rng=rng)
        history = train_qnn(params, data, config.model_copy(update={'seed': config.seed + n - 1}))
        if histories and abs(history.initial_cost - histories[-1].best_cost) > 1e-10:
            logger.warning("Extension to %d qubits changed the cost: %.3e vs %.3e", n,
                           history.initial_cost, histories[-1].best_cost)
        histories.append(history)
    return histories
