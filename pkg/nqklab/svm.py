"""
Soft-margin kernel SVM solved in the dual by SMO.

For quantum kernels the solver works on the shifted kernel (K + 1) / 2 and
classifies with sign(sum_i alpha_i y_i (k_i + 1) / 2), with no bias term
("none" bias mode). That dual has only the box 0 <= alpha <= C; the constant
1/2 in the shifted kernel takes the place of the bias, so there is no
sum(alpha y) = 0 constraint and SMO updates one alpha at a time.

The "fitted" mode is the usual biased SVM: pair updates keep
sum(alpha y) = 0 and the bias is recovered from the KKT conditions.
Classical baselines use the plain linear or RBF kernel with a fitted bias,
which is the standard SVC.

Working variables are the maximal KKT violators; ties go to the lowest
index, so the solver is deterministic.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigvalsh
from scipy.stats import loguniform
from sklearn.model_selection import ParameterSampler

from nqklab.config import SIM_CONFIG
from nqklab.data import FeatureChain, FeatureTable, fold_partitions, stratified_kfold
from nqklab.errors import ConfigError, NumericalError

logger = logging.getLogger(__name__)

BiasMode = Literal['none', 'fitted']
KernelKind = Literal['precomputed', 'linear', 'rbf']

DEFAULT_SVC_SPACE = {
    'C': loguniform(1e-2, 1e2),
    'kernel': ['linear', 'rbf'],
    'gamma': loguniform(1e-3, 1e1),
}


@dataclass
class SvmModel:
    alphas: np.ndarray
    labels: np.ndarray
    C: float
    b: float = 0.0
    bias: BiasMode = 'none'
    shift: bool = True
    kernel_kind: KernelKind = 'precomputed'
    gamma: Optional[float] = None
    point_ids: Tuple[str, ...] = ()
    constant_label: Optional[int] = None
    iterations: int = 0
    max_violation: float = 0.0

    @property
    def support_indices(self) -> np.ndarray:
        return np.flatnonzero(self.alphas > 1e-12)

    @property
    def support_ids(self) -> List[str]:
        return [self.point_ids[i] for i in self.support_indices] if self.point_ids else []

    def dual_objective(self, K: np.ndarray) -> float:
        """sum(alpha) - 1/2 alpha^T Q alpha on the kernel the model was trained with."""
        Q = _solver_kernel(np.asarray(K, dtype=np.float64), self.shift) * np.outer(self.labels, self.labels)
        return float(self.alphas.sum() - 0.5 * self.alphas @ Q @ self.alphas)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'alphas': self.alphas.tolist(),
            'labels': self.labels.tolist(),
            'C': self.C,
            'b': self.b,
            'bias': self.bias,
            'shift': self.shift,
            'kernel_kind': self.kernel_kind,
            'gamma': self.gamma,
            'point_ids': list(self.point_ids),
            'support_ids': self.support_ids,
            'constant_label': self.constant_label,
            'iterations': self.iterations,
            'max_violation': self.max_violation,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SvmModel':
        return cls(
            alphas=np.asarray(data['alphas'], dtype=np.float64),
            labels=np.asarray(data['labels'], dtype=np.int64),
            C=float(data['C']),
            b=float(data.get('b', 0.0)),
            bias=data.get('bias', 'none'),
            shift=bool(data.get('shift', True)),
            kernel_kind=data.get('kernel_kind', 'precomputed'),
            gamma=data.get('gamma'),
            point_ids=tuple(data.get('point_ids', ())),
            constant_label=data.get('constant_label'),
            iterations=int(data.get('iterations', 0)),
            max_violation=float(data.get('max_violation', 0.0)),
        )


def shifted(k):
    """(k + 1) / 2, mapping fidelities in [0, 1] onto [1/2, 1]."""
    return (np.asarray(k, dtype=np.float64) + 1.0) / 2.0


def _solver_kernel(K: np.ndarray, shift: bool) -> np.ndarray:
    return shifted(K) if shift else K


def _check_kernel(K: np.ndarray) -> None:
    if not np.allclose(K, K.T, rtol=0.0, atol=1e-10):
        raise NumericalError("kernel matrix is not symmetric")
    tol = SIM_CONFIG['psd_tol'] * max(1.0, float(np.max(np.abs(K))))
    min_eig = float(eigvalsh(K).min())
    if min_eig < -tol:
        raise NumericalError(f"kernel matrix is not PSD: minimum eigenvalue {min_eig:.3e} < -{tol:.1e}")


def _bias(alphas: np.ndarray, y: np.ndarray, grad: np.ndarray, C: float) -> float:
    """Bias from free support vectors, or the midpoint of the feasible interval when none are free."""
    yg = y * grad
    upper = alphas >= C - 1e-12
    lower = alphas <= 1e-12
    free = ~(upper | lower)
    if np.any(free):
        return float(np.mean(yg[free]))
    ub_mask = (upper & (y == -1)) | (lower & (y == 1))
    lb_mask = (upper & (y == 1)) | (lower & (y == -1))
    ub = float(np.min(yg[ub_mask])) if np.any(ub_mask) else np.inf
    lb = float(np.max(yg[lb_mask])) if np.any(lb_mask) else -np.inf
    if np.isinf(ub) or np.isinf(lb):
        return float(ub if np.isfinite(ub) else lb if np.isfinite(lb) else 0.0)
    return (ub + lb) / 2.0


def _pair_smo(Kp: np.ndarray, y: np.ndarray, C: float, tol: float,
              max_iter: int) -> Tuple[np.ndarray, np.ndarray, int, float]:
    """Two-variable SMO on the dual with sum(a y) = 0."""
    Q = Kp * np.outer(y, y)
    alphas = np.zeros(y.size)
    # gradient of the minimisation form 1/2 a^T Q a - sum(a)
    grad = -np.ones(y.size)
    violation = np.inf
    for iteration in range(1, max_iter + 1):
        score = -y * grad
        up = ((y == 1) & (alphas < C)) | ((y == -1) & (alphas > 0))
        low = ((y == 1) & (alphas > 0)) | ((y == -1) & (alphas < C))
        if not np.any(up) or not np.any(low):
            return alphas, grad, iteration, 0.0
        i = int(np.flatnonzero(up)[np.argmax(score[up])])
        j = int(np.flatnonzero(low)[np.argmin(score[low])])
        violation = score[i] - score[j]
        if violation < tol:
            return alphas, grad, iteration, float(violation)
        # move a_i along y_i and a_j along -y_j by lam
        curvature = Kp[i, i] + Kp[j, j] - 2.0 * Kp[i, j]
        room_i = C - alphas[i] if y[i] == 1 else alphas[i]
        room_j = alphas[j] if y[j] == 1 else C - alphas[j]
        lam = min(room_i, room_j)
        if curvature > 1e-12:
            lam = min(lam, violation / curvature)
        alphas[i] += y[i] * lam
        alphas[j] -= y[j] * lam
        alphas[i] = min(max(alphas[i], 0.0), C)
        alphas[j] = min(max(alphas[j], 0.0), C)
        grad += lam * (Q[:, i] * y[i] - Q[:, j] * y[j])
    raise NumericalError(f"SMO did not converge in {max_iter} iterations (KKT violation {violation:.3e})")


def _projected_gradient(alphas: np.ndarray, grad: np.ndarray, C: float) -> np.ndarray:
    pg = grad.copy()
    pg[(alphas <= 0.0) & (grad > 0.0)] = 0.0
    pg[(alphas >= C) & (grad < 0.0)] = 0.0
    return pg


def _box_smo(Kp: np.ndarray, y: np.ndarray, C: float, tol: float,
             max_iter: int) -> Tuple[np.ndarray, np.ndarray, int, float]:
    """
    Single-coordinate SMO on the dual with only 0 <= a <= C.

    Without a bias there is no sum(a y) = 0 constraint, so each step solves
    for one alpha exactly: the one with the largest projected gradient.
    """
    Q = Kp * np.outer(y, y)
    alphas = np.zeros(y.size)
    grad = -np.ones(y.size)
    violation = np.inf
    for iteration in range(1, max_iter + 1):
        pg = np.abs(_projected_gradient(alphas, grad, C))
        i = int(np.argmax(pg))
        violation = float(pg[i])
        if violation < tol:
            return alphas, grad, iteration, violation
        if Q[i, i] > 1e-12:
            target = min(max(alphas[i] - grad[i] / Q[i, i], 0.0), C)
        else:
            target = C if grad[i] < 0.0 else 0.0
        delta = target - alphas[i]
        alphas[i] = target
        grad += delta * Q[:, i]
    raise NumericalError(f"SMO did not converge in {max_iter} iterations (KKT violation {violation:.3e})")


def solve_dual(K, y: Sequence[int], C: float = 1.0, bias: BiasMode = 'none', shift: bool = True,
               tol: float = 1e-5, max_iter: int = 100000, point_ids: Sequence[str] = (),
               kernel_kind: KernelKind = 'precomputed', gamma: Optional[float] = None) -> SvmModel:
    """
    Maximise sum(a) - 1/2 sum_ij a_i a_j y_i y_j K'_ij subject to 0 <= a <= C,
    plus sum(a y) = 0 when the bias is fitted.

    Args:
        K: (M, M) symmetric PSD kernel matrix, or a GramMatrix
        y: Labels in {+1, -1}
        C: Box constraint
        bias: 'none' solves the box-only dual and decides without a bias term,
            'fitted' solves the standard dual and recovers b from the KKT conditions
        shift: Train on (K + 1) / 2 instead of K
        tol: Stop once the maximal KKT violation drops below this
        max_iter: SMO updates before giving up with NumericalError
        point_ids: Row identifiers stored on the model
        kernel_kind: Recorded for prediction on raw features
        gamma: RBF width, when kernel_kind is 'rbf'

    Returns:
        Trained SvmModel
    """
    if hasattr(K, 'entries'):
        point_ids = point_ids or K.point_ids
        K = K.entries
    K = np.asarray(K, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64).ravel()
    if K.ndim != 2 or K.shape[0] != K.shape[1] or K.shape[0] != y.size:
        raise ValueError(f"kernel shape {K.shape} does not match {y.size} labels")
    if C <= 0:
        raise ConfigError(f"C must be positive, got {C}")
    if not np.all(np.isin(y, (-1, 1))):
        raise ValueError("labels must be +1 or -1")
    _check_kernel(K)
    point_ids = tuple(str(i) for i in point_ids)

    if np.all(y == y[0]):
        logger.warning("All %d training labels are %+d; the model predicts that label everywhere", y.size, y[0])
        return SvmModel(np.zeros(y.size), y, C, 0.0, bias, shift, kernel_kind, gamma, point_ids,
                        constant_label=int(y[0]))

    solver = _pair_smo if bias == 'fitted' else _box_smo
    alphas, grad, iteration, violation = solver(_solver_kernel(K, shift), y, C, tol, max_iter)

    b = -_bias(alphas, y, grad, C) if bias == 'fitted' else 0.0
    logger.debug("SMO converged after %d iterations, violation %.2e, %d support vectors",
                 iteration, violation, int(np.sum(alphas > 1e-12)))
    return SvmModel(alphas, y, C, b, bias, shift, kernel_kind, gamma, point_ids,
                    iterations=iteration, max_violation=float(violation))


def decision_function(model: SvmModel, k_rows) -> np.ndarray:
    """sum_i alpha_i y_i k'(x_t, x_i) + b for each row of base kernel values."""
    k_rows = np.atleast_2d(np.asarray(k_rows, dtype=np.float64))
    if k_rows.shape[1] != model.alphas.size:
        raise ValueError(f"kernel rows have {k_rows.shape[1]} entries, model has {model.alphas.size} points")
    return _solver_kernel(k_rows, model.shift) @ (model.alphas * model.labels) + model.b


def predict_many(model: SvmModel, k_rows) -> np.ndarray:
    """Labels for each kernel row; a zero decision value gives -1."""
    values = decision_function(model, k_rows)
    if model.constant_label is not None:
        return np.full(values.shape, model.constant_label, dtype=np.int64)
    return np.where(values > 0.0, 1, -1)


def predict(model: SvmModel, k_row) -> int:
    k_row = np.asarray(k_row, dtype=np.float64)
    if k_row.ndim != 1:
        raise ValueError("predict takes one kernel row; use predict_many for several")
    return int(predict_many(model, k_row[None, :])[0])


def linear_kernel(xi, xj) -> float:
    return float(np.dot(np.asarray(xi, dtype=np.float64), np.asarray(xj, dtype=np.float64)))


def rbf_kernel(xi, xj, gamma: float) -> float:
    diff = np.asarray(xi, dtype=np.float64) - np.asarray(xj, dtype=np.float64)
    return float(np.exp(-gamma * np.dot(diff, diff)))


def default_gamma(features: np.ndarray) -> float:
    """1 / (p * variance of all features)."""
    features = np.atleast_2d(features)
    var = float(features.var())
    return 1.0 / (features.shape[1] * var) if var > 0 else 1.0


def kernel_matrix(kind: str, A: np.ndarray, B: np.ndarray, gamma: Optional[float] = None) -> np.ndarray:
    """Classical kernel between the rows of A and B."""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if kind == 'linear':
        return A @ B.T
    if kind == 'rbf':
        if gamma is None:
            raise ConfigError("rbf kernels need gamma")
        sq = np.sum(A ** 2, axis=1)[:, None] + np.sum(B ** 2, axis=1)[None, :] - 2.0 * A @ B.T
        return np.exp(-gamma * np.maximum(sq, 0.0))
    raise ConfigError(f"unknown classical kernel {kind!r}; choose linear or rbf")


def fit_svc(train: FeatureTable, kind: str, C: float, gamma: Optional[float] = None) -> SvmModel:
    """Standard soft-margin SVC (unshifted kernel, fitted bias) on raw feature rows."""
    if kind == 'rbf' and gamma is None:
        gamma = default_gamma(train.features)
    K = kernel_matrix(kind, train.features, train.features, gamma)
    K = (K + K.T) / 2.0
    return solve_dual(K, train.labels, C, bias='fitted', shift=False, point_ids=train.ids,
                      kernel_kind=kind, gamma=gamma)


def svc_predict(model: SvmModel, train: FeatureTable, X: np.ndarray) -> np.ndarray:
    return predict_many(model, kernel_matrix(model.kernel_kind, X, train.features, model.gamma))


def accuracy(predicted: np.ndarray, labels: np.ndarray) -> float:
    return float(np.mean(np.asarray(predicted) == np.asarray(labels)))


@dataclass
class SearchResult:
    best_params: Dict[str, Any]
    best_score: float
    trials: List[Dict[str, Any]] = field(default_factory=list)


def _cv_score(table: FeatureTable, folds: List[np.ndarray], draw: Dict[str, Any], reduction: str) -> float:
    scores = []
    for train_idx, test_idx in fold_partitions(folds):
        train, test = table.subset(train_idx), table.subset(test_idx)
        if 'n_components' in draw:
            train, chain = FeatureChain.fit(train, int(draw['n_components']), reduction)
            test = chain.transform(test)
        model = fit_svc(train, draw['kernel'], float(draw['C']), draw.get('gamma'))
        scores.append(accuracy(svc_predict(model, train, test.features), test.labels))
    return float(np.mean(scores))


def random_search_svc(data: FeatureTable, n_iters: int, seed: int, space: Optional[Dict[str, Any]] = None,
                      k_folds: int = 10, reduction: str = 'pca') -> SearchResult:
    """
    Randomised hyperparameter search scored by stratified k-fold accuracy.

    Args:
        data: Features already scaled, or raw features when the space samples n_components
        n_iters: Number of draws
        seed: Seeds both the draws and the folds
        space: Mapping of hyperparameter to list or scipy distribution; keys among
            C, kernel, gamma, n_components
        k_folds: Folds per draw
        reduction: 'pca' or 'tsvd' when n_components is searched

    Returns:
        SearchResult with the first draw reaching the best mean accuracy
    """
    space = DEFAULT_SVC_SPACE if space is None else space
    if not space:
        raise ConfigError("random search needs a non-empty hyperparameter space")
    if n_iters < 1:
        raise ConfigError(f"random search needs at least one iteration, got {n_iters}")
    folds = stratified_kfold(data.labels, k_folds, seed)
    trials = []
    best: Optional[Dict[str, Any]] = None
    best_score = -np.inf
    for draw in ParameterSampler(space, n_iter=n_iters, random_state=seed):
        draw = {k: (v.item() if isinstance(v, np.generic) else v) for k, v in draw.items()}
        draw.setdefault('kernel', 'linear')
        draw.setdefault('C', 1.0)
        score = _cv_score(data, folds, draw, reduction)
        trials.append({**draw, 'score': score})
        if score > best_score:
            best, best_score = draw, score
    logger.info("🔍 Random search: best CV accuracy %.4f with %s", best_score, best)
    return SearchResult(best, float(best_score), trials)
