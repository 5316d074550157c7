"""
Neural quantum kernels.

An embedding maps a feature vector to a statevector S(x)|0...0>; the kernel
entry is the fidelity |<S(x_i) 0|S(x_j) 0>|^2. Two embeddings are built from a
trained QNN: "one_to_n" replicates the single-qubit QNN on n wires with CNOT
cascades, "n_to_n" uses the trained n-qubit QNN itself.

Each point's state is computed once; all entries come from the cached states.
"""

import hashlib
import json
import logging
from dataclasses import dataclass
from typing import Dict, Literal, Sequence, Union

import numpy as np
from scipy.linalg import eigvalsh

from nqklab.config import SIM_CONFIG
from nqklab.data import FeatureTable
from nqklab.errors import ConfigError, NumericalError
from nqklab.qsim import Statevector, check_norms, fidelity
from nqklab.reupload import EncodedPoint, QnnParams, embed_1_to_n_states, qnn_states

logger = logging.getLogger(__name__)

EmbeddingKind = Literal['one_to_n', 'n_to_n']


@dataclass(frozen=True)
class EmbeddingSpec:
    kind: EmbeddingKind
    params: QnnParams
    n_qubits: int

    def __post_init__(self):
        if self.kind == 'one_to_n':
            if self.params.n_qubits != 1:
                raise ConfigError(f"one_to_n embeddings take 1-qubit QNN parameters, got {self.params.n_qubits}")
        elif self.kind == 'n_to_n':
            if self.params.n_qubits != self.n_qubits:
                raise ConfigError(f"n_to_n embedding on {self.n_qubits} qubits got "
                                  f"{self.params.n_qubits}-qubit parameters")
        else:
            raise ConfigError(f"unknown embedding kind {self.kind!r}")
        if self.n_qubits < 1:
            raise ConfigError(f"embeddings need at least one qubit, got {self.n_qubits}")

    def to_dict(self) -> Dict:
        return {'kind': self.kind, 'n_qubits': self.n_qubits, 'params': self.params.to_dict()}

    def digest(self) -> str:
        """Content hash identifying the embedding in kernel sidecars."""
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()


@dataclass(frozen=True, eq=False)
class GramMatrix:
    entries: np.ndarray
    point_ids: tuple

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.float64)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"Gram matrices are square, got shape {entries.shape}")
        if entries.shape[0] != len(self.point_ids):
            raise ValueError(f"{entries.shape[0]} rows but {len(self.point_ids)} point ids")
        object.__setattr__(self, 'entries', entries)
        object.__setattr__(self, 'point_ids', tuple(str(i) for i in self.point_ids))

    @property
    def size(self) -> int:
        return self.entries.shape[0]


def embed_states(spec: EmbeddingSpec, features: np.ndarray) -> np.ndarray:
    """(M, p) features -> (M, 2**n) embedded states."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    if spec.kind == 'one_to_n':
        states = embed_1_to_n_states(spec.params.theta[:, 0, :], features, spec.n_qubits)
    else:
        states = qnn_states(spec.params, features)
    check_norms(states)
    return states


def _clamp(entries: np.ndarray) -> np.ndarray:
    tol = SIM_CONFIG['clamp_tol']
    entries = np.where((entries < 0.0) & (entries > -tol), 0.0, entries)
    return np.where((entries > 1.0) & (entries < 1.0 + tol), 1.0, entries)


def _fidelities(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    return np.abs(left.conj() @ right.T) ** 2


def kernel_entry(spec: EmbeddingSpec, xi: EncodedPoint, xj: EncodedPoint) -> float:
    if xi.p != xj.p:
        raise ValueError(f"points have different feature counts: {xi.p} vs {xj.p}")
    states = embed_states(spec, np.vstack([xi.features, xj.features]))
    a = Statevector(spec.n_qubits, states[0])
    b = Statevector(spec.n_qubits, states[1])
    return float(_clamp(np.array(fidelity(a, b))))


def _table_parts(X: Union[FeatureTable, np.ndarray], ids: Sequence[str] = None):
    if isinstance(X, FeatureTable):
        return X.features, X.ids
    features = np.atleast_2d(np.asarray(X, dtype=np.float64))
    ids = tuple(ids) if ids is not None else tuple(str(i) for i in range(features.shape[0]))
    return features, ids


def gram(spec: EmbeddingSpec, X: Union[FeatureTable, np.ndarray], ids: Sequence[str] = None) -> GramMatrix:
    """
    Symmetric kernel matrix over the rows of X.

    Args:
        spec: Embedding to evaluate
        X: Feature table (its ids become point_ids) or a raw (M, p) array
        ids: Point ids when X is an array

    Returns:
        GramMatrix whose lower triangle mirrors the computed upper triangle
    """
    features, point_ids = _table_parts(X, ids)
    if features.shape[0] < 1:
        raise ValueError("gram needs at least one point")
    states = embed_states(spec, features)
    upper = np.triu(_fidelities(states, states))
    entries = upper + np.triu(upper, 1).T
    logger.debug("Built %dx%d %s Gram matrix on %d qubits", *entries.shape, spec.kind, spec.n_qubits)
    return GramMatrix(_clamp(entries), point_ids)


def cross_gram(spec: EmbeddingSpec, X_train: Union[FeatureTable, np.ndarray],
               X_test: Union[FeatureTable, np.ndarray]) -> np.ndarray:
    """(M_test, M_train) matrix of k(x_test, x_train)."""
    train, _ = _table_parts(X_train)
    test, _ = _table_parts(X_test)
    return _clamp(_fidelities(embed_states(spec, test), embed_states(spec, train)))


def validate_gram(entries: Union[GramMatrix, np.ndarray], tol: float = None) -> Dict[str, Union[bool, float]]:
    """Symmetry, unit diagonal, bounds and PSD checks of a kernel matrix."""
    K = entries.entries if isinstance(entries, GramMatrix) else np.asarray(entries, dtype=np.float64)
    tol = SIM_CONFIG['psd_tol'] if tol is None else tol
    square = K.ndim == 2 and K.shape[0] == K.shape[1]
    if not square:
        return {'symmetric': False, 'unit_diagonal': False, 'bounded_0_1': bool(np.all((K >= 0) & (K <= 1))),
                'positive_semidefinite': False, 'min_eigenvalue': float('nan')}
    symmetric = bool(np.allclose(K, K.T, rtol=0.0, atol=1e-10))
    min_eig = float(eigvalsh((K + K.T) / 2).min())
    return {
        'symmetric': symmetric,
        'unit_diagonal': bool(np.allclose(np.diag(K), 1.0, rtol=0.0, atol=1e-10)),
        'bounded_0_1': bool(np.all((K >= 0.0) & (K <= 1.0 + SIM_CONFIG['clamp_tol']))),
        'positive_semidefinite': symmetric and min_eig >= -tol,
        'min_eigenvalue': min_eig,
    }


def ensure_psd(entries: Union[GramMatrix, np.ndarray], tol: float = None) -> None:
    report = validate_gram(entries, tol)
    if not report['positive_semidefinite']:
        raise NumericalError(f"kernel matrix is not PSD within tolerance "
                             f"(symmetric={report['symmetric']}, min eigenvalue {report['min_eigenvalue']:.3e})")
