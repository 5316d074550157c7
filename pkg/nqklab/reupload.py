"""
Data re-uploading circuits.

Every layer of a QNN first uploads the data point with one or more encoding
gates on each qubit, then applies the trainable single-qubit gates, then the
layer's entangling block. Two entangling blocks exist:

* QNN couplings: for k = 1..n-1 a controlled-SU(2) with control qubit k and
  angles phi[l, k-1]. The target is qubit 0 ("star", default) or qubit k-1
  ("chain"). Zero coupling angles make the block the identity.
* 1-to-n embedding: the single-qubit QNN's gates replicated on every qubit
  followed by a nearest-neighbour CNOT cascade (control s-1, target s).

Features are used directly as encoding angles, three per encoding gate, in
order; the encoding gates of a layer are applied in feature order.
"""

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Literal, Optional, Sequence

import numpy as np

from nqklab.config import get_max_qubits
from nqklab.qsim import (
    Statevector,
    Su2Angles,
    _apply_1q,
    _apply_controlled,
    _cnot,
    _zero_states,
    su2_matrices,
)

logger = logging.getLogger(__name__)

Topology = Literal['star', 'chain']


@dataclass(frozen=True, eq=False)
class QnnParams:
    """
    Trainable angles of an n-qubit re-uploading QNN.

    theta has shape (L, n, 3): layer, qubit, ZYZ angle.
    phi has shape (L, n-1, 3): layer, coupling of qubit k = index+1, ZYZ angle.
    """

    n_qubits: int
    n_layers: int
    theta: np.ndarray
    phi: np.ndarray = field(default=None)
    topology: Topology = 'star'

    def __post_init__(self):
        if self.n_qubits < 1 or self.n_layers < 1:
            raise ValueError(f"need n_qubits >= 1 and n_layers >= 1, got {self.n_qubits}, {self.n_layers}")
        if self.n_qubits > get_max_qubits():
            raise ValueError(f"{self.n_qubits} qubits exceeds the configured cap of {get_max_qubits()}")
        if self.topology not in ('star', 'chain'):
            raise ValueError(f"unknown coupling topology {self.topology!r}")
        theta = np.array(self.theta, dtype=np.float64).reshape(self.n_layers, self.n_qubits, 3)
        if self.phi is None:
            phi = np.zeros((self.n_layers, self.n_qubits - 1, 3))
        else:
            phi = np.array(self.phi, dtype=np.float64).reshape(self.n_layers, self.n_qubits - 1, 3)
        if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(phi))):
            raise ValueError("QNN parameters must be finite")
        theta.setflags(write=False)
        phi.setflags(write=False)
        object.__setattr__(self, 'theta', theta)
        object.__setattr__(self, 'phi', phi)

    @property
    def n_parameters(self) -> int:
        return self.theta.size + self.phi.size

    def flat(self) -> np.ndarray:
        """theta then phi, row-major."""
        return np.concatenate([self.theta.ravel(), self.phi.ravel()])

    def with_flat(self, values: np.ndarray) -> 'QnnParams':
        values = np.asarray(values, dtype=np.float64)
        if values.size != self.n_parameters:
            raise ValueError(f"expected {self.n_parameters} values, got {values.size}")
        split = self.theta.size
        return QnnParams(self.n_qubits, self.n_layers, values[:split], values[split:], self.topology)

    def to_dict(self) -> Dict:
        return {
            'n_qubits': self.n_qubits,
            'n_layers': self.n_layers,
            'topology': self.topology,
            'theta': self.theta.ravel().tolist(),
            'phi': self.phi.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'QnnParams':
        return cls(
            n_qubits=int(data['n_qubits']),
            n_layers=int(data['n_layers']),
            theta=np.asarray(data['theta'], dtype=np.float64),
            phi=np.asarray(data.get('phi', []), dtype=np.float64),
            topology=data.get('topology', 'star'),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> 'QnnParams':
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class EncodedPoint:
    features: np.ndarray
    encoding_angles: np.ndarray

    @property
    def p(self) -> int:
        return self.features.size


def n_encoding_gates(p: int) -> int:
    return math.ceil(p / 3)


def _encoding_angle_array(features: np.ndarray) -> np.ndarray:
    """(M, p) features -> (M, ceil(p/3), 3) angles, zero padded."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    m, p = features.shape
    if p == 0:
        raise ValueError("at least one feature is needed to build an encoding")
    padded = np.zeros((m, 3 * n_encoding_gates(p)))
    padded[:, :p] = features
    return padded.reshape(m, -1, 3)


def encode_angles(features: Sequence[float]) -> List[Su2Angles]:
    """Pack features into ceil(p/3) consecutive angle triples, padding with zeros."""
    features = np.asarray(features, dtype=np.float64).ravel()
    if features.size == 0:
        raise ValueError("at least one feature is needed to build an encoding")
    if np.any(np.abs(features) > 1.0):
        logger.warning("Encoding features outside [-1, 1] (max |x| = %.3f)", float(np.max(np.abs(features))))
    return [Su2Angles(*map(float, row)) for row in _encoding_angle_array(features)[0]]


def encode_point(features: Sequence[float]) -> EncodedPoint:
    triples = encode_angles(features)
    return EncodedPoint(np.asarray(features, dtype=np.float64).ravel(), np.asarray(triples, dtype=np.float64))


def _encoding_unitaries(features: np.ndarray) -> np.ndarray:
    """(M, g, 2, 2) encoding gates for every point."""
    return su2_matrices(_encoding_angle_array(features))


def _layered_states(encoding: np.ndarray, single: np.ndarray,
                    entangle: Callable[[np.ndarray, int], np.ndarray]) -> np.ndarray:
    """
    Shared circuit skeleton.

    Args:
        encoding: (M, g, 2, 2) encoding gates per point
        single: (L, n, 2, 2) trainable gate per layer and qubit
        entangle: Applied to the batch after each layer's single-qubit gates

    Returns:
        (M, 2**n) final states
    """
    n_layers, n_qubits = single.shape[:2]
    states = _zero_states(encoding.shape[0], n_qubits)
    for layer in range(n_layers):
        for qubit in range(n_qubits):
            for gate in range(encoding.shape[1]):
                states = _apply_1q(states, encoding[:, gate], qubit, n_qubits)
            states = _apply_1q(states, single[layer, qubit], qubit, n_qubits)
        states = entangle(states, layer)
    return states


def _coupling_target(k: int, topology: Topology) -> int:
    return 0 if topology == 'star' else k - 1


def qnn_states(params: QnnParams, features: np.ndarray) -> np.ndarray:
    """Batched n-qubit QNN: (M, p) features -> (M, 2**n) states."""
    n = params.n_qubits
    couplings = su2_matrices(params.phi)

    def entangle(states: np.ndarray, layer: int) -> np.ndarray:
        for k in range(1, n):
            states = _apply_controlled(states, couplings[layer, k - 1], k,
                                       _coupling_target(k, params.topology), n)
        return states

    return _layered_states(_encoding_unitaries(features), su2_matrices(params.theta), entangle)


def embed_1_to_n_states(theta: np.ndarray, features: np.ndarray, n_qubits: int) -> np.ndarray:
    """Batched 1-to-n embedding: (L, 3) angles replicated on n qubits with CNOT cascades."""
    theta = np.asarray(theta, dtype=np.float64).reshape(-1, 3)
    if n_qubits < 1:
        raise ValueError(f"n must be >= 1, got {n_qubits}")
    if n_qubits > get_max_qubits():
        raise ValueError(f"{n_qubits} qubits exceeds the configured cap of {get_max_qubits()}")
    single = np.repeat(su2_matrices(theta)[:, None], n_qubits, axis=1)

    def entangle(states: np.ndarray, layer: int) -> np.ndarray:
        for s in range(1, n_qubits):
            states = _cnot(states, s - 1, s, n_qubits)
        return states

    return _layered_states(_encoding_unitaries(features), single, entangle)


def _check_point(point: EncodedPoint) -> np.ndarray:
    if point.features.size == 0:
        raise ValueError("encoded point has no features")
    return point.features[None, :]


def run_single_qubit_qnn(params: QnnParams, point: EncodedPoint) -> Statevector:
    if params.n_qubits != 1:
        raise ValueError(f"single-qubit QNN needs n_qubits = 1, got {params.n_qubits}")
    return run_nqubit_qnn(params, point)


def run_nqubit_qnn(params: QnnParams, point: EncodedPoint) -> Statevector:
    return Statevector(params.n_qubits, qnn_states(params, _check_point(point))[0])


def embed_1_to_n(theta: np.ndarray, point: EncodedPoint, n: int) -> Statevector:
    return Statevector(n, embed_1_to_n_states(theta, _check_point(point), n)[0])


def init_params(n_qubits: int, n_layers: int, rng: np.random.Generator,
                topology: Topology = 'star', zero_couplings: bool = True) -> QnnParams:
    """Uniform angles in [-pi, pi); couplings zero unless asked otherwise."""
    theta = rng.uniform(-np.pi, np.pi, size=(n_layers, n_qubits, 3))
    if zero_couplings:
        phi = np.zeros((n_layers, n_qubits - 1, 3))
    else:
        phi = rng.uniform(-np.pi, np.pi, size=(n_layers, n_qubits - 1, 3))
    return QnnParams(n_qubits, n_layers, theta, phi, topology)


def extend_params(params: QnnParams, noise: float = 0.0,
                  rng: Optional[np.random.Generator] = None) -> QnnParams:
    """
    Add one qubit to a trained QNN without changing its first-qubit output.

    The new qubit's layer angles copy qubit 0's trained angles, optionally
    perturbed by Gaussian noise of width ``noise``; its coupling angles are
    exactly zero, so the enlarged circuit starts decoupled.
    """
    new_theta = params.theta[:, :1, :].copy()
    if noise > 0.0:
        if rng is None:
            raise ValueError("extension noise needs a random generator")
        new_theta = new_theta + rng.normal(0.0, noise, size=new_theta.shape)
    theta = np.concatenate([params.theta, new_theta], axis=1)
    phi = np.concatenate([params.phi, np.zeros((params.n_layers, 1, 3))], axis=1)
    return QnnParams(params.n_qubits + 1, params.n_layers, theta, phi, params.topology)
