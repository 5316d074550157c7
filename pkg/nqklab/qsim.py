"""
Exact dense statevector simulation for few-qubit circuits.

Qubit 0 is the least significant bit of the basis-state index, so the basis
index of |q_{n-1} ... q_1 q_0> is sum_q q_q * 2**q. Gates are applied by
reshaping the amplitude vector so the target bit becomes its own axis.

The public functions act on a single Statevector and return a new one. The
underscore helpers act on a batch of states stored row-wise in an array of
shape (B, 2**n), which is what the circuit builders use to evaluate many data
points at once.
"""

import logging
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

from nqklab.config import SIM_CONFIG, get_max_qubits

logger = logging.getLogger(__name__)


class Su2Angles(NamedTuple):
    """ZYZ Euler angles in radians: U = Rz(gamma) Ry(beta) Rz(alpha)."""

    alpha: float
    beta: float
    gamma: float


AngleLike = Union[Su2Angles, Sequence[float], np.ndarray]


@dataclass(frozen=True, eq=False)
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be >= 1, got {self.n_qubits}")
        if self.n_qubits > get_max_qubits():
            raise ValueError(f"{self.n_qubits} qubits exceeds the configured cap of {get_max_qubits()}")
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.shape != (2 ** self.n_qubits,):
            raise ValueError(f"expected {2 ** self.n_qubits} amplitudes, got shape {amps.shape}")
        drift = abs(float(np.vdot(amps, amps).real) - 1.0)
        if drift > SIM_CONFIG['norm_tol']:
            raise ValueError(f"amplitudes have squared norm off by {drift:.3e}; states must be unit vectors")
        object.__setattr__(self, 'amplitudes', amps)

    @classmethod
    def zero(cls, n_qubits: int) -> 'Statevector':
        """|0...0> on n qubits."""
        amps = np.zeros(2 ** n_qubits, dtype=np.complex128)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def from_amplitudes(cls, amplitudes) -> 'Statevector':
        amps = np.asarray(amplitudes, dtype=np.complex128)
        n = int(round(np.log2(amps.size)))
        return cls(n, amps)

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)


X_GATE = np.array([[0, 1], [1, 0]], dtype=np.complex128)


def su2_matrices(angles) -> np.ndarray:
    """
    Vectorised ZYZ unitaries.

    Args:
        angles: Array whose last axis holds (alpha, beta, gamma)

    Returns:
        Complex array of shape angles.shape[:-1] + (2, 2)
    """
    angles = np.asarray(angles, dtype=np.float64)
    if angles.shape[-1] != 3:
        raise ValueError(f"angle arrays need a trailing axis of 3, got shape {angles.shape}")
    alpha, beta, gamma = angles[..., 0], angles[..., 1], angles[..., 2]
    c = np.cos(beta / 2)
    s = np.sin(beta / 2)
    plus = np.exp(-0.5j * (alpha + gamma))
    minus = np.exp(0.5j * (alpha - gamma))
    out = np.empty(angles.shape[:-1] + (2, 2), dtype=np.complex128)
    out[..., 0, 0] = c * plus
    out[..., 0, 1] = -s * minus
    out[..., 1, 0] = s * np.conj(minus)
    out[..., 1, 1] = c * np.conj(plus)
    return out


def su2_matrix(angles: AngleLike) -> np.ndarray:
    """2x2 unitary Rz(gamma) Ry(beta) Rz(alpha)."""
    return su2_matrices(np.asarray(tuple(angles), dtype=np.float64))


def _check_qubit(index: int, n_qubits: int) -> None:
    if not 0 <= index < n_qubits:
        raise IndexError(f"qubit index {index} out of range for {n_qubits} qubits")


def _zero_states(batch: int, n_qubits: int) -> np.ndarray:
    states = np.zeros((batch, 2 ** n_qubits), dtype=np.complex128)
    states[:, 0] = 1.0
    return states


def _apply_1q(states: np.ndarray, gate: np.ndarray, target: int, n_qubits: int) -> np.ndarray:
    """Apply a shared (2,2) gate or per-row (B,2,2) gates to one qubit of every row."""
    batch = states.shape[0]
    psi = states.reshape(batch, 2 ** (n_qubits - 1 - target), 2, 2 ** target)
    if gate.ndim == 2:
        out = np.einsum('ij,bhjl->bhil', gate, psi)
    else:
        out = np.einsum('bij,bhjl->bhil', gate, psi)
    return out.reshape(batch, -1)


def _apply_controlled(states: np.ndarray, gate: np.ndarray, control: int, target: int,
                      n_qubits: int) -> np.ndarray:
    """Apply gate to target on the control=1 subspace of every row."""
    batch = states.shape[0]
    psi = states.reshape((batch,) + (2,) * n_qubits)
    # axis 1 holds the most significant qubit
    c_axis = 1 + (n_qubits - 1 - control)
    t_axis = 1 + (n_qubits - 1 - target)
    index = [slice(None)] * (n_qubits + 1)
    index[c_axis] = 1
    index = tuple(index)
    sub = psi[index]
    sub_t_axis = t_axis - 1 if t_axis > c_axis else t_axis
    rotated = np.moveaxis(np.tensordot(gate, sub, axes=([1], [sub_t_axis])), 0, sub_t_axis)
    out = psi.copy()
    out[index] = rotated
    return out.reshape(batch, -1)


def _cnot(states: np.ndarray, control: int, target: int, n_qubits: int) -> np.ndarray:
    return _apply_controlled(states, X_GATE, control, target, n_qubits)


def _probs_first_qubit_zero(states: np.ndarray) -> np.ndarray:
    # even basis indices have qubit 0 in |0>
    return np.sum(np.abs(states[:, 0::2]) ** 2, axis=1)


def _check_unitary(gate: np.ndarray) -> np.ndarray:
    gate = np.asarray(gate, dtype=np.complex128)
    if gate.shape != (2, 2):
        raise ValueError(f"single-qubit gates must be 2x2, got shape {gate.shape}")
    return gate


def apply_single_qubit(state: Statevector, gate: np.ndarray, target: int) -> Statevector:
    """Return state with gate applied on wire target."""
    _check_qubit(target, state.n_qubits)
    out = _apply_1q(state.amplitudes[None, :], _check_unitary(gate), target, state.n_qubits)
    return Statevector(state.n_qubits, out[0])


def apply_controlled(state: Statevector, gate: np.ndarray, control: int, target: int) -> Statevector:
    """Return state with gate applied on target where control is |1>."""
    _check_qubit(control, state.n_qubits)
    _check_qubit(target, state.n_qubits)
    if control == target:
        raise ValueError(f"control and target must differ, both are {control}")
    out = _apply_controlled(state.amplitudes[None, :], _check_unitary(gate), control, target,
                            state.n_qubits)
    return Statevector(state.n_qubits, out[0])


def apply_cnot(state: Statevector, control: int, target: int) -> Statevector:
    return apply_controlled(state, X_GATE, control, target)


def prob_first_qubit_zero(state: Statevector) -> float:
    """Probability of reading |0> on qubit 0, i.e. tr((|0><0| (x) 1) rho)."""
    return float(_probs_first_qubit_zero(state.amplitudes[None, :])[0])


def fidelity(a: Statevector, b: Statevector) -> float:
    """|<a|b>|^2."""
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"dimension mismatch: {a.n_qubits} vs {b.n_qubits} qubits")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def check_norms(states: np.ndarray) -> None:
    """Log when any row has drifted off the unit sphere."""
    drift = np.max(np.abs(np.sum(np.abs(states) ** 2, axis=1) - 1.0))
    if drift > SIM_CONFIG['norm_tol']:
        logger.warning("Statevector norm drift %.3e exceeds %.1e", drift, SIM_CONFIG['norm_tol'])
