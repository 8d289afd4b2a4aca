"""RX product-state feature map.

Each feature ``x_j`` drives one qubit prepared as ``RX(x_j)|0>``. Because the
state is a product of single-qubit states, both the computational-basis
probabilities and the fidelity kernel factorise over qubits, so nothing here
ever builds a complex statevector.

Bit ordering: qubit 0 is the most significant bit of the basis-state index.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

__all__ = [
    "FeatureMapSpec",
    "QubitProbPair",
    "amplitude_features",
    "amplitude_matrix",
    "fidelity_kernel",
    "kernel_matrix",
    "kernel_distance",
    "distance_matrix",
]

ROTATIONS = ("RX",)


@dataclass(frozen=True)
class FeatureMapSpec:
    n_qubits: int
    rotation: str = "RX"
    angle_domain: tuple[float, float] = (0.0, math.pi)
    max_amplitude_qubits: int = 16

    def __post_init__(self):
        if int(self.n_qubits) < 1:
            raise ValueError(f"n_qubits must be >= 1, got {self.n_qubits}")
        if self.rotation not in ROTATIONS:
            raise ValueError(f"unsupported rotation {self.rotation!r}; expected one of {ROTATIONS}")
        if self.max_amplitude_qubits < 1:
            raise ValueError("max_amplitude_qubits must be positive")
        lo, hi = self.angle_domain
        if not lo <= hi:
            raise ValueError("angle_domain must be an ordered interval")

    @property
    def dimension(self) -> int:
        return 2 ** self.n_qubits

    def check_amplitude_cap(self):
        if self.n_qubits > self.max_amplitude_qubits:
            raise QubitCapError(self.n_qubits, self.max_amplitude_qubits)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["angle_domain"] = list(self.angle_domain)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureMapSpec":
        return cls(
            n_qubits=int(d["n_qubits"]),
            rotation=d.get("rotation", "RX"),
            angle_domain=tuple(d.get("angle_domain", (0.0, math.pi))),
            max_amplitude_qubits=int(d.get("max_amplitude_qubits", 16)),
        )


class QubitCapError(ValueError):
    """Raised when the amplitude path would need more qubits than allowed."""

    def __init__(self, n_qubits: int, cap: int):
        super().__init__(
            f"amplitude encoding needs {n_qubits} qubits, above the qubit cap of {cap} "
            f"({2 ** n_qubits} amplitude columns)"
        )
        self.n_qubits = n_qubits
        self.cap = cap


@dataclass(frozen=True)
class QubitProbPair:
    """Measurement probabilities of one qubit after ``RX(angle)|0>``."""

    p0: float
    p1: float

    def __post_init__(self):
        if abs(self.p0 + self.p1 - 1.0) > 1e-12:
            raise ValueError("qubit probabilities must sum to 1")

    @classmethod
    def from_angle(cls, angle: float) -> "QubitProbPair":
        c = math.cos(angle / 2.0)
        p0 = c * c
        return cls(p0, 1.0 - p0)


def _as_finite_matrix(X, name="X") -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError(f"{name} must be a vector or 2-D matrix")
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite entries")
    return X


def amplitude_matrix(X, spec: FeatureMapSpec) -> np.ndarray:
    """Row-wise computational-basis probabilities, shape ``(n, 2**D)``."""
    X = _as_finite_matrix(X)
    if X.shape[1] != spec.n_qubits:
        raise ValueError(f"expected {spec.n_qubits} features, got {X.shape[1]}")
    spec.check_amplitude_cap()
    p1 = np.sin(X / 2.0) ** 2
    p0 = 1.0 - p1
    out = np.ones((X.shape[0], 1))
    # Kronecker product, qubit 0 ends up as the most significant bit.
    for j in range(X.shape[1]):
        pair = np.stack([p0[:, j], p1[:, j]], axis=1)
        out = (out[:, :, None] * pair[:, None, :]).reshape(X.shape[0], -1)
    return out


def amplitude_features(x, spec: FeatureMapSpec) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("amplitude_features expects a single input vector")
    return amplitude_matrix(x, spec)[0]


def _check_pair(x, xp):
    x = np.asarray(x, dtype=float)
    xp = np.asarray(xp, dtype=float)
    if x.shape != xp.shape or x.ndim != 1:
        raise ValueError(f"dimension mismatch: {x.shape} vs {xp.shape}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(xp))):
        raise ValueError("non-finite input")
    return x, xp


def fidelity_kernel(x, xp) -> float:
    """``|<psi(x)|psi(x')>|^2`` for the RX product map, O(D)."""
    x, xp = _check_pair(x, xp)
    return float(np.prod(np.cos(np.abs(x - xp) / 2.0) ** 2))


def kernel_matrix(A, B, block_rows: int = 256) -> np.ndarray:
    A = _as_finite_matrix(A, "A")
    B = _as_finite_matrix(B, "B")
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"column mismatch: {A.shape[1]} vs {B.shape[1]}")
    out = np.empty((A.shape[0], B.shape[0]))
    for start in range(0, A.shape[0], block_rows):
        blk = A[start:start + block_rows]
        diff = np.abs(blk[:, None, :] - B[None, :, :])
        out[start:start + block_rows] = np.prod(np.cos(diff / 2.0) ** 2, axis=2)
    return out


def kernel_distance(x, xp) -> float:
    return math.sqrt(max(0.0, 1.0 - fidelity_kernel(x, xp)))


def distance_matrix(K) -> np.ndarray:
    """Elementwise ``sqrt(1 - K)`` with the radicand clamped at zero."""
    return np.sqrt(np.clip(1.0 - np.asarray(K, dtype=float), 0.0, None))
