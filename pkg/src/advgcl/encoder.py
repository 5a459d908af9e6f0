"""Two-layer graph convolutional encoder with projection head and exact
reverse-mode gradients.

The forward map is H = act(A_hat @ act(A_hat @ X @ W1) @ W2) where A_hat is
the symmetrically normalized adjacency (recomputed on every call, because the
adversary feeds continuously varying adjacencies), followed by a projection
head Z = elu(H @ P1 + b1) @ P2 + b2. The backward pass returns gradients for
all six parameter tensors, for the feature matrix, and for the raw weighted
adjacency entries -- the degree matrix's dependence on the adjacency
included -- which is what the structure attack differentiates through.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, DomainError
from .graph import normalized_adjacency_parts
from .rng import RngStream
from .validation import as_matrix, check_adjacency, check_finite

_ACTIVATIONS = ("relu", "identity")


@dataclass
class EncoderParams:
    """GCN layer weights plus two-layer projection-head weights."""

    W1: np.ndarray  # d x h
    W2: np.ndarray  # h x d_out
    P1: np.ndarray  # d_out x h_proj
    b1: np.ndarray  # h_proj
    P2: np.ndarray  # h_proj x d_out
    b2: np.ndarray  # d_out

    def __post_init__(self):
        for name in self.names():
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            check_finite(arr, name)
            setattr(self, name, arr)
        if self.W1.shape[1] != self.W2.shape[0]:
            raise ContractViolationError("W1/W2 inner dimensions disagree")
        d_out, h_proj = self.P1.shape
        if self.W2.shape[1] != d_out or self.P2.shape != (h_proj, d_out):
            raise ContractViolationError("projection head dimensions disagree")
        if self.b1.shape != (h_proj,) or self.b2.shape != (d_out,):
            raise ContractViolationError("bias dimensions disagree")

    @staticmethod
    def names() -> tuple[str, ...]:
        return ("W1", "W2", "P1", "b1", "P2", "b2")

    def as_dict(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in self.names()}

    def copy(self) -> "EncoderParams":
        return EncoderParams(**{k: v.copy() for k, v in self.as_dict().items()})


def init_params(d: int, hidden: int, d_out: int, proj_hidden: int, rng: RngStream) -> EncoderParams:
    """Glorot-uniform weight matrices (bound sqrt(6/(fan_in+fan_out))), zero biases."""
    if min(d, hidden, d_out, proj_hidden) < 1:
        raise DomainError("all encoder dimensions must be positive")

    def glorot(fan_in, fan_out):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        return (2.0 * rng.uniform((fan_in, fan_out)) - 1.0) * bound

    return EncoderParams(
        W1=glorot(d, hidden),
        W2=glorot(hidden, d_out),
        P1=glorot(d_out, proj_hidden),
        b1=np.zeros(proj_hidden),
        P2=glorot(proj_hidden, d_out),
        b2=np.zeros(d_out),
    )


# ---------------------------------------------------------------------------
# forward
# ---------------------------------------------------------------------------


def _act(x: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        return np.maximum(x, 0.0)
    if kind == "identity":
        return x
    raise DomainError(f"unknown activation {kind!r}; expected one of {_ACTIVATIONS}")


def _act_grad(pre: np.ndarray, kind: str) -> np.ndarray:
    if kind == "relu":
        # subgradient at exactly 0 is defined as 0
        return (pre > 0.0).astype(np.float64)
    return np.ones_like(pre)


def _elu(x: np.ndarray) -> np.ndarray:
    # clamp before expm1: np.where still evaluates the discarded branch
    return np.where(x > 0.0, x, np.expm1(np.minimum(x, 0.0)))


def _elu_grad(x: np.ndarray) -> np.ndarray:
    return np.where(x > 0.0, 1.0, np.exp(np.minimum(x, 0.0)))


@dataclass
class EncoderCache:
    A_tilde: np.ndarray
    deg: np.ndarray
    inv_sqrt: np.ndarray
    A_hat: np.ndarray
    X: np.ndarray
    M1: np.ndarray  # X @ W1
    T1: np.ndarray  # A_hat @ M1 (pre-activation, layer 1)
    U1: np.ndarray  # act(T1)
    M2: np.ndarray  # U1 @ W2
    T2: np.ndarray  # A_hat @ M2 (pre-activation, layer 2)
    activation: str


@dataclass
class HeadCache:
    H: np.ndarray
    T: np.ndarray  # H @ P1 + b1 (pre-activation)
    R: np.ndarray  # elu(T)


@dataclass
class ForwardCache:
    encoder: EncoderCache
    head: HeadCache | None = None


@dataclass
class EncoderGrads:
    dW1: np.ndarray
    dW2: np.ndarray
    dP1: np.ndarray
    db1: np.ndarray
    dP2: np.ndarray
    db2: np.ndarray
    dX: np.ndarray
    dA_raw: np.ndarray

    def param_dict(self) -> dict[str, np.ndarray]:
        return {
            "W1": self.dW1,
            "W2": self.dW2,
            "P1": self.dP1,
            "b1": self.db1,
            "P2": self.dP2,
            "b2": self.db2,
        }


def encode(A, X, params: EncoderParams, activation: str = "relu"):
    """Forward pass of the two-layer GCN. Returns (H, cache).

    A is the raw weighted adjacency (normalization happens internally);
    `activation="identity"` disables the nonlinearity for algebraic tests.
    """
    A = as_matrix(A, "adjacency")
    X = as_matrix(X, "features")
    check_adjacency(A, "adjacency")
    if X.shape[0] != A.shape[0]:
        raise ContractViolationError("feature rows must match node count")
    if X.shape[1] != params.W1.shape[0]:
        raise ContractViolationError(
            f"feature dim {X.shape[1]} does not match W1 rows {params.W1.shape[0]}"
        )
    A_tilde, deg, inv_sqrt, A_hat = normalized_adjacency_parts(A)
    M1 = X @ params.W1
    T1 = A_hat @ M1
    U1 = _act(T1, activation)
    M2 = U1 @ params.W2
    T2 = A_hat @ M2
    H = _act(T2, activation)
    cache = EncoderCache(A_tilde, deg, inv_sqrt, A_hat, X, M1, T1, U1, M2, T2, activation)
    return H, cache


def project_head(H, params: EncoderParams):
    """Projection head Z = elu(H @ P1 + b1) @ P2 + b2. Returns (Z, cache)."""
    H = as_matrix(H, "H")
    if H.shape[1] != params.P1.shape[0]:
        raise ContractViolationError(
            f"embedding dim {H.shape[1]} does not match P1 rows {params.P1.shape[0]}"
        )
    T = H @ params.P1 + params.b1
    R = _elu(T)
    Z = R @ params.P2 + params.b2
    return Z, HeadCache(H=H, T=T, R=R)


def forward(A, X, params: EncoderParams, activation: str = "relu"):
    """encode + project_head with a combined cache. Returns (H, Z, cache)."""
    H, enc_cache = encode(A, X, params, activation)
    Z, head_cache = project_head(H, params)
    return H, Z, ForwardCache(encoder=enc_cache, head=head_cache)


# ---------------------------------------------------------------------------
# backward
# ---------------------------------------------------------------------------


def backward(
    cache: ForwardCache,
    params: EncoderParams,
    dZ: np.ndarray | None = None,
    dH: np.ndarray | None = None,
) -> EncoderGrads:
    """Exact reverse-mode gradients for a matching forward pass.

    Feed the upstream gradient with respect to the projected embedding (dZ),
    the raw embedding (dH), or both. dA_raw is the gradient with respect to
    the raw weighted adjacency, symmetrized so that entry (i, j) carries the
    sum of both directed contributions (the derivative along a joint
    symmetric perturbation of the pair), with a zero diagonal.
    """
    if dZ is None and dH is None:
        raise DomainError("backward needs dZ and/or dH")
    enc = cache.encoder
    n = enc.X.shape[0]

    if dZ is not None:
        head = cache.head
        if head is None:
            raise ContractViolationError("cache has no projection-head pass for dZ")
        dZ = np.asarray(dZ, dtype=np.float64)
        if dZ.shape != (n, params.P2.shape[1]):
            raise ContractViolationError("dZ shape does not match the forward pass")
        dP2 = head.R.T @ dZ
        db2 = dZ.sum(axis=0)
        dR = dZ @ params.P2.T
        dT = dR * _elu_grad(head.T)
        dP1 = head.H.T @ dT
        db1 = dT.sum(axis=0)
        dH_total = dT @ params.P1.T
        if dH is not None:
            dH_total = dH_total + dH
    else:
        dP1 = np.zeros_like(params.P1)
        db1 = np.zeros_like(params.b1)
        dP2 = np.zeros_like(params.P2)
        db2 = np.zeros_like(params.b2)
        dH_total = np.asarray(dH, dtype=np.float64)
    if dH_total.shape != enc.T2.shape:
        raise ContractViolationError("dH shape does not match the forward pass")

    # second GCN layer: H = act(T2), T2 = A_hat @ M2, M2 = U1 @ W2
    dT2 = dH_total * _act_grad(enc.T2, enc.activation)
    dA_hat = dT2 @ enc.M2.T
    dM2 = enc.A_hat.T @ dT2
    dW2 = enc.U1.T @ dM2
    dU1 = dM2 @ params.W2.T

    # first GCN layer: U1 = act(T1), T1 = A_hat @ M1, M1 = X @ W1
    dT1 = dU1 * _act_grad(enc.T1, enc.activation)
    dA_hat += dT1 @ enc.M1.T
    dM1 = enc.A_hat.T @ dT1
    dW1 = enc.X.T @ dM1
    dX = dM1 @ params.W1.T

    # normalization: A_hat[a,b] = s_a * (A + I)[a,b] * s_b with s = deg^-1/2.
    # Perturbing (A+I)[i,j] moves A_hat both directly and through s_i, whose
    # degree sums the whole row; the row-constant term below collects the
    # latter for every entry of row i at once.
    G = dA_hat
    s = enc.inv_sqrt
    row_coupling = ((G + G.T) * enc.A_tilde) @ s
    row_const = -0.5 * enc.deg**-1.5 * row_coupling
    dA_tilde = (s[:, None] * s[None, :]) * G + row_const[:, None]
    np.fill_diagonal(dA_tilde, 0.0)  # the diagonal of A is fixed at 0
    dA_raw = dA_tilde + dA_tilde.T

    return EncoderGrads(dW1, dW2, dP1, db1, dP2, db2, dX, dA_raw)


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

CHECKPOINT_VERSION = 1


def save_params(path: str, params: EncoderParams) -> None:
    """Versioned binary checkpoint; round-trips bit-exactly."""
    np.savez(
        path,
        version=np.int64(CHECKPOINT_VERSION),
        **params.as_dict(),
    )


def load_params(path: str) -> EncoderParams:
    with np.load(path) as data:
        version = int(data["version"])
        if version != CHECKPOINT_VERSION:
            raise ContractViolationError(
                f"unsupported checkpoint version {version} (expected {CHECKPOINT_VERSION})"
            )
        return EncoderParams(**{name: data[name] for name in EncoderParams.names()})
