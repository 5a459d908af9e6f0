"""Contrastive objective and information-regularization hinge, with exact
gradients with respect to the projected embeddings.

For each node the contrastive term scores the matching row of the other view
against every inter-view and intra-view alternative; the loss is averaged
symmetrically over both view orderings. All exponentials are max-shifted per
row before summation, so large similarity/temperature ratios stay finite.

The regularizer penalizes nodes whose two augmented views look more alike
than the sum-bound implied by their similarities to the original graph's
embedding: d_i = 2*cos(z1_i, z2_i) - cos(z2_i, z0_i) - cos(z1_i, z0_i),
penalty = mean(max(d_i, 0)). Gradients flow only through nodes with d_i > 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, DomainError

_NORM_FLOOR = 1e-12


@dataclass(frozen=True)
class LossBreakdown:
    """Per-term loss values with the mixing coefficients recorded alongside,
    so total == contrastive + eps1 * adversarial_contrastive + eps2 * info_reg
    holds for exactly these eps values."""

    contrastive: float
    adversarial_contrastive: float
    info_reg: float
    total: float
    eps1: float
    eps2: float

    def as_dict(self) -> dict[str, float]:
        return {
            "contrastive": self.contrastive,
            "adversarial_contrastive": self.adversarial_contrastive,
            "info_reg": self.info_reg,
            "total": self.total,
            "eps1": self.eps1,
            "eps2": self.eps2,
        }


def _normalized_rows(Z: np.ndarray, name: str):
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim != 2:
        raise ContractViolationError(f"{name} must be 2-D")
    norms = np.linalg.norm(Z, axis=1)
    if np.any(norms < _NORM_FLOOR):
        row = int(np.argmin(norms))
        raise DomainError(f"row {row} of {name} has zero norm")
    return Z / norms[:, None], norms


def _normalize_backward(dN: np.ndarray, N: np.ndarray, norms: np.ndarray) -> np.ndarray:
    # d/dz of z/|z| applied to an upstream gradient: remove the radial
    # component, then scale by 1/|z|.
    radial = (dN * N).sum(axis=1, keepdims=True)
    return (dN - radial * N) / norms[:, None]


def pairwise_cosine(Z1, Z2) -> np.ndarray:
    """Matrix of cosines between every row of Z1 and every row of Z2."""
    N1, _ = _normalized_rows(Z1, "Z1")
    N2, _ = _normalized_rows(Z2, "Z2")
    if N1.shape[1] != N2.shape[1]:
        raise ContractViolationError("Z1 and Z2 must have equal width")
    return N1 @ N2.T


def contrastive_loss(Z1, Z2, tau: float):
    """Symmetric temperature-scaled contrastive loss over matched rows.

    Returns (loss, dZ1, dZ2) with exact gradients. The positive pair for row
    i is (Z1[i], Z2[i]); negatives are every other row of the opposite view
    and every other row of the same view.
    """
    if tau <= 0.0:
        raise DomainError(f"temperature must be positive, got {tau}")
    N1, r1 = _normalized_rows(Z1, "Z1")
    N2, r2 = _normalized_rows(Z2, "Z2")
    if N1.shape != N2.shape:
        raise ContractViolationError("Z1 and Z2 must have the same shape")
    n = N1.shape[0]
    eye = np.eye(n)
    offdiag = 1.0 - eye

    L12 = (N1 @ N2.T) / tau
    L11 = (N1 @ N1.T) / tau
    L22 = (N2 @ N2.T) / tau

    def one_side(cross, intra):
        # per-row logits: all of the cross row plus the off-diagonal intra
        # row; the self-term is masked to -inf so its exponential is exactly 0
        masked_intra = np.where(offdiag > 0.0, intra, -np.inf)
        shift = np.maximum(cross.max(axis=1), masked_intra.max(axis=1))
        E_cross = np.exp(cross - shift[:, None])
        E_intra = np.exp(masked_intra - shift[:, None])
        denom = E_cross.sum(axis=1) + E_intra.sum(axis=1)
        losses = -np.diagonal(cross) + shift + np.log(denom)
        P = E_cross / denom[:, None]
        Q = E_intra / denom[:, None]
        return losses, P, Q

    l_u, P_u, Q_u = one_side(L12, L11)
    l_v, P_v, Q_v = one_side(L12.T, L22)
    loss = float((l_u.sum() + l_v.sum()) / (2.0 * n))

    coef = 1.0 / (2.0 * n * tau)
    dS12 = coef * ((P_u - eye) + (P_v - eye).T)
    dS11 = coef * Q_u
    dS22 = coef * Q_v

    dN1 = dS12 @ N2 + (dS11 + dS11.T) @ N1
    dN2 = dS12.T @ N1 + (dS22 + dS22.T) @ N2
    return loss, _normalize_backward(dN1, N1, r1), _normalize_backward(dN2, N2, r2)


def info_regularization(Z1, Z2, Z0):
    """Hinge penalty on per-node similarity excess of the two views over the
    view-to-original similarities. Returns (penalty, dZ1, dZ2, dZ0)."""
    N1, r1 = _normalized_rows(Z1, "Z1")
    N2, r2 = _normalized_rows(Z2, "Z2")
    N0, r0 = _normalized_rows(Z0, "Z0")
    if not (N1.shape == N2.shape == N0.shape):
        raise ContractViolationError("Z1, Z2, Z0 must have the same shape")
    n = N1.shape[0]

    th12 = (N1 * N2).sum(axis=1)
    th10 = (N1 * N0).sum(axis=1)
    th20 = (N2 * N0).sum(axis=1)
    d = 2.0 * th12 - th20 - th10
    penalty = float(np.maximum(d, 0.0).sum() / n)

    # subgradient at d == 0 is 0
    w = (d > 0.0).astype(np.float64) / n
    dN1 = (2.0 * w)[:, None] * N2 - w[:, None] * N0
    dN2 = (2.0 * w)[:, None] * N1 - w[:, None] * N0
    dN0 = -w[:, None] * (N1 + N2)
    return (
        penalty,
        _normalize_backward(dN1, N1, r1),
        _normalize_backward(dN2, N2, r2),
        _normalize_backward(dN0, N0, r0),
    )


def total_loss(Z1, Z2, Z_adv, Z0, tau: float, eps1: float, eps2: float):
    """Full training objective: contrastive + eps1 * adversarial contrastive
    + eps2 * information regularization.

    Z_adv (resp. Z0) may be None when eps1 (resp. eps2) is zero; the
    corresponding term is then recorded as 0.0 and contributes no gradient.
    Returns (LossBreakdown, dZ1, dZ2, dZ_adv, dZ0).
    """
    if eps1 < 0.0 or eps2 < 0.0:
        raise DomainError("eps1 and eps2 must be non-negative")
    con, dZ1, dZ2 = contrastive_loss(Z1, Z2, tau)
    dZ_adv = None
    adv = 0.0
    if Z_adv is not None:
        adv, d1_adv, dZ_adv = contrastive_loss(Z1, Z_adv, tau)
        dZ1 = dZ1 + eps1 * d1_adv
        dZ_adv = eps1 * dZ_adv
    elif eps1 != 0.0:
        raise DomainError("Z_adv is required when eps1 is nonzero")
    dZ0 = None
    info = 0.0
    if Z0 is not None:
        info, d1_info, d2_info, dZ0 = info_regularization(Z1, Z2, Z0)
        dZ1 = dZ1 + eps2 * d1_info
        dZ2 = dZ2 + eps2 * d2_info
        dZ0 = eps2 * dZ0
    elif eps2 != 0.0:
        raise DomainError("Z0 is required when eps2 is nonzero")
    total = con + eps1 * adv + eps2 * info
    breakdown = LossBreakdown(
        contrastive=con,
        adversarial_contrastive=adv,
        info_reg=info,
        total=total,
        eps1=eps1,
        eps2=eps2,
    )
    return breakdown, dZ1, dZ2, dZ_adv, dZ0
