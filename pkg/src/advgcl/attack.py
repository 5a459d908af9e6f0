"""Budgeted PGD adversary on graph structure and features.

Structure perturbations live on unordered node pairs as relaxed variables in
[0, 1]; a flipped pair toggles edge existence through the signed complement
mask, so the perturbed adjacency stays symmetric with a zero diagonal by
construction. The relaxed mass is kept inside the budget by a Euclidean-style
projection that clips to [0, 1] and, when the clipped sum still exceeds the
budget, shifts all entries down by a dual variable found with bisection.
Feature perturbations are bounded entrywise and updated with sign steps.

Budget convention: the configured fraction multiplies the total edge mass of
the adjacency MATRIX (which counts each undirected edge twice); the unordered
-pair budget used here is half of that, so the perturbation mass over the full
matrix matches the configured fraction. This is the likeliest place for a
silent mismatch against other conventions -- see README.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import AttackConfig
from .encoder import EncoderParams, backward, forward
from .errors import ContractViolationError, DomainError, NumericError
from .graph import Graph, complement_mask, upper_pairs
from .loss import contrastive_loss
from .rng import RngStream

_BUDGET_TOL = 1e-6


@dataclass
class PerturbationState:
    """Relaxed edge variables over unordered pairs plus the bounded feature
    perturbation matrix."""

    edge_vars: np.ndarray  # (n*(n-1)/2,), entries in [0, 1]
    feat_vars: np.ndarray  # (n, d), entries in [-delta_x, delta_x]


@dataclass
class AttackDiagnostics:
    step_losses: list[float] = field(default_factory=list)
    relaxed_mass: list[float] = field(default_factory=list)
    mu: float = 0.0
    flips: int = 0
    linf: float = 0.0
    budget: float = 0.0

    def as_dict(self) -> dict:
        return {
            "step_losses": [float(x) for x in self.step_losses],
            "relaxed_mass": [float(x) for x in self.relaxed_mass],
            "mu": float(self.mu),
            "flips": int(self.flips),
            "linf": float(self.linf),
            "budget": float(self.budget),
        }


# ---------------------------------------------------------------------------
# projections
# ---------------------------------------------------------------------------


def bisect_dual(z, budget: float, tol: float = _BUDGET_TOL) -> float:
    """Dual shift mu > 0 with sum(clip(z - mu, 0, 1)) within tol of budget.

    Assumes sum(clip(z, 0, 1)) > budget, so a positive shift is required;
    the clipped sum is continuous and non-increasing in mu, which makes
    bisection on [0, max(z)] valid.
    """
    z = np.asarray(z, dtype=np.float64)
    if budget < 0:
        raise DomainError("budget must be non-negative")

    def clipped_sum(mu):
        return float(np.clip(z - mu, 0.0, 1.0).sum())

    lo, hi = 0.0, float(z.max())
    if clipped_sum(lo) <= budget:
        raise DomainError("bisect_dual requires sum(clip(z, 0, 1)) > budget")
    # refine the bracket well past the residual tolerance so the returned
    # dual is sharp (the budget equation is piecewise linear in mu)
    interval_floor = 1e-10 * max(1.0, hi)
    mu = hi
    for _ in range(200):
        mu = 0.5 * (lo + hi)
        residual = clipped_sum(mu) - budget
        if abs(residual) <= tol and (hi - lo) <= interval_floor:
            return mu
        if residual > 0.0:
            lo = mu
        else:
            hi = mu
    if abs(clipped_sum(mu) - budget) > tol:  # pragma: no cover - 200 halvings suffice
        raise NumericError("bisection failed to bracket the budget equation")
    return mu


def _project_structure(z: np.ndarray, budget: float):
    clipped = np.clip(z, 0.0, 1.0)
    if budget == 0.0:
        return np.zeros_like(clipped), 0.0
    if clipped.sum() <= budget:
        return clipped, 0.0
    mu = bisect_dual(z, budget)
    return np.clip(z - mu, 0.0, 1.0), mu


def project_structure(z, budget: float) -> np.ndarray:
    """Project relaxed edge variables onto {v in [0,1]^m : sum(v) <= budget}."""
    if budget < 0:
        raise DomainError("budget must be non-negative")
    z = np.asarray(z, dtype=np.float64)
    return _project_structure(z, budget)[0]


def project_features(L_X, delta_x: float) -> np.ndarray:
    """Entry-wise clip to [-delta_x, delta_x]; idempotent."""
    if delta_x < 0:
        raise DomainError("delta_x must be non-negative")
    return np.clip(np.asarray(L_X, dtype=np.float64), -delta_x, delta_x)


# ---------------------------------------------------------------------------
# discretization and assembly
# ---------------------------------------------------------------------------


def sample_edge_perturbation(edge_vars, rng: RngStream) -> np.ndarray:
    """Independent Bernoulli draw per relaxed edge variable (0/1 vector)."""
    edge_vars = np.asarray(edge_vars, dtype=np.float64)
    if edge_vars.size and (edge_vars.min() < 0.0 or edge_vars.max() > 1.0):
        raise DomainError("edge variables must lie in [0, 1]")
    return (rng.uniform(edge_vars.shape) < edge_vars).astype(np.int64)


def _pair_matrix(values: np.ndarray, n: int) -> np.ndarray:
    iu, ju = upper_pairs(n)
    M = np.zeros((n, n))
    M[iu, ju] = values
    M[ju, iu] = values
    return M


def apply_perturbation(G: Graph, edge_flips, L_X) -> Graph:
    """Toggle flipped pairs and add the feature perturbation.

    A flipped pair removes the edge where one exists and adds one where it
    does not; the result is binary, symmetric, zero-diagonal.
    """
    if not G.is_binary():
        raise ContractViolationError("apply_perturbation requires a binary graph")
    edge_flips = np.asarray(edge_flips, dtype=np.float64)
    iu, ju = upper_pairs(G.n)
    if edge_flips.shape != iu.shape:
        raise ContractViolationError("edge_flips must cover all unordered pairs")
    C = complement_mask(G.adjacency)
    adj = G.adjacency + C * _pair_matrix(edge_flips, G.n)
    L_X = np.asarray(L_X, dtype=np.float64)
    if L_X.shape != G.features.shape:
        raise ContractViolationError("L_X shape must match features")
    return Graph(adj, G.features + L_X, G.labels)


def relaxed_adjacency(A: np.ndarray, C: np.ndarray, edge_vars: np.ndarray) -> np.ndarray:
    """Weighted adjacency A + C * L for relaxed pair variables L (mirrored)."""
    return A + C * _pair_matrix(edge_vars, A.shape[0])


# ---------------------------------------------------------------------------
# the attack
# ---------------------------------------------------------------------------


def pgd_attack(
    G: Graph,
    anchor_view: Graph,
    params: EncoderParams,
    config: AttackConfig,
    tau: float,
    rng: RngStream,
):
    """Budgeted PGD maximizing the contrastive loss against a fixed anchor.

    Starts from zero perturbation; each step feeds the relaxed weighted
    adjacency and perturbed features through the encoder, maps the adjacency
    gradient to unordered-pair variables via the complement mask, takes a
    plain gradient step on the structure and a sign step on the features,
    and projects both back into their budget sets. The relaxed structure
    variables are finally discretized by independent Bernoulli sampling
    (best of `discrete_samples` candidates by anchor loss when > 1) and the
    binary adversarial graph is returned together with diagnostics.
    """
    config.validate()
    if not G.is_binary():
        raise ContractViolationError("pgd_attack requires a binary graph")
    A = G.adjacency
    X = G.features
    n = G.n
    iu, ju = upper_pairs(n)
    C = complement_mask(A)
    C_pairs = C[iu, ju]
    budget = config.delta_a_fraction * float(A.sum()) / 2.0  # unordered-pair budget

    state = PerturbationState(
        edge_vars=np.zeros(iu.size),
        feat_vars=np.zeros_like(X),
    )
    diag = AttackDiagnostics(budget=budget)

    _, Z_anchor, _ = forward(anchor_view.adjacency, anchor_view.features, params)

    for _ in range(config.steps):
        A_rel = relaxed_adjacency(A, C, state.edge_vars)
        _, Z_rel, cache = forward(A_rel, X + state.feat_vars, params)
        step_loss, _, dZ_rel = contrastive_loss(Z_anchor, Z_rel, tau)
        diag.step_losses.append(step_loss)
        grads = backward(cache, params, dZ=dZ_rel)

        if budget > 0.0:
            pair_grad = C_pairs * grads.dA_raw[iu, ju]
            state.edge_vars, mu = _project_structure(
                state.edge_vars + config.alpha * pair_grad, budget
            )
            if mu > 0.0:
                diag.mu = mu
        if config.delta_x > 0.0:
            state.feat_vars = project_features(
                state.feat_vars + config.beta * np.sign(grads.dX), config.delta_x
            )
        diag.relaxed_mass.append(float(state.edge_vars.sum()))

    flips = sample_edge_perturbation(state.edge_vars, rng)
    if config.discrete_samples > 1:
        best_loss = _discrete_loss(G, flips, state.feat_vars, Z_anchor, params, tau)
        for _ in range(config.discrete_samples - 1):
            candidate = sample_edge_perturbation(state.edge_vars, rng)
            cand_loss = _discrete_loss(G, candidate, state.feat_vars, Z_anchor, params, tau)
            if cand_loss > best_loss:
                flips, best_loss = candidate, cand_loss

    G_adv = apply_perturbation(G, flips, state.feat_vars)
    diag.flips = int(flips.sum())
    diag.linf = float(np.abs(state.feat_vars).max()) if state.feat_vars.size else 0.0
    return G_adv, diag


def _discrete_loss(G, flips, L_X, Z_anchor, params, tau) -> float:
    candidate = apply_perturbation(G, flips, L_X)
    _, Z, _ = forward(candidate.adjacency, candidate.features, params)
    return contrastive_loss(Z_anchor, Z, tau)[0]
