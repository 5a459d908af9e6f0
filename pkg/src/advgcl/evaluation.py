"""Frozen-embedding evaluation: 10/10/80 splits, a multinomial logistic
probe trained in-repo, accuracy, the iterative-degradation stability study,
and a random poisoning baseline.

The probe standardizes inputs with statistics of whatever it is fit on --
fit it on the training split only, so no test statistics leak in.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.exceptions import NotFittedError

from .encoder import EncoderParams, encode, project_head
from .errors import ContractViolationError, DomainError
from .graph import Graph, degrade_sequence, upper_pairs
from .rng import RngStream
from .validation import check_probability


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


@dataclass(frozen=True)
class SplitMasks:
    """Disjoint train/val/test index sets covering all labeled nodes."""

    train: np.ndarray
    val: np.ndarray
    test: np.ndarray


def make_split(labels, rng: RngStream) -> SplitMasks:
    """Uniform random 10/10/80 split of the labeled nodes."""
    labels = np.asarray(labels, dtype=np.int64)
    labeled = np.flatnonzero(labels >= 0)
    if labeled.size < 10:
        raise DomainError(f"need at least 10 labeled nodes, got {labeled.size}")
    perm = rng.shuffle(labeled)
    n_train = _round_half_up(0.1 * labeled.size)
    n_val = _round_half_up(0.1 * labeled.size)
    return SplitMasks(
        train=np.sort(perm[:n_train]),
        val=np.sort(perm[n_train : n_train + n_val]),
        test=np.sort(perm[n_train + n_val :]),
    )


# ---------------------------------------------------------------------------
# the probe
# ---------------------------------------------------------------------------


class LogisticProbe(ClassifierMixin, BaseEstimator):
    """Multinomial logistic regression, full-batch gradient descent with
    backtracking line search and an L2 penalty lam * ||W||^2.

    Inputs are standardized per dimension with the fit data's statistics.
    Stops when the gradient 2-norm falls below `tol` or after `max_iter`
    accepted steps. A single-class fit degenerates to a constant predictor
    (with `single_class_` set and a warning).
    """

    def __init__(self, lam: float = 1e-4, max_iter: int = 2000, tol: float = 1e-5):
        self.lam = lam
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, X, y):
        if self.lam < 0:
            raise DomainError("lam must be non-negative")
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.int64)
        if X.ndim != 2 or y.shape != (X.shape[0],):
            raise ContractViolationError("X must be 2-D with one label per row")
        self.classes_, y_idx = np.unique(y, return_inverse=True)
        self.mean_ = X.mean(axis=0)
        scale = X.std(axis=0)
        self.scale_ = np.where(scale < 1e-12, 1.0, scale)
        self.single_class_ = self.classes_.size == 1
        self.loss_history_: list[float] = []
        k = self.classes_.size
        d = X.shape[1]
        if self.single_class_:
            warnings.warn("probe fit on a single class; predicting it everywhere", stacklevel=2)
            self.W_ = np.zeros((d, 1))
            self.b_ = np.zeros(1)
            self.converged_ = True
            return self

        Xs = (X - self.mean_) / self.scale_
        m = Xs.shape[0]
        Y = np.zeros((m, k))
        Y[np.arange(m), y_idx] = 1.0

        def value(W, b):
            logits = Xs @ W + b
            logits -= logits.max(axis=1, keepdims=True)
            logZ = np.log(np.exp(logits).sum(axis=1))
            nll = -(logits[np.arange(m), y_idx] - logZ).mean()
            return nll + self.lam * float((W * W).sum())

        def gradient(W, b):
            logits = Xs @ W + b
            logits -= logits.max(axis=1, keepdims=True)
            E = np.exp(logits)
            P = E / E.sum(axis=1, keepdims=True)
            dlogits = (P - Y) / m
            return Xs.T @ dlogits + 2.0 * self.lam * W, dlogits.sum(axis=0)

        W = np.zeros((d, k))
        b = np.zeros(k)
        loss = value(W, b)
        self.loss_history_.append(loss)
        step = 1.0
        self.converged_ = False
        for _ in range(self.max_iter):
            dW, db = gradient(W, b)
            gsq = float((dW * dW).sum() + (db * db).sum())
            if np.sqrt(gsq) < self.tol:
                self.converged_ = True
                break
            accepted = False
            for _ in range(60):
                W_new = W - step * dW
                b_new = b - step * db
                loss_new = value(W_new, b_new)
                if loss_new <= loss - 1e-4 * step * gsq:
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                break  # no usable descent direction at float precision
            W, b, loss = W_new, b_new, loss_new
            self.loss_history_.append(loss)
            step = min(step * 2.0, 1e4)
        self.W_ = W
        self.b_ = b
        return self

    def decision_function(self, X) -> np.ndarray:
        if not hasattr(self, "W_"):
            raise NotFittedError("probe is not fitted")
        X = np.asarray(X, dtype=np.float64)
        return (X - self.mean_) / self.scale_ @ self.W_ + self.b_

    def predict(self, X) -> np.ndarray:
        scores = self.decision_function(X)
        # argmax takes the first maximum, i.e. ties go to the lowest class index
        return self.classes_[np.argmax(scores, axis=1)]


def fit_probe(H_train, y_train, lam: float = 1e-4, iterations: int = 2000) -> LogisticProbe:
    return LogisticProbe(lam=lam, max_iter=iterations).fit(H_train, y_train)


def accuracy(model: LogisticProbe, H, y) -> float:
    """Fraction of correct argmax predictions."""
    y = np.asarray(y, dtype=np.int64)
    return float(np.mean(model.predict(H) == y))


# ---------------------------------------------------------------------------
# degradation stability study
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StabilityRecord:
    t: int
    mean_sim: float
    std_sim: float
    surviving_edge_frac: float
    surviving_dim_frac: float


def _row_similarities(H_ref: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Per-row cosine with degenerate-row handling: two identical rows score
    1 (covers the t=0 self-comparison exactly), a zero row against a nonzero
    one scores 0."""
    sims = np.empty(H_ref.shape[0])
    ref_norms = np.linalg.norm(H_ref, axis=1)
    norms = np.linalg.norm(H, axis=1)
    dots = (H_ref * H).sum(axis=1)
    for i in range(sims.size):
        if np.array_equal(H_ref[i], H[i]):
            sims[i] = 1.0
        elif ref_norms[i] < 1e-12 or norms[i] < 1e-12:
            sims[i] = 0.0
        else:
            sims[i] = np.clip(dots[i] / (ref_norms[i] * norms[i]), -1.0, 1.0)
    return sims


def vulnerability_study(
    params: EncoderParams,
    G: Graph,
    p: float,
    steps: int,
    rng: RngStream,
    use_projection: bool = False,
) -> list[StabilityRecord]:
    """Encode an iterative-degradation sequence and report, per iteration,
    the mean and std over nodes of the cosine between each node's embedding
    and its embedding in the intact graph.

    Similarity is measured on raw embeddings by default (the projection head
    can be switched in with `use_projection`).
    """
    seq = degrade_sequence(G, p, steps, rng)
    d_alive0 = max(1, int(np.count_nonzero(np.any(seq[0].features != 0.0, axis=0))))
    edges0 = max(1, seq[0].num_edges())

    def embed(graph: Graph) -> np.ndarray:
        H, _ = encode(graph.adjacency, graph.features, params)
        if use_projection:
            H, _ = project_head(H, params)
        return H

    H0 = embed(seq[0])
    records = []
    for t, graph in enumerate(seq):
        Ht = H0 if t == 0 else embed(graph)
        sims = _row_similarities(H0, Ht)
        records.append(
            StabilityRecord(
                t=t,
                mean_sim=float(sims.mean()),
                std_sim=float(sims.std()),
                surviving_edge_frac=graph.num_edges() / edges0,
                surviving_dim_frac=int(np.count_nonzero(np.any(graph.features != 0.0, axis=0)))
                / d_alive0,
            )
        )
    return records


# ---------------------------------------------------------------------------
# random poisoning baseline
# ---------------------------------------------------------------------------


def random_poison(
    G: Graph,
    edge_flip_fraction: float,
    feat_mask_fraction: float,
    rng: RngStream,
    edges_only: bool = False,
) -> Graph:
    """Structure/feature corruption: toggles round(fraction * edge_count)
    uniformly chosen unordered pairs (restricted to existing edges with
    `edges_only`) and zeroes that fraction of feature dimensions."""
    check_probability(edge_flip_fraction, "edge_flip_fraction")
    check_probability(feat_mask_fraction, "feat_mask_fraction")
    if not G.is_binary():
        raise ContractViolationError("random_poison requires a binary graph")
    iu, ju = upper_pairs(G.n)
    if edges_only:
        on = G.adjacency[iu, ju] == 1.0
        iu, ju = iu[on], ju[on]
    n_flips = _round_half_up(edge_flip_fraction * G.num_edges())
    n_flips = min(n_flips, iu.size)
    chosen = rng.choice_no_replace(iu.size, n_flips)
    adj = np.array(G.adjacency)
    fi, fj = iu[chosen], ju[chosen]
    adj[fi, fj] = 1.0 - adj[fi, fj]
    adj[fj, fi] = adj[fi, fj]
    feats = np.array(G.features)
    n_mask = _round_half_up(feat_mask_fraction * G.d)
    dims = rng.choice_no_replace(G.d, n_mask)
    feats[:, dims] = 0.0
    return Graph(adj, feats, G.labels)
