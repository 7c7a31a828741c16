"""Gaussian field models over regularized graph Laplacians.

A :class:`GmrfModel` tracks, for one binary labeling problem, the inverse
``G`` of the regularized Laplacian restricted to the unlabeled nodes and the
conditional mean ``mu`` of the field given the labels observed so far.
Observing a label costs ``O(|U|^2)`` via a rank-one mean update followed by a
Schur-complement downdate of ``G``; no refactorization happens after
initialization. :func:`conditional_mean_direct` re-solves the linear system
from scratch and serves as the reference implementation the incremental path
is tested against. :class:`MulticlassModel` lifts the binary machinery to C
classes with one-vs-rest fields.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .graph import RegularizedLaplacian

# Diagonal entries of G below this are treated as degenerate pivots.
PIVOT_FLOOR = 1e-12


def spd_inverse(matrix: np.ndarray) -> np.ndarray:
    """Invert a symmetric positive definite matrix via Cholesky.

    The result is explicitly symmetrized so later rank-one downdates cannot
    drift off the symmetric manifold.
    """
    try:
        factor = scipy.linalg.cho_factor(np.asarray(matrix, dtype=float), lower=True)
    except scipy.linalg.LinAlgError as exc:
        raise ValueError(f"matrix is not positive definite: {exc}") from None
    inv = scipy.linalg.cho_solve(factor, np.eye(matrix.shape[0]))
    return (inv + inv.T) / 2.0


def jacobi_inverse(matrix: np.ndarray, tol: float = 1e-10,
                   max_iter: int = 200_000) -> np.ndarray:
    """Invert a diagonally dominant SPD matrix by Jacobi iteration.

    Iterates ``X <- X + D^{-1} (I - A X)``. Convergence is slow when the
    dominance margin (the regularizer) is small relative to the degrees, so
    this is an optional alternative to :func:`spd_inverse`, not the default.
    """
    A = np.asarray(matrix, dtype=float)
    n = A.shape[0]
    d_inv = 1.0 / np.diagonal(A)
    X = np.diag(d_inv.copy())
    eye = np.eye(n)
    for _ in range(max_iter):
        residual = eye - A @ X
        if np.abs(residual).max() < tol:
            break
        X = X + d_inv[:, None] * residual
    else:
        raise ValueError(f"Jacobi inversion did not reach tol={tol} in {max_iter} iterations")
    return (X + X.T) / 2.0


class GmrfModel:
    """State of one binary Gaussian label field.

    Attributes
    ----------
    unlabeled : ndarray of int
        Sorted original node ids that are still unlabeled; ``G`` and ``mu``
        are indexed positionally against this array.
    labeled : dict
        node id -> observed value in {-1.0, +1.0}.
    G : ndarray
        Inverse of the regularized Laplacian restricted to ``unlabeled``.
    mu : ndarray
        Conditional mean of the field over ``unlabeled``.
    delta : float
        Regularizer baked into the Laplacian this model was built from.
    retrain_calls : int
        Number of hypothetical-mean evaluations performed on this model;
        lets callers audit which selection rules avoid retraining.

    Only :meth:`observe` mutates the model, and each model is owned by one
    experiment run; read-only scoring over a snapshot is side-effect free.
    """

    def __init__(self, unlabeled, labeled, G, mu, delta):
        self.unlabeled = np.asarray(unlabeled, dtype=np.int64)
        self.labeled = {int(k): float(v) for k, v in labeled.items()}
        self.G = np.asarray(G, dtype=float)
        self.mu = np.asarray(mu, dtype=float)
        self.delta = float(delta)
        self.retrain_calls = 0

    @classmethod
    def from_laplacian(cls, lap: RegularizedLaplacian, method: str = "cholesky") -> "GmrfModel":
        """Fresh model with all nodes unlabeled, zero mean, full inverse."""
        if method == "cholesky":
            G = spd_inverse(lap.matrix)
        elif method == "jacobi":
            G = jacobi_inverse(lap.matrix)
        else:
            raise ValueError(f"unknown initialization method {method!r}")
        return cls(np.arange(lap.n), {}, G, np.zeros(lap.n), lap.delta)

    @classmethod
    def from_inverse(cls, G: np.ndarray, delta: float) -> "GmrfModel":
        """Fresh model from a precomputed full inverse (copied, not aliased)."""
        n = G.shape[0]
        return cls(np.arange(n), {}, np.array(G, dtype=float, copy=True),
                   np.zeros(n), delta)

    def copy(self) -> "GmrfModel":
        dup = GmrfModel(self.unlabeled.copy(), dict(self.labeled),
                        self.G.copy(), self.mu.copy(), self.delta)
        dup.retrain_calls = self.retrain_calls
        return dup

    @property
    def num_unlabeled(self) -> int:
        return int(self.unlabeled.size)

    def position(self, node: int) -> int:
        """Positional index of an unlabeled node id; raises if labeled."""
        pos = int(np.searchsorted(self.unlabeled, node))
        if pos >= self.unlabeled.size or self.unlabeled[pos] != node:
            raise ValueError(f"node {node} is not unlabeled")
        return pos

    def _pivot(self, pos: int) -> float:
        gkk = float(self.G[pos, pos])
        if gkk < PIVOT_FLOOR:
            raise ValueError(
                f"degenerate pivot g_kk={gkk:.3e} at node {int(self.unlabeled[pos])}"
            )
        return gkk

    def observe(self, node: int, value) -> "GmrfModel":
        """Absorb an observed label and shrink the model to ``U \\ {node}``.

        The mean moves by ``(value - mu_k) / g_kk * g_k`` before entry ``k``
        is dropped; ``G`` is downdated by ``g_k g_k^T / g_kk`` before row and
        column ``k`` are dropped. Cost ``O(|U|^2)``.
        """
        value = float(value)
        if value not in (-1.0, 1.0):
            raise ValueError(f"observed value must be -1 or +1, got {value}")
        pos = self.position(node)
        gkk = self._pivot(pos)
        gk = self.G[:, pos].copy()
        self.mu = self.mu + ((value - self.mu[pos]) / gkk) * gk
        self.mu = np.delete(self.mu, pos)
        self.G = self.G - np.outer(gk, gk) / gkk
        self.G = np.delete(np.delete(self.G, pos, axis=0), pos, axis=1)
        self.unlabeled = np.delete(self.unlabeled, pos)
        self.labeled[int(node)] = value
        return self

    def hypothetical_mean(self, node: int, value) -> np.ndarray:
        """Mean the model would have if ``node`` were assigned ``value``.

        Returns the updated vector over the current ``unlabeled`` (entry
        ``node`` included, as computed by the rank-one formula) without
        mutating the model. Increments ``retrain_calls``.
        """
        value = float(value)
        if value not in (-1.0, 1.0):
            raise ValueError(f"observed value must be -1 or +1, got {value}")
        pos = self.position(node)
        gkk = self._pivot(pos)
        self.retrain_calls += 1
        return self.mu + ((value - self.mu[pos]) / gkk) * self.G[:, pos]

    def posterior_plus(self, node: int) -> float:
        """Probability that ``node`` has the +1 label, ``clamp((mu+1)/2)``."""
        pos = self.position(node)
        return float(np.clip((self.mu[pos] + 1.0) / 2.0, 0.0, 1.0))

    def predict(self) -> dict[int, int]:
        """Hard labels over unlabeled nodes: +1 iff ``mu > 0``, else -1."""
        return {
            int(node): (1 if m > 0 else -1)
            for node, m in zip(self.unlabeled, self.mu)
        }

    def validate(self, atol: float = 1e-10) -> None:
        """Spot-check structural invariants; raises on violation."""
        if self.G.shape != (self.num_unlabeled, self.num_unlabeled):
            raise AssertionError("G shape does not match unlabeled count")
        if self.num_unlabeled and np.diagonal(self.G).min() <= 0:
            raise AssertionError("G has a non-positive diagonal entry")
        if self.num_unlabeled and np.abs(self.G - self.G.T).max() > atol:
            raise AssertionError("G is not symmetric")
        if set(map(int, self.unlabeled)) & set(self.labeled):
            raise AssertionError("labeled and unlabeled sets overlap")


def conditional_mean_direct(lap: RegularizedLaplacian, labeled: dict) -> np.ndarray:
    """Conditional mean over the unlabeled nodes by a fresh SPD solve.

    Solves ``M_UU m = -M_UL y_L`` with ``M`` the regularized Laplacian and
    returns ``m`` ordered by ascending unlabeled node id. This is the
    reference the incremental :meth:`GmrfModel.observe` path is checked
    against.
    """
    if not labeled:
        raise ValueError("at least one labeled node is required")
    labeled = {int(k): float(v) for k, v in labeled.items()}
    lab_ids = sorted(labeled)
    unl_ids = [i for i in range(lap.n) if i not in labeled]
    if not unl_ids:
        raise ValueError("all nodes are labeled; the unlabeled set is empty")
    M = lap.matrix
    A = M[np.ix_(unl_ids, unl_ids)]
    B = M[np.ix_(unl_ids, lab_ids)]
    y = np.array([labeled[i] for i in lab_ids])
    factor = scipy.linalg.cho_factor(A, lower=True)
    return scipy.linalg.cho_solve(factor, -B @ y)


class MulticlassModel:
    """One-vs-rest stack of binary field models sharing index bookkeeping.

    Observing class ``c`` at a node feeds ``+1`` into model ``c`` and ``-1``
    into every other model, so all per-class models always agree on the
    labeled/unlabeled split (and, since the downdate of ``G`` does not
    depend on the observed value, on ``G`` itself).
    """

    def __init__(self, models: list[GmrfModel], labeled_classes: dict[int, int] | None = None):
        if len(models) < 2:
            raise ValueError("need at least two class models")
        self.models = list(models)
        self.labeled = dict(labeled_classes or {})

    @classmethod
    def from_laplacian(cls, lap: RegularizedLaplacian, num_classes: int) -> "MulticlassModel":
        base = GmrfModel.from_laplacian(lap)
        models = [base] + [base.copy() for _ in range(num_classes - 1)]
        return cls(models)

    @classmethod
    def from_inverse(cls, G: np.ndarray, delta: float, num_classes: int) -> "MulticlassModel":
        return cls([GmrfModel.from_inverse(G, delta) for _ in range(num_classes)])

    def copy(self) -> "MulticlassModel":
        return MulticlassModel([m.copy() for m in self.models], dict(self.labeled))

    @property
    def num_classes(self) -> int:
        return len(self.models)

    @property
    def unlabeled(self) -> np.ndarray:
        return self.models[0].unlabeled

    @property
    def num_unlabeled(self) -> int:
        return self.models[0].num_unlabeled

    @property
    def delta(self) -> float:
        return self.models[0].delta

    @property
    def retrain_calls(self) -> int:
        return sum(m.retrain_calls for m in self.models)

    def position(self, node: int) -> int:
        return self.models[0].position(node)

    def class_means(self) -> np.ndarray:
        """Stacked per-class means, shape (num_classes, |U|)."""
        return np.vstack([m.mu for m in self.models])

    def observe(self, node: int, class_id: int) -> "MulticlassModel":
        class_id = int(class_id)
        if not 0 <= class_id < self.num_classes:
            raise ValueError(f"class id {class_id} outside 0..{self.num_classes - 1}")
        for c, model in enumerate(self.models):
            model.observe(node, 1.0 if c == class_id else -1.0)
        self.labeled[int(node)] = class_id
        return self

    def predict(self) -> dict[int, int]:
        """Per-node argmax over the class means; ties go to the lowest class."""
        means = self.class_means()
        winners = np.argmax(means, axis=0)
        return {int(node): int(c) for node, c in zip(self.unlabeled, winners)}

    def posteriors(self, node: int) -> np.ndarray:
        """Class distribution at a node from normalized shifted means.

        Each mean is mapped through ``(mu + 1) / 2`` (clipped to [0, 1]) and
        the vector is normalized to sum to one; a degenerate all-zero vector
        falls back to the uniform distribution.
        """
        pos = self.position(node)
        shifted = np.clip((self.class_means()[:, pos] + 1.0) / 2.0, 0.0, 1.0)
        total = shifted.sum()
        if total <= 0.0:
            return np.full(self.num_classes, 1.0 / self.num_classes)
        return shifted / total
