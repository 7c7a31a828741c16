"""Query-selection utilities for active sampling on graph label fields.

Every scorer evaluates how much disclosing one node's label is expected to
perturb the current field model, using only the inverse-Laplacian block ``G``
and the conditional mean ``mu``:

- ``klg``: expected Gaussian-field divergence ``(1 - mu_i^2) / (2 g_ii)``.
- ``tv``:  expected total variation ``2 (1 - mu_i^2) ||g_i||_1 / g_ii``.
- ``msd``: expected mean-square deviation ``(1 - mu_i^2) ||g_i||_2^2 / g_ii^2``.
- ``vm`` / ``sigma-opt``: label-independent ensemble scores
  ``||g_i||_2^2 / g_ii`` and ``||g_i||_1^2 / g_ii``.
- ``fl`` / ``kl``: retraining-based expected prediction flips and summed
  Bernoulli divergences (these are the only scorers that evaluate
  hypothetical means).
- ``unc``: negative top-two soft-label margin.

A :class:`Strategy` bundles a scorer with its confidence schedule ``a_t``
(mixing the posterior toward the uninformative prior) and an optional
hybrid schedule ``pi_t`` that diverts single queries to uniform random
exploration. Scoring never mutates a model, so candidate scans are safe to
parallelize; only :func:`select`'s RNG use is sequential.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .gmrf import PIVOT_FLOOR, GmrfModel, MulticlassModel

KINDS = ("random", "unc", "vm", "sigma-opt", "fl", "klg", "kl", "tv", "msd")
RETRAINING_KINDS = ("fl", "kl")
BINARY_ONLY_KINDS = ("fl", "kl", "klg")

_LOG_FLOOR = 1e-12


@dataclass(frozen=True)
class Strategy:
    """A named scorer plus its schedule parameters.

    ``confidence`` is one of ``none``, ``inv_sqrt`` (``a_t = 1/sqrt(t)``), or
    ``const:<a>`` with ``a`` in [0, 1]. ``hybrid_scale`` sets
    ``pi_t = min(1, scale / sqrt(t))``, the per-iteration probability of a
    uniform exploration query; 0 disables it. ``maxmin`` replaces the
    expectation over candidate labels by the worst case and applies only to
    the retraining-based scorers (fl, kl). ``seed`` is the default RNG seed
    for standalone use; the experiment harness supplies per-run generators.
    """

    kind: str
    confidence: str = "none"
    hybrid_scale: float = 0.0
    maxmin: bool = False
    seed: int = 0
    name: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown strategy kind {self.kind!r}; choose from {KINDS}")
        _parse_confidence(self.confidence)
        if self.hybrid_scale < 0:
            raise ValueError("hybrid_scale must be >= 0")
        if self.maxmin and self.kind not in RETRAINING_KINDS:
            raise ValueError("maxmin applies only to the retraining-based scorers (fl, kl)")

    @property
    def label(self) -> str:
        return self.name or self.kind

    def alpha(self, t: int) -> float:
        """Confidence weight ``a_t`` at iteration ``t`` (1-based)."""
        mode, value = _parse_confidence(self.confidence)
        if mode == "none":
            return 0.0
        if mode == "inv_sqrt":
            return min(1.0, 1.0 / math.sqrt(max(t, 1)))
        return value

    def mixing_probability(self, t: int) -> float:
        """Uniform-branch probability ``pi_t`` at iteration ``t``."""
        if self.hybrid_scale == 0.0:
            return 0.0
        return min(1.0, self.hybrid_scale / math.sqrt(max(t, 1)))

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)


def _parse_confidence(text: str) -> tuple[str, float]:
    if text == "none":
        return "none", 0.0
    if text == "inv_sqrt":
        return "inv_sqrt", 0.0
    if text.startswith("const:"):
        try:
            value = float(text.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"bad confidence spec {text!r}") from None
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"confidence constant must lie in [0, 1], got {value}")
        return "const", value
    raise ValueError(f"bad confidence spec {text!r}; expected none, inv_sqrt, or const:<a>")


@dataclass
class UtilityReport:
    """Scores of one selection scan plus the chosen node.

    ``scores`` is empty when the query came from a random branch (first
    iteration or the hybrid rule); otherwise ``chosen`` attains the maximum
    score, ties broken by lowest node id.
    """

    iteration: int
    scores: dict[int, float]
    chosen: int


def _validate_alpha(alpha: float) -> None:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"confidence weight must lie in [0, 1], got {alpha}")


def _column(model: GmrfModel, node: int) -> tuple[int, np.ndarray, float, float]:
    pos = model.position(node)
    gii = float(model.G[pos, pos])
    if gii < PIVOT_FLOOR:
        raise ValueError(f"degenerate diagonal g_ii={gii:.3e} at node {node}")
    return pos, model.G[:, pos], gii, float(model.mu[pos])


def score_klg(model: GmrfModel, node: int) -> float:
    """Expected Gaussian-field divergence: ``(1 - mu_i^2) / (2 g_ii)``."""
    _, _, gii, mui = _column(model, node)
    return (1.0 - mui * mui) / (2.0 * gii)


def score_tv(model: GmrfModel, node: int) -> float:
    """Expected total variation: ``2 (1 - mu_i^2) ||g_i||_1 / g_ii``."""
    _, gi, gii, mui = _column(model, node)
    return 2.0 * (1.0 - mui * mui) * float(np.abs(gi).sum()) / gii


def score_msd(model: GmrfModel, node: int) -> float:
    """Expected mean-square deviation: ``(1 - mu_i^2) ||g_i||_2^2 / g_ii^2``."""
    _, gi, gii, mui = _column(model, node)
    return (1.0 - mui * mui) * float(gi @ gi) / (gii * gii)


def score_vm(model: GmrfModel, node: int) -> float:
    """Ensemble variance score ``||g_i||_2^2 / g_ii`` (label-independent)."""
    _, gi, gii, _ = _column(model, node)
    return float(gi @ gi) / gii


def score_sigma_opt(model: GmrfModel, node: int) -> float:
    """Ensemble l1 score ``||g_i||_1^2 / g_ii`` (label-independent)."""
    _, gi, gii, _ = _column(model, node)
    l1 = float(np.abs(gi).sum())
    return l1 * l1 / gii


def _label_weights(model: GmrfModel, node: int, alpha: float) -> tuple[float, float]:
    # Mix the model posterior toward the uninformative prior 1/2.
    w_plus = 0.5 * alpha + (1.0 - alpha) * model.posterior_plus(node)
    return w_plus, 1.0 - w_plus


def score_fl(model: GmrfModel, node: int, alpha: float = 0.0, maxmin: bool = False) -> float:
    """Expected number of prediction flips among the other unlabeled nodes.

    For each candidate label the hypothetical mean is evaluated and sign
    changes against the current predictions are counted over ``U \\ {node}``;
    the two counts are combined by the (confidence-mixed) posterior, or by
    the minimum when ``maxmin`` is set.
    """
    _validate_alpha(alpha)
    pos, _, _, _ = _column(model, node)
    base = model.mu > 0
    flips = {}
    for value in (1.0, -1.0):
        mu_plus = model.hypothetical_mean(node, value)
        changed = (mu_plus > 0) != base
        changed[pos] = False
        flips[value] = float(changed.sum())
    if maxmin:
        return min(flips.values())
    w_plus, w_minus = _label_weights(model, node, alpha)
    return w_plus * flips[1.0] + w_minus * flips[-1.0]


def _bernoulli_kl(p, q) -> np.ndarray:
    """Elementwise KL(Ber(p) || Ber(q)), natural log, floored log arguments.

    The analytic value is nonnegative, so rounding dips below zero are
    clamped away.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    term = p * (np.log(np.maximum(p, _LOG_FLOOR)) - np.log(np.maximum(q, _LOG_FLOOR)))
    term += (1.0 - p) * (
        np.log(np.maximum(1.0 - p, _LOG_FLOOR)) - np.log(np.maximum(1.0 - q, _LOG_FLOOR))
    )
    return np.maximum(term, 0.0)


def score_kl(model: GmrfModel, node: int, alpha: float = 0.0, maxmin: bool = False) -> float:
    """Summed Bernoulli divergences inflicted on the other unlabeled nodes.

    For each candidate label, every other node's posterior moves from
    ``(mu_j + 1) / 2`` to the hypothetical value; the per-node divergences
    (cross-entropy of new vs old minus entropy of new) are summed and the
    two label branches combined like :func:`score_fl`.
    """
    _validate_alpha(alpha)
    pos, _, _, _ = _column(model, node)
    q = np.clip((model.mu + 1.0) / 2.0, 0.0, 1.0)
    totals = {}
    for value in (1.0, -1.0):
        mu_plus = model.hypothetical_mean(node, value)
        p = np.clip((mu_plus + 1.0) / 2.0, 0.0, 1.0)
        divergences = _bernoulli_kl(p, q)
        divergences[pos] = 0.0
        totals[value] = float(divergences.sum())
    if maxmin:
        return min(totals.values())
    w_plus, w_minus = _label_weights(model, node, alpha)
    return w_plus * totals[1.0] + w_minus * totals[-1.0]


def score_unc(model, node: int) -> float:
    """Negative top-two soft-label margin (higher = more uncertain)."""
    if isinstance(model, MulticlassModel):
        pos = model.position(node)
        col = model.class_means()[:, pos]
        c = col.size
        top2 = np.partition(col, (c - 2, c - 1))[-2:]
        return -float(top2[1] - top2[0])
    _, _, _, mui = _column(model, node)
    return -2.0 * abs(mui)


def _class_spread(mm: MulticlassModel) -> np.ndarray:
    """``sum_c (1 - pbar_c^2)`` per node, with pbar the normalized shifted means."""
    shifted = np.clip((mm.class_means() + 1.0) / 2.0, 0.0, 1.0)
    total = shifted.sum(axis=0)
    safe = np.where(total > 0, total, 1.0)
    pbar = np.where(total > 0, shifted / safe, 1.0 / mm.num_classes)
    return mm.num_classes - (pbar * pbar).sum(axis=0)


def score_tv_mc(mm: MulticlassModel, node: int) -> float:
    """Multi-class total-variation score ``sum_c (1 - pbar_c^2) ||g_i||_1 / g_ii``."""
    base = mm.models[0]
    _, gi, gii, _ = _column(base, node)
    pos = base.position(node)
    return float(_class_spread(mm)[pos]) * float(np.abs(gi).sum()) / gii


def score_msd_mc(mm: MulticlassModel, node: int) -> float:
    """Multi-class deviation score ``sum_c (1 - pbar_c^2) ||g_i||_2^2 / g_ii^2``."""
    base = mm.models[0]
    _, gi, gii, _ = _column(base, node)
    pos = base.position(node)
    return float(_class_spread(mm)[pos]) * float(gi @ gi) / (gii * gii)


def _scan_diag(G: np.ndarray) -> np.ndarray:
    dg = np.diagonal(G)
    if dg.size == 0:
        raise ValueError("no unlabeled nodes to score")
    if dg.min() < PIVOT_FLOOR:
        raise ValueError(f"degenerate diagonal in G (min {dg.min():.3e})")
    return dg


def _binary_scan(model: GmrfModel, kind: str, alpha: float) -> np.ndarray:
    G = model.G
    dg = _scan_diag(G)
    mu = model.mu
    if kind == "unc":
        return -2.0 * np.abs(mu)
    if kind == "vm":
        return (G * G).sum(axis=0) / dg
    if kind == "sigma-opt":
        l1 = np.abs(G).sum(axis=0)
        return l1 * l1 / dg
    unc_term = 1.0 - mu * mu
    if kind == "klg":
        if alpha == 0.0:
            return unc_term / (2.0 * dg)
        w_plus = 0.5 * alpha + (1.0 - alpha) * np.clip((mu + 1.0) / 2.0, 0.0, 1.0)
        return (w_plus * (1.0 - mu) ** 2 + (1.0 - w_plus) * (1.0 + mu) ** 2) / (2.0 * dg)
    if kind == "tv":
        l1 = np.abs(G).sum(axis=0)
        base = 2.0 * unc_term * l1 / dg
        if alpha == 0.0:
            return base
        return 0.5 * alpha * (l1 * l1 / dg) + (1.0 - alpha) * base
    if kind == "msd":
        l2sq = (G * G).sum(axis=0)
        base = unc_term * l2sq / (dg * dg)
        if alpha == 0.0:
            return base
        return 0.5 * alpha * (l2sq / dg) + (1.0 - alpha) * base
    raise ValueError(f"unknown strategy kind {kind!r}")


def _multiclass_scan(mm: MulticlassModel, kind: str, alpha: float) -> np.ndarray:
    if kind in BINARY_ONLY_KINDS:
        raise ValueError(f"strategy {kind!r} is defined for binary models only")
    G = mm.models[0].G
    dg = _scan_diag(G)
    if kind == "vm":
        return (G * G).sum(axis=0) / dg
    if kind == "sigma-opt":
        l1 = np.abs(G).sum(axis=0)
        return l1 * l1 / dg
    if kind == "unc":
        means = mm.class_means()
        c = means.shape[0]
        top2 = np.partition(means, (c - 2, c - 1), axis=0)[-2:, :]
        return -(top2[1] - top2[0])
    spread = _class_spread(mm)
    if kind == "tv":
        l1 = np.abs(G).sum(axis=0)
        base = spread * l1 / dg
        if alpha == 0.0:
            return base
        return 0.5 * alpha * (l1 * l1 / dg) + (1.0 - alpha) * base
    if kind == "msd":
        l2sq = (G * G).sum(axis=0)
        base = spread * l2sq / (dg * dg)
        if alpha == 0.0:
            return base
        return 0.5 * alpha * (l2sq / dg) + (1.0 - alpha) * base
    raise ValueError(f"unknown strategy kind {kind!r}")


def utility_scores(strategy: Strategy, model, t: int) -> np.ndarray:
    """Schedule-adjusted scores of every unlabeled node at iteration ``t``.

    With confidence weight ``a_t``: tv blends toward the sigma-opt score and
    msd toward the vm score (``0.5 a_t * ensemble + (1 - a_t) * adaptive``),
    while klg/fl/kl take their label expectation under the mixed posterior.
    Returned array aligns with ``model.unlabeled``.
    """
    if strategy.kind == "random":
        raise ValueError("the random strategy is not score-driven")
    alpha = strategy.alpha(t)
    if isinstance(model, MulticlassModel):
        return _multiclass_scan(model, strategy.kind, alpha)
    if strategy.kind in RETRAINING_KINDS:
        scorer = score_fl if strategy.kind == "fl" else score_kl
        return np.array([
            scorer(model, int(node), alpha=alpha, maxmin=strategy.maxmin)
            for node in model.unlabeled
        ])
    return _binary_scan(model, strategy.kind, alpha)


def _uniform_draw(ids: np.ndarray, rng: np.random.Generator) -> int:
    return int(ids[rng.integers(ids.size)])


def select(strategy: Strategy, model, t: int, rng: np.random.Generator) -> int:
    """Pick the next query node at iteration ``t`` (1-based).

    The first iteration queries uniformly at random, as does the ``random``
    strategy at every iteration. Otherwise, with probability ``pi_t`` the
    hybrid rule queries uniformly over the unlabeled nodes; else the node
    with the highest adjusted utility wins, ties broken by lowest node id.
    """
    ids = model.unlabeled
    if ids.size == 0:
        raise ValueError("no unlabeled nodes to select from")
    if t <= 1 or strategy.kind == "random":
        return _uniform_draw(ids, rng)
    pi_t = strategy.mixing_probability(t)
    if pi_t > 0.0 and rng.random() < pi_t:
        return _uniform_draw(ids, rng)
    scores = utility_scores(strategy, model, t)
    return int(ids[int(np.argmax(scores))])


def select_report(strategy: Strategy, model, t: int, rng: np.random.Generator) -> UtilityReport:
    """Like :func:`select` but also returns the per-candidate scores.

    Random-branch draws yield an empty score map.
    """
    ids = model.unlabeled
    if ids.size == 0:
        raise ValueError("no unlabeled nodes to select from")
    if t <= 1 or strategy.kind == "random":
        return UtilityReport(t, {}, _uniform_draw(ids, rng))
    pi_t = strategy.mixing_probability(t)
    if pi_t > 0.0 and rng.random() < pi_t:
        return UtilityReport(t, {}, _uniform_draw(ids, rng))
    scores = utility_scores(strategy, model, t)
    chosen = int(ids[int(np.argmax(scores))])
    return UtilityReport(t, {int(i): float(s) for i, s in zip(ids, scores)}, chosen)
