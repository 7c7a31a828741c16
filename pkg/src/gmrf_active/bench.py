"""Seeded Monte-Carlo harness for active-sampling experiments.

A run draws the graph (generator sources are re-sampled per run with seed
``base_seed + r``; file sources stay fixed), then lets every strategy play
the same budget of queries against a label oracle. All strategies in one
config share the per-run seed, so their first random query coincides and
curve differences are strategy-driven. Accuracy after each query is the
fraction of correctly predicted nodes, evaluated on the shrinking unlabeled
set by default or on the full initial node set behind a flag.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from . import graph as graph_mod
from .gmrf import GmrfModel, MulticlassModel, spd_inverse
from .graph import LabeledGraph, regularized_laplacian
from .strategies import Strategy, select

EVAL_MODES = ("remaining", "initial")


@dataclass
class LabelOracle:
    """Ground-truth label source; answers are pure functions of node id."""

    labels: dict[int, int]
    queries: int = 0

    def query(self, node: int) -> int:
        if node not in self.labels:
            raise KeyError(f"oracle has no label for node {node}")
        self.queries += 1
        return int(self.labels[node])


@dataclass
class AccuracyCurve:
    """Per-iteration accuracy of one strategy across Monte-Carlo runs."""

    strategy: str
    values: np.ndarray  # shape (runs, budget)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError("values must be a (runs, budget) array")
        if self.values.size and (self.values.min() < 0 or self.values.max() > 1):
            raise ValueError("accuracy values must lie in [0, 1]")

    @property
    def runs(self) -> int:
        return self.values.shape[0]

    @property
    def budget(self) -> int:
        return self.values.shape[1]

    @property
    def mean(self) -> np.ndarray:
        return self.values.mean(axis=0)

    @property
    def std(self) -> np.ndarray:
        return self.values.std(axis=0)


@dataclass
class ExperimentConfig:
    """Everything one experiment needs; see :func:`run_experiment`.

    ``graph`` is either a source spec string (``grid:RxC``,
    ``community:..``, ``file:EDGES:LABELS``) or a ready ``LabeledGraph``
    reused across runs.
    """

    graph: str | LabeledGraph
    strategies: list[Strategy]
    budget: int
    runs: int = 50
    seed: int = 0
    delta: float = 0.005
    eval_on: str = "remaining"
    output: str | None = None

    def __post_init__(self):
        if not self.strategies:
            raise ValueError("need at least one strategy")
        labels = [s.label for s in self.strategies]
        if len(set(labels)) != len(labels):
            raise ValueError(f"strategy labels must be unique, got {labels}")
        if self.budget < 1:
            raise ValueError("budget must be at least 1")
        if self.runs < 1:
            raise ValueError("runs must be at least 1")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.eval_on not in EVAL_MODES:
            raise ValueError(f"eval_on must be one of {EVAL_MODES}")


def _fresh_model(inverse: np.ndarray, delta: float, num_classes: int):
    if num_classes == 2:
        return GmrfModel.from_inverse(inverse, delta)
    return MulticlassModel.from_inverse(inverse, delta, num_classes)


def _observe_class(model, node: int, class_id: int) -> None:
    if isinstance(model, MulticlassModel):
        model.observe(node, class_id)
    else:
        model.observe(node, 1.0 if class_id == 1 else -1.0)


def predicted_classes(model) -> dict[int, int]:
    """Predictions as class ids: binary +1 maps to class 1, -1 to class 0."""
    if isinstance(model, MulticlassModel):
        return model.predict()
    return {node: (1 if value > 0 else 0) for node, value in model.predict().items()}


def accuracy(model, oracle) -> float:
    """Fraction of unlabeled nodes whose prediction matches the oracle."""
    labels = oracle.labels if isinstance(oracle, LabelOracle) else oracle
    preds = predicted_classes(model)
    if not preds:
        raise ValueError("no unlabeled nodes left to evaluate")
    hits = sum(1 for node, cls in preds.items() if labels[node] == cls)
    return hits / len(preds)


def baseline_accuracy(labels) -> float:
    """Relative frequency of the most common class."""
    values = list(labels.values()) if isinstance(labels, Mapping) else list(labels)
    if not values:
        raise ValueError("empty label set")
    return Counter(values).most_common(1)[0][1] / len(values)


def _accuracy_value(model, labels: dict[int, int], eval_on: str, n: int) -> float:
    preds = predicted_classes(model)
    hits = sum(1 for node, cls in preds.items() if labels[node] == cls)
    if eval_on == "remaining":
        return hits / len(preds)
    # queried nodes carry their disclosed label and count as correct
    return (hits + (n - len(preds))) / n


def _run_graph(cfg: ExperimentConfig, run_seed: int) -> LabeledGraph:
    if isinstance(cfg.graph, LabeledGraph):
        return cfg.graph
    return graph_mod.from_spec(cfg.graph, seed=run_seed)


def run_experiment(cfg: ExperimentConfig,
                   step_hook: Callable | None = None) -> dict[str, AccuracyCurve]:
    """Run the full Monte-Carlo experiment; returns one curve per strategy.

    ``step_hook``, when given, is called as
    ``step_hook(strategy=..., model=..., run=..., t=...)`` after every
    observation, which is handy for invariant tracking.
    """
    curves = {s.label: np.zeros((cfg.runs, cfg.budget)) for s in cfg.strategies}
    for r in range(cfg.runs):
        run_seed = cfg.seed + r
        lg = _run_graph(cfg, run_seed)
        n = lg.graph.n
        if cfg.budget >= n:
            raise ValueError(f"budget {cfg.budget} must be smaller than the node count {n}")
        lap = regularized_laplacian(lg.graph, cfg.delta)
        inverse = spd_inverse(lap.matrix)
        oracle = LabelOracle(dict(lg.labels))
        for strat in cfg.strategies:
            model = _fresh_model(inverse, cfg.delta, lg.num_classes)
            rng = np.random.default_rng(run_seed)
            for t in range(1, cfg.budget + 1):
                node = select(strat, model, t, rng)
                _observe_class(model, node, oracle.query(node))
                curves[strat.label][r, t - 1] = _accuracy_value(
                    model, oracle.labels, cfg.eval_on, n
                )
                if step_hook is not None:
                    step_hook(strategy=strat, model=model, run=r, t=t)
    return {s.label: AccuracyCurve(s.label, curves[s.label]) for s in cfg.strategies}


def emit_csv(results: dict[str, AccuracyCurve], path) -> None:
    """Write curves as ``strategy,t,mean_accuracy,std_accuracy,runs`` rows.

    Floats carry 6 decimals; lines end with LF. An empty result set is an
    error and no file is created.
    """
    if not results:
        raise ValueError("no results to write")
    lines = ["strategy,t,mean_accuracy,std_accuracy,runs"]
    for label, curve in results.items():
        mean, std = curve.mean, curve.std
        for t in range(curve.budget):
            lines.append(f"{label},{t + 1},{mean[t]:.6f},{std[t]:.6f},{curve.runs}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_summary(results: dict[str, AccuracyCurve],
                 checkpoints: tuple[int, ...] | None = None) -> str:
    """Plain-text mean +/- std table at a few checkpoint iterations."""
    if not results:
        raise ValueError("no results to summarize")
    budget = min(curve.budget for curve in results.values())
    if checkpoints is None:
        checkpoints = (5, 10, 20, budget)
    points = sorted({t for t in checkpoints if 1 <= t <= budget})
    width = max(len(label) for label in results) + 2
    header = "strategy".ljust(width) + "".join(f"t={t}".rjust(16) for t in points)
    lines = [header]
    for label, curve in results.items():
        cells = "".join(
            f"{curve.mean[t - 1]:.3f}+/-{curve.std[t - 1]:.3f}".rjust(16) for t in points
        )
        lines.append(label.ljust(width) + cells)
    return "\n".join(lines)
