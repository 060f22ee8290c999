"""Single-loop CCCP+ADMM solver for the per-view linear predictor stack.

The concave global term is linearized at the previous iterate through a
trace-norm subgradient, the per-label stacks are split into auxiliary
variables with scaled multipliers, and each sweep performs one pass of

    W  <-  solve per view:  mu * (sum_k Xk' Xk) W =
             lam * Xp' G_prev  +  sum_k Xk' (mu Zk - Lk)
             - X' (P o (X W_prev - Y))
    Zk <-  svt(Xk W + Lk / mu, lam / mu)
    Lk <-  Lk + mu * (Xk W - Zk)

where Xk gathers the rows tagged positive for label k across views, Xp
the present rows, and P the observed-entry indicator. The loss enters
the W step through its gradient at the previous iterate, so each view
solves one cached SPD system per sweep. Labels whose positive stack is
empty in every view are dropped from the splitting entirely.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .data import (
    MultiViewDataset,
    WeightStack,
    indicator_from,
    present_rows,
    sublabel_rows,
)
from .errors import AllViewsMissing, InvalidInput, NonFiniteObjective
from .linalg import SpdFactor, nuclear_norm, svt, trace_norm_subgradient


class Variant(str, Enum):
    """Which objective the sweep minimizes."""

    FULL = "full"
    LOSS_ONLY = "loss_only"
    LOSS_PLUS_LOCAL = "loss_plus_local"


@dataclass(frozen=True)
class SolverConfig:
    lam: float
    mu: float = 5.0
    max_iters: int = 200
    rel_tol: float = 1e-6
    variant: Variant = Variant.FULL
    init_seed: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise InvalidInput(f"lam must be nonnegative and finite, got {self.lam!r}")
        if not (np.isfinite(self.mu) and self.mu > 0):
            raise InvalidInput(f"mu must be positive and finite, got {self.mu!r}")
        if self.max_iters < 1:
            raise InvalidInput(f"max_iters must be at least 1, got {self.max_iters}")
        if not (np.isfinite(self.rel_tol) and self.rel_tol >= 0):
            raise InvalidInput(f"rel_tol must be nonnegative, got {self.rel_tol!r}")
        object.__setattr__(self, "variant", Variant(self.variant))


@dataclass
class SolverTrace:
    """Per-sweep series: objective, surrogate, max primal residual, seconds."""

    objective: list[float] = field(default_factory=list)
    surrogate: list[float] = field(default_factory=list)
    residual: list[float] = field(default_factory=list)
    seconds: list[float] = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self):
        return len(self.objective)

    def append(self, objective, surrogate, residual, seconds):
        self.objective.append(float(objective))
        self.surrogate.append(float(surrogate))
        self.residual.append(float(residual))
        self.seconds.append(float(seconds))


@dataclass
class SolverState:
    """Iterate: weights, per-label splits Z, multipliers, sweep counter."""

    w: WeightStack
    z: list[np.ndarray]
    multipliers: list[np.ndarray]
    iteration: int = 0


class _Workspace:
    """Row bookkeeping and cached factorizations shared across sweeps."""

    def __init__(self, ds, config):
        self.ds = ds
        self.mu = config.mu
        self.features = [v.features for v in ds.views]
        self.labels = [v.labels for v in ds.views]
        self.indicator = [indicator_from(v) for v in ds.views]
        self.present = [present_rows(v) for v in ds.views]

        # per-label positive rows, one entry per view; labels empty everywhere drop out
        self.active_labels = []
        self.label_rows = []
        self.label_splits = []
        for k in range(ds.n_labels):
            rows = [sublabel_rows(v, k) for v in ds.views]
            if sum(r.size for r in rows) == 0:
                continue
            self.active_labels.append(k)
            self.label_rows.append(rows)
            self.label_splits.append(np.cumsum([r.size for r in rows])[:-1])

        # boundaries of the per-view blocks inside the present-row stack
        self.present_splits = np.cumsum([p.size for p in self.present])[:-1]

        # mu * sum_k Xk' Xk == mu * X' diag(w) X with w = positive-tag counts
        self.factors = []
        for view, feats in zip(ds.views, self.features):
            weight = ((view.labels == 1.0) & ~view.missing_rows[:, None]).sum(axis=1)
            gram = (feats * weight[:, None]).T @ feats
            self.factors.append(SpdFactor(self.mu * gram))

    def predictions(self, w):
        return [feats @ wi for feats, wi in zip(self.features, w.weights)]

    def present_stack(self, preds):
        return np.vstack([p[rows] for p, rows in zip(preds, self.present)])

    def label_stack(self, preds, a):
        rows = self.label_rows[a]
        return np.vstack([p[r] for p, r in zip(preds, rows)])


def _make_state(ds, config):
    return _Workspace(ds, config)


def init_state(ds, config):
    """Random weights scaled by 1/sqrt(d) per view, zero splits and multipliers."""
    config = _coerce_config(config)
    rng = np.random.default_rng(np.random.SeedSequence([config.init_seed]))
    weights = []
    for view in ds.views:
        d = view.n_features
        weights.append(rng.standard_normal((d, ds.n_labels)) / np.sqrt(d))
    ws = _Workspace(ds, config)
    z = [np.zeros((sum(r.size for r in rows), ds.n_labels)) for rows in ws.label_rows]
    mult = [np.zeros_like(zk) for zk in z]
    return SolverState(w=WeightStack(weights), z=z, multipliers=mult, iteration=0)


def _coerce_config(config):
    if not isinstance(config, SolverConfig):
        raise InvalidInput("config must be a SolverConfig")
    return config


def _update_w_impl(ws, state, config, grad_prev):
    preds_prev = ws.predictions(state.w)
    use_grad = grad_prev is not None and config.lam > 0
    if use_grad:
        n_present = sum(p.size for p in ws.present)
        if grad_prev.shape != (n_present, ws.ds.n_labels):
            raise InvalidInput(
                f"grad_prev must have shape ({n_present}, {ws.ds.n_labels}), "
                f"got {grad_prev.shape}"
            )
        grad_blocks = np.split(grad_prev, ws.present_splits)

    new_weights = []
    for i, feats in enumerate(ws.features):
        n, c = feats.shape[0], ws.ds.n_labels
        # sum_k Xk' (mu Zk - Lk), gathered through an n x c scatter per view
        gathered = np.zeros((n, c))
        for a in range(len(ws.active_labels)):
            rows_i = ws.label_rows[a][i]
            if rows_i.size == 0:
                continue
            block = np.split(ws.mu * state.z[a] - state.multipliers[a], ws.label_splits[a])[i]
            gathered[rows_i] += block
        rhs = feats.T @ gathered
        rhs -= feats.T @ (ws.indicator[i] * (preds_prev[i] - ws.labels[i]))
        if use_grad:
            rhs += config.lam * feats[ws.present[i]].T @ grad_blocks[i]
        new_weights.append(ws.factors[i].solve(rhs))
    return WeightStack(new_weights)


def _update_z_impl(ws, state, config):
    preds = ws.predictions(state.w)
    tau = config.lam / config.mu
    out = []
    for a in range(len(ws.active_labels)):
        arg = ws.label_stack(preds, a) + state.multipliers[a] / config.mu
        out.append(svt(arg, tau))
    return out


def _update_multipliers_impl(ws, state, config):
    preds = ws.predictions(state.w)
    out = []
    for a in range(len(ws.active_labels)):
        out.append(state.multipliers[a] + config.mu * (ws.label_stack(preds, a) - state.z[a]))
    return out


def update_w(state, ds, config, grad_prev=None):
    """One W sweep; ``grad_prev`` is the trace-norm subgradient of the
    present-row prediction stack at the previous weights (or None)."""
    config = _coerce_config(config)
    return _update_w_impl(_Workspace(ds, config), state, config, grad_prev)


def update_z(state, ds, config):
    """Shrink each active per-label stack by lam/mu around the multipliers."""
    config = _coerce_config(config)
    return _update_z_impl(_Workspace(ds, config), state, config)


def update_multipliers(state, ds, config):
    """Ascend the scaled multipliers along the current primal residuals."""
    config = _coerce_config(config)
    return _update_multipliers_impl(_Workspace(ds, config), state, config)


def _masked_loss_from_preds(ws, preds):
    total = 0.0
    for ind, pred, labels in zip(ws.indicator, preds, ws.labels):
        resid = ind * (pred - labels)
        total += 0.5 * float(np.sum(resid * resid))
    return total


def _rel_change(curr, prev):
    return abs(curr - prev) / max(abs(prev), 1e-12)


def _fit_loss_only(ds, ws, config):
    start = time.perf_counter()
    weights = []
    for feats, labels, ind in zip(ws.features, ws.labels, ws.indicator):
        d, c = feats.shape[1], labels.shape[1]
        w = np.zeros((d, c))
        for k in range(c):
            mask = ind[:, k]
            if not mask.any():
                continue  # nothing observed for this label in this view
            cols = feats * mask[:, None]
            w[:, k] = SpdFactor(cols.T @ feats).solve(feats.T @ (mask * labels[:, k]))
        weights.append(w)
    w = WeightStack(weights)
    loss = _masked_loss_from_preds(ws, ws.predictions(w))
    if not np.isfinite(loss):
        raise NonFiniteObjective(1, loss)
    trace = SolverTrace(converged=True)
    trace.append(loss, loss, 0.0, time.perf_counter() - start)
    return w, trace


def fit(ds, config):
    """Run the solver to tolerance or the sweep budget.

    Returns ``(weights, trace)``. The trace's objective column holds the
    variant's own objective: the full loss + lam * (local - global) for
    ``FULL``, loss + lam * local for ``LOSS_PLUS_LOCAL``, and the bare
    loss for ``LOSS_ONLY`` (which is a single direct solve). Raises
    ``NonFiniteObjective`` as soon as the objective stops being finite.
    """
    config = _coerce_config(config)
    ws = _Workspace(ds, config)
    if config.variant is Variant.LOSS_ONLY:
        return _fit_loss_only(ds, ws, config)

    state = init_state(ds, config)
    trace = SolverTrace()
    preds = ws.predictions(state.w)
    f_prev = None
    for t in range(1, config.max_iters + 1):
        t0 = time.perf_counter()
        use_grad = config.variant is Variant.FULL and config.lam > 0
        grad_prev = trace_norm_subgradient(ws.present_stack(preds)) if use_grad else None

        w = _update_w_impl(ws, state, config, grad_prev)
        preds = ws.predictions(w)
        stacks = [ws.label_stack(preds, a) for a in range(len(ws.active_labels))]

        tau = config.lam / config.mu
        z = [svt(stack + mult / config.mu, tau) for stack, mult in zip(stacks, state.multipliers)]
        mult = [
            m + config.mu * (stack - zk) for m, stack, zk in zip(state.multipliers, stacks, z)
        ]
        residual = max((float(np.linalg.norm(s - zk)) for s, zk in zip(stacks, z)), default=0.0)

        loss = _masked_loss_from_preds(ws, preds)
        local = sum(nuclear_norm(s) for s in stacks)
        if config.variant is Variant.FULL:
            present = ws.present_stack(preds)
            f = loss + config.lam * (local - nuclear_norm(present))
            if use_grad:
                surrogate = loss + config.lam * (local - float(np.sum(present * grad_prev)))
            else:
                surrogate = f
        else:
            f = loss + config.lam * local
            surrogate = f
        if not np.isfinite(f):
            raise NonFiniteObjective(t, f)

        trace.append(f, surrogate, residual, time.perf_counter() - t0)
        state = SolverState(w=w, z=z, multipliers=mult, iteration=t)
        if f_prev is not None and _rel_change(f, f_prev) < config.rel_tol:
            trace.converged = True
            break
        f_prev = f
    return state.w, trace


def predict(w, test):
    """Average the per-view predictions over the views that saw each sample.

    Raises ``AllViewsMissing`` if some test sample is absent everywhere.
    """
    if not isinstance(test, MultiViewDataset):
        raise InvalidInput("test must be a MultiViewDataset")
    if not test.aligned:
        raise InvalidInput("prediction averages across views, which needs aligned rows")
    if w.n_views != test.n_views:
        raise InvalidInput(f"weights cover {w.n_views} views, dataset has {test.n_views}")
    if w.n_labels != test.n_labels:
        raise InvalidInput(f"weights predict {w.n_labels} labels, dataset has {test.n_labels}")
    n, c = test.n_samples, test.n_labels
    scores = np.zeros((n, c))
    counts = np.zeros(n)
    for i, (view, wi) in enumerate(zip(test.views, w.weights)):
        if view.n_features != wi.shape[0]:
            raise InvalidInput(
                f"view {i} has {view.n_features} features, weights expect {wi.shape[0]}"
            )
        present = ~view.missing_rows
        scores[present] += view.features[present] @ wi
        counts += present
    if np.any(counts == 0):
        raise AllViewsMissing(int(np.flatnonzero(counts == 0)[0]))
    return scores / counts[:, None]
