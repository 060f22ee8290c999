"""Masked squared loss and the global/local trace-norm regularizer.

The training objective is

    f(W) = loss(W) + lam * (local(W) - global(W))

where loss is half the squared error over observed label entries, local
sums the nuclear norms of the per-label prediction stacks (rows tagged
positive for that label, stacked across views), and global is the
nuclear norm of the prediction stack over all present rows of all
views. Subtracting the global term rewards spread across the whole
label space while the local sum still pulls each label's block toward
low rank; on data where every present row carries at least one positive
tag the difference is nonnegative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import indicator_from, present_rows, stack_predictions, sublabel_rows
from .errors import InvalidInput
from .linalg import nuclear_norm


@dataclass(frozen=True)
class ObjectiveValue:
    """Decomposed objective: loss, the two regularizer terms, and lam."""

    loss: float
    local_term: float
    global_term: float
    lam: float

    @property
    def regularizer(self):
        return self.local_term - self.global_term

    @property
    def total(self):
        return self.loss + self.lam * self.regularizer


def _check_pair(ds, w):
    if w.n_views != ds.n_views:
        raise InvalidInput(f"weights cover {w.n_views} views, dataset has {ds.n_views}")
    if w.n_labels != ds.n_labels:
        raise InvalidInput(f"weights predict {w.n_labels} labels, dataset has {ds.n_labels}")
    for i, (view, wi) in enumerate(zip(ds.views, w.weights)):
        if view.n_features != wi.shape[0]:
            raise InvalidInput(
                f"view {i} has {view.n_features} features, weights expect {wi.shape[0]}"
            )


def masked_loss(ds, w):
    """Half the squared prediction error over observed label entries.

    Entries with a zero tag and rows missing from a view contribute
    nothing; views are summed in order.
    """
    _check_pair(ds, w)
    total = 0.0
    for view, wi in zip(ds.views, w.weights):
        resid = indicator_from(view) * (view.features @ wi - view.labels)
        total += 0.5 * float(np.sum(resid * resid))
    return total


def regularizer_value(ds, w):
    """Return ``(local, global)`` nuclear-norm terms for the pair.

    ``local`` sums, over labels in index order, the nuclear norm of the
    stack of predictions for rows tagged positive for that label;
    labels whose stack is empty in every view contribute zero.
    ``global`` is the nuclear norm of the prediction stack over all
    present rows.
    """
    _check_pair(ds, w)
    local = 0.0
    for k in range(ds.n_labels):
        rows = [sublabel_rows(view, k) for view in ds.views]
        if sum(r.size for r in rows) == 0:
            continue
        local += nuclear_norm(stack_predictions(ds, w, rows))
    global_term = nuclear_norm(stack_predictions(ds, w, [present_rows(v) for v in ds.views]))
    return local, global_term


def objective(ds, w, lam):
    """Evaluate the full objective at ``(ds, w)`` for trade-off ``lam``."""
    if not np.isfinite(lam) or lam < 0:
        raise InvalidInput(f"lam must be a nonnegative finite scalar, got {lam!r}")
    loss = masked_loss(ds, w)
    local, global_term = regularizer_value(ds, w)
    return ObjectiveValue(loss=loss, local_term=local, global_term=global_term, lam=float(lam))
