"""Containers and indexing helpers for multi-view multi-label data.

A dataset holds one block per view: a feature matrix, a label matrix
over a shared label vocabulary with entries in {-1, 0, +1} (0 meaning
the tag is unobserved), and a per-sample missing flag for samples the
view never saw. Rows flagged missing are stored as all-zero in both
features and labels so downstream code can multiply without masking
twice. Views of an aligned dataset index the same samples in the same
order; a de-aligned dataset only promises per-view consistency.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput


def _bool_vector(x, n, name):
    arr = np.asarray(x)
    if arr.dtype != np.bool_:
        if not np.isin(arr, (0, 1)).all():
            raise InvalidInput(f"{name} must be boolean or 0/1 valued")
        arr = arr.astype(bool)
    if arr.shape != (n,):
        raise InvalidInput(f"{name} must have shape ({n},), got {arr.shape}")
    return arr


@dataclass(eq=False)
class ViewData:
    """One view: features ``(n, d)``, labels ``(n, c)``, missing flags ``(n,)``."""

    features: np.ndarray
    labels: np.ndarray
    missing_rows: np.ndarray

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels, dtype=float)
        if feats.ndim != 2:
            raise InvalidInput(f"features must be 2-D, got shape {feats.shape}")
        if labels.ndim != 2 or labels.shape[0] != feats.shape[0]:
            raise InvalidInput(
                f"labels must be 2-D with {feats.shape[0]} rows, got shape {labels.shape}"
            )
        if feats.size and not np.all(np.isfinite(feats)):
            raise InvalidInput("features contain non-finite entries")
        if not np.isin(labels, (-1.0, 0.0, 1.0)).all():
            raise InvalidInput("labels must take values in {-1, 0, +1}")
        missing = _bool_vector(self.missing_rows, feats.shape[0], "missing_rows")
        if np.any(feats[missing]) or np.any(labels[missing]):
            raise InvalidInput("missing rows must be all-zero in features and labels")
        self.features = feats
        self.labels = labels
        self.missing_rows = missing

    @property
    def n_samples(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    @property
    def n_labels(self):
        return self.labels.shape[1]


@dataclass(eq=False)
class MultiViewDataset:
    """A list of views over a shared sample space and label vocabulary."""

    views: list[ViewData]
    aligned: bool = True

    def __post_init__(self):
        if not self.views:
            raise InvalidInput("dataset needs at least one view")
        self.views = list(self.views)
        n, c = self.views[0].n_samples, self.views[0].n_labels
        if c < 1:
            raise InvalidInput("dataset needs at least one label")
        for i, view in enumerate(self.views):
            if not isinstance(view, ViewData):
                raise InvalidInput(f"view {i} is not a ViewData")
            if view.n_samples != n or view.n_labels != c:
                raise InvalidInput(
                    f"view {i} has shape ({view.n_samples} samples, {view.n_labels} labels), "
                    f"expected ({n}, {c})"
                )
        if self.aligned:
            # row indices co-refer only when aligned; coverage is checked there
            present_somewhere = np.zeros(n, dtype=bool)
            for view in self.views:
                present_somewhere |= ~view.missing_rows
            if not present_somewhere.all():
                j = int(np.flatnonzero(~present_somewhere)[0])
                raise InvalidInput(f"sample {j} is missing in every view")

    @property
    def n_views(self):
        return len(self.views)

    @property
    def n_samples(self):
        return self.views[0].n_samples

    @property
    def n_labels(self):
        return self.views[0].n_labels


@dataclass(eq=False)
class WeightStack:
    """Per-view weight matrices ``(d_i, c)`` over a shared label space."""

    weights: list[np.ndarray]

    def __post_init__(self):
        if not self.weights:
            raise InvalidInput("weight stack needs at least one view")
        mats = []
        for i, w in enumerate(self.weights):
            w = np.asarray(w, dtype=float)
            if w.ndim != 2:
                raise InvalidInput(f"weights[{i}] must be 2-D, got shape {w.shape}")
            if w.size and not np.all(np.isfinite(w)):
                raise InvalidInput(f"weights[{i}] contains non-finite entries")
            mats.append(w)
        c = mats[0].shape[1]
        for i, w in enumerate(mats):
            if w.shape[1] != c:
                raise InvalidInput(f"weights[{i}] has {w.shape[1]} columns, expected {c}")
        self.weights = mats

    @property
    def n_views(self):
        return len(self.weights)

    @property
    def n_labels(self):
        return self.weights[0].shape[1]


def indicator_from(view):
    """0/1 matrix of observed label entries: 1 iff the tag is nonzero and
    the row is not missing. Missing rows are all-zero.
    """
    observed = (view.labels != 0.0) & ~view.missing_rows[:, None]
    return observed.astype(float)


def present_rows(view):
    """Ascending indices of samples the view actually observed."""
    return np.flatnonzero(~view.missing_rows)


def sublabel_rows(view, k):
    """Ascending indices of non-missing samples tagged positive for label ``k``."""
    if not 0 <= k < view.n_labels:
        raise InvalidInput(f"label index {k} out of range [0, {view.n_labels})")
    return np.flatnonzero((view.labels[:, k] == 1.0) & ~view.missing_rows)


def stack_predictions(ds, w, rows_per_view):
    """Vertically stack per-view predictions on selected rows.

    Blocks are stacked in view order: block ``i`` is
    ``ds.views[i].features[rows_per_view[i]] @ w.weights[i]``. Empty
    selections contribute zero-row blocks.
    """
    if len(rows_per_view) != ds.n_views or w.n_views != ds.n_views:
        raise InvalidInput(
            f"need one row selection and one weight matrix per view "
            f"({ds.n_views}), got {len(rows_per_view)} and {w.n_views}"
        )
    if w.n_labels != ds.n_labels:
        raise InvalidInput(f"weights predict {w.n_labels} labels, dataset has {ds.n_labels}")
    blocks = []
    for i, (view, rows) in enumerate(zip(ds.views, rows_per_view)):
        if view.n_features != w.weights[i].shape[0]:
            raise InvalidInput(
                f"view {i} has {view.n_features} features, weights expect "
                f"{w.weights[i].shape[0]}"
            )
        rows = np.asarray(rows, dtype=int).reshape(-1)
        if rows.size and (rows.min() < 0 or rows.max() >= view.n_samples):
            raise InvalidInput(f"row selection for view {i} out of range")
        blocks.append(view.features[rows] @ w.weights[i])
    return np.vstack(blocks)
