"""Synthetic data generation and the corruption harness.

Generation plants cluster structure: every cluster owns a small set of
positive labels, samples inherit their cluster's label row exactly, and
each view embeds a jittered one-hot cluster code through its own random
linear map plus Gaussian feature noise. The full label matrix must come
out with full column rank (regeneration with a perturbed seed, then
``GenerationFailure``), while rows sharing a positive label stay
confined to few distinct patterns, so per-label sub-matrices are low
rank.

Corruption removes whole samples per view (keeping every sample in at
least one view), blanks observed tags label-by-label, and optionally
de-aligns the views by independent row permutations.

All randomness is drawn from ``numpy.random.Generator`` instances built
on PCG64 through ``SeedSequence([seed, stream_tag, ...])`` keys, so a
fixed seed reproduces the same dataset bit-for-bit on every platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import MultiViewDataset, ViewData
from .errors import GenerationFailure, InvalidInput

# Within-cluster spread of the latent one-hot codes, relative to 1/sqrt(g).
CLUSTER_JITTER = 0.3

# Stream tags keeping the per-purpose substreams of a corruption seed apart.
_STREAM_VIEW_MISSING = 0
_STREAM_LABEL_MASK = 1
_STREAM_PERMUTE = 2
_STREAM_REPAIR = 3

_MAX_GENERATION_ATTEMPTS = 10


def _rng(*key):
    return np.random.default_rng(np.random.SeedSequence(list(key)))


def _check_seed(seed, name="seed"):
    if not isinstance(seed, (int, np.integer)) or not 0 <= int(seed) < 2**64:
        raise InvalidInput(f"{name} must be an integer in [0, 2**64), got {seed!r}")
    return int(seed)


@dataclass(frozen=True)
class SyntheticSpec:
    """Shape and noise parameters for the planted-cluster generator."""

    n: int = 2000
    c: int = 30
    n_views: int = 3
    dims: tuple[int, ...] = (40, 60, 80)
    positives_per_sample: int = 2
    noise_sigma: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.c < 1 or self.n < self.c:
            raise InvalidInput(f"need n >= c >= 1, got n={self.n}, c={self.c}")
        if self.n_views < 1:
            raise InvalidInput("need at least one view")
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != self.n_views or any(d < 1 for d in dims):
            raise InvalidInput(
                f"dims must list one positive dimension per view, got {self.dims!r}"
            )
        object.__setattr__(self, "dims", dims)
        if not 1 <= self.positives_per_sample <= self.c:
            raise InvalidInput(
                f"positives_per_sample must lie in [1, c], got {self.positives_per_sample}"
            )
        if not (np.isfinite(self.noise_sigma) and self.noise_sigma >= 0):
            raise InvalidInput(f"noise_sigma must be nonnegative, got {self.noise_sigma!r}")
        _check_seed(self.seed)


@dataclass(frozen=True)
class CorruptionSpec:
    """Fractions of samples and tags to remove, plus the de-alignment switch."""

    alpha: float = 0.0
    beta: float = 0.0
    dealign: bool = False
    seed: int = 0

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and 0 <= self.alpha < 1):
            raise InvalidInput(f"alpha must lie in [0, 1), got {self.alpha!r}")
        if not (np.isfinite(self.beta) and 0 <= self.beta <= 1):
            raise InvalidInput(f"beta must lie in [0, 1], got {self.beta!r}")
        _check_seed(self.seed)


def _cluster_labels(spec, rng):
    """Base label rows, one cluster per label: cluster m is positive on
    label m plus ``positives_per_sample - 1`` random extra labels.

    Duplicate cluster patterns collapse the label-matrix rank, so each
    row redraws its extras (boundedly) until its positive set is new;
    when distinct patterns are combinatorially impossible the duplicates
    stay and the caller's rank check rejects the draw.
    """
    g = spec.c
    extra = spec.positives_per_sample - 1
    base = -np.ones((g, spec.c))
    seen = set()
    for m in range(g):
        others = np.delete(np.arange(spec.c), m)
        for _ in range(100):
            picks = rng.choice(others, size=extra, replace=False) if extra else ()
            support = frozenset((m, *picks))
            if support not in seen:
                break
        seen.add(support)
        base[m, m] = 1.0
        base[m, list(picks)] = 1.0
    return base


def _generate_once(spec, rng):
    g = spec.c
    base = _cluster_labels(spec, rng)
    # round-robin keeps every cluster populated; the permutation shuffles order
    cluster = rng.permutation(np.arange(spec.n) % g)
    labels = base[cluster]

    latent = np.zeros((spec.n, g))
    latent[np.arange(spec.n), cluster] = 1.0
    latent += (CLUSTER_JITTER / math.sqrt(g)) * rng.standard_normal((spec.n, g))

    views = []
    for d in spec.dims:
        embed = rng.standard_normal((g, d))
        feats = latent @ embed
        if spec.noise_sigma:
            feats = feats + spec.noise_sigma * rng.standard_normal((spec.n, d))
        views.append(
            ViewData(
                features=feats,
                labels=labels.copy(),
                missing_rows=np.zeros(spec.n, dtype=bool),
            )
        )
    return MultiViewDataset(views=views, aligned=True)


def generate_synthetic(spec):
    """Generate an aligned, complete dataset with planted label structure.

    The returned label matrix has full column rank ``c``; generation is
    retried with a perturbed seed up to 10 times before raising
    ``GenerationFailure``.
    """
    for attempt in range(_MAX_GENERATION_ATTEMPTS):
        rng = _rng(spec.seed, attempt)
        ds = _generate_once(spec, rng)
        if np.linalg.matrix_rank(ds.views[0].labels) == spec.c:
            return ds
    raise GenerationFailure(
        f"label matrix never reached full column rank {spec.c} "
        f"in {_MAX_GENERATION_ATTEMPTS} attempts"
    )


def _view_missing_masks(n, n_views, n_missing, seed):
    """Per-view missing masks with exactly ``n_missing`` True per view and
    every sample left present somewhere.

    Views draw their removal sets independently; any sample that ends up
    missing everywhere is repaired by re-admitting it in one view and
    removing, in exchange, a sample that stays covered elsewhere. The
    repair draws from its own substream, so the result is deterministic.
    """
    if n_views * (n - n_missing) < n:
        raise InvalidInput(
            f"cannot remove {n_missing} of {n} samples from each of {n_views} views "
            "while keeping every sample in at least one view"
        )
    masks = np.zeros((n_views, n), dtype=bool)
    for i in range(n_views):
        rng = _rng(seed, _STREAM_VIEW_MISSING, i)
        masks[i, rng.choice(n, size=n_missing, replace=False)] = True

    repair = _rng(seed, _STREAM_REPAIR)
    present_count = n_views - masks.sum(axis=0)
    for j in np.flatnonzero(present_count == 0):
        fixed = False
        for i in repair.permutation(n_views):
            if not masks[i, j]:
                continue
            candidates = np.flatnonzero(~masks[i] & (present_count >= 2))
            if candidates.size == 0:
                continue
            swap = int(repair.choice(candidates))
            masks[i, j] = False
            masks[i, swap] = True
            present_count[j] += 1
            present_count[swap] -= 1
            fixed = True
            break
        if not fixed:
            raise InvalidInput(
                "view removal fractions leave no feasible assignment covering every sample"
            )
    return masks


def _mask_labels(labels, present, beta, seed, view_index):
    """Blank ``floor(beta * count)`` observed positive and negative tags per
    label among the present rows."""
    out = labels.copy()
    rng = _rng(seed, _STREAM_LABEL_MASK, view_index)
    for k in range(labels.shape[1]):
        for value in (1.0, -1.0):
            rows = np.flatnonzero((labels[:, k] == value) & present)
            n_drop = int(beta * rows.size)
            if n_drop:
                out[rng.choice(rows, size=n_drop, replace=False), k] = 0.0
    return out


def corrupt(ds, spec):
    """Apply view removal, tag blanking, and optional de-alignment.

    Requires an aligned dataset with no missing rows. Per view,
    ``floor(alpha * n)`` samples are marked missing (every sample stays
    present in at least one view, else ``InvalidInput``), then
    ``floor(beta * count)`` of the observed positive and negative tags
    of every label are blanked. With ``dealign`` set, each view's rows
    are shuffled by an independent uniform permutation applied jointly
    to features, labels, and missing flags, and the result is marked
    unaligned.
    """
    if not isinstance(spec, CorruptionSpec):
        raise InvalidInput("spec must be a CorruptionSpec")
    if not ds.aligned:
        raise InvalidInput("corruption requires an aligned dataset")
    if any(view.missing_rows.any() for view in ds.views):
        raise InvalidInput("corruption requires a dataset with no missing rows")

    n = ds.n_samples
    n_missing = int(spec.alpha * n)
    masks = _view_missing_masks(n, ds.n_views, n_missing, spec.seed)

    views = []
    for i, view in enumerate(ds.views):
        missing = masks[i]
        present = ~missing
        labels = _mask_labels(view.labels, present, spec.beta, spec.seed, i)
        feats = view.features.copy()
        feats[missing] = 0.0
        labels[missing] = 0.0
        if spec.dealign:
            perm = _rng(spec.seed, _STREAM_PERMUTE, i).permutation(n)
            feats, labels, missing = feats[perm], labels[perm], missing[perm]
        views.append(ViewData(features=feats, labels=labels, missing_rows=missing))
    return MultiViewDataset(views=views, aligned=ds.aligned and not spec.dealign)
