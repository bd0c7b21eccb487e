"""Truncated SVD of window matrices, embeddings, alignment, component splitting.

The central fact used throughout: with stride 1 the trajectory matrix is the
transpose of the block-Hankel matrix, so uncentered PCA coordinates of the
windows equal the Hankel-SVD state estimates transposed (up to column signs).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .statespace import StateTrajectory
from .trajectory import BlockHankel, TrajectoryMatrix

__all__ = [
    "DEFAULT_EPSILON",
    "SpectralDecomposition",
    "Embedding",
    "AlignmentReport",
    "ComponentSplit",
    "decompose",
    "select_rank",
    "pca_embed",
    "hankel_states",
    "subspace_embed",
    "align_embeddings",
    "split_components",
    "embedding_from_states",
]

# Relative singular-value cutoff used when no rank or threshold is supplied.
DEFAULT_EPSILON = 1e-2


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Thin SVD H = U diag(s) V^T with a selected rank.

    U and V columns are sign-fixed so the largest-magnitude entry of each U
    column is positive, making output deterministic across backends.
    """

    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray
    rank_selected: int
    threshold: float | None
    window_length: int
    n_channels: int

    @property
    def k(self) -> int:
        return self.singular_values.shape[0]


@dataclass(frozen=True, eq=False)
class Embedding:
    """W x r window coordinates; row w belongs to the window starting at w*stride."""

    coords: np.ndarray
    source: str
    window_length: int
    stride: int = 1

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim != 2:
            raise ValueError("coords must be 2-D")
        object.__setattr__(self, "coords", coords)

    @property
    def n_windows(self) -> int:
        return self.coords.shape[0]

    @property
    def rank(self) -> int:
        return self.coords.shape[1]

    def window_start_indices(self) -> np.ndarray:
        return np.arange(self.n_windows) * self.stride

    def to_dict(self) -> dict:
        return {
            "L": int(self.window_length),
            "r": int(self.rank),
            "source": self.source,
            "coords": [[float(x) for x in row] for row in self.coords],
        }


@dataclass(frozen=True, eq=False)
class AlignmentReport:
    """Best orthogonal map (reflections allowed) plus translation taking b onto a."""

    rotation: np.ndarray
    translation: np.ndarray
    residual: float


@dataclass(frozen=True, eq=False)
class ComponentSplit:
    """Consecutive coordinate pairs of an embedding, one 2-D embedding each."""

    pairs: list
    dropped_last_component: bool


def _sign_fix(U: np.ndarray, V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Flip each (U, V) column pair so U's largest-|entry| is positive.
    flips = np.ones(U.shape[1])
    for j in range(U.shape[1]):
        i = int(np.argmax(np.abs(U[:, j])))
        if U[i, j] < 0:
            flips[j] = -1.0
    return U * flips, V * flips


def select_rank(singular_values, epsilon: float) -> int:
    """Count singular values with s_i / s_1 > epsilon; 0 for an all-zero spectrum."""
    s = np.asarray(singular_values, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise ValueError("singular_values must be a non-empty 1-D sequence")
    if np.any(s < 0):
        raise ValueError("singular values must be non-negative")
    if np.any(np.diff(s) > 1e-12 * max(s[0], 1.0)):
        raise ValueError("singular values must be non-increasing")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if s[0] <= 0.0:
        return 0
    return int(np.sum(s / s[0] > epsilon))


def _decompose_matrix(
    data: np.ndarray,
    rank: int | None,
    epsilon: float | None,
    window_length: int,
    n_channels: int,
) -> SpectralDecomposition:
    if rank is not None and epsilon is not None:
        raise ValueError("give at most one of rank and epsilon")
    U, s, Vt = np.linalg.svd(data, full_matrices=False)
    U, V = _sign_fix(U, Vt.T)
    k = s.shape[0]
    if rank is not None:
        if not 1 <= rank <= k:
            raise ValueError(f"rank must lie in [1, {k}], got {rank}")
        r, threshold = int(rank), None
    else:
        eps = DEFAULT_EPSILON if epsilon is None else float(epsilon)
        r, threshold = select_rank(s, eps), eps
    return SpectralDecomposition(
        U=U,
        singular_values=s,
        V=V,
        rank_selected=r,
        threshold=threshold,
        window_length=window_length,
        n_channels=n_channels,
    )


def decompose(h: BlockHankel, rank: int | None = None, epsilon: float | None = None) -> SpectralDecomposition:
    """Thin SVD of a block-Hankel matrix with rank selection.

    Exactly one of ``rank`` and ``epsilon`` may be given; with neither, the
    rank is chosen by :data:`DEFAULT_EPSILON`.
    """
    return _decompose_matrix(h.data, rank, epsilon, h.window_length, h.n_channels)


def pca_embed(z: TrajectoryMatrix, r: int, center: bool = False) -> Embedding:
    """Project windows onto the top-r principal directions of the trajectory matrix.

    Uncentered by default (plain SVD of Z), which makes the coordinates agree
    with the Hankel-SVD states exactly; centering subtracts the mean window
    first and is what introduces the translation seen when comparing the two.
    """
    k = min(z.data.shape)
    if not 1 <= r <= k:
        raise ValueError(f"r must lie in [1, {k}], got {r}")
    M = z.data - z.data.mean(axis=0, keepdims=True) if center else z.data
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    # Sign rule on the principal directions (rows of Vt), mirroring decompose.
    _, U = _sign_fix(Vt.T, U)
    coords = U[:, :r] * s[:r]
    source = "timecluster_pca"
    return Embedding(coords=coords, source=source, window_length=z.window_length, stride=z.stride)


def hankel_states(dec: SpectralDecomposition) -> StateTrajectory:
    """State estimates from the Hankel SVD: the top-r rows of diag(s) V^T."""
    r = dec.rank_selected
    if r < 1:
        raise ValueError("decomposition selected rank 0; no states to extract")
    states = (dec.V[:, :r] * dec.singular_values[:r]).T
    return StateTrajectory(states=states, window_length=dec.window_length)


def embedding_from_states(states: StateTrajectory, source: str) -> Embedding:
    return Embedding(
        coords=states.states.T.copy(),
        source=source,
        window_length=states.window_length,
    )


def subspace_embed(dec: SpectralDecomposition) -> Embedding:
    """Hankel-SVD states presented one window per row, for display."""
    return embedding_from_states(hankel_states(dec), source="hankel_svd")


def align_embeddings(a: Embedding, b: Embedding) -> AlignmentReport:
    """Orthogonal Procrustes with translation, no scaling: fit a ~ b@Rot + t.

    Reflections are allowed. The residual is relative to the centered norm
    of ``a``.
    """
    A = a.coords
    B = b.coords
    if A.shape != B.shape:
        raise ValueError(f"embedding shapes differ: {A.shape} vs {B.shape}")
    mean_a = A.mean(axis=0)
    mean_b = B.mean(axis=0)
    Ac = A - mean_a
    Bc = B - mean_b
    U, _, Vt = np.linalg.svd(Bc.T @ Ac)
    rot = U @ Vt
    translation = mean_a - mean_b @ rot
    denom = np.linalg.norm(Ac)
    num = np.linalg.norm(Ac - Bc @ rot)
    residual = 0.0 if denom == 0.0 and num == 0.0 else float(num / max(denom, np.finfo(float).tiny))
    return AlignmentReport(rotation=rot, translation=translation, residual=residual)


def split_components(e: Embedding) -> ComponentSplit:
    """Split an embedding into 2-D embeddings from coordinate pairs (1,2), (3,4), ...

    An odd trailing component is dropped and flagged.
    """
    r = e.rank
    if r < 2:
        raise ValueError(f"need at least 2 coordinates to split, got {r}")
    pairs = [
        Embedding(
            coords=e.coords[:, 2 * i : 2 * i + 2],
            source=e.source,
            window_length=e.window_length,
            stride=e.stride,
        )
        for i in range(r // 2)
    ]
    return ComponentSplit(pairs=pairs, dropped_last_component=bool(r % 2))
