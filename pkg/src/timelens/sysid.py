"""State-space parameter recovery from window states and raw data.

Output-only identification follows the Hankel-SVD route: states are the
scaled right singular vectors, then A and C come from two least-squares
regressions and the noise covariances from the residuals. With exogenous
inputs the output Hankel is first projected onto the orthogonal complement
of the input Hankel's row space (a MOESP-flavoured simplification), A and C
come from the shift structure of the projected column space, and B, D and
the initial state from one further linear regression on the raw data.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .series import TimeSeries
from .spectral import SpectralDecomposition, _decompose_matrix, decompose, hankel_states
from .statespace import StateSpaceModel, StateTrajectory
from .trajectory import block_hankel

__all__ = [
    "ResidualSet",
    "ACEstimate",
    "observability_matrix",
    "estimate_AC",
    "estimate_QR",
    "identify_output_only",
    "identify_with_inputs",
    "project_out_inputs",
    "estimate_initial_state",
    "simulate",
]

# Relative cutoff for every pseudoinverse in this module.
PINV_RCOND = 1e-12


@dataclass(frozen=True, eq=False)
class ResidualSet:
    """One-step state residuals w (n x W-1) and output residuals v (D x W)."""

    w: np.ndarray
    v: np.ndarray


@dataclass(frozen=True, eq=False)
class ACEstimate:
    A: np.ndarray
    C: np.ndarray
    residuals: ResidualSet
    rank_deficient: bool


def observability_matrix(A: np.ndarray, C: np.ndarray, L: int) -> np.ndarray:
    """Stack [C; CA; ...; CA^{L-1}]."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    if L < 1:
        raise ValueError("L must be >= 1")
    if A.shape[0] != A.shape[1] or C.shape[1] != A.shape[0]:
        raise ValueError(f"incompatible shapes A {A.shape}, C {C.shape}")
    blocks = [C]
    for _ in range(L - 1):
        blocks.append(blocks[-1] @ A)
    return np.vstack(blocks)


def _numeric_rank(M: np.ndarray) -> int:
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > s[0] * PINV_RCOND))


def estimate_AC(x: StateTrajectory, y_windows: np.ndarray) -> ACEstimate:
    """Least-squares A from the shifted state regression and C from y on states.

    ``y_windows`` is D x W, outputs aligned to window starts. Rank-deficient
    state matrices are solved via pseudoinverse and flagged.
    """
    X = x.states
    Y = np.atleast_2d(np.asarray(y_windows, dtype=float))
    n, W = X.shape
    if Y.shape[1] != W:
        raise ValueError(f"y_windows has {Y.shape[1]} columns, expected {W}")
    if W < n + 1:
        raise ValueError(f"need at least n+1 = {n + 1} states, got {W}")
    X0, X1 = X[:, :-1], X[:, 1:]
    A = X1 @ np.linalg.pinv(X0, rcond=PINV_RCOND)
    C = Y @ np.linalg.pinv(X, rcond=PINV_RCOND)
    residuals = ResidualSet(w=X1 - A @ X0, v=Y - C @ X)
    deficient = _numeric_rank(X0) < n or _numeric_rank(X) < n
    return ACEstimate(A=A, C=C, residuals=residuals, rank_deficient=deficient)


def estimate_QR(residuals: ResidualSet) -> tuple[np.ndarray, np.ndarray]:
    """Mean outer products of the residuals, symmetrised."""
    w = np.atleast_2d(residuals.w)
    v = np.atleast_2d(residuals.v)
    if w.shape[1] < 2:
        raise ValueError(f"need at least 2 state residuals, got {w.shape[1]}")
    if v.shape[1] < 1:
        raise ValueError("need at least 1 output residual")
    Q = (w @ w.T) / w.shape[1]
    R = (v @ v.T) / v.shape[1]
    return 0.5 * (Q + Q.T), 0.5 * (R + R.T)


def identify_output_only(
    ts: TimeSeries,
    L: int,
    rank: int | None = None,
    epsilon: float | None = None,
) -> tuple[StateSpaceModel, StateTrajectory, SpectralDecomposition]:
    """Full output-only pipeline: Hankel, SVD, states, A/C regression, Q/R."""
    h = block_hankel(ts, L)
    dec = decompose(h, rank=rank, epsilon=epsilon)
    if dec.rank_selected < 1:
        raise ValueError("rank selection found no significant components")
    states = hankel_states(dec)
    W = states.n_windows
    y_windows = ts.values[:W].T
    est = estimate_AC(states, y_windows)
    Q, R = estimate_QR(est.residuals)
    model = StateSpaceModel(A=est.A, C=est.C, Q=Q, R=R)
    return model, states, dec


def project_out_inputs(h_y: np.ndarray, h_u: np.ndarray) -> np.ndarray:
    """Rows of ``h_y`` with their components in the row space of ``h_u`` removed.

    Computes h_y (I - h_u^T (h_u h_u^T)^+ h_u) without forming the W x W
    projector.
    """
    h_y = np.atleast_2d(np.asarray(h_y, dtype=float))
    h_u = np.atleast_2d(np.asarray(h_u, dtype=float))
    if h_y.shape[1] != h_u.shape[1]:
        raise ValueError("output and input Hankel matrices must share column count")
    gram = h_u @ h_u.T
    coeff = h_y @ h_u.T @ np.linalg.pinv(gram, rcond=PINV_RCOND)
    return h_y - coeff @ h_u


def _input_output_regression(
    A: np.ndarray, C: np.ndarray, y: np.ndarray, u: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Solve for (x0, B, D) in y_t = C A^t x0 + sum_k C A^{t-1-k} B u_k + D u_t.

    Everything is linear in the unknowns once A and C are fixed, so this is
    one least-squares problem over all T output samples. B and D are raveled
    row-major in the unknown vector.
    """
    T, d = y.shape
    n = A.shape[0]
    m = u.shape[1]
    cols = n + n * m + d * m
    G = np.zeros((T * d, cols))
    CAt = C.copy()  # C A^t
    # acc[a, i, j] = sum_{k<t} (C A^{t-1-k})[a, i] u[k, j], grown by the
    # recurrence acc <- acc.A + C (x) u_{t-1}.
    acc = np.zeros((d, n, m))
    eye_d = np.eye(d)
    for t in range(T):
        rows = slice(t * d, (t + 1) * d)
        G[rows, :n] = CAt
        if t > 0:
            acc = np.einsum("aij,ik->akj", acc, A) + C[:, :, None] * u[t - 1][None, None, :]
            G[rows, n : n + n * m] = acc.reshape(d, n * m)
        G[rows, n + n * m :] = np.kron(eye_d, u[t][None, :])
        CAt = CAt @ A
    theta, *_ = np.linalg.lstsq(G, y.reshape(T * d), rcond=None)
    x0 = theta[:n]
    B = theta[n : n + n * m].reshape(n, m)
    D = theta[n + n * m :].reshape(d, m)
    return x0, B, D


def _markov_toeplitz(A: np.ndarray, B: np.ndarray, C: np.ndarray, D: np.ndarray, L: int) -> np.ndarray:
    """Block lower-triangular Toeplitz mapping stacked inputs to stacked outputs."""
    d, m = D.shape
    blocks = [D]
    CAk = C.copy()
    for _ in range(L - 1):
        blocks.append(CAk @ B)
        CAk = CAk @ A
    T = np.zeros((L * d, L * m))
    for i in range(L):
        for j in range(i + 1):
            T[i * d : (i + 1) * d, j * m : (j + 1) * m] = blocks[i - j]
    return T


def identify_with_inputs(
    y: TimeSeries,
    u: TimeSeries,
    L: int,
    rank: int | None = None,
    epsilon: float | None = None,
) -> tuple[StateSpaceModel, StateTrajectory]:
    """Identify (A, B, C, D, Q, R) from input-output data via orthogonal projection.

    The SVD of the projected output Hankel fixes the order and the
    observability subspace; A and C follow from its shift structure, B, D and
    the initial state from one further least-squares fit to the raw data.
    The returned trajectory is the identified model's own state sequence
    driven by the inputs (the denoised coordinates used for display); use the
    kalman module for filtered estimates that track observations.
    """
    if y.n_samples != u.n_samples:
        raise ValueError(f"y has {y.n_samples} samples but u has {u.n_samples}")
    if L < 2:
        raise ValueError("input-output identification needs L >= 2 for the shift structure")
    if not np.any(u.values):
        warnings.warn("inputs are identically zero; falling back to output-only identification")
        model, states, _ = identify_output_only(y, L, rank=rank, epsilon=epsilon)
        m = u.n_channels
        model = StateSpaceModel(
            A=model.A,
            B=np.zeros((model.n, m)),
            C=model.C,
            D=np.zeros((model.output_dim, m)),
            Q=model.Q,
            R=model.R,
        )
        return model, states

    h_y = block_hankel(y, L)
    h_u = block_hankel(u, L)
    projected = project_out_inputs(h_y.data, h_u.data)
    dec = _decompose_matrix(projected, rank, epsilon, L, y.n_channels)
    if dec.rank_selected < 1:
        raise ValueError("rank selection found no significant components after projection")
    n = dec.rank_selected
    d = y.n_channels

    # A and C from the shift structure of the projected column space.
    gamma = dec.U[:, :n]
    C = gamma[:d, :].copy()
    A, *_ = np.linalg.lstsq(gamma[:-d, :], gamma[d:, :], rcond=None)

    # B, D and the initial state from the raw input-output data.
    x0, B, D = _input_output_regression(A, C, y.values, u.values)

    # Per-window state estimates in the same basis: strip the forced response
    # from each window, then map back through the observability matrix. These
    # carry the data's noise, which is what the covariance estimates need.
    W = h_y.n_windows
    toeplitz = _markov_toeplitz(A, B, C, D, L)
    x_rec = np.linalg.pinv(gamma, rcond=PINV_RCOND) @ (h_y.data - toeplitz @ h_u.data)
    U0 = u.values[: W - 1].T
    Uw = u.values[:W].T
    w = x_rec[:, 1:] - A @ x_rec[:, :-1] - B @ U0
    v = y.values[:W].T - C @ x_rec - D @ Uw
    Q, R = estimate_QR(ResidualSet(w=w, v=v))
    model = StateSpaceModel(A=A, B=B, C=C, D=D, Q=Q, R=R)

    # Deterministic state trajectory of the identified model.
    traj = np.empty((n, W))
    x = x0
    for t in range(W):
        traj[:, t] = x
        x = A @ x + B @ u.values[t]
    return model, StateTrajectory(states=traj, window_length=L)


def estimate_initial_state(model: StateSpaceModel, y: TimeSeries, u: TimeSeries | None = None) -> np.ndarray:
    """Least-squares x0 explaining the observed outputs under a fixed model."""
    yv = y.values
    uv = np.zeros((y.n_samples, model.m)) if u is None else u.values
    if uv.shape[0] != y.n_samples:
        raise ValueError("y and u must cover the same samples")
    T, d = yv.shape
    n = model.n
    G = np.empty((T, d, n))
    G[0] = model.C
    for t in range(1, T):
        G[t] = G[t - 1] @ model.A
    # Zero-state input response, subtracted before solving for x0.
    forced = np.zeros((T, d))
    if model.m > 0:
        x = np.zeros(n)
        for t in range(T):
            forced[t] = model.C @ x + model.D @ uv[t]
            x = model.A @ x + model.B @ uv[t]
    x0, *_ = np.linalg.lstsq(G.reshape(T * d, n), (yv - forced).reshape(T * d), rcond=None)
    return x0


def _noise_transform(cov: np.ndarray) -> np.ndarray:
    # Matrix square root through the symmetric eigendecomposition; tolerates
    # exactly singular covariances.
    vals, vecs = np.linalg.eigh(0.5 * (cov + cov.T))
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def simulate(
    model: StateSpaceModel,
    x0,
    steps: int,
    u: TimeSeries | np.ndarray | None = None,
    noise: bool = False,
    seed: int = 0,
) -> TimeSeries:
    """Iterate the state equations for ``steps`` outputs starting from ``x0``.

    With ``noise`` on, process and observation noise are drawn from zero-mean
    Gaussians with covariances Q and R using the seeded Philox generator.
    """
    x = np.asarray(x0, dtype=float).reshape(-1)
    if x.shape[0] != model.n:
        raise ValueError(f"x0 has dimension {x.shape[0]}, model expects {model.n}")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if model.m > 0:
        if u is None:
            raise ValueError(f"model has {model.m} inputs; u is required")
        uv = u.values if isinstance(u, TimeSeries) else np.atleast_2d(np.asarray(u, dtype=float))
        if uv.ndim == 1:
            uv = uv[:, None]
        if uv.shape[0] < steps or uv.shape[1] != model.m:
            raise ValueError(f"u must be at least {steps} x {model.m}, got {uv.shape}")
    else:
        uv = np.zeros((steps, 0))

    d = model.output_dim
    if noise:
        rng = np.random.Generator(np.random.Philox(seed))
        w = (_noise_transform(model.Q) @ rng.standard_normal((model.n, steps))).T
        v = (_noise_transform(model.R) @ rng.standard_normal((d, steps))).T
    else:
        w = np.zeros((steps, model.n))
        v = np.zeros((steps, d))

    outputs = np.empty((steps, d))
    for t in range(steps):
        outputs[t] = model.C @ x + model.D @ uv[t] + v[t]
        x = model.A @ x + model.B @ uv[t] + w[t]
    return TimeSeries(outputs)
