"""Kalman forward filter, RTS smoother, h-step forecasts and region queries.

The filter implements the five textbook recursions in order: state
prediction, covariance prediction, gain, state update, covariance update.
Covariances are symmetrised each step; the innovation covariance is
inverted via solve, with a pseudoinverse fallback when it is exactly
singular and the innovation still lies in its range (the noise-free case).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .series import TimeSeries
from .statespace import StateSpaceModel, StateTrajectory

__all__ = [
    "KalmanState",
    "ForecastResult",
    "OnlineEvalResult",
    "BallRegion",
    "BoxRegion",
    "kalman_step",
    "kalman_filter",
    "rts_smooth",
    "forecast",
    "online_forecast_eval",
    "next_region_entry",
    "region_from_dict",
]


@dataclass(frozen=True, eq=False)
class KalmanState:
    """One filter step: predicted and filtered moments, gain and innovation."""

    x_pred: np.ndarray
    x_filt: np.ndarray
    P_pred: np.ndarray
    P_filt: np.ndarray
    gain: np.ndarray
    innovation: np.ndarray


@dataclass(frozen=True, eq=False)
class ForecastResult:
    horizon: int
    predicted_states: np.ndarray  # h x n
    predicted_outputs: np.ndarray  # h x D
    output_covariances: np.ndarray  # h x D x D

    def to_dict(self) -> dict:
        return {
            "horizon": int(self.horizon),
            "predicted_states": self.predicted_states.tolist(),
            "predicted_outputs": self.predicted_outputs.tolist(),
            "output_covariances": self.output_covariances.tolist(),
        }


@dataclass(frozen=True, eq=False)
class OnlineEvalResult:
    """One-step-ahead walk-forward evaluation against the persistence baseline."""

    start: int
    predictions: np.ndarray  # (T - start) x D
    targets: np.ndarray
    rmse: float
    persistence_rmse: float
    refit_every: int

    def to_dict(self) -> dict:
        return {
            "start": int(self.start),
            "rmse": float(self.rmse),
            "persistence_rmse": float(self.persistence_rmse),
            "refit_every": int(self.refit_every),
        }


def _sym(P: np.ndarray) -> np.ndarray:
    return 0.5 * (P + P.T)


def _gain(P_pred: np.ndarray, C: np.ndarray, S: np.ndarray, innovation: np.ndarray, scale: float) -> np.ndarray:
    S = _sym(S)
    PCt = P_pred @ C.T
    evals, evecs = np.linalg.eigh(S)
    lam_max = float(evals[-1])
    # Absolute floor at the problem's output scale: once the state is pinned
    # exactly (Q = R = 0), S decays to rounding noise and must be treated as
    # zero rather than inverted.
    atol = 1e-14 * scale
    cutoff = max(lam_max * 1e-12, atol)
    if lam_max > atol and evals[0] > cutoff:
        return np.linalg.solve(S, PCt.T).T
    # Rank-deficient innovation covariance: invert the significant part only,
    # and insist the innovation carries nothing outside its range.
    keep = evals > cutoff
    inv_vals = np.where(keep, 1.0 / np.where(keep, evals, 1.0), 0.0)
    S_pinv = (evecs * inv_vals) @ evecs.T
    perp = innovation - S @ (S_pinv @ innovation)
    if np.linalg.norm(perp) > 1e-8 * np.sqrt(scale):
        raise np.linalg.LinAlgError(
            "innovation covariance C P C^T + R is singular and the innovation "
            "falls outside its range; regularise R (e.g. add a small diagonal term)"
        )
    return PCt @ S_pinv


def kalman_step(model: StateSpaceModel, x_filt: np.ndarray, P_filt: np.ndarray, y_t: np.ndarray) -> KalmanState:
    """Advance the filter by one observation, returning the full step record."""
    A, C, Q, R = model.A, model.C, model.Q, model.R
    x_pred = A @ x_filt
    P_pred = _sym(A @ P_filt @ A.T + Q)
    S = C @ P_pred @ C.T + R
    innovation = y_t - C @ x_pred
    scale = 1.0 + float(y_t @ y_t) + float(x_pred @ x_pred)
    K = _gain(P_pred, C, S, innovation, scale)
    x_new = x_pred + K @ innovation
    P_new = _sym((np.eye(model.n) - K @ C) @ P_pred)
    return KalmanState(
        x_pred=x_pred,
        x_filt=x_new,
        P_pred=P_pred,
        P_filt=P_new,
        gain=K,
        innovation=innovation,
    )


def kalman_filter(
    model: StateSpaceModel,
    y: TimeSeries | np.ndarray,
    x0: np.ndarray | None = None,
    P0: np.ndarray | None = None,
) -> list[KalmanState]:
    """Run the forward filter over all observations.

    Defaults: x0 = 0 and P0 = I (an uninformative prior). The state after
    step t depends only on observations up to and including t.
    """
    yv = y.values if isinstance(y, TimeSeries) else np.atleast_2d(np.asarray(y, dtype=float))
    if yv.ndim == 1:
        yv = yv[:, None]
    if yv.shape[1] != model.output_dim:
        raise ValueError(f"observations have {yv.shape[1]} channels, model expects {model.output_dim}")
    x = np.zeros(model.n) if x0 is None else np.asarray(x0, dtype=float).reshape(model.n)
    P = np.eye(model.n) if P0 is None else np.asarray(P0, dtype=float).reshape(model.n, model.n)
    out: list[KalmanState] = []
    for t in range(yv.shape[0]):
        state = kalman_step(model, x, P, yv[t])
        out.append(state)
        x, P = state.x_filt, state.P_filt
    return out


def rts_smooth(
    model: StateSpaceModel,
    filtered: list[KalmanState],
    window_length: int = 1,
) -> StateTrajectory:
    """Backward Rauch-Tung-Striebel pass producing x_{t|T} for every step."""
    if not filtered:
        raise ValueError("filtered pass is empty")
    A = model.A
    steps = len(filtered)
    xs = [None] * steps
    covs = [None] * steps
    xs[-1] = filtered[-1].x_filt
    covs[-1] = filtered[-1].P_filt
    warned = False
    for t in range(steps - 2, -1, -1):
        P_pred = filtered[t + 1].P_pred
        PfAt = filtered[t].P_filt @ A.T
        try:
            J = np.linalg.solve(P_pred, PfAt.T).T
        except np.linalg.LinAlgError:
            if not warned:
                warnings.warn("singular predicted covariance in smoother; using pseudoinverse")
                warned = True
            J = PfAt @ np.linalg.pinv(P_pred, rcond=1e-12, hermitian=True)
        xs[t] = filtered[t].x_filt + J @ (xs[t + 1] - filtered[t + 1].x_pred)
        covs[t] = _sym(filtered[t].P_filt + J @ (covs[t + 1] - P_pred) @ J.T)
    return StateTrajectory(states=np.column_stack(xs), window_length=window_length)


def forecast(model: StateSpaceModel, last: KalmanState, h: int) -> ForecastResult:
    """Deterministic mean propagation with covariance growth APA^T + Q."""
    if h < 1:
        raise ValueError(f"horizon must be >= 1, got {h}")
    A, C, Q, R = model.A, model.C, model.Q, model.R
    x = last.x_filt
    P = last.P_filt
    states = np.empty((h, model.n))
    outputs = np.empty((h, model.output_dim))
    covs = np.empty((h, model.output_dim, model.output_dim))
    for k in range(h):
        x = A @ x
        P = _sym(A @ P @ A.T + Q)
        states[k] = x
        outputs[k] = C @ x
        covs[k] = C @ P @ C.T + R
    return ForecastResult(horizon=h, predicted_states=states, predicted_outputs=outputs, output_covariances=covs)


def online_forecast_eval(
    y: TimeSeries,
    start: int,
    L: int,
    rank: int | None = None,
    epsilon: float | None = None,
    refit_every: int = 1,
) -> OnlineEvalResult:
    """Walk forward emitting one-step-ahead predictions, then filter-updating.

    The model is re-identified from the growing prefix every ``refit_every``
    steps (every step by default); after each refit the filter is re-run over
    the prefix so its state is consistent with the new model basis.
    """
    from .sysid import identify_output_only

    if refit_every < 1:
        raise ValueError("refit_every must be >= 1")
    T = y.n_samples
    if not L + 2 <= start < T:
        raise ValueError(f"start must lie in [{L + 2}, {T - 1}], got {start}")
    yv = y.values
    preds = np.empty((T - start, yv.shape[1]))
    model = None
    x = P = None
    for t in range(start, T):
        if model is None or (t - start) % refit_every == 0:
            prefix = TimeSeries(yv[:t])
            model, _, _ = identify_output_only(prefix, L, rank=rank, epsilon=epsilon)
            states = kalman_filter(model, yv[:t])
            x, P = states[-1].x_filt, states[-1].P_filt
        preds[t - start] = model.C @ (model.A @ x)
        step = kalman_step(model, x, P, yv[t])
        x, P = step.x_filt, step.P_filt
    targets = yv[start:]
    rmse = float(np.sqrt(np.mean((preds - targets) ** 2)))
    persistence = float(np.sqrt(np.mean((yv[start - 1 : T - 1] - targets) ** 2)))
    return OnlineEvalResult(
        start=start,
        predictions=preds,
        targets=targets.copy(),
        rmse=rmse,
        persistence_rmse=persistence,
        refit_every=refit_every,
    )


@dataclass(frozen=True, eq=False)
class BallRegion:
    """All points within ``radius`` of ``center`` (Euclidean)."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        center = np.asarray(self.center, dtype=float).reshape(-1)
        if self.radius < 0:
            raise ValueError("radius must be non-negative")
        object.__setattr__(self, "center", center)

    @property
    def dim(self) -> int:
        return self.center.shape[0]

    def contains(self, point: np.ndarray) -> bool:
        return float(np.linalg.norm(point - self.center)) <= self.radius


@dataclass(frozen=True, eq=False)
class BoxRegion:
    """Axis-aligned box given by per-coordinate minima and maxima."""

    minimum: np.ndarray
    maximum: np.ndarray

    def __post_init__(self):
        lo = np.asarray(self.minimum, dtype=float).reshape(-1)
        hi = np.asarray(self.maximum, dtype=float).reshape(-1)
        if lo.shape != hi.shape:
            raise ValueError("minimum and maximum must have equal length")
        if np.any(lo > hi):
            raise ValueError("box minimum exceeds maximum")
        object.__setattr__(self, "minimum", lo)
        object.__setattr__(self, "maximum", hi)

    @property
    def dim(self) -> int:
        return self.minimum.shape[0]

    def contains(self, point: np.ndarray) -> bool:
        return bool(np.all(point >= self.minimum) and np.all(point <= self.maximum))


def region_from_dict(payload: dict) -> BallRegion | BoxRegion:
    """Build a region from {"center": [...], "radius": r} or {"min": [...], "max": [...]}."""
    if "center" in payload and "radius" in payload:
        return BallRegion(center=payload["center"], radius=float(payload["radius"]))
    if "min" in payload and "max" in payload:
        return BoxRegion(minimum=payload["min"], maximum=payload["max"])
    raise ValueError("region must supply center/radius or min/max")


def next_region_entry(
    model: StateSpaceModel,
    last: KalmanState,
    region: BallRegion | BoxRegion,
    horizon: int,
) -> int | None:
    """Smallest k in [1, horizon] whose deterministic forecast enters the region.

    The region applies to the leading ``region.dim`` state coordinates (the
    ones used for display); returns None when no entry occurs within the cap.
    """
    if horizon < 1:
        raise ValueError(f"horizon cap must be >= 1, got {horizon}")
    if region.dim > model.n:
        raise ValueError(f"region has dimension {region.dim} but states have {model.n}")
    x = last.x_filt
    for k in range(1, horizon + 1):
        x = model.A @ x
        if region.contains(x[: region.dim]):
            return k
    return None
