"""Sliding-window trajectory matrix and block-Hankel matrix construction.

For stride 1 the two are transposes of one another; building both makes the
equivalence explicit and testable bit-for-bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .series import TimeSeries

__all__ = ["TrajectoryMatrix", "BlockHankel", "trajectory_matrix", "block_hankel", "hankel_from_trajectory"]


@dataclass(frozen=True, eq=False)
class TrajectoryMatrix:
    """W x (L*D) matrix whose rows are channel-interleaved length-L windows.

    Row w holds samples [w*s, w*s + L) flattened time-major with channels
    innermost: [y_{t,1} .. y_{t,D}, y_{t+1,1} .. ].
    """

    data: np.ndarray
    window_length: int
    stride: int
    n_channels: int

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2:
            raise ValueError("trajectory data must be 2-D")
        if data.shape[1] != self.window_length * self.n_channels:
            raise ValueError(
                f"row width {data.shape[1]} != window_length*n_channels "
                f"({self.window_length}*{self.n_channels})"
            )
        if self.stride < 1:
            raise ValueError("stride must be >= 1")
        data = data.copy()
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @property
    def n_windows(self) -> int:
        return self.data.shape[0]

    def to_envelope(self) -> dict:
        """JSON envelope used by the CLI and service matrix exports."""
        return {
            "rows": int(self.data.shape[0]),
            "cols": int(self.data.shape[1]),
            "L": int(self.window_length),
            "s": int(self.stride),
            "D": int(self.n_channels),
            "data": [float(x) for x in self.data.ravel()],
        }


@dataclass(frozen=True, eq=False)
class BlockHankel:
    """(L*D) x (T-L+1) matrix with block-row i, column j equal to y_{i+j}."""

    data: np.ndarray
    window_length: int
    n_channels: int

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2:
            raise ValueError("Hankel data must be 2-D")
        if data.shape[0] != self.window_length * self.n_channels:
            raise ValueError(
                f"column height {data.shape[0]} != window_length*n_channels "
                f"({self.window_length}*{self.n_channels})"
            )
        data = data.copy()
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @property
    def n_windows(self) -> int:
        return self.data.shape[1]

    def to_envelope(self) -> dict:
        return {
            "rows": int(self.data.shape[0]),
            "cols": int(self.data.shape[1]),
            "L": int(self.window_length),
            "s": 1,
            "D": int(self.n_channels),
            "data": [float(x) for x in self.data.ravel()],
        }


def _check_window(ts: TimeSeries, L: int) -> None:
    if L < 1:
        raise ValueError(f"window length must be >= 1, got {L}")
    if L > ts.n_samples:
        raise ValueError(f"window length {L} exceeds series length {ts.n_samples}")


def trajectory_matrix(ts: TimeSeries, L: int, s: int = 1) -> TrajectoryMatrix:
    """Stack every stride-s window of length L as a row, ordered by start time."""
    _check_window(ts, L)
    if s < 1:
        raise ValueError(f"stride must be >= 1, got {s}")
    starts = np.arange(0, ts.n_samples - L + 1, s)
    windows = ts.values[starts[:, None] + np.arange(L)[None, :]]  # (W, L, D)
    data = windows.reshape(len(starts), L * ts.n_channels)
    return TrajectoryMatrix(data=data, window_length=L, stride=s, n_channels=ts.n_channels)


def block_hankel(ts: TimeSeries, L: int) -> BlockHankel:
    """Stack L lagged copies of the series as block rows."""
    _check_window(ts, L)
    W = ts.n_samples - L + 1
    D = ts.n_channels
    data = np.empty((L * D, W), dtype=float)
    for i in range(L):
        data[i * D : (i + 1) * D, :] = ts.values[i : i + W].T
    return BlockHankel(data=data, window_length=L, n_channels=D)


def hankel_from_trajectory(z: TrajectoryMatrix) -> BlockHankel:
    """Transpose a stride-1 trajectory matrix into its block-Hankel form, bit-exact."""
    if z.stride != 1:
        raise ValueError(
            f"stride-{z.stride} trajectory matrix is not a Hankel matrix; rebuild with stride 1"
        )
    return BlockHankel(
        data=np.ascontiguousarray(z.data.T),
        window_length=z.window_length,
        n_channels=z.n_channels,
    )
