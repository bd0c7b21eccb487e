"""Shared state-space types: the LTI model and estimated state trajectories."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["StateSpaceModel", "StateTrajectory"]

_PSD_TOL = 1e-10


def _as_readonly(arr: np.ndarray) -> np.ndarray:
    out = np.asarray(arr, dtype=float).copy()
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """Discrete-time LTI model x' = Ax + Bu + w, y = Cx + Du + v.

    Q and R are the process / observation noise covariances; both must be
    symmetric positive semidefinite. For output-only models B and D have
    zero columns (m = 0).
    """

    A: np.ndarray
    C: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    B: np.ndarray | None = None
    D: np.ndarray | None = None

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        R = np.atleast_2d(np.asarray(self.R, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError(f"A must be square, got {A.shape}")
        if C.shape[1] != n:
            raise ValueError(f"C has {C.shape[1]} columns, expected {n}")
        d = C.shape[0]
        B = np.zeros((n, 0)) if self.B is None else np.atleast_2d(np.asarray(self.B, dtype=float))
        D = np.zeros((d, 0)) if self.D is None else np.atleast_2d(np.asarray(self.D, dtype=float))
        if B.shape[0] != n:
            raise ValueError(f"B has {B.shape[0]} rows, expected {n}")
        if D.shape != (d, B.shape[1]):
            raise ValueError(f"D must be {d}x{B.shape[1]}, got {D.shape}")
        for name, M, dim in (("Q", Q, n), ("R", R, d)):
            if M.shape != (dim, dim):
                raise ValueError(f"{name} must be {dim}x{dim}, got {M.shape}")
            if not np.allclose(M, M.T, atol=1e-8, rtol=1e-8):
                raise ValueError(f"{name} must be symmetric")
            sym = 0.5 * (M + M.T)
            if np.linalg.eigvalsh(sym).min() < -_PSD_TOL:
                raise ValueError(f"{name} must be positive semidefinite")
            if name == "Q":
                Q = sym
            else:
                R = sym
        for name, M in (("A", A), ("B", B), ("C", C), ("D", D), ("Q", Q), ("R", R)):
            object.__setattr__(self, name, _as_readonly(M))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def output_dim(self) -> int:
        return self.C.shape[0]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "A": self.A.tolist(),
            "B": self.B.tolist(),
            "C": self.C.tolist(),
            "D": self.D.tolist(),
            "Q": self.Q.tolist(),
            "R": self.R.tolist(),
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "StateSpaceModel":
        n = int(payload["n"])
        m = int(payload["m"])
        A = np.asarray(payload["A"], dtype=float).reshape(n, n)
        C = np.asarray(payload["C"], dtype=float)
        C = C.reshape(-1, n)
        d = C.shape[0]
        B = np.asarray(payload["B"], dtype=float).reshape(n, m)
        D = np.asarray(payload["D"], dtype=float).reshape(d, m)
        Q = np.asarray(payload["Q"], dtype=float).reshape(n, n)
        R = np.asarray(payload["R"], dtype=float).reshape(d, d)
        return cls(A=A, B=B, C=C, D=D, Q=Q, R=R)


@dataclass(frozen=True, eq=False)
class StateTrajectory:
    """n x W matrix of estimated hidden states, one column per window start."""

    states: np.ndarray
    window_length: int = 1

    def __post_init__(self):
        states = np.atleast_2d(np.asarray(self.states, dtype=float))
        if self.window_length < 1:
            raise ValueError("window_length must be >= 1")
        object.__setattr__(self, "states", _as_readonly(states))

    @property
    def n(self) -> int:
        return self.states.shape[0]

    @property
    def n_windows(self) -> int:
        return self.states.shape[1]
