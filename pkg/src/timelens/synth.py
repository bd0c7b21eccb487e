"""Seeded synthetic data generators with ground truth retained for testing.

All randomness flows through numpy's Philox-4x32-10 counter-based bit
generator keyed by the seed, so the same (spec, seed) pair reproduces the
same stream bit-for-bit on any platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .series import TimeSeries
from .statespace import StateSpaceModel

__all__ = [
    "SynthOutput",
    "gen_ar2",
    "gen_double_periodic",
    "gen_periodic_ssm",
    "gen_exogenous_stepped",
    "rotation",
]


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def rotation(theta: float) -> np.ndarray:
    """2-D rotation matrix by ``theta`` radians."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True, eq=False)
class SynthOutput:
    """Generated series plus the ground truth the generator knows."""

    series: TimeSeries
    spec: dict
    true_states: np.ndarray | None = None  # n x T
    inputs: TimeSeries | None = None


def gen_ar2(
    phi1: float,
    phi2: float,
    noise_sd: float = 0.0,
    T: int = 500,
    seed: int = 0,
    init: tuple[float, float] = (1.0, 0.5),
) -> SynthOutput:
    """AR(2) process y_t = phi1 y_{t-1} + phi2 y_{t-2} + e_t with companion states.

    Coefficients must lie inside the stationarity triangle. ``init`` seeds
    the two samples preceding the returned series, so every returned sample
    satisfies the recurrence.
    """
    if not (abs(phi2) < 1.0 and phi1 + phi2 < 1.0 and phi2 - phi1 < 1.0):
        raise ValueError(f"(phi1, phi2) = ({phi1}, {phi2}) is outside the AR(2) stationarity triangle")
    if T < 10:
        raise ValueError(f"T must be >= 10, got {T}")
    rng = _rng(seed)
    ext = np.empty(T + 2)
    ext[0], ext[1] = init
    noise = rng.standard_normal(T) * noise_sd if noise_sd > 0 else np.zeros(T)
    for t in range(2, T + 2):
        ext[t] = phi1 * ext[t - 1] + phi2 * ext[t - 2] + noise[t - 2]
    y = ext[2:]
    # Companion state at time t is [y_t, y_{t-1}].
    states = np.vstack([ext[2:], ext[1:-1]])
    spec = {
        "generator": "ar2",
        "phi1": phi1,
        "phi2": phi2,
        "noise_sd": noise_sd,
        "T": T,
        "seed": seed,
        "init": list(init),
    }
    return SynthOutput(series=TimeSeries(y[:, None]), spec=spec, true_states=states)


def _lcm_period(f1: float, f2: float) -> float:
    p1 = Fraction(f1).limit_denominator(10**6)
    p2 = Fraction(f2).limit_denominator(10**6)
    if p1 == 0 or p2 == 0:
        raise ValueError("frequencies must be positive")
    # Period of sin(2 pi f t) over integer t is denominator/ gcd structure of 1/f.
    inv1, inv2 = 1 / p1, 1 / p2
    try:
        num = math.lcm(inv1.numerator, inv2.numerator)
        den = math.gcd(inv1.denominator, inv2.denominator)
        return num / den
    except (ValueError, OverflowError):
        return float(1 / f1 * 1 / f2)


def gen_double_periodic(
    T: int = 300,
    f1: float = 1.0 / 3.0,
    f2: float = 1.0 / 5.0,
    amplitudes: tuple[float, float] = (1.0, 0.6),
    noise_sd: float = 0.0,
    seed: int = 0,
    phases: tuple[float, float] = (0.0, 0.0),
) -> SynthOutput:
    """Sum of two sinusoids; the underlying state is two 2-D rotation blocks."""
    for f in (f1, f2):
        if not 0.0 < f <= 0.5:
            raise ValueError(f"frequency {f} outside (0, 0.5]")
    period = _lcm_period(f1, f2)
    if T < 2 * period:
        raise ValueError(f"T must cover two full periods ({2 * period:.0f} samples), got {T}")
    rng = _rng(seed)
    t = np.arange(T)
    a1, a2 = amplitudes
    th1, th2 = 2 * math.pi * f1, 2 * math.pi * f2
    p1, p2 = phases
    s1 = a1 * np.sin(th1 * t + p1)
    s2 = a2 * np.sin(th2 * t + p2)
    noise = rng.standard_normal(T) * noise_sd if noise_sd > 0 else np.zeros(T)
    y = s1 + s2 + noise
    states = np.vstack(
        [
            a1 * np.sin(th1 * t + p1),
            a1 * np.cos(th1 * t + p1),
            a2 * np.sin(th2 * t + p2),
            a2 * np.cos(th2 * t + p2),
        ]
    )
    spec = {
        "generator": "double_periodic",
        "T": T,
        "f1": f1,
        "f2": f2,
        "amplitudes": list(amplitudes),
        "noise_sd": noise_sd,
        "seed": seed,
        "phases": list(phases),
    }
    return SynthOutput(series=TimeSeries(y[:, None]), spec=spec, true_states=states)


def gen_periodic_ssm(
    theta: float,
    C: np.ndarray | None = None,
    q_sd: float = 0.0,
    r_sd: float = 0.0,
    T: int = 300,
    seed: int = 0,
    x0: tuple[float, float] = (1.0, 0.0),
) -> SynthOutput:
    """Planar rotation dynamics observed through C, with optional noise."""
    if not 0.0 < theta < math.pi:
        raise ValueError(f"theta must lie in (0, pi), got {theta}")
    A = rotation(theta)
    Cm = np.array([[1.0, 0.0]]) if C is None else np.atleast_2d(np.asarray(C, dtype=float))
    if Cm.shape[1] != 2:
        raise ValueError("C must have two columns")
    d = Cm.shape[0]
    rng = _rng(seed)
    w = rng.standard_normal((T, 2)) * q_sd if q_sd > 0 else np.zeros((T, 2))
    v = rng.standard_normal((T, d)) * r_sd if r_sd > 0 else np.zeros((T, d))
    states = np.empty((2, T))
    y = np.empty((T, d))
    x = np.asarray(x0, dtype=float)
    for t in range(T):
        states[:, t] = x
        y[t] = Cm @ x + v[t]
        x = A @ x + w[t]
    spec = {
        "generator": "periodic_ssm",
        "theta": theta,
        "C": Cm.tolist(),
        "q_sd": q_sd,
        "r_sd": r_sd,
        "T": T,
        "seed": seed,
        "x0": list(x0),
    }
    return SynthOutput(series=TimeSeries(y), spec=spec, true_states=states)


DEFAULT_EXOGENOUS_SYSTEM = {
    "A": (0.85 * rotation(0.5)).tolist(),
    "B": [[1.0], [0.4]],
    "C": [[1.0, 0.3]],
    "D": [[0.1]],
    "x0": [0.0, 0.0],
}


def gen_exogenous_stepped(
    step_schedule: list[tuple[int, int, float]],
    T: int = 500,
    noise_sd: float = 0.0,
    seed: int = 0,
    train_frac: float = 0.8,
    system: dict | None = None,
) -> SynthOutput:
    """Order-2 system driven by a piecewise-constant input.

    ``step_schedule`` is a list of contiguous (start, end, level) segments
    covering [0, T); gaps or overlaps are rejected. ``noise_sd`` is the
    observation noise level. The train/test split index floor(train_frac*T)
    is recorded in the output's spec dict.
    """
    sysdef = DEFAULT_EXOGENOUS_SYSTEM if system is None else system
    A = np.asarray(sysdef["A"], dtype=float)
    B = np.asarray(sysdef["B"], dtype=float)
    Cm = np.asarray(sysdef["C"], dtype=float)
    D = np.asarray(sysdef["D"], dtype=float)
    x = np.asarray(sysdef.get("x0", np.zeros(A.shape[0])), dtype=float)
    n = A.shape[0]
    m = B.shape[1]
    d = Cm.shape[0]

    schedule = sorted((int(a), int(b), float(v)) for a, b, v in step_schedule)
    if not schedule:
        raise ValueError("step schedule is empty")
    if schedule[0][0] != 0:
        raise ValueError(f"step schedule must start at 0, got {schedule[0][0]}")
    for (a, b, _), (a2, _, _) in zip(schedule, schedule[1:]):
        if b != a2:
            raise ValueError(f"step schedule gap or overlap between {b} and {a2}")
    for a, b, _ in schedule:
        if b <= a:
            raise ValueError(f"empty schedule segment [{a}, {b})")
    if schedule[-1][1] < T:
        raise ValueError(f"step schedule ends at {schedule[-1][1]} but must cover [0, {T})")

    u = np.empty((T, m))
    for a, b, v in schedule:
        u[a : min(b, T)] = v

    rng = _rng(seed)
    v_noise = rng.standard_normal((T, d)) * noise_sd if noise_sd > 0 else np.zeros((T, d))
    states = np.empty((n, T))
    y = np.empty((T, d))
    for t in range(T):
        states[:, t] = x
        y[t] = Cm @ x + D @ u[t] + v_noise[t]
        x = A @ x + B @ u[t]
    spec = {
        "generator": "exogenous_stepped",
        "T": T,
        "noise_sd": noise_sd,
        "seed": seed,
        "train_frac": train_frac,
        "split_index": int(math.floor(train_frac * T)),
        "schedule": [[a, b, v] for a, b, v in schedule],
        "system": {
            "A": A.tolist(),
            "B": B.tolist(),
            "C": Cm.tolist(),
            "D": D.tolist(),
            "x0": np.asarray(sysdef.get("x0", np.zeros(n)), dtype=float).tolist(),
        },
    }
    return SynthOutput(
        series=TimeSeries(y),
        spec=spec,
        true_states=states,
        inputs=TimeSeries(u),
    )


def true_model(output: SynthOutput) -> StateSpaceModel | None:
    """Reconstruct the generating StateSpaceModel where one exists."""
    spec = output.spec
    kind = spec.get("generator")
    if kind == "periodic_ssm":
        q = spec["q_sd"] ** 2
        r = spec["r_sd"] ** 2
        C = np.asarray(spec["C"], dtype=float)
        return StateSpaceModel(
            A=rotation(spec["theta"]),
            C=C,
            Q=q * np.eye(2),
            R=r * np.eye(C.shape[0]),
        )
    if kind == "exogenous_stepped":
        sysdef = spec["system"]
        C = np.asarray(sysdef["C"], dtype=float)
        n = len(sysdef["A"])
        return StateSpaceModel(
            A=np.asarray(sysdef["A"], dtype=float),
            B=np.asarray(sysdef["B"], dtype=float),
            C=C,
            D=np.asarray(sysdef["D"], dtype=float),
            Q=np.zeros((n, n)),
            R=spec["noise_sd"] ** 2 * np.eye(C.shape[0]),
        )
    if kind == "ar2":
        q = spec["noise_sd"] ** 2
        return StateSpaceModel(
            A=np.array([[spec["phi1"], spec["phi2"]], [1.0, 0.0]]),
            C=np.array([[1.0, 0.0]]),
            Q=np.array([[q, 0.0], [0.0, 0.0]]),
            R=np.zeros((1, 1)),
        )
    return None
