"""Shared domain types, error classes, and quaternion helpers."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GaitPipeError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(GaitPipeError):
    """Malformed input file (carries a line number where applicable)."""


class ContractError(GaitPipeError):
    """A documented precondition or invariant was violated."""


class InsufficientDataError(GaitPipeError):
    """Input too short for the requested operation."""


class ConfigurationError(GaitPipeError):
    """A configuration value is outside its valid range."""


class AmbiguousDirectionError(GaitPipeError):
    """Horizontal acceleration has no dominant direction (degenerate PCA)."""


class NoCadenceError(GaitPipeError):
    """No dominant autocorrelation peak in the physiological stride band."""


class EmptySetError(GaitPipeError):
    """A statistic was requested on an empty collection."""


class DiagnosticsError(GaitPipeError):
    """MCMC sampling failed its health checks."""


# ---------------------------------------------------------------------------
# Recordings

@dataclass
class ImuRecording:
    """Time-stamped triaxial accelerometer + gyroscope streams.

    ``t`` is in seconds and strictly increasing, ``accel`` in m/s^2,
    ``gyro`` in rad/s; both are (N, 3). ``sample_rate`` is set once the
    recording lives on a uniform grid.
    """

    t: np.ndarray
    accel: np.ndarray
    gyro: np.ndarray
    sample_rate: float | None = None
    device_id: str = ""
    session_id: str = ""

    def __post_init__(self):
        self.t = np.asarray(self.t, dtype=float)
        self.accel = np.asarray(self.accel, dtype=float)
        self.gyro = np.asarray(self.gyro, dtype=float)

    def validate(self) -> None:
        n = len(self.t)
        if self.accel.shape != (n, 3) or self.gyro.shape != (n, 3):
            raise ContractError("accel/gyro sample counts must match timestamps")
        if n >= 2 and not np.all(np.diff(self.t) > 0):
            raise ContractError("timestamps must be strictly increasing")
        if not (np.all(np.isfinite(self.accel)) and np.all(np.isfinite(self.gyro))
                and np.all(np.isfinite(self.t))):
            raise ContractError("non-finite sample values")
        if self.sample_rate is not None and n >= 2:
            dt = np.diff(self.t)
            if np.max(np.abs(dt - 1.0 / self.sample_rate)) > 1e-9:
                raise ContractError("timestamps do not match the declared sample rate")

    @property
    def duration_s(self) -> float:
        return float(self.t[-1] - self.t[0]) if len(self.t) else 0.0


@dataclass
class GravityAlignedRecording:
    """Recording rotated into the gravity frame.

    Axis order of ``accel``/``gyro`` columns is (vertical-up, horizontal-1,
    horizontal-2). ``orientation`` holds one unit quaternion (w, x, y, z)
    per sample, mapping sensor-frame vectors into the gravity frame.
    """

    t: np.ndarray
    accel: np.ndarray
    gyro: np.ndarray
    sample_rate: float
    orientation: np.ndarray

    @property
    def vertical_accel(self) -> np.ndarray:
        return self.accel[:, 0]

    @property
    def vertical_gyro(self) -> np.ndarray:
        return self.gyro[:, 0]


# ---------------------------------------------------------------------------
# Segments and events

class SegmentKind:
    GAIT_BOUT = "GaitBout"
    SHORT_REST = "ShortRest"
    LONG_REST = "LongRest"
    BOUNDARY = "Boundary"
    UNKNOWN = "Unknown"
    SHARP_TURN = "SharpTurn"


@dataclass
class Segment:
    start_s: float
    end_s: float
    kind: str

    def __post_init__(self):
        if not self.start_s < self.end_s:
            raise ContractError("segment start must precede end")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s

    def to_json(self) -> dict:
        return {"start_s": self.start_s, "end_s": self.end_s, "kind": self.kind}


IC = "IC"
FC = "FC"
SIDE_LEFT = "L"
SIDE_RIGHT = "R"
SIDE_UNKNOWN = "U"


@dataclass
class GaitEvent:
    time_s: float
    kind: str
    side: str = SIDE_UNKNOWN
    # extremum magnitude used when collapsing near-duplicates; not serialized
    strength: float = field(default=0.0, compare=False)

    def to_json(self) -> dict:
        return {"time_s": self.time_s, "kind": self.kind, "side": self.side}


# ---------------------------------------------------------------------------
# Quaternions (w, x, y, z), unit norm

def quat_multiply(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    w1, x1, y1, z1 = p
    w2, x2, y2, z2 = q
    return np.array([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ])


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_normalize(q: np.ndarray) -> np.ndarray:
    return np.asarray(q, dtype=float) / np.linalg.norm(q)


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    """Rotation matrix R such that R @ v rotates v by q."""
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    return quat_to_matrix(q) @ np.asarray(v, dtype=float)


def rotate_array(q: np.ndarray, arr: np.ndarray) -> np.ndarray:
    """Rotate every row of an (N, 3) array by a fixed quaternion."""
    return np.asarray(arr, dtype=float) @ quat_to_matrix(q).T


def quat_from_two_vectors(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimal rotation taking direction a onto direction b."""
    a = np.asarray(a, dtype=float) / np.linalg.norm(a)
    b = np.asarray(b, dtype=float) / np.linalg.norm(b)
    c = float(np.dot(a, b))
    if c < -1.0 + 1e-12:
        # antiparallel: rotate 180 deg about any axis orthogonal to a
        axis = np.cross(a, [1.0, 0.0, 0.0])
        if np.linalg.norm(axis) < 1e-8:
            axis = np.cross(a, [0.0, 1.0, 0.0])
        axis /= np.linalg.norm(axis)
        return np.array([0.0, *axis])
    axis = np.cross(a, b)
    q = np.array([1.0 + c, *axis])
    return quat_normalize(q)


def random_unit_quat(rng: np.random.Generator) -> np.ndarray:
    q = rng.normal(size=4)
    return quat_normalize(q)
