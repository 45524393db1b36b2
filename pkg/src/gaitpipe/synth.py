"""Synthetic IMU walking signals with exact ground-truth events.

The vertical waveform is a step-frequency sine with a second harmonic
and per-step amplitude alternation. The harmonic makes the smoothed
derivative's minima sharper than its maxima (fixing the wavelet sign at
-1) without moving the extrema off their nominal phases, and the
alternation gives the autocorrelation a dominant peak at the stride lag.
Heading rotation during scripted turns is applied to the gyroscope only.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    ConfigurationError,
    FC,
    GaitEvent,
    IC,
    ImuRecording,
    Segment,
    SegmentKind,
    SIDE_LEFT,
    SIDE_RIGHT,
    quat_to_matrix,
)
from .segmentation import GRAVITY, TurnInterval

SECOND_HARMONIC = 0.2
STEP_MODULATION = 0.3


@dataclass
class Phase:
    kind: str                 # "walk" | "rest" | "turn"
    duration_s: float
    angle_deg: float = 0.0    # turns only

    def to_json(self) -> dict:
        doc = {"kind": self.kind, "duration_s": self.duration_s}
        if self.kind == "turn":
            doc["angle_deg"] = self.angle_deg
        return doc


@dataclass
class SynthConfig:
    duration_s: float = 60.0
    sample_rate_hz: float = 50.0
    stride_s: float = 1.2
    ic_phase: float = 0.375        # fraction of stride at which the first IC falls
    fc_phase: float = 0.12         # fraction of stride from IC to FC
    vertical_amp: float = 2.0      # m/s^2
    ap_amp: float = 1.0            # m/s^2
    yaw_amp: float = 0.2           # rad/s
    noise_sigma: float = 0.0       # m/s^2
    sensor_rotation: np.ndarray = field(
        default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))
    script: list[Phase] | None = None
    seed: int = 0

    def validate(self) -> None:
        if not 0.4 <= self.stride_s <= 2.25:
            raise ConfigurationError("stride_s outside [0.4, 2.25] s")
        if not 0.0 < self.fc_phase < 0.25 * 1.5:
            raise ConfigurationError("fc_phase outside the 25%-of-max-stride gate")
        if self.sample_rate_hz <= 0 or self.duration_s <= 0:
            raise ConfigurationError("duration and sample rate must be positive")
        if self.script is not None:
            total = sum(p.duration_s for p in self.script)
            if abs(total - self.duration_s) > 1e-6:
                raise ConfigurationError(
                    f"script phases ({total} s) do not tile duration_s "
                    f"({self.duration_s} s)")
            for p in self.script:
                if p.kind not in ("walk", "rest", "turn"):
                    raise ConfigurationError(f"unknown phase kind {p.kind!r}")
                if p.duration_s <= 0:
                    raise ConfigurationError("phase durations must be positive")

    def phases(self) -> list[Phase]:
        if self.script is None:
            return [Phase("walk", self.duration_s)]
        return list(self.script)


def generate(cfg: SynthConfig):
    """Build (recording, true_events, true_segments, true_turns)."""
    cfg.validate()
    fs = cfg.sample_rate_hz
    stride = cfg.stride_s
    step = stride / 2.0
    n = int(round(cfg.duration_s * fs))
    t = np.arange(n) / fs
    rng = np.random.default_rng(cfg.seed)

    phases = cfg.phases()
    starts = np.concatenate([[0.0], np.cumsum([p.duration_s for p in phases])])

    # waveform phase chosen so ICs land exactly on the minima of the
    # step-frequency component
    phi0 = 1.5 * np.pi - 4.0 * np.pi * cfg.ic_phase
    theta = 2.0 * np.pi * t / step + phi0
    # amplitude alternation switches at the mid-step maxima so that the
    # minima keep a clean per-step amplitude
    kmod = np.floor(t / step + 0.5 - 2.0 * cfg.ic_phase).astype(int)
    amp = cfg.vertical_amp * (1.0 + STEP_MODULATION * (-1.0) ** (kmod % 2))
    vert_walk = amp * np.sin(theta) \
        + SECOND_HARMONIC * cfg.vertical_amp * np.cos(2.0 * theta)
    # same asymmetric harmonic as the vertical channel so polarity stays
    # recoverable whichever axis the detector settles on
    ap_walk = cfg.ap_amp * (np.sin(theta) + SECOND_HARMONIC * np.cos(2.0 * theta))
    yaw_walk = cfg.yaw_amp * np.sin(2.0 * np.pi * t / stride
                                    + np.pi / 2.0 - 2.0 * np.pi * cfg.ic_phase)

    vertical = np.full(n, GRAVITY)
    ap = np.zeros(n)
    ml = np.zeros(n)
    yaw = np.zeros(n)

    events: list[GaitEvent] = []
    segments: list[Segment] = []
    turns: list[TurnInterval] = []

    walk_run_start = None

    def close_walk_run(end_s):
        nonlocal walk_run_start
        if walk_run_start is not None and end_s > walk_run_start:
            _emit_bout_segments(segments, turns, walk_run_start, end_s)
            walk_run_start = None

    for phase, a, b in zip(phases, starts[:-1], starts[1:]):
        i0, i1 = int(round(a * fs)), min(int(round(b * fs)), n)
        if phase.kind == "rest":
            close_walk_run(a)
            near_edge = a < 2.0 or cfg.duration_s - b < 2.0
            if near_edge:
                kind = SegmentKind.BOUNDARY
            elif b - a < 2.0:
                kind = SegmentKind.SHORT_REST
            else:
                kind = SegmentKind.LONG_REST
            segments.append(Segment(start_s=a, end_s=b, kind=kind))
            continue
        if walk_run_start is None:
            walk_run_start = a
        vertical[i0:i1] = GRAVITY + vert_walk[i0:i1]
        ap[i0:i1] = ap_walk[i0:i1]
        yaw[i0:i1] = yaw_walk[i0:i1]
        if phase.kind == "turn":
            rate = np.radians(phase.angle_deg) / phase.duration_s
            yaw[i0:i1] += rate
            turns.append(TurnInterval(start_s=a, end_s=b, angle_deg=phase.angle_deg))
        else:
            # ground-truth events only in plain walk phases
            k0 = int(np.ceil((a / stride - cfg.ic_phase) * 2.0))
            k = k0
            while True:
                tic = (cfg.ic_phase + k / 2.0) * stride
                if tic >= b:
                    break
                if tic >= a:
                    side = SIDE_LEFT if k % 2 == 0 else SIDE_RIGHT
                    events.append(GaitEvent(time_s=float(tic), kind=IC, side=side))
                    tfc = tic + cfg.fc_phase * stride
                    if tfc < b:
                        fc_side = SIDE_RIGHT if side == SIDE_LEFT else SIDE_LEFT
                        events.append(GaitEvent(time_s=float(tfc), kind=FC,
                                                side=fc_side))
                k += 1
    close_walk_run(float(starts[-1]))

    accel_frame = np.column_stack([ap, ml, vertical])   # device x=AP, y=ML, z=up
    gyro_frame = np.column_stack([np.zeros(n), np.zeros(n), yaw])
    if cfg.noise_sigma > 0:
        accel_frame = accel_frame + rng.normal(0.0, cfg.noise_sigma, accel_frame.shape)
    rot = quat_to_matrix(np.asarray(cfg.sensor_rotation, dtype=float))
    accel = accel_frame @ rot.T
    gyro = gyro_frame @ rot.T

    rec = ImuRecording(t=t, accel=accel, gyro=gyro, sample_rate=fs,
                       device_id="synth", session_id=f"seed{cfg.seed}")
    events.sort(key=lambda e: (e.time_s, e.kind))
    segments.sort(key=lambda s: s.start_s)
    return rec, events, segments, turns


def _emit_bout_segments(segments, turns, start_s, end_s):
    """Split a walk run at sharp turns; non-sharp turns stay inside."""
    sharp = [tr for tr in turns
             if abs(tr.angle_deg) >= 90.0 and tr.start_s >= start_s
             and tr.end_s <= end_s]
    cursor = start_s
    for tr in sorted(sharp, key=lambda tr: tr.start_s):
        if tr.start_s > cursor:
            segments.append(Segment(start_s=cursor, end_s=tr.start_s,
                                    kind=SegmentKind.GAIT_BOUT))
        segments.append(Segment(start_s=tr.start_s, end_s=tr.end_s,
                                kind=SegmentKind.SHARP_TURN))
        cursor = tr.end_s
    if end_s > cursor:
        segments.append(Segment(start_s=cursor, end_s=end_s,
                                kind=SegmentKind.GAIT_BOUT))
