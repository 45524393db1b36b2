"""Loading, resampling, and low-pass filtering of raw IMU recordings.

CSV contract: header ``t,ax,ay,az,gx,gy,gz``; t in seconds, accel in
m/s^2, gyro in rad/s. Reference events: header ``t,kind,side`` with kind
in {IC, FC} and side in {L, R, U}.
"""
from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np
from scipy.signal import butter, filtfilt

from .core import (
    ConfigurationError,
    ContractError,
    GaitEvent,
    ImuRecording,
    InsufficientDataError,
    ParseError,
)

RECORDING_HEADER = ["t", "ax", "ay", "az", "gx", "gy", "gz"]
EVENTS_HEADER = ["t", "kind", "side"]


def _open_text(source):
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8", newline="")
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    return source


def load_recording(source, device_id: str = "", session_id: str = "") -> ImuRecording:
    """Parse a recording CSV into an ImuRecording, preserving sample order."""
    fh = _open_text(source)
    try:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file: missing header")
        if [h.strip() for h in header] != RECORDING_HEADER:
            raise ParseError(f"bad header {header!r}, expected {RECORDING_HEADER}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 7:
                raise ParseError(f"line {lineno}: expected 7 fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise ParseError(f"line {lineno}: {exc}") from None
    finally:
        if isinstance(source, (str, Path, bytes)):
            fh.close()

    data = np.asarray(rows, dtype=float).reshape(-1, 7)
    rec = ImuRecording(t=data[:, 0], accel=data[:, 1:4], gyro=data[:, 4:7],
                       device_id=device_id, session_id=session_id)
    if len(rec.t) >= 2 and not np.all(np.diff(rec.t) > 0):
        raise ContractError("timestamps must be strictly increasing")
    rec.validate()
    return rec


def write_recording(rec: ImuRecording, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORDING_HEADER)
        for i in range(len(rec.t)):
            writer.writerow([repr(float(rec.t[i]))]
                            + [repr(float(v)) for v in rec.accel[i]]
                            + [repr(float(v)) for v in rec.gyro[i]])


def load_reference_events(source) -> list[GaitEvent]:
    """Parse a reference event CSV (``t,kind,side``) into GaitEvents."""
    fh = _open_text(source)
    try:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file: missing header")
        if [h.strip() for h in header] != EVENTS_HEADER:
            raise ParseError(f"bad header {header!r}, expected {EVENTS_HEADER}")
        events = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ParseError(f"line {lineno}: expected 3 fields")
            t_raw, kind, side = (v.strip() for v in row)
            if kind not in ("IC", "FC"):
                raise ParseError(f"line {lineno}: kind must be IC or FC")
            if side not in ("L", "R", "U"):
                raise ParseError(f"line {lineno}: side must be L, R, or U")
            try:
                t = float(t_raw)
            except ValueError as exc:
                raise ParseError(f"line {lineno}: {exc}") from None
            events.append(GaitEvent(time_s=t, kind=kind, side=side))
    finally:
        if isinstance(source, (str, Path, bytes)):
            fh.close()
    return events


def write_reference_events(events, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(EVENTS_HEADER)
        for ev in events:
            writer.writerow([repr(float(ev.time_s)), ev.kind, ev.side])


def resample(rec: ImuRecording, target_rate: float) -> ImuRecording:
    """Linearly interpolate onto a uniform grid from first to last timestamp."""
    if target_rate <= 0:
        raise ConfigurationError("target_rate must be positive")
    if len(rec.t) < 2:
        raise InsufficientDataError("resampling needs at least 2 samples")
    t0, t1 = rec.t[0], rec.t[-1]
    n = int(np.floor((t1 - t0) * target_rate + 1e-9)) + 1
    grid = t0 + np.arange(n) / target_rate
    accel = np.column_stack([np.interp(grid, rec.t, rec.accel[:, k]) for k in range(3)])
    gyro = np.column_stack([np.interp(grid, rec.t, rec.gyro[:, k]) for k in range(3)])
    return ImuRecording(t=grid, accel=accel, gyro=gyro, sample_rate=float(target_rate),
                        device_id=rec.device_id, session_id=rec.session_id)


def ensure_uniform(rec: ImuRecording, target_rate: float | None = None) -> ImuRecording:
    """Return a uniformly sampled recording, resampling when necessary."""
    if target_rate is not None:
        return resample(rec, target_rate)
    if rec.sample_rate is not None:
        return rec
    dt = np.diff(rec.t)
    if len(dt) and np.max(np.abs(dt - dt[0])) <= 1e-9:
        rec.sample_rate = float(1.0 / dt[0])
        return rec
    rate = 1.0 / float(np.median(dt))
    return resample(rec, rate)


def lowpass_accel(rec: ImuRecording, cutoff: float = 17.0) -> ImuRecording:
    """Zero-phase second-order Butterworth low-pass on the accelerometer.

    The gyroscope passes through unchanged. Edges are reflect-padded by
    filtfilt before the forward-backward pass.
    """
    if rec.sample_rate is None:
        raise ContractError("recording must be uniformly sampled before filtering")
    nyq = rec.sample_rate / 2.0
    if cutoff >= nyq:
        raise ConfigurationError(f"cutoff {cutoff} Hz >= Nyquist {nyq} Hz")
    b, a = butter(2, cutoff, fs=rec.sample_rate)
    accel = np.column_stack([
        filtfilt(b, a, rec.accel[:, k], padtype="even") for k in range(3)
    ])
    return ImuRecording(t=rec.t.copy(), accel=accel, gyro=rec.gyro.copy(),
                        sample_rate=rec.sample_rate,
                        device_id=rec.device_id, session_id=rec.session_id)
