"""Task recognition: rests, boundaries, turns, and verified gait bouts."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import butter, filtfilt, find_peaks

from .core import (
    ConfigurationError,
    GravityAlignedRecording,
    Segment,
    SegmentKind,
)

GRAVITY = 9.81


@dataclass
class SegmentationConfig:
    window_s: float = 0.6
    accel_ref: float = GRAVITY
    accel_tol: float = 0.10
    gyro_thresh: float = 0.6          # rad/s, valid 0.2-0.6
    std_thresh: float = 0.2           # m/s^2, valid 0.05-0.4
    merge_gap_s: float = 1.0
    rest_split_s: float = 2.0
    min_bout_s: float = 2.0
    boundary_margin_s: float = 2.0
    sharp_turn_deg: float = 90.0
    # turn detection (El-Gohary style)
    turn_lowpass_hz: float = 1.5
    turn_start_dps: float = 15.0
    turn_stop_dps: float = 5.0
    turn_merge_s: float = 0.05
    # gait verification
    stride_lag_min_s: float = 0.4
    stride_lag_max_s: float = 2.25
    autocorr_peak_min: float = 0.3

    def validate(self) -> None:
        positives = [self.window_s, self.accel_ref, self.accel_tol, self.gyro_thresh,
                     self.std_thresh, self.merge_gap_s, self.rest_split_s,
                     self.min_bout_s, self.boundary_margin_s, self.sharp_turn_deg]
        if any(v <= 0 for v in positives):
            raise ConfigurationError("all segmentation parameters must be positive")
        if not 0.2 <= self.gyro_thresh <= 0.6:
            raise ConfigurationError("gyro_thresh outside valid range [0.2, 0.6] rad/s")
        if not 0.05 <= self.std_thresh <= 0.4:
            raise ConfigurationError("std_thresh outside valid range [0.05, 0.4] m/s^2")


@dataclass
class TurnInterval:
    start_s: float
    end_s: float
    angle_deg: float

    @property
    def is_sharp(self) -> bool:
        return abs(self.angle_deg) >= 90.0


def window_bounds(n_samples: int, fs: float, cfg: SegmentationConfig):
    """Non-overlapping window index ranges; a tail < window_s/2 is dropped."""
    wlen = max(2, int(round(cfg.window_s * fs)))
    bounds = []
    start = 0
    while start + wlen <= n_samples:
        bounds.append((start, start + wlen))
        start += wlen
    tail = n_samples - start
    if tail >= max(2, int(round(cfg.window_s * fs / 2))):
        bounds.append((start, n_samples))
    return bounds


def classify_windows(rec: GravityAlignedRecording, cfg: SegmentationConfig | None = None):
    """Per-window moving flags. Non-moving needs all three criteria:
    mean |accel| near the reference value, mean |gyro| below threshold,
    and combined accel standard deviation (norm of per-axis SDs) below
    threshold.
    """
    cfg = cfg or SegmentationConfig()
    cfg.validate()
    bounds = window_bounds(len(rec.t), rec.sample_rate, cfg)
    moving = np.empty(len(bounds), dtype=bool)
    amag = np.linalg.norm(rec.accel, axis=1)
    gmag = np.linalg.norm(rec.gyro, axis=1)
    lo = cfg.accel_ref * (1.0 - cfg.accel_tol)
    hi = cfg.accel_ref * (1.0 + cfg.accel_tol)
    for i, (a, b) in enumerate(bounds):
        mean_a = float(np.mean(amag[a:b]))
        mean_g = float(np.mean(gmag[a:b]))
        comb_std = float(np.linalg.norm(np.std(rec.accel[a:b], axis=0, ddof=0)))
        nonmoving = (lo <= mean_a <= hi) and mean_g < cfg.gyro_thresh \
            and comb_std < cfg.std_thresh
        moving[i] = not nonmoving
    return moving, bounds


def _runs(flags: np.ndarray):
    """(start_idx, end_idx_exclusive, value) runs of a boolean array."""
    out = []
    i = 0
    n = len(flags)
    while i < n:
        j = i
        while j < n and flags[j] == flags[i]:
            j += 1
        out.append((i, j, bool(flags[i])))
        i = j
    return out


def segment(rec: GravityAlignedRecording, cfg: SegmentationConfig | None = None) -> list[Segment]:
    """Classify the recording into boundaries, rests, unknowns, and bout
    candidates. The returned segments tile the windowed span."""
    cfg = cfg or SegmentationConfig()
    moving, bounds = classify_windows(rec, cfg)
    if not len(bounds):
        return []
    t0 = rec.t[0]
    fs = rec.sample_rate
    spans = []  # (start_s, end_s, moving)
    for a, b, val in _runs(moving):
        spans.append([t0 + bounds[a][0] / fs, t0 + (bounds[b - 1][1]) / fs, val])

    # merge non-moving intervals separated by short moving gaps
    merged = []
    i = 0
    while i < len(spans):
        cur = spans[i]
        if not cur[2]:
            while (i + 2 < len(spans) and spans[i + 1][2]
                   and not spans[i + 2][2]
                   and spans[i + 2][0] - cur[1] < cfg.merge_gap_s):
                cur = [cur[0], spans[i + 2][1], False]
                i += 2
        merged.append(cur)
        i += 1

    covered_end = t0 + bounds[-1][1] / fs
    rec_start = t0
    segments = []
    for start, end, is_moving in merged:
        dur = end - start
        if is_moving:
            kind = SegmentKind.GAIT_BOUT if dur >= cfg.min_bout_s else SegmentKind.UNKNOWN
        else:
            near_start = start - rec_start < cfg.boundary_margin_s
            near_end = covered_end - end < cfg.boundary_margin_s
            if near_start or near_end:
                kind = SegmentKind.BOUNDARY
            elif dur < cfg.rest_split_s:
                kind = SegmentKind.SHORT_REST
            else:
                kind = SegmentKind.LONG_REST
        segments.append(Segment(start_s=float(start), end_s=float(end), kind=kind))
    return segments


def detect_turns(rec: GravityAlignedRecording, cfg: SegmentationConfig | None = None) -> list[TurnInterval]:
    """Turn intervals from the low-pass filtered vertical angular velocity."""
    cfg = cfg or SegmentationConfig()
    fs = rec.sample_rate
    yaw = rec.vertical_gyro
    if len(yaw) < 10:
        return []
    if cfg.turn_lowpass_hz < fs / 2.0:
        b, a = butter(2, cfg.turn_lowpass_hz, fs=fs)
        padlen = min(3 * max(len(a), len(b)), len(yaw) - 1)
        yaw = filtfilt(b, a, yaw, padlen=padlen)
    yaw_dps = np.degrees(yaw)

    above = np.abs(yaw_dps) > cfg.turn_start_dps
    candidates = []
    for a_i, b_i, val in _runs(above):
        if not val:
            continue
        lo = a_i
        while lo > 0 and abs(yaw_dps[lo - 1]) > cfg.turn_stop_dps:
            lo -= 1
        hi = b_i
        while hi < len(yaw_dps) and abs(yaw_dps[hi]) > cfg.turn_stop_dps:
            hi += 1
        candidates.append([lo, hi])

    merged = []
    for lo, hi in candidates:
        if merged and (lo - merged[-1][1]) / fs < cfg.turn_merge_s:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])

    t0 = rec.t[0]
    turns = []
    for lo, hi in merged:
        angle = float(np.degrees(np.trapezoid(rec.vertical_gyro[lo:hi], dx=1.0 / fs)))
        turns.append(TurnInterval(start_s=float(t0 + lo / fs),
                                  end_s=float(t0 + hi / fs),
                                  angle_deg=angle))
    return turns


def unbiased_autocorr(x: np.ndarray) -> np.ndarray:
    """Mean-removed, unbiased, lag-0-normalized autocorrelation."""
    x = np.asarray(x, dtype=float)
    x = x - x.mean()
    n = len(x)
    r = np.correlate(x, x, mode="full")[n - 1:]
    r = r / (n - np.arange(n))
    if r[0] <= 1e-12:
        return np.zeros(n)
    return r / r[0]


def dominant_stride_peak(x: np.ndarray, fs: float, cfg: SegmentationConfig):
    """(lag_s, coefficient) of the dominant autocorrelation peak in the
    stride band, or None if no local maximum exists there.

    A peak near half the dominant lag that is almost as strong marks the
    true period (the dominant lag being its double), so the estimate
    drops to it; weaker half-lag peaks are step-frequency artifacts and
    are ignored.
    """
    r = unbiased_autocorr(x)
    lags = np.arange(len(r)) / fs
    peaks, _ = find_peaks(r)
    peaks = peaks[(lags[peaks] >= cfg.stride_lag_min_s)
                  & (lags[peaks] <= cfg.stride_lag_max_s)]
    if len(peaks) == 0:
        return None
    best = peaks[np.argmax(r[peaks])]
    while True:
        half = best / 2.0
        tol = max(2.0, 0.1 * half)
        near = peaks[np.abs(peaks - half) <= tol]
        if len(near) == 0:
            break
        cand = near[np.argmax(r[near])]
        if r[cand] < 0.92 * r[best]:
            break
        best = cand
    return float(lags[best]), float(r[best])


def verify_gait(vertical_accel: np.ndarray, fs: float,
                cfg: SegmentationConfig | None = None) -> bool:
    """True iff vertical acceleration shows dominant stride periodicity."""
    cfg = cfg or SegmentationConfig()
    peak = dominant_stride_peak(vertical_accel, fs, cfg)
    return peak is not None and peak[1] >= cfg.autocorr_peak_min


def refine_with_turns(segments: list[Segment], turns: list[TurnInterval],
                      cfg: SegmentationConfig | None = None) -> list[Segment]:
    """Relabel the sharp-turn spans inside gait bouts as SharpTurn
    segments, splitting the bouts around them."""
    cfg = cfg or SegmentationConfig()
    sharp = sorted((t for t in turns if abs(t.angle_deg) >= cfg.sharp_turn_deg),
                   key=lambda t: t.start_s)
    out = []
    for seg in segments:
        if seg.kind != SegmentKind.GAIT_BOUT:
            out.append(seg)
            continue
        cursor = seg.start_s
        for turn in sharp:
            a = max(turn.start_s, seg.start_s)
            b = min(turn.end_s, seg.end_s)
            if b <= a:
                continue
            if a > cursor:
                out.append(Segment(start_s=cursor, end_s=a,
                                   kind=SegmentKind.GAIT_BOUT))
            out.append(Segment(start_s=a, end_s=b, kind=SegmentKind.SHARP_TURN))
            cursor = b
        if seg.end_s > cursor:
            out.append(Segment(start_s=cursor, end_s=seg.end_s,
                               kind=SegmentKind.GAIT_BOUT))
    out.sort(key=lambda s: s.start_s)
    return out


def eligible_bouts(rec: GravityAlignedRecording, segments: list[Segment],
                   turns: list[TurnInterval],
                   cfg: SegmentationConfig | None = None) -> list[Segment]:
    """Gait bouts split at sharp turns, re-filtered by duration and
    gait verification."""
    cfg = cfg or SegmentationConfig()
    sharp = sorted((t for t in turns if abs(t.angle_deg) >= cfg.sharp_turn_deg),
                   key=lambda t: t.start_s)
    fs = rec.sample_rate
    t0 = rec.t[0]
    out = []
    for seg in segments:
        if seg.kind != SegmentKind.GAIT_BOUT:
            continue
        pieces = [(seg.start_s, seg.end_s)]
        for turn in sharp:
            next_pieces = []
            for a, b in pieces:
                if turn.end_s <= a or turn.start_s >= b:
                    next_pieces.append((a, b))
                    continue
                if turn.start_s > a:
                    next_pieces.append((a, turn.start_s))
                if turn.end_s < b:
                    next_pieces.append((turn.end_s, b))
            pieces = next_pieces
        for a, b in pieces:
            if b - a < cfg.min_bout_s:
                continue
            i0 = int(round((a - t0) * fs))
            i1 = int(round((b - t0) * fs))
            if verify_gait(rec.vertical_accel[i0:i1], fs, cfg):
                out.append(Segment(start_s=a, end_s=b, kind=SegmentKind.GAIT_BOUT))
    return out
