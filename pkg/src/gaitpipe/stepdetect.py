"""Adaptive wavelet-based detection of initial and final contacts."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import butter, filtfilt, find_peaks

from .core import (
    FC,
    IC,
    GaitEvent,
    InsufficientDataError,
    NoCadenceError,
    SIDE_LEFT,
    SIDE_RIGHT,
    SIDE_UNKNOWN,
)
from .segmentation import SegmentationConfig, dominant_stride_peak, unbiased_autocorr

AXIS_VERTICAL = "vertical"
AXIS_AP = "antero_posterior"

# relative prominence gate for extrema; scale-free so that amplitude
# scaling leaves detected indices unchanged
PROMINENCE_FRACTION = 0.1
MIN_EVENT_SPACING_S = 0.25
LATERALITY_LOWPASS_HZ = 2.0
LATERALITY_MIN_RAD_S = 0.05


@dataclass
class StrideEstimate:
    stride_s: float

    @property
    def max_stride_s(self) -> float:
        # 50% tolerance on the estimated stride duration
        return 1.5 * self.stride_s


@dataclass
class WaveletParams:
    scale: float            # CWT scale in samples
    axis: str               # AXIS_VERTICAL or AXIS_AP
    sign: int               # -1: ICs are minima of s1; +1: maxima


def estimate_stride_duration(vertical_accel: np.ndarray, fs: float,
                             cfg: SegmentationConfig | None = None) -> StrideEstimate:
    """Stride duration from the dominant autocorrelation peak in the
    physiological lag band."""
    cfg = cfg or SegmentationConfig()
    peak = dominant_stride_peak(vertical_accel, fs, cfg)
    if peak is None or peak[1] < cfg.autocorr_peak_min:
        raise NoCadenceError("no dominant stride peak in the lag band")
    return StrideEstimate(stride_s=peak[0])


def gaus1_kernel(scale: float) -> np.ndarray:
    """First-derivative-of-Gaussian analyzing function at the given scale
    (in samples), oriented so that convolution differentiates."""
    half = int(np.ceil(6.0 * scale))
    x = np.arange(-half, half + 1) / scale
    return -x * np.exp(-0.5 * x * x) / (scale * np.sqrt(2.0 * np.pi))


def cwt_differentiate(signal: np.ndarray, scale: float) -> np.ndarray:
    """Smoothed derivative: convolution with the gaus1 kernel."""
    return np.convolve(signal, gaus1_kernel(scale), mode="same")


def scale_for_step_frequency(stride_s: float, fs: float) -> float:
    """CWT scale whose gaus1 center frequency matches the step frequency.

    The kernel's magnitude response peaks at f = fs / (2*pi*scale), so
    matching 2/stride_s gives scale = fs*stride_s / (4*pi).
    """
    return fs * stride_s / (4.0 * np.pi)


def _integrate_detrended(axis_signal: np.ndarray, fs: float) -> np.ndarray:
    detr = axis_signal - axis_signal.mean()
    return np.concatenate([[0.0], np.cumsum((detr[1:] + detr[:-1]) / 2.0)]) / fs


def _smoothed_derivative(axis_signal: np.ndarray, scale: float, fs: float) -> np.ndarray:
    return cwt_differentiate(_integrate_detrended(axis_signal, fs), scale)


def _autocorr_at_lag(x: np.ndarray, lag_samples: int) -> float:
    r = unbiased_autocorr(x)
    if lag_samples <= 0 or lag_samples >= len(r):
        return 0.0
    return float(r[lag_samples])


def estimate_wavelet_params(accel_anatomical: np.ndarray, fs: float,
                            stride: StrideEstimate) -> WaveletParams:
    """Pick wavelet axis, scale, and sign from the bout's acceleration."""
    step_lag = int(round(stride.stride_s / 2.0 * fs))
    r_vert = _autocorr_at_lag(accel_anatomical[:, 0], step_lag)
    r_ap = _autocorr_at_lag(accel_anatomical[:, 1], step_lag)
    axis = AXIS_VERTICAL if r_vert >= r_ap else AXIS_AP
    scale = scale_for_step_frequency(stride.stride_s, fs)
    col = 0 if axis == AXIS_VERTICAL else 1
    sign = _estimate_sign(accel_anatomical[:, col], scale, fs, stride.stride_s)
    return WaveletParams(scale=scale, axis=axis, sign=sign)


def _estimate_sign(axis_signal: np.ndarray, scale: float, fs: float,
                   stride_s: float) -> int:
    """Event polarity from the asymmetry of the smoothed derivative.

    Contact transients make the extrema on the contact side of the cycle
    systematically stronger, so compare the mean magnitude of the
    prominence-gated minima against that of the maxima.
    """
    s1 = _smoothed_derivative(axis_signal, scale, fs)
    prom = PROMINENCE_FRACTION * np.max(np.abs(s1))
    if prom <= 0:
        return -1
    maxima, _ = find_peaks(s1, prominence=prom)
    minima, _ = find_peaks(-s1, prominence=prom)
    if len(minima) == 0:
        return 1
    if len(maxima) == 0:
        return -1
    mean_min = float(np.mean(np.abs(s1[minima])))
    mean_max = float(np.mean(np.abs(s1[maxima])))
    return -1 if mean_min >= mean_max else 1


def detect_events(accel_anatomical: np.ndarray, fs: float,
                  params: WaveletParams, t0: float = 0.0) -> list[GaitEvent]:
    """ICs from the smoothed derivative of the integrated axis signal,
    FCs from a second wavelet differentiation of that signal."""
    col = 0 if params.axis == AXIS_VERTICAL else 1
    x = accel_anatomical[:, col]
    support = 2 * int(np.ceil(6.0 * params.scale)) + 1
    if len(x) < 2 * support:
        raise InsufficientDataError("bout shorter than two wavelet supports")
    s1 = _smoothed_derivative(x, params.scale, fs)
    s2 = cwt_differentiate(s1, params.scale)

    dist = max(1, int(round(MIN_EVENT_SPACING_S * fs)))
    ic_signal = -s1 if params.sign < 0 else s1
    fc_signal = s2 if params.sign < 0 else -s2

    events = []
    # the height gate rejects near-zero bumps that borrow prominence from
    # convolution edge transients
    prom_ic = PROMINENCE_FRACTION * np.max(np.abs(s1))
    if prom_ic > 0:
        idx, _ = find_peaks(ic_signal, prominence=prom_ic, height=prom_ic,
                            distance=dist)
        for i in idx:
            events.append(GaitEvent(time_s=t0 + i / fs, kind=IC,
                                    strength=float(ic_signal[i])))
    prom_fc = PROMINENCE_FRACTION * np.max(np.abs(s2))
    if prom_fc > 0:
        idx, _ = find_peaks(fc_signal, prominence=prom_fc, height=prom_fc,
                            distance=dist)
        for i in idx:
            events.append(GaitEvent(time_s=t0 + i / fs, kind=FC,
                                    strength=float(fc_signal[i])))
    events.sort(key=lambda e: (e.time_s, e.kind))
    return events


def assign_laterality(events: list[GaitEvent], gyro_anatomical: np.ndarray,
                      fs: float, t0: float = 0.0) -> list[GaitEvent]:
    """IC side from the sign of the low-pass filtered vertical angular
    velocity; each FC inherits the opposite side of its preceding IC."""
    yaw = gyro_anatomical[:, 0]
    if len(yaw) > 15 and LATERALITY_LOWPASS_HZ < fs / 2.0:
        b, a = butter(2, LATERALITY_LOWPASS_HZ, fs=fs)
        padlen = min(3 * max(len(a), len(b)), len(yaw) - 1)
        yaw = filtfilt(b, a, yaw, padlen=padlen)

    out = []
    last_ic_side = SIDE_UNKNOWN
    for ev in sorted(events, key=lambda e: e.time_s):
        if ev.kind == IC:
            i = int(round((ev.time_s - t0) * fs))
            i = min(max(i, 0), len(yaw) - 1)
            if abs(yaw[i]) < LATERALITY_MIN_RAD_S:
                side = SIDE_UNKNOWN
            elif yaw[i] > 0:
                side = SIDE_LEFT
            else:
                side = SIDE_RIGHT
            last_ic_side = side
        else:
            if last_ic_side == SIDE_LEFT:
                side = SIDE_RIGHT
            elif last_ic_side == SIDE_RIGHT:
                side = SIDE_LEFT
            else:
                side = SIDE_UNKNOWN
        out.append(GaitEvent(time_s=ev.time_s, kind=ev.kind, side=side,
                             strength=ev.strength))
    return out


def quality_check(events: list[GaitEvent], stride: StrideEstimate) -> list[GaitEvent]:
    """Remove implausible events.

    Same-kind events closer than the minimum spacing collapse to the
    stronger extremum; isolated ICs with no neighbor within the maximum
    stride duration are dropped; FCs must fall within 25% of the maximum
    stride duration after the preceding IC.
    """
    max_stride = stride.max_stride_s
    fc_window = 0.25 * max_stride

    def collapse(evs):
        kept = []
        for ev in sorted(evs, key=lambda e: e.time_s):
            if kept and ev.time_s - kept[-1].time_s < MIN_EVENT_SPACING_S:
                if abs(ev.strength) > abs(kept[-1].strength):
                    kept[-1] = ev
            else:
                kept.append(ev)
        return kept

    ics = collapse([e for e in events if e.kind == IC])
    fcs = collapse([e for e in events if e.kind == FC])

    # drop orphan ICs: no neighboring IC within the maximum stride duration
    if len(ics) > 1:
        kept_ics = []
        for i, ev in enumerate(ics):
            prev_ok = i > 0 and ev.time_s - ics[i - 1].time_s <= max_stride
            next_ok = i < len(ics) - 1 and ics[i + 1].time_s - ev.time_s <= max_stride
            if prev_ok or next_ok:
                kept_ics.append(ev)
        ics = kept_ics

    ic_times = np.array([e.time_s for e in ics])
    kept_fcs = []
    for ev in fcs:
        before = ic_times[ic_times <= ev.time_s]
        if len(before) == 0:
            continue
        if ev.time_s - before[-1] <= fc_window:
            kept_fcs.append(ev)

    out = sorted(ics + kept_fcs, key=lambda e: (e.time_s, e.kind))
    return out
