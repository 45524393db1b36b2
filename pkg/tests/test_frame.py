import numpy as np
import pytest

from gaitpipe import frame, synth
from gaitpipe.core import AmbiguousDirectionError, InsufficientDataError

FS = 50.0
G = 9.81


def horizontal_oscillation(direction, n=300, amp=1.5, fs=FS):
    """Gravity-frame accel (vertical, h1, h2) oscillating along one
    horizontal direction."""
    t = np.arange(n) / fs
    wave = amp * np.sin(2 * np.pi * 1.6 * t)
    accel = np.zeros((n, 3))
    accel[:, 0] = G
    accel[:, 1] = wave * direction[0]
    accel[:, 2] = wave * direction[1]
    return accel


class TestEstimateFrame:
    def test_oscillation_along_x(self):
        accel = horizontal_oscillation([1.0, 0.0])
        fr = frame.estimate_frame(accel, FS)
        ap = fr.antero_posterior
        assert abs(ap[0]) < 1e-12
        assert abs(abs(ap[1]) - 1.0) < 1e-9
        assert abs(ap[2]) < 1e-9

    def test_oscillation_at_30_degrees(self):
        d = np.array([np.cos(np.radians(30)), np.sin(np.radians(30))])
        rng = np.random.default_rng(0)
        accel = horizontal_oscillation(d)
        accel[:, 1:] += rng.normal(0, 0.05, (len(accel), 2))
        fr = frame.estimate_frame(accel, FS)
        ap2 = fr.antero_posterior[1:]
        cosang = abs(np.dot(ap2, d))
        assert np.degrees(np.arccos(np.clip(cosang, -1, 1))) < 2.0

    def test_isotropic_noise_ambiguous(self):
        errors = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            n = 2000  # long enough for the eigenvalue ratio to concentrate
            accel = np.zeros((n, 3))
            accel[:, 0] = G
            accel[:, 1:] = rng.normal(0, 1.0, (n, 2))
            try:
                frame.estimate_frame(accel, FS)
            except AmbiguousDirectionError:
                errors += 1
        assert errors >= 95

    def test_too_short(self):
        accel = horizontal_oscillation([1.0, 0.0], n=100)
        with pytest.raises(InsufficientDataError):
            frame.estimate_frame(accel, FS)

    def test_orthonormal_right_handed(self):
        d = np.array([np.cos(0.7), np.sin(0.7)])
        fr = frame.estimate_frame(horizontal_oscillation(d), FS)
        R = fr.rotation
        np.testing.assert_allclose(R @ R.T, np.eye(3), atol=1e-6)
        assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-9)


class TestToAnatomical:
    def test_identity_frame(self):
        fr = frame.AnatomicalFrame(
            vertical=np.array([1.0, 0, 0]),
            antero_posterior=np.array([0.0, 1, 0]),
            medio_lateral=np.array([0.0, 0, 1]))
        rng = np.random.default_rng(1)
        x = rng.normal(size=(50, 3))
        np.testing.assert_allclose(frame.to_anatomical(x, fr), x, atol=1e-12)

    def test_round_trip_after_horizontal_rotation(self):
        accel = horizontal_oscillation([1.0, 0.0])
        fr0 = frame.estimate_frame(accel, FS)
        base = frame.to_anatomical(accel, fr0)
        ang = np.pi / 2
        c, s = np.cos(ang), np.sin(ang)
        rotated = accel.copy()
        rotated[:, 1] = c * accel[:, 1] - s * accel[:, 2]
        rotated[:, 2] = s * accel[:, 1] + c * accel[:, 2]
        fr1 = frame.estimate_frame(rotated, FS)
        out = frame.to_anatomical(rotated, fr1)
        # AP sign is unresolved by PCA; compare up to sign
        ap0, ap1 = base[:, 1], out[:, 1]
        if np.dot(ap0, ap1) < 0:
            ap1 = -ap1
        rel = np.sqrt(np.mean((ap1 - ap0) ** 2)) / np.sqrt(np.mean(ap0 ** 2))
        assert rel < 0.01

    def test_norm_preserved(self):
        fr = frame.estimate_frame(horizontal_oscillation([0.6, 0.8]), FS)
        rng = np.random.default_rng(2)
        x = rng.normal(size=(1000, 3))
        y = frame.to_anatomical(x, fr)
        np.testing.assert_allclose(np.linalg.norm(y, axis=1),
                                   np.linalg.norm(x, axis=1), rtol=1e-9)


class TestVerifyFrame:
    def _walk_anatomical(self):
        from gaitpipe import orientation
        # some noise keeps the ML residual channel aperiodic
        rec, _, _, _ = synth.generate(
            synth.SynthConfig(duration_s=20.0, seed=3, noise_sigma=0.3))
        ga = orientation.align_recording(rec)
        fr = frame.estimate_frame(ga.accel, ga.sample_rate)
        return frame.to_anatomical(ga.accel, fr), ga.sample_rate

    def test_true_on_synthetic_gait(self):
        aa, fs = self._walk_anatomical()
        assert frame.verify_frame(aa, fs)

    def test_false_with_swapped_axes(self):
        aa, fs = self._walk_anatomical()
        swapped = aa[:, [0, 2, 1]]  # AP := ML (laterally quiet channel)
        assert not frame.verify_frame(swapped, fs)

    def test_false_on_constant(self):
        accel = np.zeros((400, 3))
        accel[:, 0] = G
        assert not frame.verify_frame(accel, FS)


class TestRotationInvariance:
    def test_channels_match_up_to_ap_sign(self):
        from gaitpipe import orientation
        from gaitpipe.core import random_unit_quat
        rec, _, _, _ = synth.generate(synth.SynthConfig(duration_s=20.0, seed=5))
        ga = orientation.align_recording(rec)
        fr = frame.estimate_frame(ga.accel, ga.sample_rate)
        base = frame.to_anatomical(ga.accel, fr)
        tail = slice(int(5 * ga.sample_rate), None)
        rng = np.random.default_rng(6)
        for _ in range(3):
            q = random_unit_quat(rng)
            rot = orientation.rotate_recording(rec, q)
            ga2 = orientation.align_recording(rot)
            fr2 = frame.estimate_frame(ga2.accel, ga2.sample_rate)
            out = frame.to_anatomical(ga2.accel, fr2)
            # compare mean-removed channels: residual gravity-estimate tilt
            # (fraction of a degree, orientation dependent) leaks a DC offset
            # of g*eps into the horizontal channels and a few percent of the
            # vertical oscillation into AP; downstream detection detrends, so
            # the looser AP tolerance reflects the achievable agreement
            for col, tol in ((0, 0.01), (1, 0.075)):
                a = base[tail, col] - base[tail, col].mean()
                b = out[tail, col] - out[tail, col].mean()
                if np.dot(a, b) < 0:
                    b = -b
                rel = np.sqrt(np.mean((b - a) ** 2)) \
                    / max(np.sqrt(np.mean(a ** 2)), 1e-12)
                assert rel < tol
