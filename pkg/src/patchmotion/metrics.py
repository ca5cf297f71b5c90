"""Evaluation metrics for transferred motions.

Covers distribution distance on windowed kinematic features (Frechet
distance), power-spectral-density alignment of bound channels, foot/paw
contact detection and consistency, diversity across variants, binding
rate, dominant-frequency phase, and throughput measurement.
"""

from __future__ import annotations

import time
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.signal import periodogram

from .binding import BindingSet, CorrespondenceMap
from .errors import (FlatSignal, InsufficientWindows, LengthMismatch, NoBoundChannels,
                     TooFew, TooShort)
from .features import Motion
from .skeleton import Skeleton

WINDOW = 32
_UP_AXIS = 1  # Y-up


# ---------------------------------------------------------------------------
# Kinematic features and FID
# ---------------------------------------------------------------------------

def _joint_speeds(motion: Motion) -> np.ndarray:
    """(F, J) per-frame FK speed of every joint, last row repeated."""
    positions = motion.fk()
    speeds = np.zeros(positions.shape[:2])
    if motion.n_frames > 1:
        speeds[:-1] = np.linalg.norm(np.diff(positions, axis=0), axis=2)
        speeds[-1] = speeds[-2]
    return speeds


def kinematic_features(motions: Sequence[Motion], window: int = WINDOW) -> np.ndarray:
    """Per-window per-joint speed mean and std, stacked over all motions.

    Windows are `window` frames with stride window/2. Output is
    (n_windows, 2J).
    """
    stride = max(window // 2, 1)
    rows = []
    for m in motions:
        speeds = _joint_speeds(m)
        for start in range(0, speeds.shape[0] - window + 1, stride):
            chunk = speeds[start:start + window]
            rows.append(np.concatenate([chunk.mean(axis=0), chunk.std(axis=0)]))
    if not rows:
        return np.zeros((0, 0))
    return np.stack(rows)


def _sqrt_eigvals(matrix: np.ndarray) -> np.ndarray:
    """Square roots of a symmetric matrix's eigenvalues, clamped at 0."""
    vals = np.linalg.eigvalsh((matrix + matrix.T) / 2.0)
    return np.sqrt(np.clip(vals, 0.0, None))


def _sqrtm_sym(matrix: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh((matrix + matrix.T) / 2.0)
    vals = np.sqrt(np.clip(vals, 0.0, None))
    return (vecs * vals) @ vecs.T


def fid(real: Sequence[Motion], generated: Sequence[Motion],
        window: int = WINDOW) -> float:
    """Frechet distance between Gaussians fit to kinematic features.

    ||mu1 - mu2||^2 + Tr(S1 + S2 - 2 (S1 S2)^(1/2)), with the matrix
    square root taken through symmetric eigendecompositions (negative
    eigenvalues clamped at zero).
    """
    feats1 = kinematic_features(real, window)
    feats2 = kinematic_features(generated, window)
    for side, feats in (("real", feats1), ("generated", feats2)):
        if feats.shape[0] < 2:
            raise InsufficientWindows(
                f"{side} side yields {feats.shape[0]} windows, need >= 2")
    mu1, mu2 = feats1.mean(axis=0), feats2.mean(axis=0)
    sigma1 = np.cov(feats1, rowvar=False)
    sigma2 = np.cov(feats2, rowvar=False)
    root1 = _sqrtm_sym(sigma1)
    cross = _sqrt_eigvals(root1 @ sigma2 @ root1).sum()
    return float(np.sum((mu1 - mu2) ** 2) + np.trace(sigma1) + np.trace(sigma2)
                 - 2.0 * cross)


# ---------------------------------------------------------------------------
# PSD frequency alignment
# ---------------------------------------------------------------------------

def _psd(signal: np.ndarray) -> np.ndarray:
    _, power = periodogram(signal - signal.mean(), window="hann", detrend=False)
    return power


def frequency_alignment(source: Motion, result: Motion,
                        cmap: CorrespondenceMap) -> float:
    """Mean PSD cosine similarity over bound channel pairs, as a percent.

    Channels are paired through the correspondence blocks. Two silent
    channels count as aligned (1.0); one silent channel as 0.0.
    """
    if not cmap.blocks:
        raise NoBoundChannels("correspondence map has no bound blocks")
    if source.n_frames != result.n_frames:
        raise LengthMismatch(
            f"source has {source.n_frames} frames, result {result.n_frames}")
    sims = []
    for block in cmap.blocks:
        width = block.target.stop - block.target.start
        for k in range(width):
            p1 = _psd(source.features[:, block.source.start + k])
            p2 = _psd(result.features[:, block.target.start + k])
            n1, n2 = np.linalg.norm(p1), np.linalg.norm(p2)
            if n1 < 1e-300 and n2 < 1e-300:
                sims.append(1.0)
            elif n1 < 1e-300 or n2 < 1e-300:
                sims.append(0.0)
            else:
                sims.append(float(np.dot(p1, p2) / (n1 * n2)))
    return 100.0 * float(np.mean(sims))


# ---------------------------------------------------------------------------
# Contacts
# ---------------------------------------------------------------------------

def detect_contacts(motion: Motion, contact_joints: Sequence[str],
                    v_eps: Optional[float] = None,
                    h_eps: Optional[float] = None) -> dict[str, np.ndarray]:
    """Per-frame contact booleans for each labeled joint.

    A joint is in contact when its FK speed is below v_eps AND its height
    above the joint's own 5th-percentile height over the sequence is
    below h_eps. Defaults scale with the skeleton: v_eps = 0.05 and
    h_eps = 0.1 times the median bone length.
    """
    skeleton = motion.skeleton
    scale = skeleton.median_bone_length()
    if v_eps is None:
        v_eps = 0.05 * scale
    if h_eps is None:
        h_eps = 0.1 * scale
    positions = motion.fk()
    speeds = _joint_speeds(motion)
    track: dict[str, np.ndarray] = {}
    for name in contact_joints:
        j = skeleton.joint_index(name)
        heights = positions[:, j, _UP_AXIS]
        floor = np.percentile(heights, 5)
        track[name] = (speeds[:, j] < v_eps) & (heights - floor < h_eps)
    return track


def contact_consistency(source_track: dict[str, np.ndarray],
                        result_track: dict[str, np.ndarray],
                        pairing: Sequence[tuple[str, str]]) -> float:
    """Percent of (frame, pair) cells where the two tracks agree."""
    cells = 0
    agree = 0
    for src_name, dst_name in pairing:
        a, b = source_track[src_name], result_track[dst_name]
        if a.shape != b.shape:
            raise LengthMismatch(
                f"tracks for ({src_name}, {dst_name}) differ in length")
        cells += a.size
        agree += int(np.sum(a == b))
    if cells == 0:
        raise LengthMismatch("empty pairing")
    return 100.0 * agree / cells


# ---------------------------------------------------------------------------
# Diversity, binding rate, phase, throughput
# ---------------------------------------------------------------------------

def diversity(variants: Sequence[Motion]) -> float:
    """Mean pairwise mean joint distance between variants' FK positions."""
    motions = [v.motion if hasattr(v, "motion") else v for v in variants]
    if len(motions) < 2:
        raise TooFew(f"need >= 2 variants, got {len(motions)}")
    positions = [m.fk() for m in motions]
    dists = []
    for i in range(len(positions)):
        for k in range(i + 1, len(positions)):
            dists.append(float(np.mean(
                np.linalg.norm(positions[i] - positions[k], axis=2))))
    return float(np.mean(dists))


def binding_rate(bindings: BindingSet | int, n_source_joints: int,
                 n_target_joints: int) -> float:
    """2 |M| / (J_S + J_T) x 100."""
    count = len(bindings.pairs) if isinstance(bindings, BindingSet) else int(bindings)
    return 200.0 * count / (n_source_joints + n_target_joints)


def dominant_phase(signal: np.ndarray) -> tuple[int, float]:
    """(bin index, phase) of the largest positive-frequency FFT component.

    The mean is removed first, so the result is invariant to constant
    offsets. Raises FlatSignal when no component rises above 1e-9.
    """
    x = np.asarray(signal, dtype=np.float64)
    if x.shape[0] < 8:
        raise TooShort(f"need >= 8 samples, got {x.shape[0]}")
    spectrum = np.fft.rfft(x - x.mean())
    amplitudes = np.abs(spectrum)
    amplitudes[0] = 0.0
    bin_index = int(np.argmax(amplitudes))
    if amplitudes[bin_index] < 1e-9:
        raise FlatSignal("no dominant frequency component")
    return bin_index, float(np.angle(spectrum[bin_index]))


def measure_fps(workload: Callable[[], object], n_frames: int,
                runs: int = 5, warmup: int = 1) -> float:
    """Frames per second of a transfer invocation: median of timed runs."""
    for _ in range(warmup):
        workload()
    times = []
    for _ in range(runs):
        start = time.perf_counter()
        workload()
        times.append(time.perf_counter() - start)
    return n_frames / float(np.median(times))
