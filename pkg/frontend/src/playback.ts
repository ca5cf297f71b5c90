/**
 * Synchronized playback over three clips of possibly different lengths.
 *
 * One master clock advances in source-frame units; each panel shows its
 * own clip at `floor(cursor) mod ownFrames`, so clips of different
 * lengths loop independently while staying phase-locked to the scrub bar.
 */

export interface Clock {
  /** Master cursor in fractional source frames. */
  cursor: number;
  playing: boolean;
}

export function newClock(): Clock {
  return { cursor: 0, playing: false };
}

/** Advance by wall-clock dt (seconds) at the source clip's frame rate. */
export function advance(clock: Clock, dtSeconds: number, frameTime: number, nFrames: number): Clock {
  if (!clock.playing || nFrames <= 0 || frameTime <= 0) return clock;
  const next = (clock.cursor + dtSeconds / frameTime) % nFrames;
  return { ...clock, cursor: next < 0 ? next + nFrames : next };
}

/** Jump to an absolute frame (scrub bar), clamped to the clip. */
export function scrubTo(clock: Clock, frame: number, nFrames: number): Clock {
  if (nFrames <= 0 || !Number.isFinite(frame)) return { ...clock, cursor: 0 };
  return { ...clock, cursor: Math.min(Math.max(frame, 0), nFrames - 1e-9) };
}

export function togglePlay(clock: Clock): Clock {
  return { ...clock, playing: !clock.playing };
}

/** Integer frame a panel with `ownFrames` frames should display. */
export function panelFrame(cursor: number, ownFrames: number): number {
  if (ownFrames <= 0) return 0;
  const idx = Math.floor(cursor) % ownFrames;
  return idx < 0 ? idx + ownFrames : idx;
}
