"""Exception hierarchy shared by all patchmotion modules.

Every domain error derives from PatchMotionError so callers (CLI, HTTP
service) can map failures to exit codes / status codes by class name.
"""


class PatchMotionError(Exception):
    """Base class for all domain errors."""


# --- BVH parsing / serialization ---

class BvhSyntaxError(PatchMotionError):
    """Malformed BVH structure. Carries the offending line/column."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, col {column}: {message}"
        super().__init__(message)


class ChannelMismatch(PatchMotionError):
    """Motion row width disagrees with the hierarchy's channel count."""


class EmptyMotion(PatchMotionError):
    """BVH file declares zero frames."""


# --- skeleton / layout ---

class OutOfRange(PatchMotionError):
    """Joint index outside the skeleton's joint count."""


class ShapeMismatch(PatchMotionError):
    """Array shape inconsistent with the skeleton or layout."""


class DegenerateBone(PatchMotionError):
    """Rest offset too short to define a bone direction."""


# --- feature codec ---

class NotARotation(PatchMotionError):
    """Input matrix is not orthonormal within tolerance."""


class DegenerateInput(PatchMotionError):
    """6D rotation encoding cannot be orthonormalized."""


class GimbalWarning(UserWarning):
    """Euler extraction near a gimbal-locked configuration (non-fatal)."""


# --- correspondence ---

class DuplicateTarget(PatchMotionError):
    """A target joint appears in more than one binding pair."""


class IndexOutOfRange(PatchMotionError):
    """Binding refers to a joint index outside either skeleton."""


class UnknownJoint(PatchMotionError):
    """A joint name could not be resolved against the skeleton."""


class NoChains(PatchMotionError):
    """A skeleton yields no upward paths of the requested length."""


# --- patches / transfer ---

class TooShort(PatchMotionError):
    """Motion has fewer frames than one patch."""


class CoverageGap(PatchMotionError):
    """An output frame is covered by no patch during blending."""


class EmptyDatabase(PatchMotionError):
    """Patch database contains no patches."""


# --- metrics ---

class InsufficientWindows(PatchMotionError):
    """Fewer than two feature windows on one side of the FID."""


class NoBoundChannels(PatchMotionError):
    """Frequency alignment requested with an empty correspondence."""


class LengthMismatch(PatchMotionError):
    """Contact tracks have different frame counts."""


class TooFew(PatchMotionError):
    """Fewer than two variants supplied to the diversity metric."""


class FlatSignal(PatchMotionError):
    """Signal has no dominant frequency component above threshold."""
