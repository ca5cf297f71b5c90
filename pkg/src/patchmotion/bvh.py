"""BVH file parsing and serialization.

BVH is the only motion interchange format of the package. The parser keeps
joints in depth-first document order, preserves channel order verbatim
(the channel order is later used as the Euler composition order), and
retains end sites as channel-less entries so leaf bone directions and toe
contacts stay available downstream.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import BvhSyntaxError, ChannelMismatch, EmptyMotion

POSITION_CHANNELS = ("Xposition", "Yposition", "Zposition")
ROTATION_CHANNELS = ("Xrotation", "Yrotation", "Zrotation")
VALID_CHANNELS = POSITION_CHANNELS + ROTATION_CHANNELS


@dataclass
class RawJoint:
    """One HIERARCHY entry: a joint or an end site, in document order."""

    name: str
    parent: Optional[int]
    offset: np.ndarray
    channels: list[str] = field(default_factory=list)
    is_end_site: bool = False


@dataclass
class RawMotion:
    """The MOTION block: frame_count x total_channel_count values.

    Rotation channels are degrees, position channels are length units.
    """

    frame_count: int
    frame_time: float
    values: np.ndarray


def total_channel_count(joints: list[RawJoint]) -> int:
    return sum(len(j.channels) for j in joints)


class _Cursor:
    """Line cursor with (line, column) tracking for error reports."""

    def __init__(self, text: str):
        self.lines = text.splitlines()
        self.index = 0

    def peek(self) -> Optional[str]:
        while self.index < len(self.lines):
            if self.lines[self.index].strip():
                return self.lines[self.index].strip()
            self.index += 1
        return None

    def next(self) -> str:
        line = self.peek()
        if line is None:
            raise BvhSyntaxError("unexpected end of file", self.line_no(), 1)
        self.index += 1
        return line

    def line_no(self) -> int:
        return min(self.index, len(self.lines) - 1) + 1

    def column_of(self, token: str) -> int:
        raw = self.lines[self.index - 1] if self.index > 0 else ""
        pos = raw.find(token)
        return pos + 1 if pos >= 0 else 1

    def fail(self, message: str, token: str = "") -> BvhSyntaxError:
        # errors are raised about the line just consumed by next()
        return BvhSyntaxError(message, max(self.index, 1),
                              self.column_of(token) if token else 1)


def _parse_floats(cur: _Cursor, words: list[str], expected: int, what: str) -> np.ndarray:
    if len(words) != expected:
        raise cur.fail(f"{what} expects {expected} numbers, got {len(words)}")
    try:
        return np.array([float(w) for w in words], dtype=np.float64)
    except ValueError as exc:
        raise cur.fail(f"bad number in {what}: {exc}") from None


def _parse_joint_body(cur: _Cursor, joints: list[RawJoint], index: int) -> None:
    """Parse the '{ OFFSET CHANNELS children }' body of joints[index]."""
    line = cur.next()
    if line != "{":
        raise cur.fail("expected '{'", line.split()[0])

    words = cur.next().split()
    if words[0] != "OFFSET":
        raise cur.fail("expected OFFSET", words[0])
    joints[index].offset = _parse_floats(cur, words[1:], 3, "OFFSET")

    words = cur.next().split()
    if words[0] != "CHANNELS":
        raise cur.fail("expected CHANNELS", words[0])
    try:
        n_channels = int(words[1])
    except (IndexError, ValueError):
        raise cur.fail("CHANNELS expects a count") from None
    names = words[2:]
    if len(names) != n_channels:
        raise cur.fail(f"CHANNELS {n_channels} followed by {len(names)} names")
    for name in names:
        if name not in VALID_CHANNELS:
            raise cur.fail(f"unknown channel '{name}'", name)
    if len(set(names)) != len(names):
        raise cur.fail("duplicate channel in CHANNELS list")
    joints[index].channels = names

    while True:
        line = cur.next()
        words = line.split()
        if words[0] == "JOINT":
            if len(words) < 2:
                raise cur.fail("JOINT requires a name")
            joints.append(RawJoint(" ".join(words[1:]), index, np.zeros(3)))
            _parse_joint_body(cur, joints, len(joints) - 1)
        elif line == "End Site" or words[0] == "End":
            joints.append(RawJoint(f"{joints[index].name}_end", index,
                                   np.zeros(3), is_end_site=True))
            end_index = len(joints) - 1
            if cur.next() != "{":
                raise cur.fail("expected '{' after End Site")
            words = cur.next().split()
            if words[0] != "OFFSET":
                raise cur.fail("End Site expects OFFSET", words[0])
            joints[end_index].offset = _parse_floats(cur, words[1:], 3, "OFFSET")
            if cur.next() != "}":
                raise cur.fail("End Site takes no channels; expected '}'")
        elif line == "}":
            return
        else:
            raise cur.fail(f"unexpected '{words[0]}' inside joint", words[0])


def parse_bvh(text: str) -> tuple[list[RawJoint], RawMotion]:
    """Parse BVH text into (joints in depth-first document order, motion).

    Raises BvhSyntaxError (with line/column), ChannelMismatch if a motion
    row width disagrees with the hierarchy, EmptyMotion on zero frames.
    """
    cur = _Cursor(text)
    if cur.next() != "HIERARCHY":
        raise cur.fail("expected HIERARCHY")

    words = cur.next().split()
    if words[0] != "ROOT" or len(words) < 2:
        raise cur.fail("expected 'ROOT <name>'", words[0])
    joints: list[RawJoint] = [RawJoint(" ".join(words[1:]), None, np.zeros(3))]
    _parse_joint_body(cur, joints, 0)

    if cur.next() != "MOTION":
        raise cur.fail("expected MOTION after hierarchy")

    words = cur.next().split()
    if len(words) != 2 or words[0] != "Frames:":
        raise cur.fail("expected 'Frames: <count>'")
    frame_count = int(words[1])
    if frame_count <= 0:
        raise EmptyMotion(f"frame count is {frame_count}")

    words = cur.next().split()
    if len(words) != 3 or words[0] != "Frame" or words[1] != "Time:":
        raise cur.fail("expected 'Frame Time: <seconds>'")
    frame_time = float(words[2])
    if frame_time <= 0:
        raise BvhSyntaxError(f"frame time must be positive, got {frame_time}", cur.line_no(), 1)

    width = total_channel_count(joints)
    rows = []
    for f in range(frame_count):
        line = cur.next()
        row = line.split()
        if len(row) != width:
            raise ChannelMismatch(
                f"frame {f}: row has {len(row)} values, hierarchy declares {width} channels"
            )
        try:
            rows.append([float(w) for w in row])
        except ValueError as exc:
            raise cur.fail(f"bad number in frame {f}: {exc}") from None
    if cur.peek() is not None:
        raise cur.fail("trailing content after last declared frame")

    values = np.array(rows, dtype=np.float64).reshape(frame_count, width)
    return joints, RawMotion(frame_count, frame_time, values)


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _write_joint(out: list[str], joints: list[RawJoint], index: int,
                 children: dict[int, list[int]], depth: int) -> None:
    joint = joints[index]
    pad = "\t" * depth
    if joint.is_end_site:
        out.append(f"{pad}End Site")
        out.append(pad + "{")
        out.append(f"{pad}\tOFFSET {' '.join(_fmt(v) for v in joint.offset)}")
        out.append(pad + "}")
        return
    keyword = "ROOT" if joint.parent is None else "JOINT"
    out.append(f"{pad}{keyword} {joint.name}")
    out.append(pad + "{")
    out.append(f"{pad}\tOFFSET {' '.join(_fmt(v) for v in joint.offset)}")
    out.append(f"{pad}\tCHANNELS {len(joint.channels)} {' '.join(joint.channels)}".rstrip())
    for child in children.get(index, []):
        _write_joint(out, joints, child, children, depth + 1)
    out.append(pad + "}")


def write_bvh(joints: list[RawJoint], motion: RawMotion) -> str:
    """Serialize to BVH text: tab indentation, '\\n' endings, 6 decimals.

    parse_bvh(write_bvh(j, m)) reproduces the hierarchy exactly and the
    motion values within 1e-4 per channel.
    """
    _check_invariants(joints, motion)
    children: dict[int, list[int]] = {}
    for i, joint in enumerate(joints):
        if joint.parent is not None:
            children.setdefault(joint.parent, []).append(i)

    out = ["HIERARCHY"]
    _write_joint(out, joints, 0, children, 0)
    out.append("MOTION")
    out.append(f"Frames: {motion.frame_count}")
    out.append(f"Frame Time: {_fmt(motion.frame_time)}")
    for row in motion.values:
        out.append(" ".join(_fmt(v) for v in row))
    return "\n".join(out) + "\n"


def _check_invariants(joints: list[RawJoint], motion: RawMotion) -> None:
    if not joints or joints[0].parent is not None:
        raise ChannelMismatch("first joint must be the parentless root")
    for joint in joints:
        if joint.is_end_site and joint.channels:
            raise ChannelMismatch(f"end site under joint {joint.parent} carries channels")
        if len(set(joint.channels)) != len(joint.channels):
            raise ChannelMismatch(f"joint '{joint.name}' repeats a channel")
    if motion.frame_count <= 0:
        raise EmptyMotion(f"frame count is {motion.frame_count}")
    width = total_channel_count(joints)
    if motion.values.shape != (motion.frame_count, width):
        raise ChannelMismatch(
            f"motion values shaped {motion.values.shape}, expected ({motion.frame_count}, {width})"
        )


def load_bvh(path: str | Path) -> tuple[list[RawJoint], RawMotion]:
    return parse_bvh(Path(path).read_text(encoding="utf-8"))


def save_bvh(path: str | Path, joints: list[RawJoint], motion: RawMotion) -> None:
    Path(path).write_text(write_bvh(joints, motion), encoding="utf-8")
