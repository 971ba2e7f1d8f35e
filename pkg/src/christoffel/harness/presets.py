"""Named bodies understood by the command line."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..constructions.sharpness import sharpness_body_2d, sharpness_body_nd
from ..geometry.bodies import Ball, HalfBall3, LpBall, Polygon2D, body_from_json

PRESETS = ("disc", "square", "lpball:<alpha>", "halfball3", "sharp2d:<delta>,<l1>,<l2>", "sharpnd:<delta>,<v>,<d>")


def square() -> Polygon2D:
    return Polygon2D(np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]))


def parse_body(text: str):
    """``(body, suggested_point)`` from a preset name or a JSON file path.

    The suggested point is ``None`` except for the sharpness presets, which come
    with the point they were built around.
    """
    if Path(text).is_file():
        return body_from_json(Path(text).read_text()), None
    name, _, args = text.partition(":")
    vals = [float(a) for a in args.split(",")] if args else []
    if name == "disc" and not vals:
        return Ball.unit(2), None
    if name == "square" and not vals:
        return square(), None
    if name == "halfball3" and not vals:
        return HalfBall3(), None
    if name == "lpball" and len(vals) == 1:
        return LpBall(vals[0]), None
    if name == "sharp2d" and len(vals) == 3:
        return sharpness_body_2d(*vals)
    if name == "sharpnd" and len(vals) == 3:
        return sharpness_body_nd(vals[0], vals[1], int(vals[2]))
    raise ValueError(f"unknown body {text!r}; presets are {', '.join(PRESETS)} or a JSON file")
