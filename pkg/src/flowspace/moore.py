"""Exact piecewise-linear Moore paths and reparametrizations of [0, 1].

A path is a duration and a list of breakpoints ``(t, y)`` with rational
coordinates, interpolated linearly. Collinear interior breakpoints are
dropped after every operation, so two paths are equal as functions exactly
when their breakpoint lists are equal.
"""

from __future__ import annotations

import re
from bisect import bisect_right
from fractions import Fraction
from typing import Iterable, Sequence

Point = tuple[Fraction, Fraction]


class MooreError(ValueError):
    pass


class EndpointsMismatch(MooreError):
    pass


class NotAReparametrization(MooreError):
    pass


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def _normalize(points: Iterable[Sequence]) -> tuple[Point, ...]:
    pts: list[Point] = []
    for t, y in points:
        t, y = _frac(t), _frac(y)
        if pts and pts[-1][0] == t:
            if pts[-1][1] != y:
                raise MooreError(f"two values at time {t}")
            continue
        pts.append((t, y))
    out: list[Point] = []
    for p in pts:
        while len(out) >= 2:
            (t0, y0), (t1, y1) = out[-2], out[-1]
            if (y1 - y0) * (p[0] - t0) == (p[1] - y0) * (t1 - t0):
                out.pop()
            else:
                break
        out.append(p)
    return tuple(out)


def _interpolate(points: tuple[Point, ...], times: list[Fraction], t: Fraction) -> Fraction:
    if t < times[0] or t > times[-1]:
        raise MooreError(f"time {t} outside [{times[0]}, {times[-1]}]")
    k = bisect_right(times, t) - 1
    if k >= len(points) - 1:
        return points[-1][1]
    (t0, y0), (t1, y1) = points[k], points[k + 1]
    return y0 + (y1 - y0) * (t - t0) / (t1 - t0)


class PLPath:
    """A piecewise-linear map from ``[0, duration]`` to the rationals."""

    __slots__ = ("duration", "points", "_times")

    def __init__(self, duration, points: Iterable[Sequence]):
        pts = _normalize(points)
        dur = _frac(duration)
        if dur <= 0:
            raise MooreError("duration must be positive")
        if len(pts) < 2:
            raise MooreError("a path needs breakpoints at both ends")
        if pts[0][0] != 0 or pts[-1][0] != dur:
            raise MooreError(f"breakpoints must run from 0 to {dur}")
        if any(a[0] >= b[0] for a, b in zip(pts, pts[1:])):
            raise MooreError("breakpoint times must increase strictly")
        object.__setattr__(self, "duration", dur)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "_times", [t for t, _ in pts])

    def __setattr__(self, name, value):
        raise AttributeError("PLPath is immutable")

    @classmethod
    def constant(cls, value, duration=1) -> "PLPath":
        return cls(duration, [(0, value), (duration, value)])

    @classmethod
    def linear(cls, start, end, duration=1) -> "PLPath":
        return cls(duration, [(0, start), (duration, end)])

    def __call__(self, t) -> Fraction:
        return _interpolate(self.points, self._times, _frac(t))

    @property
    def start(self) -> Fraction:
        return self.points[0][1]

    @property
    def end(self) -> Fraction:
        return self.points[-1][1]

    def __eq__(self, other):
        if not isinstance(other, PLPath):
            return NotImplemented
        return self.duration == other.duration and self.points == other.points

    def __hash__(self):
        return hash((self.duration, self.points))

    def __repr__(self):
        return f"PLPath({format_path(self)!r})"


class PLReparam:
    """A strictly increasing piecewise-linear bijection of [0, 1]."""

    __slots__ = ("points", "_times")

    def __init__(self, points: Iterable[Sequence]):
        pts = _normalize(points)
        if len(pts) < 2 or pts[0] != (0, 0) or pts[-1] != (1, 1):
            raise NotAReparametrization("a reparametrization must fix 0 and 1")
        for a, b in zip(pts, pts[1:]):
            if a[0] >= b[0] or a[1] >= b[1]:
                raise NotAReparametrization(f"not strictly increasing between {a} and {b}")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "_times", [t for t, _ in pts])

    def __setattr__(self, name, value):
        raise AttributeError("PLReparam is immutable")

    @classmethod
    def identity(cls) -> "PLReparam":
        return cls([(0, 0), (1, 1)])

    def __call__(self, t) -> Fraction:
        return _interpolate(self.points, self._times, _frac(t))

    def __eq__(self, other):
        if not isinstance(other, PLReparam):
            return NotImplemented
        return self.points == other.points

    def __hash__(self):
        return hash(self.points)

    def __repr__(self):
        return f"PLReparam({_format_points(self.points)!r})"


def _merged_times(*lists: Iterable[Fraction]) -> list[Fraction]:
    return sorted(set().union(*map(set, lists)))


def moore_compose(g1: PLPath, g2: PLPath) -> PLPath:
    if g1.end != g2.start:
        raise EndpointsMismatch(f"{g1.end} != {g2.start}")
    shift = g1.duration
    return PLPath(shift + g2.duration, list(g1.points) + [(t + shift, y) for t, y in g2.points[1:]])


def rescale(g: PLPath) -> PLPath:
    d = g.duration
    return PLPath(1, [(t / d, y) for t, y in g.points])


def normalized_compose(g1: PLPath, g2: PLPath) -> PLPath:
    for g in (g1, g2):
        if g.duration != 1:
            raise MooreError("normalized composition takes paths on [0, 1]")
    return rescale(moore_compose(g1, g2))


def act(g: PLPath, phi: PLReparam) -> PLPath:
    """The path ``g . phi``: first reparametrize, then follow ``g``."""
    if g.duration != 1:
        raise MooreError("the reparametrization group acts on paths over [0, 1]")
    inverse = invert_reparam(phi)
    times = _merged_times(phi._times, (inverse(t) for t in g._times))
    return PLPath(1, [(t, g(phi(t))) for t in times])


def compose_reparam(phi: PLReparam, psi: PLReparam) -> PLReparam:
    """The composite ``phi . psi``: apply ``psi`` first."""
    inverse = invert_reparam(psi)
    times = _merged_times(psi._times, (inverse(t) for t in phi._times))
    return PLReparam([(t, phi(psi(t))) for t in times])


def invert_reparam(phi: PLReparam) -> PLReparam:
    return PLReparam([(y, t) for t, y in phi.points])


def blend(phi: PLReparam, psi: PLReparam, s) -> PLReparam:
    s = _frac(s)
    if not 0 <= s <= 1:
        raise MooreError("blend parameter must lie in [0, 1]")
    times = _merged_times(phi._times, psi._times)
    return PLReparam([(t, (1 - s) * phi(t) + s * psi(t)) for t in times])


ASSOCIATOR = PLReparam([(0, 0), (Fraction(1, 4), Fraction(1, 2)), (Fraction(1, 2), Fraction(3, 4)), (1, 1)])


def associator(a: PLPath, b: PLPath, c: PLPath) -> PLReparam:
    """The reparametrization taking the right-nested composite to the left-nested one.

    ``normalized_compose(normalized_compose(a, b), c)`` equals
    ``act(normalized_compose(a, normalized_compose(b, c)), associator(a, b, c))``.
    """
    left = normalized_compose(normalized_compose(a, b), c)
    right = normalized_compose(a, normalized_compose(b, c))
    if act(right, ASSOCIATOR) != left:
        raise MooreError("associator check failed")
    return ASSOCIATOR


def sample_times(*items) -> list[Fraction]:
    """Breakpoint times of the given paths or reparametrizations, merged."""
    return _merged_times(*(x._times for x in items))


_RAT = r"-?\d+(?:/\d+)?"
_LITERAL = re.compile(rf"^\s*dur\s*=\s*({_RAT})\s*;\s*pts\s*=\s*(.*?)\s*$")
_POINT = re.compile(rf"\(\s*({_RAT})\s*,\s*({_RAT})\s*\)")


def parse_path(text: str) -> PLPath:
    m = _LITERAL.match(text)
    if not m:
        raise MooreError(f"not a path literal: {text!r}")
    body = m.group(2)
    points = _POINT.findall(body)
    if not points or _POINT.sub("", body).replace(",", "").strip():
        raise MooreError(f"malformed breakpoint list: {body!r}")
    return PLPath(Fraction(m.group(1)), [(Fraction(t), Fraction(y)) for t, y in points])


def _format_points(points) -> str:
    return ",".join(f"({t},{y})" for t, y in points)


def format_path(g: PLPath) -> str:
    return f"dur={g.duration}; pts={_format_points(g.points)}"


def parse_reparam(text: str) -> PLReparam:
    return PLReparam(parse_path(f"dur=1; pts={text}").points)


def format_reparam(phi: PLReparam) -> str:
    return _format_points(phi.points)
