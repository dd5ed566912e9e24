"""Exception hierarchy shared by the whole package.

Everything raised on purpose derives from RuledSimError so the CLI can map
library failures to its exit-code contract in one place.
"""

from __future__ import annotations


class RuledSimError(Exception):
    """Base class for all errors raised by ruledsim."""


class ParseError(RuledSimError):
    """Expression or surface-file syntax error.

    Carries the byte offset into the parsed text (and optionally a line
    number when the text came from a sectioned file).
    """

    def __init__(self, message: str, offset: int, line: int | None = None):
        self.offset = offset
        self.line = line
        where = f"offset {offset}" if line is None else f"line {line}, offset {offset}"
        super().__init__(f"{message} ({where})")


class DomainEvalError(RuledSimError):
    """An expression hit a domain fault (log of nonpositive, sqrt of
    negative, division by zero, overflow) during evaluation."""

    def __init__(self, message: str, u: float | None = None):
        self.u = u
        if u is not None:
            message = f"{message} at u={u!r}"
        super().__init__(message)


class RegularityError(RuledSimError):
    """A curve has a (near-)zero-speed point where a regular one is required."""

    def __init__(self, message: str, u: float):
        self.u = u
        super().__init__(f"{message} at u={u!r}")


class CylindricalSurfaceError(RuledSimError):
    """Operation undefined for cylindrical surfaces (constant director)."""


class SingularPointError(RuledSimError):
    """Surface normal undefined at a singular surface point."""


class FrameGapError(RuledSimError):
    """The moving frame is undefined on part of the domain (k1 below threshold)."""

    def __init__(self, message: str, intervals=()):
        self.intervals = tuple(intervals)
        if self.intervals:
            spans = ", ".join(f"[{a:.6g}, {b:.6g}]" for a, b in self.intervals)
            message = f"{message}: {spans}"
        super().__init__(message)


class OdeInapplicableError(RuledSimError):
    """The third-order ruling equation divides by the structure function and
    cannot be evaluated where |f| is below threshold."""


class OverlapError(RuledSimError):
    """Two surfaces or curves have no usable common span of the matching
    parameter."""


class MixedKindError(RuledSimError):
    """A pairwise check received incompatible surface kinds
    (e.g. cylindrical vs non-cylindrical)."""


class InapplicableError(RuledSimError):
    """A similarity test cannot run on the given input (e.g. a straight
    segment whose tangent image stalls)."""

    def __init__(self, message: str, interval=None):
        self.interval = interval
        if interval is not None:
            message = f"{message} on [{interval[0]:.6g}, {interval[1]:.6g}]"
        super().__init__(message)


class SynthesisError(RuledSimError):
    """Invalid synthesis input (e.g. nonpositive scale profile)."""


class ConsistencyError(RuledSimError):
    """Two redundant computation routes disagreed beyond tolerance."""
