"""Latent vectors, traversal schemes, and anchor-set arithmetic.

Everything here is a pure function over immutable values: identical inputs
give bitwise-identical outputs, and sampling takes its seed as an explicit
argument, so there is no hidden generator state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DegenerateGeometryError, InvalidArgumentError

# Angle below which slerp endpoints are treated as parallel (falls back to
# lerp) and, mirrored at pi, as antiparallel (rejected: the great circle
# through the endpoints is not unique).
SLERP_ANGLE_EPS = 1e-6


class LatentSpace(Enum):
    """Sampling distribution a latent vector was drawn from."""

    UNIFORM_CUBE = "uniform_cube"
    UNIT_GAUSSIAN = "unit_gaussian"


class TraversalKind(Enum):
    LINEAR = "linear"
    EXTRAPOLATE = "extrapolate"
    CIRCULAR = "circular"
    SLERP = "slerp"


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class LatentVector:
    """A point in generator input space, tagged with its sampling space.

    ``values`` is a read-only float64 vector. Components must be finite;
    traversal and arithmetic outputs may leave the sampling support (that
    is the point of extrapolation), so no range constraint is enforced.
    """

    values: np.ndarray
    space: LatentSpace

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.shape[0] < 1:
            raise InvalidArgumentError(
                f"latent vector must be a non-empty 1-D array, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise InvalidArgumentError("latent vector components must be finite")
        if not isinstance(self.space, LatentSpace):
            raise InvalidArgumentError(f"unknown latent space {self.space!r}")
        object.__setattr__(self, "values", _freeze(arr))

    @property
    def dim(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class TraversalSequence:
    """Ordered latent points produced by one traversal scheme."""

    points: tuple[LatentVector, ...]
    kind: TraversalKind
    endpoints: tuple[LatentVector, LatentVector]

    @property
    def n(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class AnchorSet:
    """Named, attribute-tagged exemplar latents sharing one attribute.

    Tags are free-form and normalised to lowercase. All members must share
    dim and space.
    """

    name: str
    attribute_tags: frozenset[str] = field(default_factory=frozenset)
    members: tuple[LatentVector, ...] = ()

    def __post_init__(self):
        if not self.name:
            raise InvalidArgumentError("anchor set name must be non-empty")
        if len(self.members) < 1:
            raise InvalidArgumentError("anchor set needs at least one member")
        object.__setattr__(self, "members", tuple(self.members))
        d, s = self.members[0].dim, self.members[0].space
        for m in self.members[1:]:
            if m.dim != d or m.space != s:
                raise InvalidArgumentError(
                    f"anchor set {self.name!r}: members must share dim and space"
                )
        object.__setattr__(
            self, "attribute_tags", frozenset(t.lower() for t in self.attribute_tags)
        )

    @property
    def dim(self) -> int:
        return self.members[0].dim

    @property
    def space(self) -> LatentSpace:
        return self.members[0].space


@dataclass(frozen=True)
class ArithmeticExpression:
    """Signed combination of anchor sets, e.g. +A -B +C."""

    terms: tuple[tuple[int, AnchorSet], ...]

    def __post_init__(self):
        if len(self.terms) < 1:
            raise InvalidArgumentError("expression needs at least one term")
        for sign, _ in self.terms:
            if sign not in (1, -1):
                raise InvalidArgumentError(f"term sign must be +1 or -1, got {sign}")
        d = self.terms[0][1].dim
        for _, s in self.terms:
            if s.dim != d:
                raise InvalidArgumentError("expression terms must share dim")


def sample_latents(
    space: LatentSpace, dim: int, count: int, seed: int
) -> list[LatentVector]:
    """Draw ``count`` latent vectors, deterministically for a fixed seed.

    UNIFORM_CUBE components are uniform on [-1, 1); UNIT_GAUSSIAN components
    are standard normal.
    """
    if dim < 1:
        raise InvalidArgumentError(f"dim must be >= 1, got {dim}")
    if count < 1:
        raise InvalidArgumentError(f"count must be >= 1, got {count}")
    try:
        rng = np.random.default_rng(seed)
    except (ValueError, TypeError) as e:
        raise InvalidArgumentError(f"bad seed {seed!r}: {e}") from e
    if space == LatentSpace.UNIFORM_CUBE:
        block = rng.uniform(-1.0, 1.0, size=(count, dim))
    elif space == LatentSpace.UNIT_GAUSSIAN:
        block = rng.standard_normal(size=(count, dim))
    else:
        raise InvalidArgumentError(f"unknown latent space {space!r}")
    return [LatentVector(block[i], space) for i in range(count)]


def _check_pair(a: LatentVector, b: LatentVector, n: int) -> None:
    if a.dim != b.dim:
        raise InvalidArgumentError(f"endpoint dims differ: {a.dim} vs {b.dim}")
    if a.space != b.space:
        # A sequence cannot share a space tag with two differently-tagged
        # endpoints, so mixed-space traversals are rejected outright.
        raise InvalidArgumentError(
            f"endpoint spaces differ: {a.space.value} vs {b.space.value}"
        )
    if n < 2:
        raise InvalidArgumentError(f"traversal needs n >= 2 points, got {n}")


def lerp(a: LatentVector, b: LatentVector, n: int) -> TraversalSequence:
    """Linear interpolation: point_i = a + t_i*(b - a), t_i = i/(n-1).

    This form keeps a degenerate segment (a == b) exact at every point,
    which the convex combination a*(1-t) + b*t does not. The first and
    last points are exact copies of the endpoints.
    """
    _check_pair(a, b, n)
    t = np.arange(n, dtype=np.float64) / (n - 1)
    delta = b.values - a.values
    pts = [a.values + ti * delta for ti in t]
    pts[0] = a.values.copy()
    pts[-1] = b.values.copy()
    return TraversalSequence(
        points=tuple(LatentVector(p, a.space) for p in pts),
        kind=TraversalKind.LINEAR,
        endpoints=(a, b),
    )


def extrapolate_two_sided(a: LatentVector, b: LatentVector, n: int) -> TraversalSequence:
    """Two-sided extrapolation along the a-b line.

    With line_i = i/(n-1) (0-based), the first half uses coefficient
    el = -line_i and the second half el = 1 + line_i; each point is
    a*el + b*(1-el). The two halves extrapolate past opposite endpoints,
    which makes the adjacent-point gap at the half boundary exactly
    2*||a-b|| while every other gap is ||a-b||/(n-1).
    """
    _check_pair(a, b, n)
    if n % 2 != 0:
        raise InvalidArgumentError(
            f"two-sided extrapolation needs an even point count, got {n}"
        )
    line = np.arange(n, dtype=np.float64) / (n - 1)
    # 1-based index i <= n//2  <=>  0-based index < n//2
    el = np.where(np.arange(n) < n // 2, -line, 1.0 + line)
    pts = [a.values * e + b.values * (1.0 - e) for e in el]
    return TraversalSequence(
        points=tuple(LatentVector(p, a.space) for p in pts),
        kind=TraversalKind.EXTRAPOLATE,
        endpoints=(a, b),
    )


def circular_interpolation(
    a: LatentVector, b: LatentVector, n: int, radius: float = 1.0
) -> TraversalSequence:
    """Semicircular traversal writing circle coordinates into components 0, 1.

    With mid = (a+b)/2 and theta_i spanning [0, pi]:

        x_i = mid[0] + radius*cos(theta_i)
        y_i = mid[1] + radius*sin(theta_i)
        point_i = a*(1 - x_i) + b*x_i,  then point_i[0] = x_i, point_i[1] = y_i

    The blend coefficient deliberately reuses the shifted circle coordinate
    x_i, and the overwrite happens after the blend; both quirks are part of
    the scheme's contract and are preserved exactly.
    """
    _check_pair(a, b, n)
    if a.dim < 2:
        raise InvalidArgumentError(
            f"circular traversal writes into components 0 and 1; need dim >= 2, got {a.dim}"
        )
    if not math.isfinite(radius):
        raise InvalidArgumentError("radius must be finite")
    mid = (a.values + b.values) / 2.0
    rx, ry = mid[0], mid[1]
    theta = (np.pi * np.arange(n, dtype=np.float64)) / (n - 1)
    pts = []
    for th in theta:
        x = rx + radius * math.cos(th)
        y = ry + radius * math.sin(th)
        p = a.values * (1.0 - x) + b.values * x
        p[0] = x
        p[1] = y
        pts.append(p)
    return TraversalSequence(
        points=tuple(LatentVector(p, a.space) for p in pts),
        kind=TraversalKind.CIRCULAR,
        endpoints=(a, b),
    )


def slerp(a: LatentVector, b: LatentVector, n: int) -> TraversalSequence:
    """Constant-angular-velocity interpolation along the great circle.

    point_i = [sin((1-t_i)*omega)*a + sin(t_i*omega)*b] / sin(omega) with
    omega the angle between a and b. Falls back to lerp when the angle is
    below SLERP_ANGLE_EPS; rejects antiparallel endpoints, whose great
    circle is not unique. Endpoints are exact copies of the inputs.
    """
    _check_pair(a, b, n)
    na = float(np.linalg.norm(a.values))
    nb = float(np.linalg.norm(b.values))
    if na == 0.0 or nb == 0.0:
        raise InvalidArgumentError("slerp endpoints must have nonzero norm")
    cos_omega = float(np.dot(a.values, b.values)) / (na * nb)
    omega = math.acos(max(-1.0, min(1.0, cos_omega)))
    if math.pi - omega < SLERP_ANGLE_EPS:
        raise DegenerateGeometryError(
            "slerp endpoints are antiparallel; the connecting great circle is not unique"
        )
    t = np.arange(n, dtype=np.float64) / (n - 1)
    if omega < SLERP_ANGLE_EPS:
        delta = b.values - a.values
        pts = [a.values + ti * delta for ti in t]
    else:
        sin_omega = math.sin(omega)
        pts = [
            (math.sin((1.0 - ti) * omega) * a.values + math.sin(ti * omega) * b.values)
            / sin_omega
            for ti in t
        ]
    pts[0] = a.values.copy()
    pts[-1] = b.values.copy()
    return TraversalSequence(
        points=tuple(LatentVector(p, a.space) for p in pts),
        kind=TraversalKind.SLERP,
        endpoints=(a, b),
    )


def average_anchors(s: AnchorSet) -> LatentVector:
    """Componentwise arithmetic mean of the set's members.

    Per-component sums are exactly rounded (math.fsum), so the mean is
    independent of member order.
    """
    cols = np.stack([m.values for m in s.members], axis=0)
    k = cols.shape[0]
    mean = np.array([math.fsum(cols[:, j]) / k for j in range(cols.shape[1])])
    return LatentVector(mean, s.space)


def evaluate_arithmetic(e: ArithmeticExpression) -> LatentVector:
    """Evaluate a signed sum of anchor-set means.

    Each component is an exactly-rounded sum of the signed means, so exact
    cancellations (e.g. +A -B +C with B = C) hold bitwise; the result keeps
    the space tag of the first term.
    """
    means = [(sign, average_anchors(s)) for sign, s in e.terms]
    dim = means[0][1].dim
    out = np.array(
        [math.fsum(sign * m.values[j] for sign, m in means) for j in range(dim)]
    )
    return LatentVector(out, means[0][1].space)


def parse_expression_terms(text: str) -> list[tuple[int, str]]:
    """Parse the ``+name -name`` expression micro-syntax into signed names.

    Terms are whitespace-separated; a leading ``+`` is optional on any term.
    """
    terms: list[tuple[int, str]] = []
    for token in text.split():
        if token.startswith("-"):
            sign, name = -1, token[1:]
        elif token.startswith("+"):
            sign, name = 1, token[1:]
        else:
            sign, name = 1, token
        if not name:
            raise InvalidArgumentError(f"empty anchor-set name in term {token!r}")
        terms.append((sign, name))
    if not terms:
        raise InvalidArgumentError("expression has no terms")
    return terms


# --- text serialization -------------------------------------------------
#
# One record per line: dim, space, then the components formatted with the
# shortest decimal representation that parses back bitwise (repr of a
# Python float).


def serialize_latent(v: LatentVector) -> str:
    comps = " ".join(repr(float(x)) for x in v.values)
    return f"{v.dim} {v.space.value} {comps}"


def parse_latent(line: str) -> LatentVector:
    tokens = line.split()
    if len(tokens) < 3:
        raise InvalidArgumentError(f"latent record too short: {line[:60]!r}")
    try:
        dim = int(tokens[0])
    except ValueError as e:
        raise InvalidArgumentError(f"bad dim field {tokens[0]!r}") from e
    try:
        space = LatentSpace(tokens[1])
    except ValueError as e:
        raise InvalidArgumentError(f"unknown space tag {tokens[1]!r}") from e
    if len(tokens) - 2 != dim:
        raise InvalidArgumentError(
            f"latent record declares dim {dim} but has {len(tokens) - 2} components"
        )
    try:
        comps = [float(t) for t in tokens[2:]]
    except ValueError as e:
        raise InvalidArgumentError(f"bad latent component: {e}") from e
    return LatentVector(np.array(comps), space)


def serialize_latents(vs: list[LatentVector]) -> str:
    return "".join(serialize_latent(v) + "\n" for v in vs)


def parse_latents(text: str) -> list[LatentVector]:
    return [parse_latent(line) for line in text.splitlines() if line.strip()]


def save_latents(vs: list[LatentVector], path) -> None:
    from .image import atomic_write_bytes  # shared atomic-write helper

    atomic_write_bytes(path, serialize_latents(vs).encode("utf-8"))


def load_latents(path) -> list[LatentVector]:
    from pathlib import Path

    from .errors import IOFailureError

    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise IOFailureError(f"cannot read latent file {p}: {e}") from e
    return parse_latents(text)
