"""Parameters, delay variants, equilibria and vector fields of the delayed
general Lorenz system

    x' = a (y - x)
    y' = b x + d y - x z
    z' = -c z + x y

with a single delay inserted in one coupling:

    A: x' = a (y(t - tau) - x)
    B: x' = a (y - x(t - tau))
    C: z' = -c z(t - tau) + x y
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple


class DelayVariant(str, Enum):
    """Which coupling carries the delay."""

    A = "A"  # y delayed in the x equation
    B = "B"  # x delayed in the x equation
    C = "C"  # z delayed in the z equation

    @classmethod
    def parse(cls, value: "DelayVariant | str") -> "DelayVariant":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            raise ValueError(f"unknown delay variant {value!r}; expected A, B or C") from None


class State(NamedTuple):
    x: float
    y: float
    z: float


@dataclass(frozen=True)
class SystemParams:
    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"parameter {name} must be finite, got {value}")
            object.__setattr__(self, name, value)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.d)


#: Parameter sets used in the worked examples (variant, params).
PRESETS: dict[str, tuple[DelayVariant | None, SystemParams]] = {
    "paper-A": (DelayVariant.A, SystemParams(10.0, -4.0, 2.5, 2.0)),
    "paper-B": (DelayVariant.B, SystemParams(10.0, 2.0, 2.5, -4.0)),
    "paper-C": (DelayVariant.C, SystemParams(10.0, -4.0, 2.5, 2.0)),
    "fig1": (None, SystemParams(10.0, 28.0, 8.0 / 3.0, -1.0)),
}


class EquilibriumKind(str, Enum):
    ORIGIN = "origin"
    POSITIVE_WING = "positive_wing"
    NEGATIVE_WING = "negative_wing"


@dataclass(frozen=True)
class Equilibrium:
    point: State
    kind: EquilibriumKind


@dataclass(frozen=True)
class ConditionCheck:
    """One named inequality; ``margin`` is positive exactly when it holds."""

    name: str
    group: str  # "unique_origin", "side" or "routh_hurwitz"
    margin: float
    passed: bool


@dataclass(frozen=True)
class ValidityReport:
    variant: DelayVariant
    params: SystemParams
    checks: tuple[ConditionCheck, ...]
    valid: bool
    # side conditions that fail although the parameters are valid
    inconsistencies: tuple[str, ...] = field(default=())

    def group(self, name: str) -> tuple[ConditionCheck, ...]:
        return tuple(c for c in self.checks if c.group == name)

    @property
    def failed(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.checks if not c.passed)


def _check(name: str, group: str, margin: float) -> ConditionCheck:
    return ConditionCheck(name, group, float(margin), bool(margin > 0))


def validate_params(variant: DelayVariant | str, params: SystemParams) -> ValidityReport:
    """Check the parameters against the conditions of the stability analysis.

    Three groups are reported: the unique-origin conditions (a > 0, b + d < 0,
    c > 0), the per-variant side conditions of the classical analysis, and
    the full Routh-Hurwitz test of P + Q at tau = 0.  Only the first and the
    last decide ``valid``; side conditions are advisory because they are
    neither necessary nor sufficient (the A and B presets both violate theirs).
    """
    from .spectral import quasi_polynomial, routh_hurwitz_tau0

    variant = DelayVariant.parse(variant)
    a, b, c, d = params.as_tuple()

    unique = [
        _check("a>0", "unique_origin", a),
        _check("b+d<0", "unique_origin", -(b + d)),
        _check("c>0", "unique_origin", c),
    ]
    side = [_check("a+c>d", "side", a + c - d)]
    if variant is DelayVariant.A:
        side.append(_check("|d|>|b|", "side", abs(d) - abs(b)))
    elif variant is DelayVariant.B:
        side.append(_check("|d|<|b|", "side", abs(b) - abs(d)))

    rh = routh_hurwitz_tau0(quasi_polynomial(variant, params))
    hurwitz = [
        _check("A2>0", "routh_hurwitz", rh.a2),
        _check("A0>0", "routh_hurwitz", rh.a0),
        _check("A2*A1-A0>0", "routh_hurwitz", rh.a2 * rh.a1 - rh.a0),
    ]

    valid = all(ch.passed for ch in unique) and rh.stable
    inconsistencies = tuple(ch.name for ch in side if valid and not ch.passed)
    return ValidityReport(
        variant=variant,
        params=params,
        checks=tuple(unique + side + hurwitz),
        valid=valid,
        inconsistencies=inconsistencies,
    )


def equilibria(params: SystemParams) -> list[Equilibrium]:
    """Equilibria shared by all three variants (the delay does not move them)."""
    a, b, c, d = params.as_tuple()
    found = [Equilibrium(State(0.0, 0.0, 0.0), EquilibriumKind.ORIGIN)]
    product = (b + d) * c
    if product > 0:
        s = math.sqrt(product)
        found.append(Equilibrium(State(s, s, b + d), EquilibriumKind.POSITIVE_WING))
        found.append(Equilibrium(State(-s, -s, b + d), EquilibriumKind.NEGATIVE_WING))
    return found


def rhs(variant: DelayVariant | str, current: State, delayed: State, params: SystemParams) -> State:
    """Time derivative of the delayed system.

    Only the single delayed coupling of ``variant`` reads from ``delayed``.
    """
    variant = DelayVariant.parse(variant)
    a, b, c, d = params.as_tuple()
    x, y, z = current
    dy = b * x + d * y - x * z
    if variant is DelayVariant.A:
        return State(a * (delayed.y - x), dy, -c * z + x * y)
    if variant is DelayVariant.B:
        return State(a * (y - delayed.x), dy, -c * z + x * y)
    return State(a * (y - x), dy, -c * delayed.z + x * y)


def unified_params(alpha: float) -> SystemParams:
    """Map the one-parameter unified chaotic system onto (a, b, c, d).

    alpha in [0, 0.8) is Lorenz-like, 0.8 is Lu-like, (0.8, 1] is Chen-like.
    """
    alpha = float(alpha)
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    return SystemParams(
        a=25.0 * alpha + 10.0,
        b=28.0 - 35.0 * alpha,
        c=(8.0 + alpha) / 3.0,
        d=29.0 * alpha - 1.0,
    )
