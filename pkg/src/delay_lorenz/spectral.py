"""Linear stability of the origin as a function of the delay.

Linearising any variant at the origin gives a characteristic function

    D(lam, tau) = P(lam) + Q(lam) * exp(-lam * tau)

with P a monic cubic and Q at most quadratic.  Purely imaginary roots
lam = i*w exist only where |P(iw)| = |Q(iw)|, which is a cubic in u = w**2.
Each positive root u0 gives a ladder of critical delays, and the sign of the
cubic's slope at u0 gives the crossing direction.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from .model import DelayVariant, SystemParams

TWO_PI = 2.0 * math.pi


class DegenerateCrossingError(ValueError):
    """Q vanishes at i*omega0, so the phase of a crossing is undefined."""


class NewtonConvergenceError(RuntimeError):
    def __init__(self, message: str, last: complex, residual: float):
        super().__init__(message)
        self.last = last
        self.residual = residual


def _horner(coeffs: Sequence[float], x):
    acc = 0.0 * x
    for coef in coeffs:
        acc = acc * x + coef
    return acc


@dataclass(frozen=True)
class QuasiPolynomial:
    """P(lam) + Q(lam) exp(-lam tau); coefficients highest power first."""

    p: tuple[float, float, float, float]
    q: tuple[float, float, float]

    def __post_init__(self):
        p = tuple(float(v) for v in self.p)
        q = tuple(float(v) for v in self.q)
        if len(p) != 4 or len(q) != 3:
            raise ValueError("expected 4 coefficients for P and 3 for Q")
        if p[0] != 1.0:
            raise ValueError(f"P must be monic, leading coefficient is {p[0]}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    def P(self, lam):
        return _horner(self.p, lam)

    def Q(self, lam):
        return _horner(self.q, lam)

    def dP(self, lam):
        _, p2, p1, _ = self.p
        return (3.0 * lam + 2.0 * p2) * lam + p1

    def dQ(self, lam):
        q2, q1, _ = self.q
        return 2.0 * q2 * lam + q1

    @property
    def delay_free(self) -> bool:
        return not any(self.q)


def quasi_polynomial(variant: DelayVariant | str, params: SystemParams) -> QuasiPolynomial:
    variant = DelayVariant.parse(variant)
    a, b, c, d = params.as_tuple()
    if variant is DelayVariant.A:
        # (lam + c)(lam^2 + (a - d) lam - a d) - a b (lam + c) e^{-lam tau}
        return QuasiPolynomial(
            p=(1.0, a + c - d, c * a - c * d - a * d, -a * c * d),
            q=(0.0, -a * b, -a * b * c),
        )
    if variant is DelayVariant.B:
        # (lam + c)(lam^2 - d lam - a b) + a (lam + c)(lam - d) e^{-lam tau}
        return QuasiPolynomial(
            p=(1.0, c - d, -(a * b + c * d), -a * b * c),
            q=(a, a * (c - d), -a * c * d),
        )
    # lam (lam^2 + p1 lam + p2) + c (lam^2 + p1 lam + p2) e^{-lam tau}
    p1 = a - d
    p2 = -a * (b + d)
    return QuasiPolynomial(p=(1.0, p1, p2, 0.0), q=(c, c * p1, c * p2))


@dataclass(frozen=True)
class RouthHurwitz:
    """Cubic lam^3 + a2 lam^2 + a1 lam + a0 = P + Q (the tau = 0 system)."""

    a2: float
    a1: float
    a0: float

    @property
    def margins(self) -> tuple[float, float, float]:
        return (self.a2, self.a0, self.a2 * self.a1 - self.a0)

    @property
    def stable(self) -> bool:
        return all(m > 0 for m in self.margins)


def routh_hurwitz_tau0(qp: QuasiPolynomial) -> RouthHurwitz:
    _, p2, p1, p0 = qp.p
    q2, q1, q0 = qp.q
    return RouthHurwitz(a2=p2 + q2, a1=p1 + q1, a0=p0 + q0)


@dataclass(frozen=True)
class OmegaCubic:
    """u^3 + c2 u^2 + c1 u + c0 with u = omega^2."""

    coeffs: tuple[float, float, float, float]

    def __post_init__(self):
        coeffs = tuple(float(v) for v in self.coeffs)
        if len(coeffs) != 4 or coeffs[0] != 1.0:
            raise ValueError("omega cubic must be monic with 4 coefficients")
        object.__setattr__(self, "coeffs", coeffs)

    def __call__(self, u: float) -> float:
        return _horner(self.coeffs, u)

    def derivative(self, u: float) -> float:
        _, c2, c1, _ = self.coeffs
        return (3.0 * u + 2.0 * c2) * u + c1

    def scale(self, u: float) -> float:
        """Sum of term magnitudes at u, the natural size of a rounding error."""
        _, c2, c1, c0 = self.coeffs
        au = abs(u)
        return au**3 + abs(c2) * au * au + abs(c1) * au + abs(c0)


def omega_cubic(qp: QuasiPolynomial) -> OmegaCubic:
    """|P(iw)|^2 - |Q(iw)|^2 written as a polynomial in u = w^2."""
    _, A, B, C = qp.p
    q, r, s = qp.q
    return OmegaCubic(
        (
            1.0,
            A * A - 2.0 * B - q * q,
            B * B - 2.0 * A * C + 2.0 * q * s - r * r,
            C * C - s * s,
        )
    )


def _bisect(f, lo: float, hi: float, flo: float) -> float:
    for _ in range(400):
        if hi - lo <= 1e-12 * max(abs(hi), 1e-300):
            break
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid < 0.0) == (flo < 0.0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def positive_real_roots(cubic: OmegaCubic) -> list[float]:
    """Positive real roots of the omega cubic, ascending.

    The half-line is cut at the cubic's critical points so that every piece is
    monotone; each sign change is bisected and then given one Newton step.
    A critical point where the cubic vanishes is a tangential (double) root.
    """
    _, c2, c1, c0 = cubic.coeffs
    upper = 1.0 + max(1.0, abs(c2) + abs(c1) + abs(c0))

    critical: list[float] = []
    disc = c2 * c2 - 3.0 * c1
    if disc >= 0.0:
        sq = math.sqrt(disc)
        # numerically stable pair of roots of 3u^2 + 2c2 u + c1
        big = -(c2 + math.copysign(sq, c2))
        candidates = [big / 3.0] if big != 0.0 else [0.0]
        if big != 0.0:
            candidates.append(c1 / big)
        critical = sorted(u for u in candidates if 0.0 < u < upper)

    knots = [0.0, *critical, upper]
    roots: list[float] = []
    for lo, hi in zip(knots[:-1], knots[1:]):
        flo, fhi = cubic(lo), cubic(hi)
        if flo == 0.0 and lo > 0.0:
            roots.append(lo)
            continue
        if flo == 0.0 or fhi == 0.0 or (flo < 0.0) == (fhi < 0.0):
            continue
        u = _bisect(cubic, lo, hi, flo)
        slope = cubic.derivative(u)
        if slope != 0.0:
            polished = u - cubic(u) / slope
            if lo <= polished <= hi and abs(cubic(polished)) <= abs(cubic(u)):
                u = polished
        roots.append(u)

    for u in critical:
        if abs(cubic(u)) <= 1e-12 * cubic.scale(u):
            roots.append(u)

    merged: list[float] = []
    for u in sorted(roots):
        if merged and abs(u - merged[-1]) <= 1e-9 * max(u, merged[-1]):
            continue
        merged.append(u)
    return merged


def crossing_phase(qp: QuasiPolynomial, omega0: float) -> tuple[float, float]:
    """(cos(w tau), sin(w tau)) making i*w a root.

    Real and imaginary parts of P(iw) + Q(iw)(cos - i sin) = 0 form the linear
    system

        Qr cos + Qi sin = -Pr
        Qi cos - Qr sin = -Pi

    whose determinant is -|Q(iw)|^2.
    """
    lam = 1j * omega0
    Pv, Qv = qp.P(lam), qp.Q(lam)
    det = Qv.real * Qv.real + Qv.imag * Qv.imag
    if det <= (1e-14 * (1.0 + abs(Pv))) ** 2:
        raise DegenerateCrossingError(f"Q vanishes at i*{omega0!r}; no crossing there")
    cos_wt = -(Pv.real * Qv.real + Pv.imag * Qv.imag) / det
    sin_wt = (Pv.imag * Qv.real - Pv.real * Qv.imag) / det
    return cos_wt, sin_wt


def crossing_delays(qp: QuasiPolynomial, omega0: float, k_max: int = 3) -> list[float]:
    """Critical delays tau_k = tau_0 + 2 k pi / omega0 for k = 0..k_max."""
    if omega0 <= 0:
        raise ValueError("omega0 must be positive")
    if k_max < 0:
        raise ValueError("k_max must be non-negative")
    cos_wt, sin_wt = crossing_phase(qp, omega0)
    angle = math.atan2(sin_wt, cos_wt)
    if angle <= 0.0:
        angle += TWO_PI
    tau0 = angle / omega0
    spacing = TWO_PI / omega0
    return [tau0 + k * spacing for k in range(k_max + 1)]


class Direction(str, Enum):
    TRANSVERSAL = "Transversal"  # roots move into the right half-plane
    NON_TRANSVERSAL = "NonTransversal"  # tangential root, theory silent
    REVERSED = "Reversed"  # roots move back into the left half-plane


@dataclass(frozen=True)
class Transversality:
    f_prime: float
    direction: Direction

    @property
    def sign(self) -> int:
        return {Direction.TRANSVERSAL: 1, Direction.NON_TRANSVERSAL: 0, Direction.REVERSED: -1}[
            self.direction
        ]


def transversality(cubic: OmegaCubic, u0: float) -> Transversality:
    """Slope of the omega cubic at u0.

    Re[(d lam / d tau)^-1] at the crossing equals f'(u0) divided by a positive
    quantity, so its sign is the crossing direction.
    """
    if u0 <= 0:
        raise ValueError("u0 must be positive")
    slope = cubic.derivative(u0)
    _, c2, c1, _ = cubic.coeffs
    tol = 1e-9 * (3.0 * u0 * u0 + 2.0 * abs(c2) * u0 + abs(c1))
    if slope > tol:
        direction = Direction.TRANSVERSAL
    elif slope < -tol:
        direction = Direction.REVERSED
    else:
        direction = Direction.NON_TRANSVERSAL
    return Transversality(slope, direction)


def char_residual(qp: QuasiPolynomial, lam: complex, tau: float) -> complex:
    return qp.P(lam) + qp.Q(lam) * cmath.exp(-lam * tau)


def newton_refine_root(
    qp: QuasiPolynomial, tau: float, guess: complex, max_iter: int = 100
) -> complex:
    """Newton iteration for a root of P + Q exp(-lam tau) near ``guess``."""
    lam = complex(guess)
    residual = char_residual(qp, lam, tau)
    for _ in range(max_iter + 1):
        if abs(residual) <= 1e-12 * (1.0 + abs(qp.P(lam))):
            return lam
        e = cmath.exp(-lam * tau)
        slope = qp.dP(lam) + (qp.dQ(lam) - tau * qp.Q(lam)) * e
        if slope == 0:
            break
        lam = lam - residual / slope
        residual = char_residual(qp, lam, tau)
    raise NewtonConvergenceError(
        f"Newton did not converge from {guess!r} at tau={tau!r}", lam, abs(residual)
    )


@dataclass(frozen=True)
class Crossing:
    u0: float
    omega0: float
    f_prime_u0: float
    direction: Direction
    tau_ladder: tuple[float, ...]

    @property
    def transversal(self) -> bool:
        return self.direction is Direction.TRANSVERSAL

    @property
    def spacing(self) -> float:
        return TWO_PI / self.omega0


@dataclass(frozen=True)
class Flag:
    """A numerical inconsistency worth surfacing next to the results."""

    code: str
    detail: str


@dataclass(frozen=True)
class HopfReport:
    variant: Optional[DelayVariant]
    params: Optional[SystemParams]
    qp: QuasiPolynomial
    cubic: OmegaCubic
    rh_tau0: RouthHurwitz
    crossings: tuple[Crossing, ...]
    tau0: Optional[float]
    warnings: tuple[str, ...] = field(default=())
    flags: tuple[Flag, ...] = field(default=())

    @property
    def note(self) -> str:
        if self.crossings:
            return "delay-dependent: stability can change at the critical delays"
        verdict = "stable" if self.rh_tau0.stable else "unstable"
        return f"delay-independent, governed by the tau=0 Routh-Hurwitz test ({verdict})"


def find_crossings(
    qp: QuasiPolynomial, k_max: int = 3
) -> tuple[list[Crossing], list[str]]:
    """Imaginary-axis crossings of an arbitrary cubic quasi-polynomial."""
    cubic = omega_cubic(qp)
    crossings: list[Crossing] = []
    warnings: list[str] = []
    for u0 in positive_real_roots(cubic):
        omega0 = math.sqrt(u0)
        try:
            ladder = crossing_delays(qp, omega0, k_max)
        except DegenerateCrossingError as exc:
            warnings.append(f"skipped root u0={u0:.9g}: {exc}")
            continue
        tr = transversality(cubic, u0)
        crossings.append(Crossing(u0, omega0, tr.f_prime, tr.direction, tuple(ladder)))
    return crossings, warnings


def _c_cubic_sign_flag(qp: QuasiPolynomial, cubic: OmegaCubic) -> Optional[Flag]:
    # A common hand derivation for variant C writes the linear coefficient
    # with -2*c*q0 instead of +2*c*q0.  Report what that alternative predicts.
    q, _, s = qp.q
    if q * s == 0.0:
        return None
    _, c2, c1, c0 = cubic.coeffs
    alt = OmegaCubic((1.0, c2, c1 - 4.0 * q * s, c0))
    derived = positive_real_roots(cubic)
    details = []
    for u in positive_real_roots(alt):
        if any(abs(u - v) <= 1e-9 * max(u, v) for v in derived):
            continue
        lam = 1j * math.sqrt(u)
        p_mag, q_mag = abs(qp.P(lam)), abs(qp.Q(lam))
        if abs(p_mag - q_mag) > 1e-6 * (p_mag + q_mag):
            details.append(
                f"omega={math.sqrt(u):.5g} gives |P(i omega)|={p_mag:.4g} "
                f"!= |Q(i omega)|={q_mag:.4g}"
            )
    if not details:
        return None
    return Flag(
        "c_cubic_linear_term_sign",
        "the crossing cubic needs +2*c*q0 in its linear coefficient; with -2*c*q0 "
        + "; ".join(details)
        + ", so no delay makes that frequency a root",
    )


def hopf_report(variant: DelayVariant | str, params: SystemParams, k_max: int = 3) -> HopfReport:
    variant = DelayVariant.parse(variant)
    qp = quasi_polynomial(variant, params)
    cubic = omega_cubic(qp)
    crossings, warnings = find_crossings(qp, k_max)
    tau0 = min((c.tau_ladder[0] for c in crossings), default=None)
    flags = []
    if variant is DelayVariant.C:
        flag = _c_cubic_sign_flag(qp, cubic)
        if flag is not None:
            flags.append(flag)
    return HopfReport(
        variant=variant,
        params=params,
        qp=qp,
        cubic=cubic,
        rh_tau0=routh_hurwitz_tau0(qp),
        crossings=tuple(crossings),
        tau0=tau0,
        warnings=tuple(warnings),
        flags=tuple(flags),
    )


class Stability(str, Enum):
    ASYMPTOTICALLY_STABLE = "AsymptoticallyStable"
    HOPF_CRITICAL = "HopfCritical"
    UNSTABLE = "Unstable"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class StabilityVerdict:
    kind: Stability
    margin: float  # distance to the nearest critical delay
    k: Optional[int] = None  # ladder index when HopfCritical
    crossing: Optional[int] = None  # which crossing the ladder belongs to
    note: str = ""


def classify_delay(report: HopfReport, tau: float) -> StabilityVerdict:
    if tau < 0:
        raise ValueError("tau must be non-negative")
    critical = [
        (t, ci, k) for ci, c in enumerate(report.crossings) for k, t in enumerate(c.tau_ladder)
    ]
    margin = min((abs(tau - t) for t, _, _ in critical), default=math.inf)

    if not report.rh_tau0.stable:
        return StabilityVerdict(
            Stability.INDETERMINATE, margin, note="origin is not stable at tau=0"
        )
    bad = [c for c in report.crossings if not c.transversal]
    if bad:
        return StabilityVerdict(
            Stability.INDETERMINATE,
            margin,
            note=f"{len(bad)} crossing(s) without a positive transversality value",
        )
    if report.tau0 is None:
        return StabilityVerdict(
            Stability.ASYMPTOTICALLY_STABLE, margin, note="no imaginary-axis crossing for any delay"
        )

    eps = 1e-9 * (1.0 + tau)
    for t, ci, k in sorted(critical):
        if abs(tau - t) <= eps:
            return StabilityVerdict(Stability.HOPF_CRITICAL, margin, k=k, crossing=ci)
    if tau < report.tau0:
        return StabilityVerdict(Stability.ASYMPTOTICALLY_STABLE, margin)
    return StabilityVerdict(Stability.UNSTABLE, margin)
