"""Closed-form limiting risks and bound expressions for comparing against simulation.

All unspecified absolute constants in the bound expressions evaluate as 1;
consumers should track measurement/bound ratios rather than read the values
as certified inequalities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .covariance import CovarianceSpec, PolyDecay, Spiked, effective_ranks, k_star
from .errors import BoundaryRegime, ParameterOutOfRange, UnsupportedRegime


class Regime(str, Enum):
    SPIKED_CONSISTENT_IF_TUNED = "spiked_consistent_if_tuned"
    SPIKED_INCONSISTENT = "spiked_inconsistent"
    POLY_BENIGN = "poly_benign"
    POLY_NON_BENIGN = "poly_non_benign"
    GENERAL = "general"


@dataclass(frozen=True)
class TheoryPrediction:
    """A limiting-risk value (or bracket) plus per-support limiting survival."""

    limiting_risk: float | None
    regime: Regime
    per_support_limit_su: dict[int, float] | None = None
    risk_interval: tuple[float, float] | None = None


def attenuation_gain(strength: float) -> float:
    """sqrt(2 / (pi * strength)): the Gaussian sign-label attenuation factor."""
    if strength <= 0.0:
        raise ParameterOutOfRange(f"strength must be positive, got {strength}")
    return math.sqrt(2.0 / (math.pi * strength))


def limiting_survival(b_j: float, strength: float) -> float:
    """Limiting survival gain * b/(1+b); b = inf maps to the full gain."""
    if b_j < 0.0:
        raise ParameterOutOfRange(f"b must be >= 0, got {b_j}")
    ratio = 1.0 if math.isinf(b_j) else b_j / (1.0 + b_j)
    return attenuation_gain(strength) * ratio


def limiting_risk_general(
    b: dict[int, float],
    coeffs: dict[int, float],
    strength: float,
) -> float:
    """Limiting risk sum_j a_j^2 (gain * b_j/(1+b_j) - 1)^2 over the support."""
    if set(b) != set(coeffs):
        raise ParameterOutOfRange("b and coeffs must be keyed by the same support")
    terms = []
    for j, a in coeffs.items():
        su = limiting_survival(b[j], strength)
        terms.append(a * a * (su - 1.0) ** 2)
    return math.fsum(terms)


def limiting_risk_spiked(
    params: Spiked,
    coeffs: dict[int, float],
    in_spike: dict[int, bool],
    strength: float,
) -> TheoryPrediction:
    """Spiked-ensemble closed form of the limiting risk.

    q < 1-r: in-spike components survive at the attenuation gain, components
    outside the spike vanish. q > 1-r: everything vanishes and the limit is
    the total strength. The boundary q = 1-r has no closed form.
    """
    if set(in_spike) != set(coeffs):
        raise ParameterOutOfRange("in_spike flags must cover exactly the support")
    q, r = params.q, params.r
    if q == 1.0 - r:
        raise BoundaryRegime("q = 1 - r is excluded from the spiked closed forms")

    if q < 1.0 - r:
        gain = attenuation_gain(strength)
        risk = math.fsum(
            a * a * ((gain - 1.0) ** 2 if in_spike[j] else 1.0) for j, a in coeffs.items()
        )
        su = {j: (gain if in_spike[j] else 0.0) for j in coeffs}
        return TheoryPrediction(
            limiting_risk=risk,
            regime=Regime.SPIKED_CONSISTENT_IF_TUNED,
            per_support_limit_su=su,
        )

    risk = math.fsum(a * a for a in coeffs.values())
    return TheoryPrediction(
        limiting_risk=risk,
        regime=Regime.SPIKED_INCONSISTENT,
        per_support_limit_su={j: 0.0 for j in coeffs},
    )


@dataclass(frozen=True)
class SupportPartition:
    """Support split by decay band: head survives, tail vanishes, mid is unresolved."""

    head: tuple[int, ...]
    mid: tuple[int, ...]
    tail: tuple[int, ...]


def default_poly_partition(
    support: tuple[int, ...],
    n: int,
    params: PolyDecay,
    guard: float = 10.0,
) -> SupportPartition:
    """Split a support at the crossover scale n**((1 - p(1-u))/u).

    Indices a guard factor below the scale go to the head, a guard factor
    above to the tail, the rest to the unresolved mid band. Uses 1-based
    positions (j+1) to match the decay law.
    """
    p, u = params.p, params.u
    if u <= 0.0:
        raise UnsupportedRegime("the crossover scale is undefined for u = 0")
    expo = (1.0 - p * (1.0 - u)) / u
    scale = n ** expo
    head, mid, tail = [], [], []
    for j in support:
        pos = j + 1
        if pos <= scale / guard:
            head.append(j)
        elif pos >= scale * guard:
            tail.append(j)
        else:
            mid.append(j)
    return SupportPartition(head=tuple(head), mid=tuple(mid), tail=tuple(tail))


def limiting_risk_poly(
    params: PolyDecay,
    coeffs: dict[int, float],
    partition: SupportPartition | None = None,
    strength: float | None = None,
) -> TheoryPrediction:
    """Polynomial-decay limiting risk: a point value or an interval bracket.

    For v=0, u in [0,1) with p(1-u) > 1 the limit is the total strength
    (full attenuation, no partition needed). For v=0, u in (0,1) with
    p(1-u) < 1 the head/mid/tail partition yields a bracket: head terms
    carry the attenuation gain, tail terms are fully attenuated, and each
    mid term contributes its attainable range. The u=1, v=2 instance has
    unboundedly growing survival coefficients for any fixed support index,
    so it is evaluated at the full attenuation gain.
    """
    u, v, p = params.u, params.v, params.p
    if not coeffs:
        return TheoryPrediction(limiting_risk=0.0, regime=Regime.GENERAL, per_support_limit_su={})

    if v == 0.0 and 0.0 <= u < 1.0:
        total = math.fsum(a * a for a in coeffs.values())
        if p * (1.0 - u) > 1.0:
            return TheoryPrediction(
                limiting_risk=total,
                regime=Regime.POLY_NON_BENIGN,
                per_support_limit_su={j: 0.0 for j in coeffs},
            )
        if p * (1.0 - u) < 1.0 and u > 0.0:
            if partition is None or strength is None:
                raise ParameterOutOfRange(
                    "the benign bracket needs a support partition and the signal strength"
                )
            bands = set(partition.head) | set(partition.mid) | set(partition.tail)
            if bands != set(coeffs):
                raise ParameterOutOfRange("partition must cover exactly the support")
            gain = attenuation_gain(strength)
            head = math.fsum(coeffs[j] ** 2 * (gain - 1.0) ** 2 for j in partition.head)
            tail = math.fsum(coeffs[j] ** 2 for j in partition.tail)
            # Mid-band survival ratio is only known to lie in (0, 1).
            per_mid_lo = 0.0 if gain >= 1.0 else (gain - 1.0) ** 2
            per_mid_hi = max(1.0, (gain - 1.0) ** 2)
            mid_energy = math.fsum(coeffs[j] ** 2 for j in partition.mid)
            lo = head + tail + per_mid_lo * mid_energy
            hi = head + tail + per_mid_hi * mid_energy
            su = {j: gain for j in partition.head}
            su.update({j: 0.0 for j in partition.tail})
            return TheoryPrediction(
                limiting_risk=lo if lo == hi else None,
                regime=Regime.POLY_BENIGN,
                per_support_limit_su=su if not partition.mid else None,
                risk_interval=(lo, hi),
            )
        raise UnsupportedRegime(f"poly decay u={u}, v=0, p(1-u)={p * (1.0 - u)} is not covered")

    if u == 1.0 and v == 2.0:
        if strength is None:
            raise ParameterOutOfRange("the benign instance needs the signal strength")
        gain = attenuation_gain(strength)
        risk = math.fsum(a * a * (gain - 1.0) ** 2 for a in coeffs.values())
        return TheoryPrediction(
            limiting_risk=risk,
            regime=Regime.POLY_BENIGN,
            per_support_limit_su={j: gain for j in coeffs},
        )

    raise UnsupportedRegime(f"poly decay u={u}, v={v} has no closed-form limit here")


@dataclass(frozen=True)
class Upper:
    """Select the task-shift-error upper bound expression."""


@dataclass(frozen=True)
class LowerAnsatz:
    """Select the lower bound under the constant-magnitude label ansatz."""

    alpha: float
    sigma2: float


def taskshift_bound_theorem2(
    spec: CovarianceSpec,
    n: int,
    strength: float,
    side: Upper | LowerAnsatz,
    b: float = 2.0,
) -> float:
    """Task-shift-error bound expressions with all constants set to 1.

    Upper: n * (k/n + n/R_k) * strength at k = k_star.
    Lower (constant-magnitude ansatz, alpha = 1/R - 1): for k_star < n,
    alpha^2 sigma2 * (sum of the first k_star eigenvalues + (n/R_k) * tail
    sum); for k_star >= n, alpha^2 sigma2.
    """
    ks = k_star(spec, n, b)
    if isinstance(side, Upper):
        if ks is None:
            raise UnsupportedRegime("the upper bound expression needs a finite k_star")
        rk = effective_ranks(spec, ks, n, b).R_k
        return n * (ks / n + n / rk) * strength
    if isinstance(side, LowerAnsatz):
        a2s2 = side.alpha**2 * side.sigma2
        if ks is None or ks >= n:
            return a2s2
        rk = effective_ranks(spec, ks, n, b).R_k
        head = math.fsum(spec.lambdas[:ks])
        tail = math.fsum(spec.lambdas[ks:])
        return a2s2 * (head + (n / rk) * tail)
    raise ParameterOutOfRange(f"unknown bound side {side!r}")


def bias_bounds_lemma3(
    spec: CovarianceSpec,
    n: int,
    theta_norm2: float,
    bar_theta: np.ndarray,
) -> tuple[float, float]:
    """(upper, lower) bias bound expressions, constants set to 1.

    upper = ||Sigma|| * ||theta*||^2 * max(sqrt(r0/n), r0/n);
    lower = sum_j lambda_j bar_theta_j^2 / (1 + n lambda_j / tr(Sigma))^2.
    """
    bar_theta = np.asarray(bar_theta, dtype=np.float64)
    if bar_theta.shape != (spec.d,):
        raise ParameterOutOfRange(f"bar_theta must have shape ({spec.d},)")
    r0 = effective_ranks(spec, 0, n).r_k
    upper = float(spec.lambdas[0]) * theta_norm2 * max(math.sqrt(r0 / n), r0 / n)
    trace = spec.trace
    denom = (1.0 + n * spec.lambdas / trace) ** 2
    lower = math.fsum(spec.lambdas * bar_theta * bar_theta / denom)
    return upper, lower
