"""Ground-truth regressors: sparse, sign-randomized, and dense Gaussian."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .covariance import CovarianceSpec
from .errors import (
    DimensionMismatch,
    IndexNotInSupport,
    IndexOutOfRange,
    ParameterOutOfRange,
    ZeroCoefficient,
)


class SignalKind(str, Enum):
    SPARSE_FIXED = "sparse_fixed"
    SPARSE_RADEMACHER = "sparse_rademacher"
    DENSE_GAUSSIAN = "dense_gaussian"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class Signal:
    """A ground-truth coefficient vector bound to a spectrum of dimension d.

    Sparse signals place theta[j] = coeffs[j] / sqrt(lambda_j) on the
    support and zero elsewhere, so the Sigma-weighted coordinate energy is
    coeffs[j]**2 and the total strength is sum(coeffs**2).
    """

    theta_star: np.ndarray
    support: tuple[int, ...]
    coeffs: dict[int, float]
    strength: float
    kind: SignalKind
    d: int

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta_star, dtype=np.float64)
        if theta.ndim != 1 or theta.size != self.d:
            raise DimensionMismatch(f"theta_star must have length d={self.d}")
        theta.flags.writeable = False
        object.__setattr__(self, "theta_star", theta)

    @property
    def t(self) -> int:
        """Sparsity level |support|."""
        return len(self.support)

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "support": list(self.support),
            "coeffs": {str(j): self.coeffs[j] for j in self.support},
            "strength": self.strength,
            "d": self.d,
        }


def _check_bound(spec: CovarianceSpec, sig: Signal) -> None:
    if sig.d != spec.d:
        raise DimensionMismatch(f"signal built for d={sig.d}, spectrum has d={spec.d}")


def make_sparse(spec: CovarianceSpec, support: tuple[int, ...], coeffs: tuple[float, ...]) -> Signal:
    """Sparse signal with given support indices (0-based) and coefficients."""
    if len(support) != len(coeffs):
        raise ParameterOutOfRange(
            f"support and coeffs must have equal length, got {len(support)} vs {len(coeffs)}"
        )
    if len(set(support)) != len(support):
        raise IndexOutOfRange("support indices must be distinct")
    for j in support:
        if not 0 <= j < spec.d:
            raise IndexOutOfRange(f"support index {j} outside [0, {spec.d})")
    for a in coeffs:
        if a == 0.0:
            raise ZeroCoefficient("sparse coefficients must be nonzero")

    order = np.argsort(support, kind="stable")
    support_sorted = tuple(int(support[i]) for i in order)
    coeff_map = {int(support[i]): float(coeffs[i]) for i in order}

    theta = np.zeros(spec.d)
    for j, a in coeff_map.items():
        theta[j] = a / math.sqrt(spec.lambdas[j])
    strength = math.fsum(a * a for a in coeff_map.values())
    return Signal(
        theta_star=theta,
        support=support_sorted,
        coeffs=coeff_map,
        strength=strength,
        kind=SignalKind.SPARSE_FIXED,
        d=spec.d,
    )


def make_rademacher(base: Signal, rng: np.random.Generator) -> Signal:
    """Flip each coordinate's sign independently with probability 1/2.

    Magnitudes and total strength are unchanged; flipping twice with the
    same stream restores the base signal.
    """
    signs = rng.integers(0, 2, size=base.d) * 2 - 1
    theta = signs * base.theta_star
    coeff_map = {j: float(signs[j]) * a for j, a in base.coeffs.items()}
    kind = base.kind
    if kind in (SignalKind.SPARSE_FIXED, SignalKind.SPARSE_RADEMACHER):
        kind = SignalKind.SPARSE_RADEMACHER
    return Signal(
        theta_star=theta,
        support=base.support,
        coeffs=coeff_map,
        strength=base.strength,
        kind=kind,
        d=base.d,
    )


def make_dense_gaussian(spec: CovarianceSpec, rng: np.random.Generator) -> Signal:
    """Dense random signal theta[j] ~ N(0, 1/(d*lambda_j)).

    Every Sigma-weighted coordinate carries expected energy 1/d, so the
    expected total strength is 1. The stored strength is the realized
    (random) value, which downstream consumers use directly.
    """
    d = spec.d
    theta = rng.standard_normal(d) / np.sqrt(d * spec.lambdas)
    coeff_vals = theta * np.sqrt(spec.lambdas)
    strength = math.fsum(coeff_vals * coeff_vals)
    return Signal(
        theta_star=theta,
        support=tuple(range(d)),
        coeffs={j: float(coeff_vals[j]) for j in range(d)},
        strength=strength,
        kind=SignalKind.DENSE_GAUSSIAN,
        d=d,
    )


def make_explicit(spec: CovarianceSpec, theta: np.ndarray) -> Signal:
    """Wrap an arbitrary coefficient vector (support = nonzero entries)."""
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (spec.d,):
        raise DimensionMismatch(f"theta must have shape ({spec.d},), got {theta.shape}")
    support = tuple(int(j) for j in np.flatnonzero(theta))
    coeff_map = {j: float(theta[j] * math.sqrt(spec.lambdas[j])) for j in support}
    strength = math.fsum(a * a for a in coeff_map.values())
    return Signal(
        theta_star=theta.copy(),
        support=support,
        coeffs=coeff_map,
        strength=strength,
        kind=SignalKind.EXPLICIT,
        d=spec.d,
    )


def beta(sig: Signal, j: int) -> float:
    """Share of the total signal strength carried by support index j."""
    if j not in sig.coeffs:
        raise IndexNotInSupport(f"index {j} is not in the support")
    a = sig.coeffs[j]
    denom = math.fsum(v * v for v in sig.coeffs.values())
    return a * a / denom
