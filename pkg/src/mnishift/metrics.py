"""Exact risk computations and the survival/contamination decomposition.

Risk here is always the population quadratic loss against the known
spectrum, sum_j lambda_j (theta_j - theta*_j)^2, computed with compensated
summation. No Monte Carlo estimate enters any metric; sampling-based risk
checks live in the test suite as independent oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .covariance import CovarianceSpec
from .errors import (
    DecompositionViolation,
    DenseSignal,
    DimensionMismatch,
    NoisyLabels,
    ParameterOutOfRange,
)
from .estimators import Estimate, GramFactor, factorize_gram_matrix
from .signal import Signal
from .synth import Dataset


@dataclass(frozen=True)
class MetricsRecord:
    """One estimate's risk decomposition.

    cross_term is 2 (theta_reg - theta*)^T Sigma (theta_cls - theta_reg);
    risk = bias + task_shift_error + cross_term holds to floating-point
    accuracy. The two-term form without cross_term is exact only for
    isotropic spectra.
    """

    risk: float
    survival: dict[int, float] | None = None
    contamination: float | None = None
    bias: float | None = None
    task_shift_error: float | None = None
    cross_term: float | None = None
    b_empirical: dict[int, float] | None = None


def _check_dims(spec: CovarianceSpec, sig: Signal, est: Estimate) -> None:
    if sig.d != spec.d:
        raise DimensionMismatch(f"signal d={sig.d} vs spectrum d={spec.d}")
    if est.theta.size != spec.d:
        raise DimensionMismatch(f"estimate has {est.theta.size} entries, spectrum d={spec.d}")


def quadratic_risk(spec: CovarianceSpec, delta: np.ndarray) -> float:
    """sum_j lambda_j delta_j^2 by compensated summation."""
    return math.fsum(spec.lambdas * delta * delta)


def excess_risk(spec: CovarianceSpec, sig: Signal, est: Estimate) -> float:
    """Population regression risk of the estimate against the true signal."""
    _check_dims(spec, sig, est)
    return quadratic_risk(spec, est.theta - sig.theta_star)


def survival_contamination(
    spec: CovarianceSpec, sig: Signal, est: Estimate
) -> tuple[dict[int, float], float]:
    """Per-support coefficient survival ratios and off-support energy.

    survival[j] = theta_j / theta*_j for j in the support;
    contamination = sqrt(sum over off-support of lambda_j theta_j^2).
    """
    _check_dims(spec, sig, est)
    if sig.t >= spec.d:
        raise DenseSignal("survival/contamination need a proper (sparse) support")
    survival = {j: float(est.theta[j] / sig.theta_star[j]) for j in sig.support}
    mask = np.ones(spec.d, dtype=bool)
    mask[list(sig.support)] = False
    off = est.theta[mask]
    cn2 = math.fsum(spec.lambdas[mask] * off * off)
    return survival, math.sqrt(cn2)


def decompose_lemma2(
    spec: CovarianceSpec,
    sig: Signal,
    ds: Dataset,
    theta_reg: Estimate,
    theta_cls: Estimate,
) -> MetricsRecord:
    """Split the sign-label interpolator's risk into bias and task-shift error.

    bias is the risk of the regression interpolator and task_shift_error is
    the Sigma-weighted gap (theta_cls - theta_reg)^T Sigma (theta_cls -
    theta_reg). The cross term completes the exact expansion; a violation of
    risk = bias + task_shift_error + cross_term beyond 1e-6 relative
    indicates a solver problem.
    """
    if ds.label_noise > 0.0:
        raise NoisyLabels("decomposition requires a dataset drawn with zero label noise")
    _check_dims(spec, sig, theta_reg)
    _check_dims(spec, sig, theta_cls)

    risk = excess_risk(spec, sig, theta_cls)
    bias = excess_risk(spec, sig, theta_reg)
    shift = theta_cls.theta - theta_reg.theta
    tse = quadratic_risk(spec, shift)
    cross = 2.0 * math.fsum(spec.lambdas * (theta_reg.theta - sig.theta_star) * shift)

    scale = max(abs(risk), abs(bias) + abs(tse) + abs(cross), 1e-300)
    if abs(risk - (bias + tse + cross)) > 1e-6 * scale:
        raise DecompositionViolation(
            f"risk {risk!r} != bias {bias!r} + shift {tse!r} + cross {cross!r}"
        )

    survival = contamination = None
    if sig.t < spec.d:
        survival, contamination = survival_contamination(spec, sig, theta_cls)
    return MetricsRecord(
        risk=risk,
        survival=survival,
        contamination=contamination,
        bias=bias,
        task_shift_error=tse,
        cross_term=cross,
    )


def trace_inverse(factor: GramFactor) -> float:
    """tr(A^{-1}) from the Cholesky factor via n triangular solves.

    With A = L L^T, tr(A^{-1}) = ||L^{-1}||_F^2, obtained by solving
    L Y = I column by column.
    """
    n = factor.n
    Y = solve_triangular(factor.factor, np.eye(n), lower=True)
    return float(np.sum(Y * Y))


def empirical_b(
    ds: Dataset,
    spec: CovarianceSpec,
    sig: Signal,
    k_star: int,
    gram: GramFactor | None = None,
) -> dict[int, float]:
    """Plug-in survival coefficients lambda_j * tr(A_excl^{-1}) per support index.

    A_excl is the Gram of the design with the support and the first k_star
    columns removed. When the full Gram is supplied, A_excl is obtained by
    the exact rank-|excluded| downdate A - X_e X_e^T instead of a second
    full Gram pass.
    """
    if k_star < 0:
        raise ParameterOutOfRange(f"k_star must be >= 0, got {k_star}")
    if sig.d != spec.d or ds.d != spec.d:
        raise DimensionMismatch("dataset, signal, and spectrum dimensions must agree")
    excluded = sorted(set(sig.support) | set(range(k_star)))
    if len(excluded) >= spec.d:
        raise ParameterOutOfRange("excluding the support and spike leaves an empty design")

    if gram is not None:
        Xe = ds.X[:, excluded]
        A_excl = gram.A - Xe @ Xe.T
    else:
        keep = np.ones(spec.d, dtype=bool)
        keep[excluded] = False
        Xk = ds.X[:, keep]
        A_excl = Xk @ Xk.T
    factor = factorize_gram_matrix(A_excl)
    tr = trace_inverse(factor)
    return {j: float(spec.lambdas[j]) * tr for j in sig.support}


def separation_ratio(est: Estimate, sig: Signal) -> float:
    """min over support of |theta_j| divided by max off support.

    A ratio above 1 is exactly the condition under which keeping the t
    largest magnitudes recovers the support. Returns +inf when every
    off-support entry is zero.
    """
    if sig.t >= sig.d:
        raise DenseSignal("separation ratio needs a proper (sparse) support")
    cols = list(sig.support)
    lo = float(np.min(np.abs(est.theta[cols])))
    mask = np.ones(sig.d, dtype=bool)
    mask[cols] = False
    hi = float(np.max(np.abs(est.theta[mask])))
    if hi == 0.0:
        return math.inf
    return lo / hi
