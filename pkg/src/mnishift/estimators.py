"""Minimum-norm interpolation via Gram solves, support recovery, and postprocessing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.linalg import cho_solve, lapack

from .errors import EmptySupport, IndexOutOfRange, ParameterOutOfRange, SingularGram
from .synth import FewShotSet

# A successful factorization that needed jitter but still looks numerically
# rank-deficient is reported as singular rather than silently accepted.
_POST_JITTER_RCOND_FLOOR = 1e-10


class EstimateKind(str, Enum):
    REGRESSION_MNI = "regression_mni"
    CLASSIFICATION_MNI = "classification_mni"
    POSTPROCESSED = "postprocessed"
    RESCALED = "rescaled"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class Diagnostics:
    gram_condition_estimate: float = math.nan
    jitter_used: float = 0.0
    underdetermined: bool = False


@dataclass(frozen=True)
class Estimate:
    """A candidate coefficient vector tagged with how it was constructed."""

    theta: np.ndarray
    kind: EstimateKind
    diagnostics: Diagnostics = field(default_factory=Diagnostics)
    support: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        theta = np.asarray(self.theta, dtype=np.float64)
        theta.flags.writeable = False
        object.__setattr__(self, "theta", theta)

    def to_json(self) -> dict:
        nz = np.flatnonzero(self.theta)
        return {
            "kind": self.kind.value,
            "support": list(self.support) if self.support is not None else None,
            "nonzeros": [(int(j), float(self.theta[j])) for j in nz],
            "diagnostics": {
                "gram_condition_estimate": self.diagnostics.gram_condition_estimate,
                "jitter_used": self.diagnostics.jitter_used,
                "underdetermined": self.diagnostics.underdetermined,
            },
        }


@dataclass(frozen=True)
class GramFactor:
    """Cholesky factorization of A = X X^T (plus any diagonal jitter).

    factor @ factor.T reconstructs A + jitter * I.
    """

    A: np.ndarray
    factor: np.ndarray
    jitter: float
    condition_estimate: float

    @property
    def n(self) -> int:
        return self.A.shape[0]


def factorize_gram_matrix(A: np.ndarray) -> GramFactor:
    """Cholesky-factorize an SPD matrix with one jittered retry.

    On a failed factorization, one retry is made with jitter
    1e-10 * tr(A) / n added to the diagonal. If the retry also fails, or
    succeeds with a reciprocal condition estimate below 1e-10 (the jitter
    merely masked rank deficiency, e.g. duplicated design rows), the matrix
    is reported singular.
    """
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[0]
    anorm = float(np.linalg.norm(A, 1))

    jitter = 0.0
    try:
        L = np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        jitter = 1e-10 * float(np.trace(A)) / n
        try:
            L = np.linalg.cholesky(A + jitter * np.eye(n))
        except np.linalg.LinAlgError:
            raise SingularGram("Gram factorization failed after jitter retry") from None

    rcond, info = lapack.dpocon(L, anorm, uplo="L")
    if info != 0:
        raise SingularGram(f"condition estimation failed (info={info})")
    if jitter > 0.0 and rcond < _POST_JITTER_RCOND_FLOOR:
        raise SingularGram(
            f"Gram is numerically rank deficient (rcond={rcond:.2e} after jitter)"
        )
    cond = float("inf") if rcond == 0.0 else 1.0 / float(rcond)
    return GramFactor(A=A, factor=L, jitter=jitter, condition_estimate=cond)


def gram_factorize(X: np.ndarray) -> GramFactor:
    """Form and factorize the n x n Gram matrix X X^T of the design."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ParameterOutOfRange(f"X must be a nonempty 2-d matrix, got shape {X.shape}")
    return factorize_gram_matrix(X @ X.T)


def _is_sign_vector(labels: np.ndarray) -> bool:
    return bool(np.all(np.abs(labels) == 1.0))


def mni(
    X: np.ndarray,
    labels: np.ndarray,
    factor: GramFactor,
    kind: EstimateKind | None = None,
) -> Estimate:
    """Minimum-norm interpolator X^T (X X^T)^{-1} labels via the Cholesky factor.

    The kind defaults to classification for exactly-sign labels and
    regression otherwise.
    """
    labels = np.asarray(labels, dtype=np.float64)
    if labels.shape != (factor.n,):
        raise ParameterOutOfRange(f"labels must have shape ({factor.n},), got {labels.shape}")
    w = cho_solve((factor.factor, True), labels)
    theta = X.T @ w
    if kind is None:
        kind = EstimateKind.CLASSIFICATION_MNI if _is_sign_vector(labels) else EstimateKind.REGRESSION_MNI
    diag = Diagnostics(
        gram_condition_estimate=factor.condition_estimate,
        jitter_used=factor.jitter,
    )
    return Estimate(theta=theta, kind=kind, diagnostics=diag)


@dataclass(frozen=True)
class TopT:
    """Keep the t largest entries of |theta|; ties go to the smaller index."""

    t: int


@dataclass(frozen=True)
class Threshold:
    """Keep indices with |theta_j| >= coeff / sqrt(lambda_j)."""

    lambdas: np.ndarray
    coeff: float = 1.0


def recover_support(theta_hat: Estimate, mode: TopT | Threshold) -> tuple[int, ...]:
    """Estimate the signal support from the entry magnitudes of an estimate."""
    theta = theta_hat.theta
    d = theta.size
    mags = np.abs(theta)
    if isinstance(mode, TopT):
        if not 1 <= mode.t <= d:
            raise ParameterOutOfRange(f"t must lie in [1, {d}], got {mode.t}")
        order = np.argsort(-mags, kind="stable")
        return tuple(sorted(int(j) for j in order[: mode.t]))
    if isinstance(mode, Threshold):
        lam = np.asarray(mode.lambdas, dtype=np.float64)
        if lam.shape != (d,):
            raise IndexOutOfRange(f"threshold spectrum must have length {d}, got {lam.shape}")
        keep = np.flatnonzero(mags >= mode.coeff / np.sqrt(lam))
        return tuple(int(j) for j in keep)
    raise ParameterOutOfRange(f"unknown support recovery mode {mode!r}")


def restricted_least_squares(fs: FewShotSet, support: tuple[int, ...]) -> Estimate:
    """Least squares on the few-shot set restricted to the support columns.

    With m >= |support| and a full-column-rank restricted design this is the
    unique least-squares minimizer; otherwise the minimum-norm solution is
    returned and the estimate is flagged underdetermined.
    """
    if len(support) == 0:
        raise EmptySupport("restricted least squares needs a nonempty support")
    cols = list(support)
    Xs = fs.Xp[:, cols]
    beta, _, rank, _ = np.linalg.lstsq(Xs, fs.yp, rcond=None)
    theta = np.zeros(fs.Xp.shape[1])
    theta[cols] = beta
    diag = Diagnostics(underdetermined=bool(rank < len(cols)))
    return Estimate(theta=theta, kind=EstimateKind.POSTPROCESSED, diagnostics=diag, support=tuple(support))


def rescale_zero_shot(theta_hat: Estimate, support: tuple[int, ...], strength: float) -> Estimate:
    """Rescale the estimate on the support by sqrt(pi * strength / 2), zero elsewhere.

    Compensates the known Gaussian attenuation factor when the total signal
    strength is known; no regression data is used.
    """
    if len(support) == 0:
        raise EmptySupport("rescaling needs a nonempty support")
    if strength <= 0.0:
        raise ParameterOutOfRange(f"strength must be positive, got {strength}")
    scale = math.sqrt(math.pi * strength / 2.0)
    theta = np.zeros_like(theta_hat.theta)
    cols = list(support)
    theta[cols] = scale * theta_hat.theta[cols]
    return Estimate(
        theta=theta,
        kind=EstimateKind.RESCALED,
        diagnostics=theta_hat.diagnostics,
        support=tuple(support),
    )
