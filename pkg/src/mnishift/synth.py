"""Gaussian design sampling, labels, few-shot sets, and the noise diagonal."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .covariance import CovarianceSpec
from .errors import (
    DegenerateLabel,
    DimensionMismatch,
    NoiseOutOfRange,
    NoisyLabels,
    ParameterOutOfRange,
)
from .signal import Signal

DESIGN_MAGIC = b"MNIX0001"


@dataclass(frozen=True)
class SeedRecord:
    """Provenance of the RNG stream a dataset was drawn from."""

    base_seed: int
    stream_id: int
    draw_index: int


@dataclass(frozen=True)
class Dataset:
    """n rows x_i ~ N(0, Sigma) with regression and sign labels.

    y_reg = X @ theta_star by construction. y_cls[i] = sgn(y_reg[i]) with
    sgn(0) = +1, flipped independently with probability label_noise.
    """

    X: np.ndarray
    y_reg: np.ndarray
    y_cls: np.ndarray
    n: int
    d: int
    label_noise: float = 0.0
    seed: SeedRecord | None = None


@dataclass(frozen=True)
class FewShotSet:
    """m regression examples y' = x'^T theta_star + eps, eps ~ N(0, sigma2)."""

    Xp: np.ndarray
    yp: np.ndarray
    m: int
    sigma2: float


@dataclass(frozen=True)
class DependentNoise:
    """Diagonal of the multiplicative label-noise view of sign labels.

    diag[i] = (y_cls[i] - y_reg[i]) / y_reg[i], so that
    y_cls = y_reg + diag * y_reg elementwise.
    """

    diag: np.ndarray


def sample_dataset(
    spec: CovarianceSpec,
    sig: Signal,
    n: int,
    rng: np.random.Generator,
    label_noise: float = 0.0,
    seed: SeedRecord | None = None,
) -> Dataset:
    """Draw a dataset of n rows under the given spectrum and signal.

    Column j of X is scaled by sqrt(lambda_j), which realizes x ~ N(0, Sigma)
    for diagonal Sigma without forming any d x d matrix. The design stream
    and the label-flip stream are split up front, so the noiseless dataset
    is a deterministic function of the same generator state regardless of
    label_noise.
    """
    if sig.d != spec.d:
        raise DimensionMismatch(f"signal d={sig.d} does not match spectrum d={spec.d}")
    if n < 1:
        raise ParameterOutOfRange(f"n must be >= 1, got {n}")
    if not 0.0 <= label_noise < 0.5:
        raise NoiseOutOfRange(f"label noise must lie in [0, 0.5), got {label_noise}")

    x_rng, flip_rng = rng.spawn(2)
    X = x_rng.standard_normal((n, spec.d))
    X *= np.sqrt(spec.lambdas)[np.newaxis, :]
    y_reg = X @ sig.theta_star
    y_cls = np.where(y_reg >= 0.0, 1.0, -1.0)
    if label_noise > 0.0:
        flips = flip_rng.random(n) < label_noise
        y_cls = np.where(flips, -y_cls, y_cls)
    X.flags.writeable = False
    y_reg.flags.writeable = False
    y_cls.flags.writeable = False
    return Dataset(X=X, y_reg=y_reg, y_cls=y_cls, n=n, d=spec.d, label_noise=label_noise, seed=seed)


def sample_fewshot(
    spec: CovarianceSpec,
    sig: Signal,
    m: int,
    sigma2: float,
    rng: np.random.Generator,
) -> FewShotSet:
    """Draw m fresh regression examples with additive N(0, sigma2) noise."""
    if sig.d != spec.d:
        raise DimensionMismatch(f"signal d={sig.d} does not match spectrum d={spec.d}")
    if m < 1:
        raise ParameterOutOfRange(f"m must be >= 1, got {m}")
    if sigma2 < 0.0:
        raise ParameterOutOfRange(f"sigma2 must be >= 0, got {sigma2}")

    Xp = rng.standard_normal((m, spec.d))
    Xp *= np.sqrt(spec.lambdas)[np.newaxis, :]
    yp = Xp @ sig.theta_star
    if sigma2 > 0.0:
        yp = yp + np.sqrt(sigma2) * rng.standard_normal(m)
    Xp.flags.writeable = False
    yp.flags.writeable = False
    return FewShotSet(Xp=Xp, yp=yp, m=m, sigma2=sigma2)


def dependent_noise(ds: Dataset) -> DependentNoise:
    """Per-row ratio turning regression labels into the sign labels.

    Only defined for noiseless datasets; with label flips the identity
    y_cls = (1 + diag) * y_reg no longer produces the stored labels.
    """
    if ds.label_noise > 0.0:
        raise NoisyLabels("dependent noise requires a dataset drawn with zero label noise")
    if np.any(np.abs(ds.y_reg) < 1e-300):
        raise DegenerateLabel("a regression label is numerically zero")
    diag = (ds.y_cls - ds.y_reg) / ds.y_reg
    return DependentNoise(diag=diag)


def dump_design(X: np.ndarray, path: str | Path) -> None:
    """Write a design matrix as magic + uint32 (n, d) + row-major float64, little-endian."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    n, d = X.shape
    with open(path, "wb") as fh:
        fh.write(DESIGN_MAGIC)
        fh.write(struct.pack("<II", n, d))
        fh.write(X.astype("<f8", copy=False).tobytes())


def load_design(path: str | Path) -> np.ndarray:
    """Read a matrix written by :func:`dump_design`."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != DESIGN_MAGIC:
            raise ParameterOutOfRange(f"bad magic {magic!r}; not a design dump")
        n, d = struct.unpack("<II", fh.read(8))
        data = np.frombuffer(fh.read(), dtype="<f8")
    if data.size != n * d:
        raise ParameterOutOfRange(f"expected {n * d} values, found {data.size}")
    return data.reshape(n, d).astype(np.float64)
