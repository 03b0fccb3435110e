"""Diagonal covariance ensembles and their effective-rank structure.

Spectra are kept as explicit eigenvalue arrays sorted non-increasing. All
indices in this package are 0-based: ``lambdas[0]`` is the largest
eigenvalue, and "the first k entries" means ``lambdas[:k]``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionOverflow, IndexOutOfRange, ParameterOutOfRange

logger = logging.getLogger(__name__)

DEFAULT_DIM_CAP = 200_000
DEFAULT_RANK_CONSTANT = 2.0


@dataclass(frozen=True)
class Spiked:
    """Two-level spectrum: s flat spike eigenvalues over a flat tail.

    With d = ceil(n**p), s = ceil(n**r) and a = n**(-q), the spike carries
    total mass a*d spread over s entries and the tail carries the rest:

        lambda_j = a*d/s          for j < s
        lambda_j = (1-a)*d/(d-s)  otherwise

    Requires p > 1, 0 <= r < 1 and 0 < q < p - r.
    """

    p: float
    q: float
    r: float


@dataclass(frozen=True)
class PolyDecay:
    """Polynomially decaying spectrum lambda_j = (j+1)**(-u) * ln(j+2)**(-v).

    (Written for 0-based j; equivalently the k-th largest eigenvalue is
    k**(-u) * ln(k+1)**(-v) for k = 1..d.) d = ceil(n**p) with p > 1.
    The instance u=1, v=2 overfits benignly; u in [0,1) with v=0 does not
    when p*(1-u) > 1.
    """

    p: float
    u: float
    v: float


@dataclass(frozen=True)
class Isotropic:
    """Flat spectrum lambda_j = scale with d = ceil(n**p)."""

    scale: float
    p: float = 1.5


@dataclass(frozen=True)
class Explicit:
    """Spectrum supplied directly; no construction parameters."""


Provenance = Spiked | PolyDecay | Isotropic | Explicit


@dataclass(frozen=True)
class CovarianceSpec:
    """A diagonal covariance: eigenvalues sorted non-increasing, all positive."""

    d: int
    lambdas: np.ndarray
    provenance: Provenance = field(default_factory=Explicit)

    def __post_init__(self) -> None:
        lam = np.asarray(self.lambdas, dtype=np.float64)
        if lam.ndim != 1 or lam.size != self.d or self.d < 1:
            raise ParameterOutOfRange(f"expected {self.d} eigenvalues, got shape {lam.shape}")
        if not np.all(lam > 0.0):
            raise ParameterOutOfRange("all eigenvalues must be strictly positive")
        if np.any(np.diff(lam) > 0.0):
            raise ParameterOutOfRange("eigenvalues must be non-increasing")
        lam.flags.writeable = False
        object.__setattr__(self, "lambdas", lam)

    @property
    def trace(self) -> float:
        return math.fsum(self.lambdas)


@dataclass(frozen=True)
class EffectiveRankReport:
    """Effective ranks at one truncation index plus the k_star scan result.

    r_k = sum(lambdas[k:]) / lambdas[k]
    R_k = sum(lambdas[k:])**2 / sum(lambdas[k:]**2)

    k_star is the smallest k with r_k >= b*n, or None if no k < d qualifies
    (reported as "infinite" in serialized form).
    """

    k: int
    r_k: float
    R_k: float
    k_star: int | None
    b: float
    n: int


def build_ensemble(
    provenance: Provenance,
    n: int,
    *,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> CovarianceSpec:
    """Construct the spectrum of a named ensemble at sample size n.

    The ambient dimension is d = ceil(n**p), capped at dim_cap. Explicit
    provenance cannot be built this way (it carries no parameters).
    """
    if n < 2:
        raise ParameterOutOfRange(f"n must be >= 2, got {n}")

    if isinstance(provenance, Explicit):
        raise ParameterOutOfRange("Explicit provenance carries no construction rule")

    d = math.ceil(n ** provenance.p)
    if d > dim_cap:
        raise DimensionOverflow(f"d = ceil(n**p) = {d} exceeds cap {dim_cap}")

    if isinstance(provenance, Spiked):
        p, q, r = provenance.p, provenance.q, provenance.r
        if p <= 1.0:
            raise ParameterOutOfRange(f"spiked requires p > 1, got {p}")
        if not 0.0 <= r < 1.0:
            raise ParameterOutOfRange(f"spiked requires 0 <= r < 1, got {r}")
        if not 0.0 < q < p - r:
            raise ParameterOutOfRange(f"spiked requires 0 < q < p - r, got q={q}, p-r={p - r}")
        s = math.ceil(n ** r)
        a = n ** (-q)
        if s >= d:
            raise ParameterOutOfRange(f"spike length s={s} must be smaller than d={d}")
        lam = np.full(d, (1.0 - a) * d / (d - s))
        lam[:s] = a * d / s
        if lam[0] < lam[-1]:
            # a*d/s < (1-a)*d/(d-s) would invert the ordering; q < p - r prevents it
            # for n >= 2 except in pathological rounding, so treat as a parameter error.
            raise ParameterOutOfRange("spike eigenvalue fell below the tail; adjust (p, q, r)")
        return CovarianceSpec(d=d, lambdas=lam, provenance=provenance)

    if isinstance(provenance, PolyDecay):
        p, u, v = provenance.p, provenance.u, provenance.v
        if p <= 1.0:
            raise ParameterOutOfRange(f"poly decay requires p > 1, got {p}")
        if u < 0.0 or v < 0.0:
            raise ParameterOutOfRange(f"poly decay requires u, v >= 0, got u={u}, v={v}")
        if v == 0.0 and 0.0 <= u < 1.0 and p * (1.0 - u) > 1.0:
            logger.warning(
                "poly decay u=%g, v=0, p*(1-u)=%g > 1: no-benign-overfitting regime",
                u,
                p * (1.0 - u),
            )
        j = np.arange(1, d + 1, dtype=np.float64)
        lam = j ** (-u) * np.log(j + 1.0) ** (-v)
        return CovarianceSpec(d=d, lambdas=lam, provenance=provenance)

    if isinstance(provenance, Isotropic):
        if provenance.scale <= 0.0:
            raise ParameterOutOfRange(f"isotropic scale must be positive, got {provenance.scale}")
        if provenance.p <= 0.0:
            raise ParameterOutOfRange(f"isotropic p must be positive, got {provenance.p}")
        lam = np.full(d, float(provenance.scale))
        return CovarianceSpec(d=d, lambdas=lam, provenance=provenance)

    raise ParameterOutOfRange(f"unknown provenance {provenance!r}")


def _tail_ranks(lambdas: np.ndarray, k: int) -> tuple[float, float]:
    """(r_k, R_k) via compensated summation of the tail."""
    tail = lambdas[k:]
    total = math.fsum(tail)
    total_sq = math.fsum(tail * tail)
    return total / lambdas[k], total * total / total_sq


def k_star(spec: CovarianceSpec, n: int, b: float = DEFAULT_RANK_CONSTANT) -> int | None:
    """Smallest k with r_k(spec) >= b*n; None when no k in [0, d) qualifies.

    Linear scan over suffix sums: r_k = suffix[k] / lambdas[k].
    """
    if b <= 1.0:
        raise ParameterOutOfRange(f"rank constant b must exceed 1, got {b}")
    if n < 1:
        raise ParameterOutOfRange(f"n must be positive, got {n}")
    lam = spec.lambdas
    suffix = np.cumsum(lam[::-1])[::-1]
    hits = np.flatnonzero(suffix >= b * n * lam)
    if hits.size == 0:
        return None
    return int(hits[0])


def effective_ranks(
    spec: CovarianceSpec,
    k: int,
    n: int,
    b: float = DEFAULT_RANK_CONSTANT,
) -> EffectiveRankReport:
    """Evaluate r_k and R_k at one index and locate k_star for (n, b)."""
    if not 0 <= k < spec.d:
        raise IndexOutOfRange(f"k must lie in [0, {spec.d}), got {k}")
    r_k, big_r_k = _tail_ranks(spec.lambdas, k)
    return EffectiveRankReport(k=k, r_k=r_k, R_k=big_r_k, k_star=k_star(spec, n, b), b=b, n=n)


def leave_out_spectrum(spec: CovarianceSpec, excluded: set[int] | frozenset[int] | tuple[int, ...]) -> CovarianceSpec:
    """Spectrum with the excluded indices removed, re-sorted non-increasing.

    The result has Explicit provenance. An empty exclusion set returns an
    identical spectrum.
    """
    idx = sorted(set(int(j) for j in excluded))
    if idx and (idx[0] < 0 or idx[-1] >= spec.d):
        raise IndexOutOfRange(f"excluded indices must lie in [0, {spec.d})")
    if not idx:
        return CovarianceSpec(d=spec.d, lambdas=spec.lambdas.copy(), provenance=Explicit())
    lam = np.delete(spec.lambdas, idx)
    lam = np.sort(lam)[::-1]
    return CovarianceSpec(d=lam.size, lambdas=lam, provenance=Explicit())


def provenance_to_json(prov: Provenance) -> dict:
    """Serializable description of an ensemble's construction parameters."""
    if isinstance(prov, Spiked):
        return {"kind": "spiked", "p": prov.p, "q": prov.q, "r": prov.r}
    if isinstance(prov, PolyDecay):
        return {"kind": "poly", "p": prov.p, "u": prov.u, "v": prov.v}
    if isinstance(prov, Isotropic):
        return {"kind": "isotropic", "scale": prov.scale, "p": prov.p}
    return {"kind": "explicit"}


def provenance_from_json(obj: dict) -> Provenance:
    """Inverse of :func:`provenance_to_json`."""
    kind = obj.get("kind")
    if kind == "spiked":
        return Spiked(p=float(obj["p"]), q=float(obj["q"]), r=float(obj["r"]))
    if kind == "poly":
        return PolyDecay(p=float(obj["p"]), u=float(obj["u"]), v=float(obj["v"]))
    if kind == "isotropic":
        return Isotropic(scale=float(obj["scale"]), p=float(obj.get("p", 1.5)))
    if kind == "explicit":
        return Explicit()
    raise ParameterOutOfRange(f"unknown ensemble kind {kind!r}")
