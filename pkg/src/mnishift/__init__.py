"""Classification-to-regression task shift in overparameterized linear models.

A library and CLI for simulating minimum-norm interpolation on sign labels,
its exact risk decomposition, support-recovery postprocessing with few-shot
regression data, and the corresponding asymptotic predictions.
"""

from .covariance import (
    CovarianceSpec,
    EffectiveRankReport,
    Explicit,
    Isotropic,
    PolyDecay,
    Spiked,
    build_ensemble,
    effective_ranks,
    k_star,
    leave_out_spectrum,
)
from .estimators import (
    Estimate,
    EstimateKind,
    GramFactor,
    TopT,
    Threshold,
    gram_factorize,
    mni,
    recover_support,
    rescale_zero_shot,
    restricted_least_squares,
)
from .metrics import (
    MetricsRecord,
    decompose_lemma2,
    empirical_b,
    excess_risk,
    separation_ratio,
    survival_contamination,
)
from .signal import Signal, SignalKind, beta, make_dense_gaussian, make_explicit, make_rademacher, make_sparse
from .synth import (
    Dataset,
    DependentNoise,
    FewShotSet,
    SeedRecord,
    dependent_noise,
    dump_design,
    load_design,
    sample_dataset,
    sample_fewshot,
)
from .theory import (
    LowerAnsatz,
    Regime,
    SupportPartition,
    TheoryPrediction,
    Upper,
    bias_bounds_lemma3,
    default_poly_partition,
    limiting_risk_general,
    limiting_risk_poly,
    limiting_risk_spiked,
    limiting_survival,
    taskshift_bound_theorem2,
)

__version__ = "0.1.0"
