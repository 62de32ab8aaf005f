"""Domain discrepancy estimation for unsupervised domain adaptation."""
from .core import (
    HINGE,
    LOGISTIC,
    ZERO_ONE,
    BasisSpec,
    Hypothesis,
    HypothesisClassSpec,
    LabeledDataset,
    Loss,
    UnlabeledDataset,
    empirical_risk,
    negate,
)
from .learner import TrainConfig, WeightedSample, train
from .disc import (
    DiscrepancyReport,
    build_xdisc_sdp,
    default_class,
    estimate_dh,
    estimate_sdisc,
    fixed_ref_disc,
    rank_sources,
    sdisc_bruteforce,
    xdisc_bruteforce,
)
from .theory import (
    BoundReport,
    ComplexityInput,
    sdisc_deviation_bound,
    target_regret_bound,
)
from .formats import read_instance, read_results, write_instance, write_results

__version__ = "0.1.0"
