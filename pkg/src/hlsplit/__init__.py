"""Exact construction of the canonical good splittings of a hard-Lefschetz pair."""
from .exactla import Mat, Subspace, rat, rat_str
from .filt import FilteredSpace, GradedModel, dual, graded_model, validate
from .hlpair import HLPair, HLProfile, check_hl, dual_pair, make_pair, primitives, random_hl, tensor
from .kunneth import elliptic_curve, product_pair, proj_space, snzdiff
from .split import (
    METHODS,
    Splitting,
    all_splittings,
    e_good_exists,
    e_hat,
    e_tilde,
    is_e_good,
    omega1,
    omega2,
    phi1,
    phi2,
    phi3,
)

__version__ = "0.1.0"
