"""Higher-order interactions and information measures as Möbius inversions.

The main entry points are :class:`JointTable` for exact distributions,
:func:`mfi` / :func:`outeraction` for interactions, the entropy-based measures
in :mod:`mobint.info`, and :func:`estimate_mfi` for samples.
"""
from .errors import *  # noqa: F401,F403
from .estimation import (
    SampleMatrix,
    bootstrap_sign_fraction,
    discover_markov_blankets,
    estimate_mfi,
    prune_targets,
    underconditioning_bias,
)
from .info import (
    dual_mutual_information,
    dual_pointwise_mi,
    entropy,
    entropy_from_mi,
    mutual_information,
    pointwise_mi,
    total_correlation,
)
from .interactions import (
    categorical_interaction,
    categorical_sweep,
    j_bar,
    j_quantity,
    mfi,
    mfi_all,
    outeraction,
    surprisal_from_interactions,
)
from .lattice import Lattice, mobius, mobius_invert
from .table import JointTable, from_ising, normalize

__version__ = "0.1.0"
