"""Sign assignments for vector series whose terms tend to zero.

Split the sequence into blocks whose terms are all shorter than
``1/(m+1)**2``, reduce each block by repeatedly replacing same-sector
pairs ``(u, v)`` with ``u - v``, and read the signs back off the tree of
differences. Each level-``m`` block then sums to less than ``6/(m+1)**2``.
"""

from .analysis import (
    ConvergenceReport,
    OracleResult,
    PartialSumTrace,
    alt_norm_trace,
    cauchy_check,
    convergence_report,
    divergence_witness_check,
    greedy_baseline,
    oracle_min_residual,
    partial_sums,
    predicted_modulus,
)
from .assignment import AssignConfig, AssignmentReport, SignAssignment, assign_signs, certify
from .blocking import Block, BlockPlan, BlockThresholds, compute_thresholds, partition_blocks, plan_blocks
from .generators import SequenceSpec, generate
from .geometry import (
    ConeCover,
    angle_between,
    build_cone_cover,
    difference_shrinks,
    region_index,
    sector_index,
    verify_cover,
)
from .reduction import BlockReduction, pair_layer, recover_signs, reduce_block, replay_signs

__version__ = "0.1.0"
