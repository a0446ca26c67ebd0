"""Topology toolkit for 2D likelihood grids.

Persistence diagrams of threshold filtrations, exact diagram matching,
differentiable topological consistency and noise-removal losses,
topology-aware segmentation metrics, and a deterministic desk-scale
teacher-student simulator.
"""

from .diagram import DEFAULT_PHI, DecomposedDiagram, decompose, persistence_of, total_persistence
from .grid import (
    SUBLEVEL,
    SUPERLEVEL,
    ComponentLabeling,
    GridFormatError,
    as_likelihood,
    as_mask,
    label_components,
    load_grid,
    load_mask_pgm,
    save_grid_csv,
    save_grid_pgm,
    save_mask_pgm,
    threshold,
)
from .losses import (
    NOISE_DIAGONAL,
    NOISE_SQUARED,
    TopoLossReport,
    cross_entropy_loss,
    dice_loss,
    finite_difference_check,
    supervised_loss,
    topo_consistency_gradient,
    topo_consistency_loss,
    topo_loss_and_gradient,
)
from .matching import DIAGONAL, DiagramMatching, match_diagrams
from .metrics import MetricReport, betti_error, betti_matching_error, compute_metrics, variation_of_information
from .persistence import (
    PersistenceDiagram,
    PersistentDot,
    betti_curve,
    compute_diagram,
    load_diagram_csv,
    oracle_diagram,
    save_diagram_csv,
)
from .trainer import (
    LabeledSupervision,
    StepRecord,
    TrainConfig,
    TrainTrace,
    ema_update,
    likelihood_to_logits,
    ramp_up_weight,
    run_simulation,
    write_trace_csv,
)

__all__ = [
    "DEFAULT_PHI", "DIAGONAL", "NOISE_DIAGONAL", "NOISE_SQUARED", "SUBLEVEL", "SUPERLEVEL",
    "ComponentLabeling", "DecomposedDiagram", "DiagramMatching", "GridFormatError",
    "LabeledSupervision", "MetricReport", "PersistenceDiagram", "PersistentDot",
    "StepRecord", "TopoLossReport", "TrainConfig", "TrainTrace",
    "as_likelihood", "as_mask", "betti_curve", "betti_error", "betti_matching_error",
    "compute_diagram", "compute_metrics", "cross_entropy_loss", "decompose", "dice_loss",
    "ema_update", "finite_difference_check", "label_components", "likelihood_to_logits",
    "load_diagram_csv", "load_grid", "load_mask_pgm", "match_diagrams", "oracle_diagram",
    "persistence_of", "ramp_up_weight", "run_simulation", "save_diagram_csv",
    "save_grid_csv", "save_grid_pgm", "save_mask_pgm", "supervised_loss", "threshold",
    "topo_consistency_gradient", "topo_consistency_loss", "topo_loss_and_gradient",
    "total_persistence", "variation_of_information", "write_trace_csv",
]
