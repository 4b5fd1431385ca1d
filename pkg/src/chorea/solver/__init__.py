from .collisions import CollisionReport, NearCollision, allowed_pairs, collision_monitor
from .divergence import DivergenceEvidence, Iterate, detector_label, divergence_detector, shape_distance_to_ngon
from .minimize import MinimizerRecord, Status, initial_guess, minimize, solve
from .problem import OmegaReduction, Problem, Tolerances, reduce_problem

__all__ = [
    "CollisionReport", "NearCollision", "allowed_pairs", "collision_monitor",
    "DivergenceEvidence", "Iterate", "detector_label", "divergence_detector", "shape_distance_to_ngon",
    "MinimizerRecord", "Status", "initial_guess", "minimize", "solve",
    "OmegaReduction", "Problem", "Tolerances", "reduce_problem",
]
