from .artifact import KINDS, ModelArtifact, TrainingSet, fingerprint, resolve_hyperparams, train
from .tree import Tree, best_split, fit_tree
from .weights import balanced_weights, normalize_weights

__all__ = ["KINDS", "ModelArtifact", "TrainingSet", "Tree", "balanced_weights", "best_split",
           "fingerprint", "fit_tree", "normalize_weights", "resolve_hyperparams", "train"]
