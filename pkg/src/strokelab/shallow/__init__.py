"""Classical classifiers behind one fit/score interface, plus soft weighted voting."""
from .api import fit_classifier, load_model, predict_labels, predict_scores, save_model
from .base import ClassifierModel, model_from_dict
from .specs import ClassifierSpec, DISPLAY_NAMES, table3_specs
from .tree import DecisionTreeModel
from .voting import VotingEnsemble, fit_weighted_voting

__all__ = [
    "ClassifierModel", "ClassifierSpec", "DISPLAY_NAMES", "DecisionTreeModel", "VotingEnsemble",
    "fit_classifier", "fit_weighted_voting", "load_model", "model_from_dict", "predict_labels",
    "predict_scores", "save_model", "table3_specs",
]
