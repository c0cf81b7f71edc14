# Joint reward-dynamics models: coregionalized GP and probabilistic ensemble
from src.ml.base import JointModel, JointPrediction, model_inputs, model_targets
from src.ml.ensemble_model import EnsembleJointModel, fit_ensemble, gaussian_nll_and_grad, predict_ensemble
from src.ml.gp_model import GpJointModel, fit_gp, predict_gp

__all__ = [
    "JointModel", "JointPrediction", "model_inputs", "model_targets",
    "EnsembleJointModel", "fit_ensemble", "gaussian_nll_and_grad", "predict_ensemble",
    "GpJointModel", "fit_gp", "predict_gp",
]
