"""casualgaze: relaxed gaze-based target selection.

Recognizes which device a user means by glancing toward it, using
context-dependent bivariate Gaussian gaze models, short-horizon gaze
prediction, and pairwise Mahalanobis voting, plus a behavior simulator,
coefficient fitting, an evaluation harness, and a live demo service.
"""

from .behavior import (
    BehaviorCoefficients,
    BivariateGaussian,
    MeanShift,
    MeanShiftLine,
    StdPlane,
    StdPlanes,
    default_coefficients,
    fit_gaussian,
    fit_mean_coeffs,
    fit_std_coeffs,
    gaussian_pdf,
    isolated_model,
    mahalanobis,
    pair_model,
)
from .geometry import AngularCoord, AngularOffset, Vec3
from .recognizer import (
    GazeSample,
    Prediction,
    PredictionWeights,
    RecognizerState,
    recognize_frame,
)
from .scene_io import Device, Scene, UserPose, load_scene, save_scene
from .scenes import BUILTIN_NAMES, builtin_scene

__version__ = "0.1.0"

__all__ = [
    "AngularCoord",
    "AngularOffset",
    "BUILTIN_NAMES",
    "BehaviorCoefficients",
    "BivariateGaussian",
    "Device",
    "GazeSample",
    "MeanShift",
    "MeanShiftLine",
    "Prediction",
    "PredictionWeights",
    "RecognizerState",
    "Scene",
    "StdPlane",
    "StdPlanes",
    "UserPose",
    "Vec3",
    "builtin_scene",
    "default_coefficients",
    "fit_gaussian",
    "fit_mean_coeffs",
    "fit_std_coeffs",
    "gaussian_pdf",
    "isolated_model",
    "load_scene",
    "mahalanobis",
    "pair_model",
    "recognize_frame",
    "save_scene",
]
