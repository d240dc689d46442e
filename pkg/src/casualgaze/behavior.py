"""Context-dependent bivariate Gaussian gaze models and their fitting.

The gaze endpoint around an intended target follows a bivariate Gaussian
over (theta, phi) offsets with zero covariance.  A nearby interfering device
shifts the mean linearly with the angular separation and compresses the
per-axis spread; spread also grows with the target's normalized size.  All
coefficients are recoverable from endpoint data by ordinary least squares.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np

from .errors import DegenerateDesign, InsufficientData
from .geometry import (
    AngularCoord,
    AngularOffset,
    Vec3,
    chord_at_reference,
    normalize_size,
    to_angular,
    wrap_degrees,
)

if TYPE_CHECKING:
    from .scene_io import Device

# Lower bound on model std, degrees.  Keeps the covariance invertible for
# degenerate fits; well below the tracker noise floor (~0.5 deg).
STD_EPSILON = 0.1

DEFAULT_GATE_HEAD = 96.0
DEFAULT_GATE_GAZE = 17.18
DEFAULT_ISOLATED_STD = 8.59  # half the 17.18 deg radius: gate sits at 2 sigma


@dataclass(frozen=True, slots=True)
class BivariateGaussian:
    """Gaussian over (theta, phi) offsets, diagonal covariance diag(std^2)."""

    mean: AngularOffset
    std_theta: float
    std_phi: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "std_theta", max(self.std_theta, STD_EPSILON))
        object.__setattr__(self, "std_phi", max(self.std_phi, STD_EPSILON))


@dataclass(frozen=True, slots=True)
class MeanShiftLine:
    """Slope/intercept of the mean shift vs. per-axis angular separation."""

    a: float
    b: float


@dataclass(frozen=True, slots=True)
class StdPlane:
    """Plane coefficients: std = a * norm_size + b * separation_chord + c."""

    a: float
    b: float
    c: float


@dataclass(frozen=True, slots=True)
class MeanShift:
    phi: MeanShiftLine
    theta: MeanShiftLine


@dataclass(frozen=True, slots=True)
class StdPlanes:
    phi: StdPlane
    theta: StdPlane


@dataclass(frozen=True, slots=True)
class BehaviorCoefficients:
    """Complete parameter set for the context-dependent gaze model.

    The shipped defaults are engineering stand-ins chosen to reproduce the
    qualitative behavior (shift away from the interferer, compression with
    proximity and small size); they are not measured ground truth.  Fit your
    own from endpoint data via the fitting toolkit.
    """

    mean_shift: MeanShift = field(
        default_factory=lambda: MeanShift(
            phi=MeanShiftLine(a=0.12, b=0.0),
            theta=MeanShiftLine(a=0.12, b=0.0),
        )
    )
    # Calibrated so the size term dominates: pair stds span roughly
    # [2, 6.5] degrees from the smallest to the largest common devices,
    # which keeps the 17.18 degree gaze gate beyond 2.7 sigma of every
    # context model while preserving a strong small/large contrast.
    std_plane: StdPlanes = field(
        default_factory=lambda: StdPlanes(
            phi=StdPlane(a=5.0, b=0.6, c=0.5),
            theta=StdPlane(a=4.2, b=0.5, c=0.6),
        )
    )
    isolated_std: float = DEFAULT_ISOLATED_STD
    gate_head: float = DEFAULT_GATE_HEAD
    gate_gaze: float = DEFAULT_GATE_GAZE
    size_norm_mode: str = "proportional"

    def __post_init__(self) -> None:
        if self.gate_head <= 0 or self.gate_gaze <= 0:
            raise ValueError("gates must be positive")
        object.__setattr__(self, "isolated_std", max(self.isolated_std, STD_EPSILON))


def default_coefficients() -> BehaviorCoefficients:
    return BehaviorCoefficients()


@dataclass(frozen=True, slots=True)
class EndpointSample:
    """One recorded casual-gaze endpoint, as stored in endpoint datasets."""

    trial_id: int
    target_id: int
    gaze: AngularCoord
    timestamp_ms: float


def pair_mean_shift(
    target: AngularCoord, disturb: AngularCoord, coeffs: BehaviorCoefficients
) -> AngularOffset:
    """Mean offset of the gaze distribution given an interfering device.

    Per axis: ``a * (target_axis - disturb_axis) + b`` with the phi
    difference wrapped, so the shift points away from the interferer for
    positive ``a``.
    """
    sep_phi = wrap_degrees(target.phi - disturb.phi)
    sep_theta = target.theta - disturb.theta
    ms = coeffs.mean_shift
    return AngularOffset(
        dphi=ms.phi.a * sep_phi + ms.phi.b,
        dtheta=ms.theta.a * sep_theta + ms.theta.b,
    )


def pair_std(
    target_size: float,
    eye_to_target: float,
    separation_phi: float,
    separation_theta: float,
    coeffs: BehaviorCoefficients,
) -> tuple[float, float]:
    """Per-axis std (phi, theta) for a target with one interferer.

    ``std = a * normalized_size + b * chord(|separation_axis|) + c`` per
    axis, clamped to at least STD_EPSILON.
    """
    ns = normalize_size(target_size, eye_to_target, coeffs.size_norm_mode)
    sp = coeffs.std_plane
    std_phi = sp.phi.a * ns + sp.phi.b * chord_at_reference(abs(separation_phi)) + sp.phi.c
    std_theta = (
        sp.theta.a * ns + sp.theta.b * chord_at_reference(abs(separation_theta)) + sp.theta.c
    )
    return max(std_phi, STD_EPSILON), max(std_theta, STD_EPSILON)


def pair_model(
    target: "Device", disturb: "Device", eye: Vec3, coeffs: BehaviorCoefficients
) -> BivariateGaussian:
    """Gaze model around *target* under the influence of *disturb*.

    The mean is an offset relative to the target's angular center as seen
    from *eye*.
    """
    t_ang = to_angular(eye, target.position)
    d_ang = to_angular(eye, disturb.position)
    mean = pair_mean_shift(t_ang, d_ang, coeffs)
    std_phi, std_theta = pair_std(
        target_size=2.0 * target.radius,
        eye_to_target=(target.position - eye).norm(),
        separation_phi=wrap_degrees(t_ang.phi - d_ang.phi),
        separation_theta=t_ang.theta - d_ang.theta,
        coeffs=coeffs,
    )
    return BivariateGaussian(mean=mean, std_theta=std_theta, std_phi=std_phi)


def isolated_model(target: "Device", coeffs: BehaviorCoefficients) -> BivariateGaussian:
    """Model for a target with no interferer: zero mean, size-independent std."""
    return BivariateGaussian(
        mean=AngularOffset(0.0, 0.0),
        std_theta=coeffs.isolated_std,
        std_phi=coeffs.isolated_std,
    )


def gaussian_pdf(x: AngularOffset, model: BivariateGaussian) -> float:
    """Bivariate normal density of an offset under the model."""
    zt = (x.dtheta - model.mean.dtheta) / model.std_theta
    zp = (x.dphi - model.mean.dphi) / model.std_phi
    norm = 2.0 * math.pi * model.std_theta * model.std_phi
    return math.exp(-0.5 * (zt * zt + zp * zp)) / norm


def gaussian_logpdf(x: AngularOffset, model: BivariateGaussian) -> float:
    """Log of ``gaussian_pdf``, stable far into the tails."""
    zt = (x.dtheta - model.mean.dtheta) / model.std_theta
    zp = (x.dphi - model.mean.dphi) / model.std_phi
    return -0.5 * (zt * zt + zp * zp) - math.log(2.0 * math.pi * model.std_theta * model.std_phi)


def mahalanobis(x: AngularOffset, model: BivariateGaussian) -> float:
    """Variance-normalized distance of an offset from the model mean."""
    zt = (x.dtheta - model.mean.dtheta) / model.std_theta
    zp = (x.dphi - model.mean.dphi) / model.std_phi
    return math.sqrt(zt * zt + zp * zp)


def fit_gaussian(samples: Sequence[AngularOffset]) -> BivariateGaussian:
    """Fit a zero-covariance Gaussian to observed offsets.

    Uses the sample mean and the unbiased per-axis std; any cross covariance
    in the data is discarded.
    """
    if len(samples) < 2:
        raise InsufficientData(f"need at least 2 samples, got {len(samples)}")
    dphi = np.array([s.dphi for s in samples], dtype=float)
    dtheta = np.array([s.dtheta for s in samples], dtype=float)
    return BivariateGaussian(
        mean=AngularOffset(dphi=float(dphi.mean()), dtheta=float(dtheta.mean())),
        std_theta=float(dtheta.std(ddof=1)),
        std_phi=float(dphi.std(ddof=1)),
    )


def fit_mean_coeffs(rows: Sequence[tuple[float, float]]) -> MeanShiftLine:
    """Least-squares line through (separation, observed mean) rows."""
    if len(rows) < 2:
        raise DegenerateDesign("need at least 2 rows to fit a line")
    x = np.array([r[0] for r in rows], dtype=float)
    y = np.array([r[1] for r in rows], dtype=float)
    if np.ptp(x) == 0.0:
        raise DegenerateDesign("all separations are equal; slope is unidentifiable")
    design = np.column_stack([x, np.ones_like(x)])
    (a, b), *_ = np.linalg.lstsq(design, y, rcond=None)
    return MeanShiftLine(a=float(a), b=float(b))


def fit_std_coeffs(rows: Sequence[tuple[float, float, float]]) -> StdPlane:
    """Least-squares plane through (norm_size, separation_chord, observed std)."""
    if len(rows) < 3:
        raise DegenerateDesign("need at least 3 rows to fit a plane")
    x1 = np.array([r[0] for r in rows], dtype=float)
    x2 = np.array([r[1] for r in rows], dtype=float)
    y = np.array([r[2] for r in rows], dtype=float)
    design = np.column_stack([x1, x2, np.ones_like(x1)])
    if np.linalg.matrix_rank(design) < 3:
        raise DegenerateDesign("design matrix is rank deficient")
    (a, b, c), *_ = np.linalg.lstsq(design, y, rcond=None)
    return StdPlane(a=float(a), b=float(b), c=float(c))
