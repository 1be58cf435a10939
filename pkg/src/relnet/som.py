"""One-dimensional self-organizing maps with learned Gaussian tuning curves.

Each neuron ``i`` carries a preferred value ``w_i`` and a tuning variance
``xi_i**2``. A sample ``s`` elicits the activation

    a_i = exp(-|s - w_i|**2 / (2 xi_i**2)) / (sqrt(2 pi) xi_i)

and training pulls the winner's lattice neighbourhood towards the sample
while the tuning variances track the local squared error, so densely
sampled regions end up with many sharp neurons.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputDomainError, ParameterError, StructuralError

SQRT_2PI = math.sqrt(2.0 * math.pi)
WARMUP_SIZE = 100
VAR_FLOOR_FRACTION = 1e-3


@dataclass(frozen=True)
class DecaySchedule:
    """Exponential decay ``floor + (initial - floor) * exp(-k / tau)``."""

    initial: float
    floor: float
    tau: float

    def __post_init__(self):
        if not self.initial > 0:
            raise ParameterError(f"schedule initial value must be positive, got {self.initial}")
        if not self.floor >= 0:
            raise ParameterError(f"schedule floor must be nonnegative, got {self.floor}")
        if not self.tau > 0:
            raise ParameterError(f"schedule tau must be positive, got {self.tau}")

    def value(self, k):
        if k < 0:
            raise ParameterError(f"step must be nonnegative, got {k}")
        return self.floor + (self.initial - self.floor) * math.exp(-k / self.tau)

    def to_dict(self):
        return {"initial": self.initial, "floor": self.floor, "tau": self.tau}


def schedule_value(s: DecaySchedule, k: int) -> float:
    return s.value(k)


def winner(activity) -> int:
    """Index of the most active neuron; ties go to the lowest index."""
    activity = np.asarray(activity)
    if activity.size == 0:
        raise StructuralError("winner() of an empty activity vector")
    return int(np.argmax(activity))


class SelfOrganizingMap:
    """Population of tuned neurons on a fixed 1-D lattice.

    Parameters
    ----------
    preferred : array (N, d)
        Preferred values in stream units.
    tuning_var : array (N,)
        Tuning-curve variances. For ``d > 1`` these are expressed in
        per-dimension scaled units (see ``scale``).
    var_floor : float
        Lower clamp applied to ``tuning_var`` after every update.
    scale : array (d,), optional
        Per-dimension normalisation applied to differences before taking
        the Euclidean norm. Defaults to ones.
    step_count : int
        Number of ``adapt`` calls seen so far.
    """

    def __init__(self, preferred, tuning_var, var_floor, scale=None, step_count=0):
        preferred = np.array(preferred, dtype=float)
        if preferred.ndim == 1:
            preferred = preferred[:, None]
        if preferred.ndim != 2 or preferred.shape[0] == 0:
            raise StructuralError(f"preferred must be (N, d), got shape {preferred.shape}")
        tuning_var = np.array(tuning_var, dtype=float).reshape(-1)
        if tuning_var.shape[0] != preferred.shape[0]:
            raise StructuralError("tuning_var length does not match number of neurons")
        if not var_floor > 0:
            raise ParameterError(f"var_floor must be positive, got {var_floor}")
        self.preferred = preferred
        self.var_floor = float(var_floor)
        self.tuning_var = np.maximum(tuning_var, self.var_floor)
        if scale is None:
            scale = np.ones(preferred.shape[1])
        self.scale = np.array(scale, dtype=float).reshape(-1)
        if self.scale.shape[0] != preferred.shape[1] or np.any(self.scale <= 0):
            raise StructuralError("scale must hold one positive entry per input dimension")
        self.positions = np.arange(preferred.shape[0], dtype=float)
        self.step_count = int(step_count)

    @classmethod
    def from_warmup(cls, n_neurons, warmup, rng):
        """Seed a map from a warm-up batch without any prior bounds.

        Preferred values are drawn uniformly inside the bounding box of the
        batch; the initial variance is ``(range / N)**2`` and the clamp is
        ``(range * 1e-3)**2``. Multi-dimensional inputs are normalised per
        dimension by the batch extent so that one isotropic variance fits.
        """
        if n_neurons < 1:
            raise ParameterError(f"n_neurons must be positive, got {n_neurons}")
        warmup = np.asarray(warmup, dtype=float)
        if warmup.ndim == 1:
            warmup = warmup[:, None]
        if warmup.shape[0] == 0 or not np.all(np.isfinite(warmup)):
            raise InputDomainError("warm-up batch must be non-empty and finite")
        lo = warmup.min(axis=0)
        hi = warmup.max(axis=0)
        extent = hi - lo
        d = warmup.shape[1]
        if d == 1:
            scale = np.ones(1)
            span = float(extent[0]) if extent[0] > 0 else 1.0
        else:
            # degenerate dimensions keep unit scale
            scale = np.where(extent > 0, extent, 1.0)
            span = 1.0
        preferred = lo + rng.random((n_neurons, d)) * extent
        tuning_var = np.full(n_neurons, (span / n_neurons) ** 2)
        var_floor = (span * VAR_FLOOR_FRACTION) ** 2
        return cls(preferred, tuning_var, var_floor, scale=scale)

    @property
    def n_neurons(self):
        return self.preferred.shape[0]

    @property
    def input_dim(self):
        return self.preferred.shape[1]

    def _check_sample(self, sample):
        x = np.asarray(sample, dtype=float).reshape(-1)
        if x.shape[0] != self.input_dim:
            raise InputDomainError(
                f"sample has dimension {x.shape[0]}, map expects {self.input_dim}"
            )
        if not np.all(np.isfinite(x)):
            raise InputDomainError(f"non-finite sample {x}")
        return x

    def _sq_dist(self, x):
        if self.input_dim == 1:
            diff = x[0] - self.preferred[:, 0]
            return diff * diff
        diff = (x - self.preferred) / self.scale
        return np.einsum("ij,ij->i", diff, diff)

    def activate(self, sample):
        """Gaussian tuning-curve response of every neuron to ``sample``."""
        x = self._check_sample(sample)
        var = self.tuning_var
        return np.exp(-self._sq_dist(x) / (2.0 * var)) / (SQRT_2PI * np.sqrt(var))

    def interaction_kernel(self, b, sigma_k):
        if not sigma_k > 0:
            raise ParameterError(f"kernel width must be positive, got {sigma_k}")
        if not 0 <= b < self.n_neurons:
            raise StructuralError(f"neuron index {b} out of range")
        dist = self.positions - self.positions[b]
        return np.exp(-dist * dist / (2.0 * sigma_k * sigma_k))

    def adapt(self, sample, alpha_k, sigma_k):
        """One competitive/cooperative update; returns the winner index."""
        if not 0 < alpha_k <= 1:
            raise ParameterError(f"learning rate must lie in (0, 1], got {alpha_k}")
        x = self._check_sample(sample)
        b = winner(self.activate(x))
        rate = alpha_k * self.interaction_kernel(b, sigma_k)
        # both updates use the pre-update preferred values
        err_sq = self._sq_dist(x)
        self.tuning_var += rate * (err_sq - self.tuning_var)
        np.maximum(self.tuning_var, self.var_floor, out=self.tuning_var)
        self.preferred += rate[:, None] * (x - self.preferred)
        self.step_count += 1
        return b

    def bounds(self):
        """Learned extent of the input space, ``(lo, hi)`` per dimension.

        The preferred-value range is widened by two mean tuning widths
        (converted back to stream units).
        """
        margin = 2.0 * float(np.mean(np.sqrt(self.tuning_var))) * self.scale
        return self.preferred.min(axis=0) - margin, self.preferred.max(axis=0) + margin

    def quantization_error(self, samples):
        """Mean squared (scaled) distance from each sample to its winner."""
        samples = np.asarray(samples, dtype=float)
        if samples.ndim == 1:
            samples = samples[:, None]
        diff = (samples[:, None, :] - self.preferred[None, :, :]) / self.scale
        sq = np.einsum("kij,kij->ki", diff, diff)
        act = np.exp(-sq / (2.0 * self.tuning_var)) / np.sqrt(self.tuning_var)
        win = np.argmax(act, axis=1)
        return float(np.mean(sq[np.arange(len(samples)), win]))

    def copy(self):
        return SelfOrganizingMap(
            self.preferred.copy(),
            self.tuning_var.copy(),
            self.var_floor,
            scale=self.scale.copy(),
            step_count=self.step_count,
        )

    def to_dict(self):
        return {
            "preferred": self.preferred.tolist(),
            "tuning_var": self.tuning_var.tolist(),
            "var_floor": self.var_floor,
            "scale": self.scale.tolist(),
            "step_count": self.step_count,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            d["preferred"],
            d["tuning_var"],
            d["var_floor"],
            scale=d["scale"],
            step_count=d["step_count"],
        )

    def __repr__(self):
        return (
            f"SelfOrganizingMap(n_neurons={self.n_neurons}, input_dim={self.input_dim}, "
            f"step_count={self.step_count})"
        )


def activate(som: SelfOrganizingMap, sample) -> np.ndarray:
    return som.activate(sample)


def interaction_kernel(som: SelfOrganizingMap, b: int, sigma_k: float) -> np.ndarray:
    return som.interaction_kernel(b, sigma_k)


def adapt(som: SelfOrganizingMap, sample, alpha_k: float, sigma_k: float) -> SelfOrganizingMap:
    som.adapt(sample, alpha_k, sigma_k)
    return som
