"""Covariance-rule Hebbian coupling between two self-organizing maps."""

from __future__ import annotations

import numpy as np

from .errors import ParameterError, StructuralError

FORWARD = "forward"
BACKWARD = "backward"


class CrossLink:
    """All-to-all weight matrix between a source map ``p`` and a target map ``q``.

    Weights and running mean activities both start at zero, so the first
    updates are driven entirely by the data.
    """

    def __init__(self, n_p, n_q, w_cross=None, mean_p=None, mean_q=None, step_count=0):
        self.w_cross = np.zeros((n_p, n_q)) if w_cross is None else np.array(w_cross, dtype=float)
        self.mean_p = np.zeros(n_p) if mean_p is None else np.array(mean_p, dtype=float)
        self.mean_q = np.zeros(n_q) if mean_q is None else np.array(mean_q, dtype=float)
        if self.w_cross.shape != (n_p, n_q):
            raise StructuralError(f"w_cross has shape {self.w_cross.shape}, expected {(n_p, n_q)}")
        if self.mean_p.shape != (n_p,) or self.mean_q.shape != (n_q,):
            raise StructuralError("mean activity vectors do not match link size")
        self.step_count = int(step_count)

    @property
    def shape(self):
        return self.w_cross.shape

    def hebbian_delta(self, act_p, act_q, eta_k, beta_k):
        """Refresh the running means and return the raw covariance update.

        The means are replaced; the weights are not touched.
        """
        act_p = np.asarray(act_p, dtype=float)
        act_q = np.asarray(act_q, dtype=float)
        n_p, n_q = self.shape
        if act_p.shape != (n_p,) or act_q.shape != (n_q,):
            raise StructuralError(
                f"activities of sizes {act_p.shape}, {act_q.shape} do not fit link {self.shape}"
            )
        if not eta_k > 0:
            raise ParameterError(f"eta must be positive, got {eta_k}")
        if not 0 < beta_k <= 1:
            raise ParameterError(f"beta must lie in (0, 1], got {beta_k}")
        # written around the new activity so that beta = 1 and act == mean
        # both reproduce act exactly
        self.mean_p = act_p + (1.0 - beta_k) * (self.mean_p - act_p)
        self.mean_q = act_q + (1.0 - beta_k) * (self.mean_q - act_q)
        return eta_k * np.outer(act_p - self.mean_p, act_q - self.mean_q)

    def update(self, act_p, act_q, eta_k, beta_k):
        """Covariance Hebbian step followed by row-sum normalisation."""
        self.w_cross += self.hebbian_delta(act_p, act_q, eta_k, beta_k)
        row_sum = np.abs(self.w_cross).sum(axis=1)
        self.w_cross /= np.maximum(row_sum, 1.0)[:, None]
        self.step_count += 1

    def propagate(self, act, direction=FORWARD):
        """Transport an activity pattern across the link.

        The linear response is rectified and rescaled so that its peak
        matches the peak of the input pattern.
        """
        act = np.asarray(act, dtype=float)
        if direction == FORWARD:
            w = self.w_cross
        elif direction == BACKWARD:
            w = self.w_cross.T
        else:
            raise ParameterError(f"unknown direction {direction!r}")
        if act.shape != (w.shape[0],):
            raise StructuralError(f"activity of size {act.shape} does not fit link {w.shape}")
        out = np.maximum(act @ w, 0.0)
        peak = out.max()
        if peak > 0:
            out *= act.max() / peak
        return out

    def copy(self):
        return CrossLink(
            *self.shape,
            w_cross=self.w_cross.copy(),
            mean_p=self.mean_p.copy(),
            mean_q=self.mean_q.copy(),
            step_count=self.step_count,
        )

    def to_dict(self):
        return {
            "w_cross": self.w_cross.tolist(),
            "mean_p": self.mean_p.tolist(),
            "mean_q": self.mean_q.tolist(),
            "step_count": self.step_count,
        }

    @classmethod
    def from_dict(cls, d):
        w = np.array(d["w_cross"], dtype=float)
        return cls(*w.shape, w_cross=w, mean_p=d["mean_p"], mean_q=d["mean_q"],
                   step_count=d["step_count"])

    def __repr__(self):
        return f"CrossLink(shape={self.shape}, step_count={self.step_count})"


def update_link(link, act_p, act_q, eta_k, beta_k):
    link.update(act_p, act_q, eta_k, beta_k)
    return link


def propagate(link, act_p, direction=FORWARD):
    return link.propagate(act_p, direction)
