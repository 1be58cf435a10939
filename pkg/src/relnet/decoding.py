"""Recover stream values from population activity."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NoSignalError, ParameterError, StructuralError
from .som import SQRT_2PI, SelfOrganizingMap, winner

GOLDEN = 0.5 * (3.0 - math.sqrt(5.0))
TOP_FRACTION = 0.1


class ConvergenceWarning(RuntimeWarning):
    pass


@dataclass
class BrentInfo:
    fx: float
    iterations: int
    converged: bool


@dataclass
class DecodeResult:
    value: np.ndarray
    confidence: float

    def __float__(self):
        if self.value.shape != (1,):
            raise TypeError("only scalar decode results convert to float")
        return float(self.value[0])


def brent_minimize(f, lo, hi, tol=1e-8, x0=None, max_iter=100, full_output=False):
    """Minimise a scalar function on ``[lo, hi]`` with Brent's method.

    Golden-section steps guarantee progress; parabolic interpolation
    through the three best points takes over once the function looks
    smooth. Stops when the bracket shrinks below ``tol`` around the best
    point or after ``max_iter`` iterations, in which case the best point so
    far is returned and a :class:`ConvergenceWarning` is emitted.

    If several probes tie at the lowest value (a minimum flatter than the
    floating-point resolution of ``f``) the centre of that plateau is
    returned.

    Parameters
    ----------
    f : callable
        Scalar objective.
    lo, hi : float
        Search interval, ``lo < hi``.
    tol : float
        Absolute tolerance on the abscissa.
    x0 : float, optional
        Starting point; defaults to the first golden-section point.
    full_output : bool
        Also return a :class:`BrentInfo`.
    """
    if not lo < hi:
        raise ParameterError(f"need lo < hi, got [{lo}, {hi}]")
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    a, b = float(lo), float(hi)
    if x0 is None:
        x0 = a + GOLDEN * (b - a)
    x = w = v = min(max(float(x0), a), b)
    fx = fw = fv = f(x)
    probes = [(x, fx)]
    d = e = 0.0
    tol1 = tol / 3.0
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        mid = 0.5 * (a + b)
        tol2 = 2.0 * tol1
        if abs(x - mid) <= tol2 - 0.5 * (b - a):
            converged = True
            break
        use_golden = True
        if abs(e) > tol1:
            # parabola through x, w, v
            r = (x - w) * (fx - fv)
            q = (x - v) * (fx - fw)
            p = (x - v) * q - (x - w) * r
            q = 2.0 * (q - r)
            if q > 0.0:
                p = -p
            q = abs(q)
            e_prev = e
            e = d
            if abs(p) < abs(0.5 * q * e_prev) and q * (a - x) < p < q * (b - x):
                d = p / q
                u = x + d
                if u - a < tol2 or b - u < tol2:
                    d = tol1 if mid >= x else -tol1
                use_golden = False
        if use_golden:
            e = (a - x) if x >= mid else (b - x)
            d = GOLDEN * e
        u = x + (d if abs(d) >= tol1 else math.copysign(tol1, d))
        fu = f(u)
        probes.append((u, fu))
        if fu <= fx:
            if u >= x:
                a = x
            else:
                b = x
            v, fv = w, fw
            w, fw = x, fx
            x, fx = u, fu
        else:
            if u < x:
                a = u
            else:
                b = u
            if fu <= fw or w == x:
                v, fv = w, fw
                w, fw = u, fu
            elif fu <= fv or v == x or v == w:
                v, fv = u, fu
    if not converged:
        it = max_iter
        warnings.warn(f"brent_minimize did not converge in {max_iter} iterations",
                      ConvergenceWarning, stacklevel=2)
    tied = [px for px, pf in probes if pf == fx]
    if len(tied) > 1:
        x = 0.5 * (min(tied) + max(tied))
    if full_output:
        return x, BrentInfo(fx=fx, iterations=it, converged=converged)
    return x


def _profile(som, y):
    var = som.tuning_var
    diff = y - som.preferred[:, 0]
    return np.exp(-diff * diff / (2.0 * var)) / (SQRT_2PI * np.sqrt(var))


def _residual(activity, template):
    # least-squares gain so that patterns of any overall scale fit
    tt = template @ template
    if tt == 0.0:
        return float(activity @ activity)
    at = activity @ template
    return float(activity @ activity - at * at / tt)


def decode_scalar(som: SelfOrganizingMap, activity) -> DecodeResult:
    """Decode a 1-D map's activity back into a stream value.

    The winner's tuning curve is inverted analytically, the side of the
    winner is read from its neighbours, and the estimate is refined with
    Brent's method against the whole population pattern.
    """
    if som.input_dim != 1:
        raise StructuralError("decode_scalar needs a one-dimensional map")
    activity = np.asarray(activity, dtype=float)
    if activity.shape != (som.n_neurons,):
        raise StructuralError("activity size does not match the map")
    if not np.any(activity > 0):
        raise NoSignalError("activity has no positive entry")
    n = som.n_neurons
    i = winner(activity)
    a = activity[i]
    w = som.preferred[i, 0]
    xi = math.sqrt(som.tuning_var[i])
    disp = xi * math.sqrt(max(0.0, -2.0 * math.log(SQRT_2PI * xi * a)))
    # preferred values need not be sorted along the lattice, so compare
    # the neighbours' preferences rather than their indices
    left = activity[i - 1] if i > 0 else None
    right = activity[i + 1] if i < n - 1 else None
    if left is not None and right is not None:
        toward = i + 1 if right > left else i - 1
        sign = 1.0 if som.preferred[toward, 0] >= w else -1.0
    else:
        sign = 1.0 if i < n / 2 else -1.0
    y0 = w + sign * disp
    lo, hi = som.bounds()
    lo, hi = float(lo[0]), float(hi[0])
    span = hi - lo
    a_lo = min(w - 2.0 * xi, y0)
    a_hi = max(w + 2.0 * xi, y0)
    y = brent_minimize(lambda t: _residual(activity, _profile(som, t)),
                       a_lo, a_hi, tol=1e-6 * span, x0=y0)
    y = min(max(y, lo), hi)
    return DecodeResult(value=np.array([y]), confidence=float(a))


def decode_vector(som: SelfOrganizingMap, activity) -> DecodeResult:
    """Activity-weighted mean of the most active tenth of the population."""
    if som.input_dim < 2:
        raise StructuralError("decode_vector needs a map with input_dim >= 2")
    activity = np.asarray(activity, dtype=float)
    if activity.shape != (som.n_neurons,):
        raise StructuralError("activity size does not match the map")
    if not np.any(activity > 0):
        raise NoSignalError("activity has no positive entry")
    k = max(1, int(round(TOP_FRACTION * som.n_neurons)))
    top = np.argsort(-activity, kind="stable")[:k]
    weights = np.maximum(activity[top], 0.0)
    value = weights @ som.preferred[top] / weights.sum()
    return DecodeResult(value=value, confidence=float(activity[top[0]]))


def decode(som: SelfOrganizingMap, activity) -> DecodeResult:
    if som.input_dim == 1:
        return decode_scalar(som, activity)
    return decode_vector(som, activity)
