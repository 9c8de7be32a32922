"""Closed-form response law of a coherence layer.

A layer is a population of non-interacting agents with a common extremity
constraint ``J``. Each agent occupies one of ``2J+1`` attitudinal levels
``sigma = -J, ..., +J``; under a cumulative stimulus count ``B`` the level
occupation follows a Boltzmann law whose mean is the Brillouin function.

All functions are pure and accept scalar or array ``B``/``x``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParameterError

J_MAX = 7.5
VALID_J = tuple(k / 2 for k in range(1, int(2 * J_MAX) + 1))

# below this |x| the Brillouin function is replaced by its linear term
SERIES_CUTOFF = 1e-6
# below this |y| the Langevin function is evaluated by its Taylor series
_LANGEVIN_SERIES_CUTOFF = 0.05


def check_J(J):
    """Return ``J`` as a float after checking it is a half-integer in (0, 7.5]."""
    try:
        J = float(J)
    except (TypeError, ValueError):
        raise ParameterError(f"J must be a number, got {J!r}") from None
    twice = 2.0 * J
    if not np.isfinite(J) or twice != round(twice) or not (1 <= twice <= 2 * J_MAX):
        raise ParameterError(f"J must be a half-integer in [0.5, {J_MAX}], got {J}")
    return J


@dataclass(frozen=True)
class LayerParams:
    """Parameters of one coherence layer.

    Parameters
    ----------
    J : float
        Extremity constraint; the layer has ``2J+1`` levels.
    m : float
        Moment scale, questionnaire points per unit of sigma.
    beta : float
        Inverse social temperature, per stimulus.
    g : float
        Splitting factor. Conventionally fixed at 2.
    """

    J: float
    m: float
    beta: float
    g: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "J", check_J(self.J))
        for name in ("m", "beta", "g"):
            value = getattr(self, name)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ParameterError(f"{name} must be a number, got {value!r}") from None
            if not np.isfinite(value) or value <= 0:
                raise ParameterError(f"{name} must be positive and finite, got {value}")
            object.__setattr__(self, name, value)

    @property
    def n_levels(self):
        return int(round(2 * self.J)) + 1

    @property
    def levels(self):
        """The level values ``-J, -J+1, ..., +J``."""
        return np.arange(self.n_levels, dtype=float) - self.J

    @property
    def saturation(self):
        """Asymptotic expected charge ``g*J*m``."""
        return self.g * self.J * self.m

    def argument(self, B):
        """Brillouin argument ``beta*g*J*m*B``."""
        return self.beta * self.g * self.J * self.m * np.asarray(B, dtype=float)


@dataclass(frozen=True)
class LevelDistribution:
    J: float
    probs: np.ndarray

    @property
    def levels(self):
        return np.arange(len(self.probs), dtype=float) - self.J

    def mean(self):
        return float(np.dot(self.levels, self.probs))

    def variance(self):
        mu = self.mean()
        return float(np.dot((self.levels - mu) ** 2, self.probs))


def _langevin(y):
    """coth(y) - 1/y, accurate near zero."""
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < _LANGEVIN_SERIES_CUTOFF
    if not small.any():
        return 1.0 / np.tanh(y) - 1.0 / y
    out = np.empty_like(y)
    ys = y[small]
    y2 = ys * ys
    out[small] = ys * (1 / 3 + y2 * (-1 / 45 + y2 * (2 / 945 - y2 / 4725)))
    yl = y[~small]
    out[~small] = 1.0 / np.tanh(yl) - 1.0 / yl
    return out


def brillouin(J, x):
    """Brillouin function B_J(x).

    Evaluated as a difference of Langevin functions, which is algebraically
    identical to the two-coth form but free of the 1/x cancellation.

    >>> round(brillouin(0.5, 1.0), 5)
    0.76159
    """
    J = check_J(J)
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ParameterError("Brillouin argument must be finite")
    out = _brillouin(J, np.atleast_1d(x)).reshape(x.shape)
    return float(out) if out.ndim == 0 else out


def _brillouin(J, x):
    """Unchecked core of :func:`brillouin` for a validated ``J`` and 1-d ``x``."""
    a = (2 * J + 1) / (2 * J)
    b = 1 / (2 * J)
    out = a * _langevin(a * x) - b * _langevin(b * x)
    tiny = np.abs(x) < SERIES_CUTOFF
    if tiny.any():
        out[tiny] = (J + 1) / (3 * J) * x[tiny]
    return out


def _check_B(B, strict=False):
    B = np.asarray(B, dtype=float)
    if not np.all(np.isfinite(B)):
        raise DomainError("stimulus magnitude must be finite")
    if strict and np.any(B <= 0):
        raise DomainError("susceptibility <U>/B is undefined at B = 0")
    if np.any(B < 0):
        raise DomainError("stimulus magnitude must be non-negative")
    return B


def _weights(p, field):
    """Normalised Boltzmann weights over levels; leading axes follow ``field``.

    ``field`` is the signed stimulus (sign * B), so it may be negative.
    """
    field = np.asarray(field, dtype=float)
    expo = p.beta * p.g * p.m * field[..., None] * p.levels
    expo -= expo.max(axis=-1, keepdims=True)
    w = np.exp(expo)
    return w / w.sum(axis=-1, keepdims=True)


def level_distribution(p, B):
    """Boltzmann occupation of the ``2J+1`` levels at stimulus ``B``."""
    B = float(_check_B(B))
    return LevelDistribution(J=p.J, probs=_weights(p, B))


def expected_charge(p, B):
    """Expected attitudinal charge ``g*J*m*B_J(beta*g*J*m*B)``."""
    B = _check_B(B)
    out = p.saturation * np.asarray(brillouin(p.J, p.argument(B)))
    return float(out) if out.ndim == 0 else out


def exact_charge_variance(p, B):
    """Variance of the charge ``g*m*sigma`` under the level distribution."""
    B = _check_B(B)
    w = _weights(p, B)
    mu = w @ p.levels
    var = np.einsum("...k,...k->...", w, (p.levels - mu[..., None]) ** 2)
    out = (p.g * p.m) ** 2 * var
    return float(out) if np.ndim(out) == 0 else out


def susceptibility(p, B):
    B = _check_B(B, strict=True)
    out = np.asarray(expected_charge(p, B)) / B
    return float(out) if out.ndim == 0 else out


def differential_susceptibility(p, B, h=1e-4):
    """Finite-difference slope d<U>/dB.

    Central difference where ``B >= h``, forward difference below that so the
    stencil never leaves ``B >= 0``.
    """
    if not h > 0:
        raise DomainError(f"step h must be positive, got {h}")
    B = _check_B(B)
    central = B >= h
    lo = np.where(central, B - h, B)
    span = np.where(central, 2 * h, h)
    out = (np.asarray(expected_charge(p, B + h)) - np.asarray(expected_charge(p, lo))) / span
    return float(out) if np.ndim(out) == 0 else out
