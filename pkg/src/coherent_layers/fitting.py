"""Least-squares estimation of ``(m, beta)`` for one layer with ``J`` and ``g`` fixed."""

from dataclasses import dataclass
import itertools
import logging

import numpy as np
from scipy import stats

from .errors import DomainError, NonIdentifiableError
from .model import LayerParams, _brillouin, check_J

log = logging.getLogger(__name__)

M_STARTS = (0.3, 0.4, 0.5, 0.6, 0.7, 0.8)
BETA_STARTS = (0.02, 0.05, 0.1, 0.2, 0.4)
GRAD_TOL = 1e-8
STEP_TOL = 1e-10
FD_REL_STEP = 1e-6
MAX_ITER = 500


@dataclass(frozen=True)
class FitInput:
    B: np.ndarray
    U: np.ndarray
    J: float
    g: float = 2.0

    def __post_init__(self):
        B = np.asarray(self.B, dtype=float)
        U = np.asarray(self.U, dtype=float)
        if B.ndim != 1 or B.shape != U.shape:
            raise DomainError("B and U must be 1-d arrays of equal length")
        if len(B) < 3:
            raise DomainError("at least three points are needed to fit two parameters")
        if np.any(np.diff(B) <= 0):
            raise DomainError("B must be strictly increasing")
        if not (np.all(np.isfinite(B)) and np.all(np.isfinite(U))):
            raise DomainError("fit input must be finite")
        if not self.g > 0:
            raise DomainError("g must be positive")
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "U", U)
        object.__setattr__(self, "J", check_J(self.J))
        object.__setattr__(self, "g", float(self.g))


@dataclass
class FitResult:
    J: float
    g: float
    m_hat: float
    beta_hat: float
    sse: float
    r_squared: float
    residuals: np.ndarray
    converged: bool
    iterations: int
    starts_tried: int

    @property
    def params(self):
        return LayerParams(self.J, self.m_hat, self.beta_hat, self.g)


@dataclass
class ResidualDiagnostic:
    mean_residual: float
    sign_balance: float
    skewness: float
    symmetric: bool


def _curve(J, g, m, beta, B):
    return g * J * m * _brillouin(J, beta * g * J * m * B)


def sse(J, g, m, beta, inp):
    """Sum of squared deviations of the data from the closed-form curve."""
    r = inp.U - _curve(J, g, m, beta, inp.B)
    return float(r @ r)


def _gradient(f, x):
    g = np.empty_like(x)
    for i in range(len(x)):
        h = FD_REL_STEP * x[i]
        up, down = x.copy(), x.copy()
        up[i] += h
        down[i] -= h
        g[i] = (f(up) - f(down)) / (2 * h)
    return g


def quasi_newton(f, x0, gtol=GRAD_TOL, xtol=STEP_TOL, maxiter=MAX_ITER):
    """BFGS on the positive orthant with central-difference gradients.

    Returns ``(x, f(x), converged, iterations)``. Converged means the
    gradient norm fell below ``gtol`` or an accepted step was shorter than
    ``xtol``.
    """
    x = np.asarray(x0, dtype=float).copy()
    fx = f(x)
    gx = _gradient(f, x)
    H = np.eye(len(x))
    first = True
    for it in range(maxiter):
        if np.linalg.norm(gx) < gtol:
            return x, fx, True, it
        p = -H @ gx
        slope = p @ gx
        if slope >= 0:
            H = np.eye(len(x))
            p, slope = -gx, -(gx @ gx)
        alpha = 1.0
        shrinking = p < 0
        if shrinking.any():
            alpha = min(1.0, 0.5 * np.min(-x[shrinking] / p[shrinking]))
        while True:
            x_new = x + alpha * p
            f_new = f(x_new)
            if f_new <= fx + 1e-4 * alpha * slope:
                break
            alpha *= 0.5
            if alpha * np.linalg.norm(p) < xtol:
                return x, fx, True, it + 1
        s = x_new - x
        x, fx = x_new, f_new
        if np.linalg.norm(s) < xtol:
            return x, fx, True, it + 1
        g_new = _gradient(f, x)
        y = g_new - gx
        gx = g_new
        sy = s @ y
        if sy > 0:
            if first:
                H = np.eye(len(x)) * (sy / (y @ y))
                first = False
            rho = 1.0 / sy
            V = np.eye(len(x)) - rho * np.outer(s, y)
            H = V @ H @ V.T + rho * np.outer(s, s)
    return x, fx, False, maxiter


def fit_layer(inp, m_starts=M_STARTS, beta_starts=BETA_STARTS):
    """Fit ``(m, beta)`` by multistart quasi-Newton; the lowest SSE wins.

    Raises
    ------
    NonIdentifiableError
        If the data have no variance (e.g. all zeros).
    """
    ss_tot = float(np.sum((inp.U - inp.U.mean()) ** 2))
    if ss_tot == 0.0:
        raise NonIdentifiableError("data are constant; m and beta are not identifiable")

    def objective(x):
        return sse(inp.J, inp.g, x[0], x[1], inp)

    best = None
    total_iter = 0
    starts = list(itertools.product(m_starts, beta_starts))
    for m0, b0 in starts:
        x, fx, ok, nit = quasi_newton(objective, np.array([m0, b0]))
        total_iter += nit
        if best is None or fx < best[1]:
            best = (x, fx, ok)
    x, fx, ok = best
    if not ok:
        log.warning("no start converged for J=%s; returning best-effort estimate", inp.J)
    residuals = inp.U - _curve(inp.J, inp.g, x[0], x[1], inp.B)
    return FitResult(
        J=inp.J,
        g=inp.g,
        m_hat=float(x[0]),
        beta_hat=float(x[1]),
        sse=float(fx),
        r_squared=1.0 - fx / ss_tot,
        residuals=residuals,
        converged=bool(ok),
        iterations=total_iter,
        starts_tried=len(starts),
    )


def residual_symmetry(fit, balance_tol=0.25, skew_tol=1.0):
    """Mean, positive-sign share and skewness of the fit residuals.

    Zero residuals count half towards the positive share.
    """
    r = np.asarray(fit.residuals, dtype=float)
    balance = (np.sum(r > 0) + 0.5 * np.sum(r == 0)) / len(r)
    skew = float(stats.skew(r)) if np.ptp(r) > 0 else 0.0
    symmetric = abs(balance - 0.5) <= balance_tol and abs(skew) <= skew_tol
    return ResidualDiagnostic(float(r.mean()), float(balance), skew, bool(symmetric))
