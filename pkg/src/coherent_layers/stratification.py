"""Coherence layers, onsets, and per-stimulus response profiles."""

from collections import Counter
from dataclasses import dataclass
import logging

import numpy as np

from .errors import DomainError
from .fitting import FitInput
from .model import LayerParams, expected_charge

log = logging.getLogger(__name__)


@dataclass
class LayerAssignment:
    """Per-participant layer ``J`` (``None`` when unassigned)."""

    participant_ids: list
    J: list

    @property
    def counts(self):
        c = Counter(j for j in self.J if j is not None)
        return dict(sorted(c.items(), reverse=True))

    @property
    def unassigned(self):
        return sum(j is None for j in self.J)

    def members(self, J):
        return np.array([i for i, j in enumerate(self.J) if j == J], dtype=int)


@dataclass
class Profile:
    B: np.ndarray
    mean: np.ndarray
    variance: np.ndarray
    chi: np.ndarray
    differential_chi: np.ndarray


def _saturation_level(tail):
    values, counts = np.unique(tail, return_counts=True)
    return int(values[counts == counts.max()].max())


def assign_layers(matrix, tail_len=3):
    """Assign ``J = s - 1/2`` where ``s`` is the modal response over the last
    ``tail_len`` stimuli, ties going to the larger response. A participant
    whose modal tail response is 0 stays unassigned.
    """
    if matrix.mode != "questionnaire":
        raise DomainError("layer assignment needs questionnaire-scale responses")
    if not 1 <= tail_len <= matrix.stimulus_count:
        raise DomainError(
            f"tail_len must lie in 1..{matrix.stimulus_count}, got {tail_len}"
        )
    tails = np.asarray(matrix.values)[:, -tail_len:]
    J = []
    for row in tails:
        s = _saturation_level(row)
        J.append(s - 0.5 if s > 0 else None)
    return LayerAssignment(list(matrix.participant_ids), J)


def layer_mean_trajectories(matrix, assignment, g=2.0):
    """Column means of each layer's members as fit inputs, highest ``J`` first."""
    if len(assignment.J) != matrix.n_participants:
        raise DomainError("assignment does not cover the matrix rows")
    v = matrix.oriented_values
    out = {}
    layers = sorted({j for j in assignment.J if j is not None}, reverse=True)
    for J in layers:
        rows = assignment.members(J)
        if len(rows) == 0:
            log.warning("layer J=%s has no members; skipped", J)
            continue
        out[J] = FitInput(matrix.stimuli.astype(float), v[rows].mean(axis=0), J, g)
    return out


def coherence_onset(curve, J=None, B=None, B_max=100.0, tol=1e-6):
    """First stimulus count at which the expected charge reaches ``J``.

    ``curve`` is either a :class:`LayerParams` (closed form, bisection to
    ``tol`` on ``[0, B_max]``) or a data trajectory sampled on ``B``
    (default ``1..len(curve)``), in which case the first grid point with
    ``U >= J`` is returned. ``None`` when ``J`` is never reached.
    """
    if isinstance(curve, LayerParams):
        target = curve.J if J is None else float(J)
        if curve.saturation < target or expected_charge(curve, B_max) < target:
            return None
        lo, hi = 0.0, float(B_max)
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if expected_charge(curve, mid) >= target:
                hi = mid
            else:
                lo = mid
        return hi
    if J is None:
        raise DomainError("J is required for a data trajectory")
    U = np.asarray(curve, dtype=float)
    grid = np.arange(1, len(U) + 1) if B is None else np.asarray(B)
    if grid.shape != U.shape:
        raise DomainError("trajectory and B grid differ in length")
    hits = np.flatnonzero(U >= J)
    return grid[hits[0]].item() if len(hits) else None


def fluctuation_profile(matrix):
    """Cross-sectional sample variance (ddof=1) at each stimulus."""
    if matrix.n_participants < 2:
        raise DomainError("fluctuation estimate needs at least two participants")
    return matrix.oriented_values.var(axis=0, ddof=1)


def susceptibility_profile(matrix):
    """Return ``(chi, differential_chi)`` on the grid ``B = 1..K``.

    ``chi = mean/B``; the differential form is the point-to-point slope with
    the neutral state ``mean(0) = 0`` as its left neighbour at ``B = 1``.
    """
    if matrix.n_participants == 0:
        raise DomainError("empty response matrix")
    mean = matrix.oriented_values.mean(axis=0)
    chi = mean / matrix.stimuli
    diff = np.diff(mean, prepend=0.0)
    return chi, diff


def profile(matrix):
    chi, diff = susceptibility_profile(matrix)
    return Profile(
        B=matrix.stimuli,
        mean=matrix.oriented_values.mean(axis=0),
        variance=fluctuation_profile(matrix),
        chi=chi,
        differential_chi=diff,
    )


def _fmt_J(j):
    return "-" if j is None else f"{j:g}"


def pattern_code(js):
    return "/".join(_fmt_J(j) for j in js)


def pattern_census(assignments):
    """Count joint layer codes such as ``"7.5/6.5/3.5"`` across spaces.

    ``assignments`` is an ordered sequence (opinion, emotion, action) of
    :class:`LayerAssignment` over the same roster.
    """
    assignments = list(assignments)
    if not assignments:
        raise DomainError("no assignments given")
    roster = list(assignments[0].participant_ids)
    for a in assignments[1:]:
        if list(a.participant_ids) != roster:
            raise DomainError("assignments cover different participant rosters")
    codes = (pattern_code(js) for js in zip(*(a.J for a in assignments)))
    return dict(sorted(Counter(codes).items(), key=lambda kv: (-kv[1], kv[0])))
