"""Stochastic ensembles of non-interacting agents under a common stimulus.

Each agent belongs to one layer and carries a coupling sign. At stimulus
count ``B`` it occupies a level drawn from the layer's Boltzmann distribution
in the signed field ``sign * B``. Draws are independent across agents and
stimuli and come from counter-based streams (see :mod:`.rng`).
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math

import numpy as np

from .errors import DomainError, ValidationError
from .model import LayerParams, _weights
from .rng import counter_uniforms, stream_id

SCALE_MAX = 8
OUTPUT_MODES = ("raw", "questionnaire")


@dataclass(frozen=True)
class Agent:
    id: int
    coupling_sign: int
    layer: LayerParams

    def __post_init__(self):
        if self.coupling_sign not in (-1, 1):
            raise ValidationError(f"coupling sign must be -1 or +1, got {self.coupling_sign}")


@dataclass(frozen=True)
class LayerGroup:
    params: LayerParams
    count: int
    sign: int = 1


@dataclass(frozen=True)
class SpaceSpec:
    name: str
    groups: tuple

    @property
    def size(self):
        return sum(g.count for g in self.groups)


@dataclass(frozen=True)
class ScenarioConfig:
    spaces: tuple
    seed: int
    stimulus_count: int = 12
    output_mode: str = "raw"

    def __post_init__(self):
        if not self.spaces:
            raise ValidationError("scenario has no attitude spaces", "spaces")
        if self.stimulus_count < 1:
            raise ValidationError("must be >= 1", "stimulus_count")
        if self.output_mode not in OUTPUT_MODES:
            raise ValidationError(f"must be one of {OUTPUT_MODES}", "output_mode")
        names = [s.name for s in self.spaces]
        if len(set(names)) != len(names):
            raise ValidationError("space names must be unique", "spaces")
        for i, space in enumerate(self.spaces):
            if not space.groups:
                raise ValidationError("space has no layers", f"spaces[{i}].layers")
            for j, g in enumerate(space.groups):
                if g.count < 1:
                    raise ValidationError("must be positive", f"spaces[{i}].layers[{j}].count")
                if g.sign not in (-1, 1):
                    raise ValidationError("must be -1 or 1", f"spaces[{i}].layers[{j}].sign")
        sizes = {s.size for s in self.spaces}
        if len(sizes) != 1:
            raise ValidationError(
                f"agent totals differ across spaces: {[s.size for s in self.spaces]}", "spaces"
            )


@dataclass
class Population:
    space: str
    agents: list

    @property
    def signs(self):
        return np.array([a.coupling_sign for a in self.agents], dtype=int)

    @property
    def ids(self):
        return np.array([a.id for a in self.agents], dtype=int)

    def groups(self):
        """Map ``(layer, sign)`` to the row indices of its members, in roster order."""
        out = {}
        for row, a in enumerate(self.agents):
            out.setdefault((a.layer, a.coupling_sign), []).append(row)
        return {k: np.array(v) for k, v in out.items()}


@dataclass
class ResponseMatrix:
    """Participants x stimuli responses for one attitude space.

    ``values[i, k]`` is the response of participant ``i`` at ``B = k + 1``.
    In questionnaire mode values are integers on the 0..8 scale and the
    coupling sign lives in ``signs``.
    """

    space: str
    participant_ids: list
    values: np.ndarray
    mode: str = "questionnaire"
    signs: np.ndarray = None

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.ndim != 2:
            raise DomainError("response matrix must be two-dimensional")
        if len(self.participant_ids) != self.values.shape[0]:
            raise DomainError("participant ids do not match matrix rows")
        if self.signs is None:
            self.signs = np.ones(self.values.shape[0], dtype=int)
        self.signs = np.asarray(self.signs, dtype=int)
        if self.mode == "questionnaire" and self.values.size:
            if self.values.min() < 0 or self.values.max() > SCALE_MAX:
                raise DomainError("questionnaire values must lie in 0..8")

    @property
    def n_participants(self):
        return self.values.shape[0]

    @property
    def stimulus_count(self):
        return self.values.shape[1]

    @property
    def stimuli(self):
        return np.arange(1, self.stimulus_count + 1)

    @property
    def signed_values(self):
        """Values with the coupling sign applied (a no-op in raw mode)."""
        v = self.values.astype(float)
        if self.mode == "questionnaire":
            v = v * self.signs[:, None]
        return v

    @property
    def oriented_values(self):
        """Values turned into each participant's own coupling direction.

        Questionnaire values are already magnitudes; raw charges are multiplied
        by the sign so that every group saturates towards +g*J*m.
        """
        v = self.values.astype(float)
        if self.mode == "raw":
            v = v * self.signs[:, None]
        return v

    def rows(self, index):
        return ResponseMatrix(
            self.space,
            [self.participant_ids[i] for i in index],
            self.values[index],
            self.mode,
            self.signs[index],
        )


def build_population(config):
    """Agent rosters for every space, ids 0..N-1 in layer order."""
    out = {}
    for space in config.spaces:
        agents = []
        for group in space.groups:
            for _ in range(group.count):
                agents.append(Agent(len(agents), group.sign, group.params))
        out[space.name] = Population(space.name, agents)
    return out


def project_questionnaire(charges):
    """Round ``|charge|`` half-up onto the integer 0..8 scale."""
    return np.clip(np.floor(np.abs(charges) + 0.5), 0, SCALE_MAX).astype(np.int64)


def _sample_block(params, sign, agent_ids, stimuli, seed, stream):
    u = counter_uniforms(seed, stream, agent_ids, stimuli)
    cdf = np.cumsum(_weights(params, sign * stimuli.astype(float)), axis=-1)
    cdf[:, -1] = 1.0
    idx = (u[..., None] >= cdf[None, :, :]).sum(axis=-1)
    return params.g * params.m * params.levels[idx]


def sample_responses(population, stimulus_count=12, seed=0, mode="raw", workers=1):
    """Draw one response per agent per stimulus ``B = 1..stimulus_count``.

    The result depends only on the roster, ``seed`` and the space name;
    ``workers`` only changes how the agent rows are scheduled.
    """
    if stimulus_count < 1:
        raise DomainError("stimulus_count must be >= 1")
    if mode not in OUTPUT_MODES:
        raise DomainError(f"mode must be one of {OUTPUT_MODES}")
    stimuli = np.arange(1, stimulus_count + 1, dtype=np.int64)
    stream = stream_id(population.space)
    ids = population.ids
    charges = np.empty((len(ids), stimulus_count))

    tasks = []
    for (layer, sign), rows in population.groups().items():
        n_chunks = max(1, min(workers, math.ceil(len(rows) / 256)))
        for chunk in np.array_split(rows, n_chunks):
            tasks.append((layer, sign, chunk))

    def run(task):
        layer, sign, rows = task
        charges[rows] = _sample_block(layer, sign, ids[rows], stimuli, seed, stream)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, tasks))
    else:
        for task in tasks:
            run(task)

    values = charges if mode == "raw" else project_questionnaire(charges)
    return ResponseMatrix(population.space, list(ids), values, mode, population.signs)


def ensemble_mean_trajectory(matrix):
    """Column-wise mean and (population) variance of the signed responses."""
    if matrix.n_participants == 0 or matrix.stimulus_count == 0:
        raise DomainError("empty response matrix")
    v = matrix.signed_values
    return v.mean(axis=0), v.var(axis=0)


@dataclass
class Plateau:
    sign: int
    layer: LayerParams
    count: int
    level: float
    se: float


@dataclass
class PolarizationSplit:
    trajectories: dict  # sign -> mean per B
    saturation: dict  # sign -> member-averaged g*J*m
    polarized: bool
    plateaus: list = field(default_factory=list)


def polarization_split(matrix, population):
    """Mean trajectory per coupling-sign group plus per-layer final plateaus.

    The ``polarized`` flag requires both signs present, opposite-signed final
    means, and each final mean beyond half its group's saturation value.
    """
    if matrix.n_participants != len(population.agents):
        raise DomainError("matrix rows do not match the population roster")
    v = matrix.signed_values
    signs = population.signs
    trajectories, saturation = {}, {}
    for s in (1, -1):
        rows = signs == s
        if rows.any():
            trajectories[s] = v[rows].mean(axis=0)
            sat = np.array([a.layer.saturation for a, r in zip(population.agents, rows) if r])
            saturation[s] = float(sat.mean())
    polarized = False
    if len(trajectories) == 2:
        up, down = trajectories[1][-1], trajectories[-1][-1]
        polarized = bool(
            up > 0 > down and up > 0.5 * saturation[1] and -down > 0.5 * saturation[-1]
        )
    plateaus = []
    for (layer, sign), rows in population.groups().items():
        final = v[rows, -1]
        se = final.std(ddof=1) / np.sqrt(len(rows)) if len(rows) > 1 else float("nan")
        plateaus.append(Plateau(sign, layer, len(rows), float(final.mean()), float(se)))
    plateaus.sort(key=lambda p: p.level)
    return PolarizationSplit(trajectories, saturation, polarized, plateaus)


def distinct_plateau_count(plateaus, z=4.0):
    """Number of plateau levels separated by more than ``z`` combined SEs."""
    levels = sorted(plateaus, key=lambda p: p.level)
    if not levels:
        return 0
    count = 1
    prev = levels[0]
    for p in levels[1:]:
        gap = p.level - prev.level
        if gap > z * math.hypot(p.se, prev.se):
            count += 1
        prev = p
    return count
