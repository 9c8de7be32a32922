import numpy as np
import pytest

from coherent_layers import LayerParams, expected_charge
from coherent_layers.ensemble import (
    LayerGroup,
    ResponseMatrix,
    ScenarioConfig,
    SpaceSpec,
    build_population,
    project_questionnaire,
    sample_responses,
)
from coherent_layers.errors import DomainError
from coherent_layers.stratification import (
    LayerAssignment,
    assign_layers,
    coherence_onset,
    fluctuation_profile,
    layer_mean_trajectories,
    pattern_census,
    profile,
    susceptibility_profile,
)

from oracles import REFERENCE_LAYERS, OPINION_ONSET, OPINION_VAR12

OPINION = LayerParams(7.5, 0.552, 0.1)
B12 = np.arange(1, 13)


def qmatrix(rows, space="q"):
    rows = np.asarray(rows)
    return ResponseMatrix(space, list(range(len(rows))), rows, "questionnaire")


def curve_rows(params, n=1):
    """Noiseless questionnaire projections of the expected-charge curve."""
    row = project_questionnaire(expected_charge(params, B12))
    return np.tile(row, (n, 1))


def test_assign_layers_examples():
    rows = [
        [1, 3, 5, 6, 7, 8, 8, 8, 8, 8, 8, 8],
        [1, 2, 3, 4, 4, 4, 4, 4, 4, 4, 4, 4],
        [0] * 12,
        [0, 0, 0, 0, 0, 0, 0, 0, 0, 5, 6, 7],  # three-way tie -> largest
        [0, 0, 0, 0, 0, 0, 0, 0, 0, 6, 7, 6],
    ]
    a = assign_layers(qmatrix(rows))
    assert a.J == [7.5, 3.5, None, 6.5, 5.5]
    assert a.unassigned == 1
    assert a.counts == {7.5: 1, 6.5: 1, 5.5: 1, 3.5: 1}
    with pytest.raises(DomainError):
        assign_layers(qmatrix(rows), tail_len=13)
    with pytest.raises(DomainError):
        assign_layers(ResponseMatrix("r", [0], np.ones((1, 12)), "raw"))


def test_assignment_idempotent_under_extra_saturation():
    rng = np.random.default_rng(0)
    rows = rng.integers(0, 9, size=(200, 12))
    before = assign_layers(qmatrix(rows)).J
    for extra in (1, 3, 6):
        sat = np.array([0 if j is None else int(j + 0.5) for j in before])
        longer = np.hstack([rows, np.repeat(sat[:, None], extra, axis=1)])
        assert assign_layers(qmatrix(longer)).J == before


def test_layer_mean_trajectories_single_layer():
    rows = np.random.default_rng(1).integers(1, 9, size=(30, 12))
    rows[:, -3:] = 8
    m = qmatrix(rows)
    traj = layer_mean_trajectories(m, assign_layers(m))
    assert list(traj) == [7.5]
    np.testing.assert_allclose(traj[7.5].U, rows.mean(axis=0))


def test_layer_mean_trajectories_action_ordering():
    keys = ("A7.5", "A5.5", "A4.5", "A3.5")
    rows = np.vstack([curve_rows(LayerParams(*REFERENCE_LAYERS[k]), n)
                      for k, n in zip(keys, (24, 18, 12, 43))])
    m = qmatrix(rows)
    a = assign_layers(m)
    assert a.counts == {7.5: 24, 5.5: 18, 4.5: 12, 3.5: 43}
    traj = layer_mean_trajectories(m, a)
    assert [t.U[-1] for t in traj.values()] == [8, 6, 5, 4]


def test_layer_counts_from_reference_curves():
    spaces = {
        "opinion": [("O7.5", 97)],
        "emotion": [("E7.5", 71), ("E6.5", 26)],
        "action": [("A7.5", 24), ("A5.5", 18), ("A4.5", 12), ("A3.5", 43)],
    }
    found = {}
    for name, layers in spaces.items():
        rows = np.vstack([curve_rows(LayerParams(*REFERENCE_LAYERS[k]), n) for k, n in layers])
        found[name] = len(assign_layers(qmatrix(rows)).counts)
    assert found == {"opinion": 1, "emotion": 2, "action": 4}


def test_coherence_onset_curve():
    assert coherence_onset(LayerParams(7.5, 0.45, 0.1)) is None  # g*J*m < J
    assert coherence_onset(OPINION) == pytest.approx(OPINION_ONSET, abs=2e-6)
    assert expected_charge(OPINION, coherence_onset(OPINION)) >= 7.5


def test_coherence_onset_data():
    U = [2, 3, 4, 5, 6, 7.4, 7.6, 7.8, 7.9, 8, 8, 8]
    assert coherence_onset(U, 7.5) == 7
    assert coherence_onset(U, 8.5) is None
    with pytest.raises(DomainError):
        coherence_onset(U)


@pytest.mark.parametrize("beta", [0.05, 0.1, 0.2])
def test_onset_monotone_in_beta(beta):
    slow = coherence_onset(LayerParams(7.5, 0.552, beta))
    fast = coherence_onset(LayerParams(7.5, 0.552, 1.5 * beta))
    assert fast <= slow


@pytest.mark.parametrize("key", ["O7.5", "A7.5", "A5.5", "A4.5", "A3.5"])
def test_curve_and_data_onsets_agree(key):
    p = LayerParams(*REFERENCE_LAYERS[key])
    curve = coherence_onset(p)
    data = coherence_onset(expected_charge(p, B12), p.J)
    if curve is None or curve > 12:
        assert data is None
    else:
        assert abs(data - curve) <= 1


def test_fluctuation_profile():
    m = qmatrix(np.full((5, 12), 3))
    np.testing.assert_array_equal(fluctuation_profile(m), np.zeros(12))
    with pytest.raises(DomainError):
        fluctuation_profile(qmatrix(np.full((1, 12), 3)))
    # opinion-like data: wide at B=3, collapsed at B=8
    rng = np.random.default_rng(2)
    rows = np.clip(np.rint(np.linspace(1, 8, 12) + rng.normal(0, 1, (97, 12)) *
                           np.r_[1.5, 1.8, 2.0, 1.5, 1.0, 0.6, 0.4, 0.2, 0.1, 0.1, 0.1, 0.1]), 0, 8)
    var = fluctuation_profile(qmatrix(rows.astype(int)))
    assert var[2] > 10 * var[7]


def simulate_opinion(n=20000, seed=3):
    cfg = ScenarioConfig((SpaceSpec("o", (LayerGroup(OPINION, n),)),), seed=seed)
    return sample_responses(build_population(cfg)["o"], 12, seed)


def test_simulated_fluctuations_decay():
    var = fluctuation_profile(simulate_opinion())
    assert var[-1] == pytest.approx(OPINION_VAR12, rel=0.05)
    assert var[-1] < var[0]


def test_susceptibility_profile():
    c = 8.0
    chi, diff = susceptibility_profile(qmatrix(np.full((4, 12), 8)))
    np.testing.assert_allclose(chi, c / B12)
    assert np.all(np.diff(chi) < 0)
    assert diff[0] == c and np.all(diff[1:] == 0)


def test_susceptibility_vs_fluctuation_profiles():
    m = simulate_opinion(n=100_000, seed=9)
    prof = profile(m)
    # chi stays far from zero while the point-to-point slope vanishes
    assert prof.chi[-1] > 0.5 and prof.differential_chi[-1] < 0.1
    # slope over a unit step vs beta*variance: compare with the exact slope as
    # the oracle for the finite step, and check sampling error at 4 SE
    N = m.n_participants
    means = m.values.mean(axis=0)
    exact_step = np.diff(expected_charge(OPINION, np.arange(0, 13)))
    var = prof.variance
    se_diff = np.sqrt((var + np.r_[0, var[:-1]]) / N)
    assert np.all(np.abs(prof.differential_chi[1:] - exact_step[1:]) < 4 * se_diff[1:])
    # midpoint variance is what the unit step measures
    from coherent_layers import exact_charge_variance
    mid = OPINION.beta * exact_charge_variance(OPINION, np.arange(1.5, 12.5))
    assert np.all(np.abs(exact_step[1:] - mid) < 0.02)
    assert means[-1] == pytest.approx(prof.mean[-1])


def test_pattern_census():
    a = LayerAssignment([0, 1, 2], [7.5, 7.5, 7.5])
    assert pattern_census([a, a, a]) == {"7.5/7.5/7.5": 3}
    o = LayerAssignment(list(range(6)), [7.5] * 6)
    e = LayerAssignment(list(range(6)), [7.5, 7.5, 7.5, 6.5, 6.5, 6.5])
    ac = LayerAssignment(list(range(6)), [7.5, 5.5, 3.5, 3.5, 4.5, 7.5])
    census = pattern_census([o, e, ac])
    assert sum(census.values()) == 6 and len(census) <= 8
    assert census["7.5/6.5/3.5"] == 1
    with pytest.raises(DomainError):
        pattern_census([o, LayerAssignment([9, 8], [7.5, 7.5])])
