"""markovchain testing"""
import numpy as np
import pytest

import datafiles
from horizontable import compare_horizon_tables, horizon_table_from_matrix
from finding import Finding
from markovchain import (NoAbsorbingStateError, NumericalDriftError, RangeError, RowSumError, ShapeError,
                         SingularError, STATES, StateId, absorbing_analysis, classify_states, evolve,
                         first_passage_probabilities, identity_matrix, make_distribution, make_matrix,
                         matrix_power, n_step_probability, published_matrix, point_mass, PUBLISHED_ROWS)

S, E, H, U, I, D = STATES  # noqa: E741

# sum over k of P(not dead after k days), evaluated far into the tail
EXPECTED_DAYS = {S: 198.3048626858, E: 195.1798626858, H: 145.9611126858, U: 139.1489984883,
                 I: 50.5762156728}


def random_matrix(rng):
    return make_matrix(rng.dirichlet(np.ones(len(STATES)), size=len(STATES)))


def perturbed_rows(row, column, delta):
    rows = [list(r) for r in PUBLISHED_ROWS]
    rows[row][column] += delta
    return rows


def test_published_matrix_is_valid():
    P = published_matrix()
    assert P[I, D] == 0.75
    assert P[D, D] == 1.0
    assert np.allclose(P.entries.sum(axis=1), 1.0)


def test_matrix_is_read_only():
    P = published_matrix()
    with pytest.raises(ValueError):
        P.entries[0, 0] = 0.5


def test_row_sum_error_names_the_row():
    with pytest.raises(RowSumError) as e:
        make_matrix(perturbed_rows(U, S, -0.01))
    assert e.value.row == U
    assert e.value.deviation == pytest.approx(-0.01)


def test_row_sum_tolerance():
    make_matrix(perturbed_rows(H, S, 5e-10))
    with pytest.raises(RowSumError):
        make_matrix(perturbed_rows(H, S, 1e-8))


def test_range_error():
    rows = perturbed_rows(H, S, 0.0)
    rows[H][S] = -0.02
    rows[H][H] = 0.76
    with pytest.raises(RangeError) as e:
        make_matrix(rows)
    assert (e.value.row, e.value.column) == (H, S)


def test_shape_error():
    with pytest.raises(ShapeError):
        make_matrix([[1.0]])
    with pytest.raises(ShapeError):
        make_matrix([['a'] * 6] * 6)


def test_state_parse():
    assert StateId.parse('F') is D
    assert StateId.parse(' u ') is U
    assert D.label(display_alias=True) == 'F'
    with pytest.raises(ValueError):
        StateId.parse('X')


def test_power_zero_is_identity():
    assert matrix_power(published_matrix(), 0) == identity_matrix()


def test_power_one_is_matrix():
    assert matrix_power(published_matrix(), 1) == published_matrix()


def test_power_negative():
    with pytest.raises(ValueError):
        matrix_power(published_matrix(), -1)


def test_power_composes():
    P = published_matrix()
    a, b = 15, 30
    assert np.allclose(matrix_power(P, a + b).entries,
                       matrix_power(P, a).entries.dot(matrix_power(P, b).entries), atol=1e-12)


def test_drift_error_is_a_row_sum_error():
    assert issubclass(NumericalDriftError, RowSumError)


def test_death_column_of_long_powers():
    # the slowest transient mode decays like 0.99489^n
    P = published_matrix()
    Q = P.entries[:5, :5]
    assert np.abs(np.linalg.eigvals(Q)).max() == pytest.approx(0.99489, abs=1e-5)
    column = matrix_power(P, 2000).entries[:, D]
    assert column.min() == pytest.approx(0.9999640742894129, abs=1e-10)
    assert column.min() < 1 - 1e-8
    assert (matrix_power(P, 3650).entries[:, D] >= 1 - 1e-8).all()


def test_powers_of_random_matrices_stay_stochastic():
    rng = np.random.default_rng(5)
    matrices = [published_matrix()] + [random_matrix(rng) for _ in range(5)]
    for P in matrices:
        for n in (2, 7, 50, 365, 1000, 3650):
            entries = matrix_power(P, n).entries
            assert np.abs(entries.sum(axis=1) - 1.0).max() <= 1e-9
            assert (entries >= 0.0).all()


def test_power_composes_on_random_matrices():
    rng = np.random.default_rng(8)
    for _ in range(10):
        P = random_matrix(rng)
        a, b = (int(v) for v in rng.integers(0, 501, size=2))
        assert np.allclose(matrix_power(P, a + b).entries,
                           matrix_power(P, a).entries.dot(matrix_power(P, b).entries), rtol=0.0, atol=1e-12)


def test_identity_power_is_identity():
    assert matrix_power(identity_matrix(), 365) == identity_matrix()


def test_spot_values_from_published_matrix():
    P = published_matrix()
    assert n_step_probability(P, I, D, 1) == 0.75
    # three steps are needed before S can reach D
    assert n_step_probability(P, S, D, 2) == 0.0
    assert n_step_probability(P, S, D, 3) == pytest.approx(0.32 * 0.04 * 0.23)
    assert n_step_probability(P, I, D, 7) == pytest.approx(0.7543, abs=5e-5)


def test_death_probability_is_monotone():
    P = published_matrix()
    values = [n_step_probability(P, state, D, n) for state in (S, E, H, U, I) for n in range(0, 366, 5)]
    for state in (S, E, H, U, I):
        series = [n_step_probability(P, state, D, n) for n in range(0, 366, 5)]
        assert all(b >= a for a, b in zip(series, series[1:]))
    assert all(0.0 <= v <= 1.0 for v in values)


def test_published_horizon_table_against_published_matrix():
    # the matrix is published to two decimals, so its powers only approximate the published table
    table4 = datafiles.parse_horizon_table(datafiles.load_fixture('table4'))
    computed = horizon_table_from_matrix(published_matrix(), table4.horizons)
    findings = compare_horizon_tables(computed, table4)
    assert len(findings) == 110
    for f in findings:
        if f.expected >= 0.01:
            assert abs(f.difference) <= 0.02
        else:
            assert abs(f.difference) <= 0.4 * f.expected
    failing = set(f.subject for f in Finding.failing(findings))
    assert 'IS@7' not in failing
    assert 'HU@7' in failing


def test_evolve_point_mass():
    mu = evolve(point_mass(I), published_matrix(), 7)
    assert mu[D] == pytest.approx(n_step_probability(published_matrix(), I, D, 7))
    assert sum(mu.mass) == pytest.approx(1.0)


def test_make_distribution():
    mu = make_distribution([0.5, 0.5, 0, 0, 0, 0])
    assert mu[S] == 0.5
    with pytest.raises(RowSumError):
        make_distribution([0.5, 0.4, 0, 0, 0, 0])
    with pytest.raises(ShapeError):
        make_distribution([1.0])


def test_classify_states():
    absorbing, transient = classify_states(published_matrix())
    assert absorbing == [D]
    assert transient == [S, E, H, U, I]


def test_absorbing_analysis():
    report = absorbing_analysis(published_matrix())
    assert report.absorbing_states == [D]
    assert np.allclose(report.absorption_probs, 1.0)
    for state, days in EXPECTED_DAYS.items():
        assert report.expected_steps_from(state) == pytest.approx(days, rel=1e-6)
    assert report.expected_steps_from(S) - report.expected_steps_from(E) == pytest.approx(1 / 0.32)


def test_absorbing_analysis_without_absorbing_state():
    rows = [list(r) for r in PUBLISHED_ROWS]
    rows[D] = [0.5, 0, 0, 0, 0, 0.5]
    with pytest.raises(NoAbsorbingStateError):
        absorbing_analysis(make_matrix(rows))


def test_absorbing_analysis_all_absorbing():
    report = absorbing_analysis(identity_matrix())
    assert report.transient_states == []
    assert report.fundamental.shape == (0, 0)
    assert report.expected_steps.shape == (0,)


def test_absorbing_analysis_singular():
    # S and E form a closed class that never reaches D
    rows = [list(r) for r in PUBLISHED_ROWS]
    rows[S] = [0.5, 0.5, 0, 0, 0, 0]
    rows[E] = [0.5, 0.5, 0, 0, 0, 0]
    with pytest.raises(SingularError):
        absorbing_analysis(make_matrix(rows))


def test_first_passage_sums_to_power():
    P = published_matrix()
    f = first_passage_probabilities(P, E, D, 60)
    assert f.sum() == pytest.approx(n_step_probability(P, E, D, 60), abs=1e-12)
    assert f[0] == 0.0


def test_first_passage_to_start():
    f = first_passage_probabilities(published_matrix(), D, D, 5)
    assert not f.any()


def test_expected_steps_match_first_passage_times():
    P = published_matrix()
    report = absorbing_analysis(P)
    steps = np.arange(1, 8001)
    for state in (S, E, H, U, I):
        f = first_passage_probabilities(P, state, D, len(steps))
        assert f.sum() == pytest.approx(1.0, abs=1e-10)
        assert report.expected_steps_from(state) == pytest.approx(float((steps * f).sum()), rel=1e-8)
