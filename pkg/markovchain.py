"""discrete-time Markov chain over the six COVID-19 compartments"""
import enum
import logging

import numpy as np

logger = logging.getLogger(__name__)

ROW_SUM_TOLERANCE = 1e-9
CONDITION_LIMIT = 1e12

# published daily matrix, rows/columns in StateId order
PUBLISHED_ROWS = (
    (0.68, 0.32, 0.0, 0.0, 0.0, 0.0),
    (0.31, 0.65, 0.04, 0.0, 0.0, 0.0),
    (0.66, 0.0, 0.08, 0.01, 0.02, 0.23),
    (0.49, 0.0, 0.0, 0.20, 0.26, 0.05),
    (0.25, 0.0, 0.0, 0.0, 0.0, 0.75),
    (0.0, 0.0, 0.0, 0.0, 0.0, 1.0),
)


class MarkovChainError(Exception):
    pass


class ShapeError(MarkovChainError):
    def __init__(self, shape):
        self.shape = shape

    def __str__(self):
        return 'expected a %dx%d matrix, got shape %s' % (len(StateId), len(StateId), self.shape)


class RowSumError(MarkovChainError):
    def __init__(self, row, deviation):
        self.row = row
        self.deviation = deviation

    def __str__(self):
        return 'row %s sums to 1%+.3g (tolerance %g)' % (StateId(self.row).label(), self.deviation,
                                                          ROW_SUM_TOLERANCE)


class RangeError(MarkovChainError):
    def __init__(self, row, column, value):
        self.row = row
        self.column = column
        self.value = value

    def __str__(self):
        return 'entry (%s, %s) = %r is outside [0, 1]' % (StateId(self.row).label(),
                                                          StateId(self.column).label(), self.value)


class NumericalDriftError(RowSumError):
    def __str__(self):
        return 'row %s of a matrix power drifted from 1 by %.3g' % (StateId(self.row).label(), self.deviation)


class NoAbsorbingStateError(MarkovChainError):
    def __str__(self):
        return 'the chain has no absorbing state'


class SingularError(MarkovChainError):
    def __init__(self, condition):
        self.condition = condition

    def __str__(self):
        return 'I - Q is numerically singular (condition estimate %.3g)' % self.condition


class StateId(enum.IntEnum):
    S = 0
    E = 1
    H = 2
    U = 3
    I = 4  # noqa: E741
    D = 5

    @classmethod
    def parse(cls, text):
        code = str(text).strip().upper()
        if code == 'F':
            return cls.D
        try:
            return cls[code]
        except KeyError:
            raise ValueError('unknown state: %r' % text)

    def label(self, display_alias=False):
        if display_alias and self is StateId.D:
            return 'F'
        return self.name


STATES = tuple(StateId)


def _check_stochastic_rows(entries, error_class):
    deviations = entries.sum(axis=1) - 1.0
    for row, deviation in enumerate(deviations):
        if not abs(deviation) <= ROW_SUM_TOLERANCE:
            raise error_class(row, float(deviation))


class StochasticMatrix:
    """Immutable 6x6 row-stochastic matrix; construct through make_matrix()."""

    def __init__(self, entries):
        self.entries = entries
        self.entries.flags.writeable = False

    def __getitem__(self, key):
        a, b = key
        return float(self.entries[int(a), int(b)])

    def __eq__(self, other):
        return isinstance(other, StochasticMatrix) and np.array_equal(self.entries, other.entries)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self.entries.tobytes())

    def __str__(self):
        lines = []
        for state in STATES:
            values = ' '.join('%.6g' % v for v in self.entries[state])
            lines.append('%s: %s' % (state.label(), values))
        return '\n'.join(lines)

    def row(self, state):
        return self.entries[int(state)]

    def tolist(self):
        return self.entries.tolist()


class Distribution:
    def __init__(self, mass):
        self.mass = mass
        self.mass.flags.writeable = False

    def __getitem__(self, state):
        return float(self.mass[int(state)])

    def __eq__(self, other):
        return isinstance(other, Distribution) and np.array_equal(self.mass, other.mass)

    def __ne__(self, other):
        return not self == other

    def __str__(self):
        return ', '.join('%s=%.6g' % (s.label(), self.mass[s]) for s in STATES)


class AbsorptionReport:
    def __init__(self, transient_states, absorbing_states, fundamental, absorption_probs, expected_steps):
        self.transient_states = transient_states
        self.absorbing_states = absorbing_states
        self.fundamental = fundamental
        self.absorption_probs = absorption_probs
        self.expected_steps = expected_steps

    def __str__(self):
        return 'transient: %s, absorbing: %s, expected steps: %s' % (
            ','.join(s.label() for s in self.transient_states),
            ','.join(s.label() for s in self.absorbing_states),
            ', '.join('%.6g' % v for v in self.expected_steps))

    def absorption_probability(self, start, target):
        i = self.transient_states.index(StateId(start))
        j = self.absorbing_states.index(StateId(target))
        return float(self.absorption_probs[i, j])

    def expected_steps_from(self, start):
        return float(self.expected_steps[self.transient_states.index(StateId(start))])


def make_matrix(rows):
    """Validate a 6x6 table of probabilities without renormalizing it."""
    try:
        entries = np.array(rows, dtype=float)
    except (TypeError, ValueError):
        raise ShapeError('non-numeric input')
    n = len(STATES)
    if entries.shape != (n, n):
        raise ShapeError(entries.shape)
    outside = np.argwhere(~((entries >= 0.0) & (entries <= 1.0)))
    if len(outside):
        row, column = outside[0]
        raise RangeError(int(row), int(column), float(entries[row, column]))
    _check_stochastic_rows(entries, RowSumError)
    return StochasticMatrix(entries)


def published_matrix():
    return make_matrix(PUBLISHED_ROWS)


def identity_matrix():
    return make_matrix(np.eye(len(STATES)))


def make_distribution(values):
    mass = np.array(values, dtype=float)
    if mass.shape != (len(STATES),):
        raise ShapeError(mass.shape)
    outside = np.flatnonzero(~((mass >= 0.0) & (mass <= 1.0)))
    if len(outside):
        raise RangeError(0, int(outside[0]), float(mass[outside[0]]))
    _check_stochastic_rows(mass[np.newaxis, :], RowSumError)
    return Distribution(mass)


def point_mass(state):
    mass = np.zeros(len(STATES))
    mass[int(StateId(state))] = 1.0
    return Distribution(mass)


def matrix_power(P, n):
    """P^n by repeated squaring; rows are re-validated, never renormalized."""
    n = int(n)
    if n < 0:
        raise ValueError('matrix power needs n >= 0, got %d' % n)
    entries = np.linalg.matrix_power(P.entries, n)
    _check_stochastic_rows(entries, NumericalDriftError)
    return StochasticMatrix(entries)


def n_step_probability(P, start, target, n):
    return matrix_power(P, n)[StateId(start), StateId(target)]


def evolve(mu, P, n):
    mass = mu.mass.dot(matrix_power(P, n).entries)
    _check_stochastic_rows(mass[np.newaxis, :], NumericalDriftError)
    return Distribution(mass)


def classify_states(P):
    absorbing = [s for s in STATES if P.entries[s, s] == 1.0]
    transient = [s for s in STATES if s not in absorbing]
    return absorbing, transient


def absorbing_analysis(P):
    """Fundamental matrix N = (I - Q)^-1, absorption probabilities N R, expected steps N 1."""
    absorbing, transient = classify_states(P)
    if not absorbing:
        raise NoAbsorbingStateError()

    t = [int(s) for s in transient]
    a = [int(s) for s in absorbing]
    if not t:
        logger.debug('Every state is absorbing, transient block is empty')
        return AbsorptionReport(transient, absorbing, np.zeros((0, 0)), np.zeros((0, len(a))), np.zeros(0))

    Q = P.entries[np.ix_(t, t)]
    R = P.entries[np.ix_(t, a)]
    I_minus_Q = np.eye(len(t)) - Q
    condition = np.linalg.cond(I_minus_Q)
    if not condition <= CONDITION_LIMIT:
        raise SingularError(float(condition))

    # LU with partial pivoting; solving against I gives N column by column
    fundamental = np.linalg.solve(I_minus_Q, np.eye(len(t)))
    absorption_probs = fundamental.dot(R)
    expected_steps = fundamental.sum(axis=1)
    logger.debug('Absorbing analysis: condition %.3g, expected steps %s', condition, expected_steps)
    return AbsorptionReport(transient, absorbing, fundamental, absorption_probs, expected_steps)


def first_passage_probabilities(P, start, target, max_steps):
    """f[k-1] = P(first visit to target happens at step k), k = 1..max_steps."""
    start = StateId(start)
    target = StateId(target)
    # make target absorbing, then first passage mass is the CDF increment
    entries = np.array(P.entries)
    entries[target] = 0.0
    entries[target, target] = 1.0
    mass = np.zeros(len(STATES))
    mass[start] = 1.0
    result = np.zeros(int(max_steps))
    reached = mass[target]
    for k in range(int(max_steps)):
        mass = mass.dot(entries)
        result[k] = mass[target] - reached
        reached = mass[target]
    return result
