"""n-step transition probabilities at a list of day horizons"""
import logging

import numpy as np

from finding import Finding
from markovchain import StateId, matrix_power

logger = logging.getLogger(__name__)

# column order of the published horizon tables
TRANSITIONS = (
    (StateId.E, StateId.D),
    (StateId.H, StateId.D),
    (StateId.U, StateId.D),
    (StateId.I, StateId.D),
    (StateId.H, StateId.U),
    (StateId.U, StateId.I),
    (StateId.H, StateId.I),
    (StateId.H, StateId.S),
    (StateId.U, StateId.S),
    (StateId.I, StateId.S),
)

TABLE4_HORIZONS = (7, 15, 21, 30, 45, 60, 90, 120, 180, 240, 365)

# computed powers may overshoot 1 by rounding
VALUE_TOLERANCE = 1e-12

# published cells: absolute agreement for plain decimals, relative for scientific ones
ABSOLUTE_TOLERANCE = 5e-4
RELATIVE_TOLERANCE = 1e-2
SCIENTIFIC_BELOW = 0.01


class HorizonTableError(Exception):
    pass


def transition_label(transition):
    """(E, D) -> 'EF', the column naming of the published tables."""
    a, b = transition
    return a.label(display_alias=True) + b.label(display_alias=True)


def parse_transition(text):
    text = text.strip()
    if len(text) != 2:
        raise ValueError('transition must be two state letters, got %r' % text)
    return StateId.parse(text[0]), StateId.parse(text[1])


class HorizonTable:
    def __init__(self, horizons, values, transitions=TRANSITIONS):
        values = np.array(values, dtype=float).reshape(len(horizons), len(transitions))
        horizons = tuple(int(h) for h in horizons)
        if any(b <= a for a, b in zip(horizons, horizons[1:])):
            raise HorizonTableError('horizons must be strictly increasing: %s' % (horizons,))
        if horizons and horizons[0] < 0:
            raise HorizonTableError('horizons must be nonnegative')
        if not ((values >= 0.0) & (values <= 1.0 + VALUE_TOLERANCE)).all():
            raise HorizonTableError('horizon table values must lie in [0, 1]')
        values.flags.writeable = False
        self.horizons = horizons
        self.values = values
        self.transitions = tuple(transitions)

    def __len__(self):
        return len(self.horizons)

    def __eq__(self, other):
        return (isinstance(other, HorizonTable) and self.horizons == other.horizons and
                self.transitions == other.transitions and np.array_equal(self.values, other.values))

    def __ne__(self, other):
        return not self == other

    def __str__(self):
        return 'HorizonTable(days=%s, transitions=%s)' % (
            ','.join(str(h) for h in self.horizons), ','.join(transition_label(t) for t in self.transitions))

    def labels(self):
        return [transition_label(t) for t in self.transitions]

    def value(self, horizon, start, target):
        row = self.horizons.index(int(horizon))
        column = self.transitions.index((StateId(start), StateId(target)))
        return float(self.values[row, column])

    def rows(self):
        for horizon, values in zip(self.horizons, self.values):
            yield horizon, values


def horizon_table_from_matrix(P, horizons, transitions=TRANSITIONS):
    """Forward computation: entry (n, a->b) is P^n(a, b)."""
    horizons = sorted(set(int(h) for h in horizons))
    values = []
    for n in horizons:
        power = matrix_power(P, n)
        values.append([power[a, b] for a, b in transitions])
    logger.debug('Computed horizon table for %d horizons', len(horizons))
    return HorizonTable(horizons, values, transitions)


def cell_tolerance(reference):
    if reference >= SCIENTIFIC_BELOW:
        return ABSOLUTE_TOLERANCE
    return RELATIVE_TOLERANCE * reference


def compare_horizon_tables(computed, reference):
    """One HorizonDeviation finding per cell the two tables share.

    Cells of at least 0.01 pass within 5e-4 absolute, smaller ones within 1% relative.
    """
    findings = []
    shared = [h for h in computed.horizons if h in reference.horizons]
    for horizon in shared:
        for transition in computed.transitions:
            if transition not in reference.transitions:
                continue
            expected = reference.value(horizon, *transition)
            observed = computed.value(horizon, *transition)
            findings.append(Finding('HorizonDeviation', '%s@%d' % (transition_label(transition), horizon),
                                    expected, observed, 'matrix power vs published table', cell_tolerance(expected)))
    logger.debug('Compared %d cells over %d shared horizons', len(findings), len(shared))
    return findings
