"""transition matrices from published counts, and Venn-region consistency checks"""
import logging

import numpy as np

from finding import Finding
from markovchain import STATES, StateId, make_matrix, published_matrix

logger = logging.getLogger(__name__)

# origin states whose unpublished remainder returns to S; S and E keep it as a self-loop
RETURN_TO_SUSCEPTIBLE = (StateId.H, StateId.U, StateId.I)

REGION_LABELS = ('I', 'II', 'III', 'IV', 'V', 'VI', 'VII', 'VIII')

# abbreviations used by the published tables -> one borough name
LOCALITY_ALIASES = {
    'cdmx': 'CDMX',
    'alvaro o': 'Alvaro Obregon',
    'alvaro o.': 'Alvaro Obregon',
    'alvaro obregon': 'Alvaro Obregon',
    'azcapotzalco': 'Azcapotzalco',
    'benito j': 'Benito Juarez',
    'bjuarez': 'Benito Juarez',
    'benito juarez': 'Benito Juarez',
    'coyoacan': 'Coyoacan',
    'cuajimalpa': 'Cuajimalpa',
    'cuauhtemoc': 'Cuauhtemoc',
    'gustavo a.': 'Gustavo A. Madero',
    'gustavo a': 'Gustavo A. Madero',
    'gustavo a. madero': 'Gustavo A. Madero',
    'gustavo a madero': 'Gustavo A. Madero',
    'iztacalco': 'Iztacalco',
    'iztapalapa': 'Iztapalapa',
    'magdalena c': 'Magdalena Contreras',
    'magcontreras': 'Magdalena Contreras',
    'magdalena contreras': 'Magdalena Contreras',
    'miguel h': 'Miguel Hidalgo',
    'miguel hidalgo': 'Miguel Hidalgo',
    'milpa a': 'Milpa Alta',
    'milpa alta': 'Milpa Alta',
    'tlahuac': 'Tlahuac',
    'tlalpan': 'Tlalpan',
    'venustiano c': 'Venustiano Carranza',
    'vcarranza': 'Venustiano Carranza',
    'venustiano carranza': 'Venustiano Carranza',
    'xochimilco': 'Xochimilco',
}


class EstimationError(Exception):
    pass


class EmptyRowError(EstimationError):
    def __init__(self, row):
        self.row = row

    def __str__(self):
        return 'count row %s has no positive total' % StateId(self.row).label()


class NegativeCountError(EstimationError):
    def __init__(self, row, column, value):
        self.row = row
        self.column = column
        self.value = value

    def __str__(self):
        return 'count (%s, %s) = %r is negative' % (StateId(self.row).label(), StateId(self.column).label(),
                                                    self.value)


class MaskError(EstimationError):
    def __init__(self, row, reason):
        self.row = row
        self.reason = reason

    def __str__(self):
        return 'structure mask row %s: %s' % (StateId(self.row).label(), self.reason)


def canonical_locality(name):
    key = ' '.join(str(name).split()).lower()
    return LOCALITY_ALIASES.get(key, ' '.join(str(name).split()))


class CountTable:
    """Per-origin counts; None marks a cell the source left unpublished ("-")."""

    def __init__(self, counts, locality='CDMX'):
        n = len(STATES)
        if len(counts) != n or any(len(row) != n for row in counts):
            raise EstimationError('count table must be %dx%d' % (n, n))
        self.counts = tuple(tuple(None if c is None else int(c) for c in row) for row in counts)
        self.locality = locality
        for i, row in enumerate(self.counts):
            for j, c in enumerate(row):
                if c is not None and c < 0:
                    raise NegativeCountError(i, j, c)

    def __getitem__(self, key):
        a, b = key
        return self.counts[int(a)][int(b)]

    def __eq__(self, other):
        return isinstance(other, CountTable) and self.counts == other.counts

    def __ne__(self, other):
        return not self == other

    def is_published(self, a, b):
        return self[a, b] is not None

    def destinations(self, origin):
        origin = StateId(origin)
        return [(s, self[origin, s]) for s in STATES if s != origin and self[origin, s] is not None]

    def origin_total(self, origin):
        """Occupancy count of the origin, raised to the published destination sum if that is larger."""
        origin = StateId(origin)
        destination_sum = sum(c for _, c in self.destinations(origin))
        occupancy = self[origin, origin]
        if occupancy is None:
            return destination_sum
        return max(occupancy, destination_sum)


class RegionRow:
    def __init__(self, locality, regions):
        if len(regions) != len(REGION_LABELS):
            raise EstimationError('%s: expected %d region counts, got %d' % (locality, len(REGION_LABELS),
                                                                             len(regions)))
        self.locality = locality
        self.regions = tuple(int(r) for r in regions)
        for label, value in zip(REGION_LABELS, self.regions):
            if value < 0:
                raise EstimationError('%s: region %s is negative (%d)' % (locality, label, value))

    def __eq__(self, other):
        return isinstance(other, RegionRow) and (self.locality, self.regions) == (other.locality, other.regions)

    def __ne__(self, other):
        return not self == other

    def __str__(self):
        return '%s: %s' % (self.locality, ', '.join('%s=%d' % p for p in zip(REGION_LABELS, self.regions)))

    def region(self, label):
        return self.regions[REGION_LABELS.index(label)]


class VennCounts:
    def __init__(self, u_only, i_only, d_only_hospitalized, ui_only, ud_only, id_only, uid, hospitalized_total):
        self.u_only = u_only
        self.i_only = i_only
        self.d_only_hospitalized = d_only_hospitalized
        self.ui_only = ui_only
        self.ud_only = ud_only
        self.id_only = id_only
        self.uid = uid
        self.hospitalized_total = hospitalized_total

    @property
    def uci_total(self):
        return self.u_only + self.ui_only + self.ud_only + self.uid

    @property
    def intubated_total(self):
        return self.i_only + self.ui_only + self.id_only + self.uid

    @property
    def uci_and_intubated(self):
        return self.ui_only + self.uid

    @property
    def uci_and_dead(self):
        return self.ud_only + self.uid

    @property
    def intubated_and_dead(self):
        return self.id_only + self.uid

    def __str__(self):
        return 'U=%d I=%d U&I=%d U&D=%d I&D=%d hospitalized=%d' % (
            self.uci_total, self.intubated_total, self.uci_and_intubated, self.uci_and_dead,
            self.intubated_and_dead, self.hospitalized_total)


class StructureMask:
    """Which transitions may be nonzero; the D row allows only D -> D."""

    def __init__(self, allowed):
        allowed = np.array(allowed, dtype=bool)
        n = len(STATES)
        if allowed.shape != (n, n):
            raise EstimationError('structure mask must be %dx%d' % (n, n))
        for state in STATES:
            if not allowed[state].any():
                raise MaskError(state, 'no allowed transition')
        death_row = np.zeros(n, dtype=bool)
        death_row[StateId.D] = True
        if not np.array_equal(allowed[StateId.D], death_row):
            raise MaskError(StateId.D, 'must allow only D -> D')
        allowed.flags.writeable = False
        self.allowed = allowed

    def __eq__(self, other):
        return isinstance(other, StructureMask) and np.array_equal(self.allowed, other.allowed)

    def __ne__(self, other):
        return not self == other

    def __str__(self):
        return ', '.join('%s->%s' % (a.label(), b.label()) for a in STATES for b in STATES if self.allowed[a, b])

    def free_entries(self):
        return [(a, b) for a in STATES for b in STATES if self.allowed[a, b]]

    @classmethod
    def from_matrix(cls, P):
        return cls(P.entries > 0.0)

    @classmethod
    def published(cls):
        return cls.from_matrix(published_matrix())


def mle_from_counts(counts):
    """Frequency estimate p_ij = n_ij / n_i over the published cells.

    The remainder of each origin row goes to S for H, U and I (recovered
    patients are susceptible again) and to the self-loop for S and E. The D row
    is always absorbing.
    """
    n = len(STATES)
    rows = np.zeros((n, n))
    for origin in STATES:
        if origin == StateId.D:
            rows[origin, origin] = 1.0
            continue
        total = counts.origin_total(origin)
        if total <= 0:
            raise EmptyRowError(origin)
        published = 0
        for destination, count in counts.destinations(origin):
            rows[origin, destination] = count / total
            published += count
        remainder = StateId.S if origin in RETURN_TO_SUSCEPTIBLE else origin
        rows[origin, remainder] += (total - published) / total
        logger.debug('MLE row %s: total %d, published destinations %d', origin.label(), total, published)
    return make_matrix(rows)


def count_table_findings(counts):
    """Rows whose published destination counts exceed the origin's own count (overlapping sets)."""
    findings = []
    for origin in STATES:
        occupancy = counts[origin, origin]
        destination_sum = sum(c for _, c in counts.destinations(origin))
        if origin != StateId.D and occupancy is not None and destination_sum > occupancy:
            findings.append(Finding('OverlappingDestinations', origin.label(), occupancy, destination_sum,
                                    'destination counts overlap; row normalized by their sum'))
    return findings


def compare_with_reference(estimated, reference, threshold=0.2):
    """One MatrixDeviation finding per origin row whose largest entry deviation exceeds threshold."""
    findings = []
    for origin in STATES:
        deviations = np.abs(estimated.row(origin) - reference.row(origin))
        column = StateId(int(np.argmax(deviations)))
        if deviations[column] > threshold:
            findings.append(Finding('MatrixDeviation', '%s->%s' % (origin.label(), column.label()),
                                    reference[origin, column], estimated[origin, column],
                                    'estimated row differs from reference by more than %g' % threshold))
    return findings


def check_counts_against_delegation(counts, record):
    """Compare the occupancy diagonal of a count table with the locality's official totals."""
    pairs = (
        (StateId.S, 'population'),
        (StateId.E, 'cases'),
        (StateId.H, 'hospitalized'),
        (StateId.U, 'uci'),
        (StateId.I, 'intubated'),
        (StateId.D, 'deaths'),
    )
    findings = []
    for state, column in pairs:
        observed = counts[state, state]
        if observed is None:
            logger.debug('Count (%s, %s) unpublished, skipping %s check', state.label(), state.label(), column)
            continue
        findings.append(Finding('CountVsOfficial', '%s:%s' % (state.label(), column),
                                getattr(record, column), observed))
    return findings


def decompose_regions(row, ucitotal, intubated_total):
    """Map regions I..VIII onto the U/I/D Venn diagram and check it against official totals.

    Returns (VennCounts, violations); violations are findings, never exceptions.
    """
    r = row.regions
    venn = VennCounts(u_only=r[0], d_only_hospitalized=r[1], i_only=r[2], ui_only=r[3], ud_only=r[4],
                      id_only=r[5], uid=r[6], hospitalized_total=r[7])
    checks = (
        Finding('UciTotal', row.locality, ucitotal, venn.uci_total, 'regions I+IV+V+VII'),
        Finding('IntubatedTotal', row.locality, intubated_total, venn.intubated_total, 'regions III+IV+VI+VII'),
    )
    return venn, Finding.failing(checks)


def check_crossed_consistency(crossed, venn):
    """U&I, U&D and I&D intersections of the regions against the crossed count table."""
    identities = (
        ('CrossedUI', StateId.U, StateId.I, venn.uci_and_intubated, 'regions IV+VII'),
        ('CrossedUD', StateId.U, StateId.D, venn.uci_and_dead, 'regions V+VII'),
        ('CrossedID', StateId.I, StateId.D, venn.intubated_and_dead, 'regions VI+VII'),
    )
    findings = []
    for kind, a, b, observed, message in identities:
        expected = crossed[a, b]
        if expected is None:
            logger.debug('Crossed count (%s, %s) unpublished, skipping %s', a.label(), b.label(), kind)
            continue
        findings.append(Finding(kind, '%s&%s' % (a.label(), b.label()), expected, observed, message))
    return findings


def check_region_table(regions, delegations):
    """Decompose every region row against its official record; returns the failing findings."""
    records = dict((canonical_locality(r.locality), r) for r in delegations)
    findings = []
    for row in regions:
        record = records.get(canonical_locality(row.locality))
        if record is None:
            logger.warning('No official record for locality %s', row.locality)
            findings.append(Finding('MissingLocality', row.locality, 1, 0, 'no matching official record'))
            continue
        venn, violations = decompose_regions(row, record.uci, record.intubated)
        findings.extend(violations)
        findings.extend(Finding.failing([Finding('HospitalizedTotal', row.locality, record.hospitalized,
                                                 venn.hospitalized_total, 'region VIII')]))
    logger.info('Checked %d region rows, %d findings', len(regions), len(findings))
    return findings
