"""CSV fixtures of the published tables, and report serialization"""
import csv
import io
import json
import logging
import math
import os
import re

from estimation import CountTable, RegionRow, canonical_locality
from finding import FIELDS as FINDING_FIELDS, Finding
from horizontable import HorizonTable, TRANSITIONS, transition_label
from markovchain import STATES, StateId, make_matrix
from numberformat import NumberFormatHelper

logger = logging.getLogger(__name__)

DELEGATION_HEADER = ['locality', 'population', 'cases', 'deaths', 'hospitalized', 'non_hospitalized', 'uci',
                     'recovered', 'intubated']
REGION_HEADER = ['locality', 'r1', 'r2', 'r3', 'r4', 'r5', 'r6', 'r7', 'r8']
HORIZON_HEADER = ['days'] + [transition_label(t) for t in TRANSITIONS]
STATE_HEADER = ['state'] + [s.label() for s in STATES]
UNPUBLISHED = '-'

FIXTURES = {
    'table1': 'table1_delegations.csv',
    'table2': 'table2_regions.csv',
    'table3': 'table3_crossed.csv',
    'table4': 'table4_cdmx.csv',
    'table5': 'table5_tlalpan.csv',
    'table6': 'table6_gustavo_a_madero.csv',
    'table7': 'table7_iztapalapa.csv',
    'table8': 'table8_alvaro_obregon.csv',
}

INTEGER_PATTERN = re.compile(r'^[0-9]+$')
DECIMAL_PATTERN = re.compile(r'^[+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+)([eE][+-]?[0-9]+)?$')


class DataFileError(Exception):
    pass


class HeaderMismatchError(DataFileError):
    def __init__(self, expected, found):
        self.expected = expected
        self.found = found

    def __str__(self):
        return 'expected header %s, found %s' % (','.join(self.expected),
                                                 'nothing' if self.found is None else ','.join(self.found))


class FieldParseError(DataFileError):
    def __init__(self, line, column, value, reason):
        self.line = line
        self.column = column
        self.value = value
        self.reason = reason

    def __str__(self):
        return 'line %d, column %s: %s (%r)' % (self.line, self.column, self.reason, self.value)


class DuplicateHorizonError(DataFileError):
    def __init__(self, line, horizon):
        self.line = line
        self.horizon = horizon

    def __str__(self):
        return 'line %d: horizon %d appears twice' % (self.line, self.horizon)


def data_dir():
    default = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data')
    return os.getenv('COVIDCHAIN_DATA_DIR', default)


def fixture_path(name):
    return os.path.join(data_dir(), FIXTURES.get(name, name))


def load_fixture(name):
    with open(fixture_path(name), 'rb') as fo:
        return fo.read()


def _read_rows(data, expected_header=None):
    """Header and (line number, fields) pairs; '#' comment lines and blank lines are skipped."""
    try:
        text = data.decode('utf-8')
    except UnicodeDecodeError as e:
        raise FieldParseError(0, '-', data[e.start:e.end], 'not UTF-8')
    lines = [(number, line) for number, line in enumerate(text.splitlines(), start=1)
             if line.strip() and not line.lstrip().startswith('#')]
    if not lines:
        raise HeaderMismatchError(expected_header or [], None)
    parsed = list(zip((number for number, _ in lines), csv.reader(line for _, line in lines)))
    header = [h.strip() for h in parsed[0][1]]
    if expected_header is not None and header != expected_header:
        raise HeaderMismatchError(expected_header, header)
    rows = []
    for number, fields in parsed[1:]:
        if len(fields) != len(header):
            raise FieldParseError(number, len(fields), ','.join(fields),
                                  'expected %d fields, found %d' % (len(header), len(fields)))
        rows.append((number, [f.strip() for f in fields]))
    return header, rows


def _parse_int(value, line, column):
    if not INTEGER_PATTERN.match(value):
        raise FieldParseError(line, column, value, 'not a nonnegative integer')
    return int(value)


def _parse_float(value, line, column):
    if not DECIMAL_PATTERN.match(value):
        raise FieldParseError(line, column, value, 'not a decimal number')
    return float(value)


class DelegationRecord:
    def __init__(self, locality, population, cases, deaths, hospitalized, non_hospitalized, uci, recovered,
                 intubated):
        self.locality = locality
        self.population = population
        self.cases = cases
        self.deaths = deaths
        self.hospitalized = hospitalized
        self.non_hospitalized = non_hospitalized
        self.uci = uci
        self.recovered = recovered
        self.intubated = intubated

    def __eq__(self, other):
        return isinstance(other, DelegationRecord) and self.to_row() == other.to_row()

    def __ne__(self, other):
        return not self == other

    def __str__(self):
        return ', '.join('%s: %s' % pair for pair in zip(DELEGATION_HEADER, self.to_row()))

    def to_row(self):
        return [getattr(self, field) for field in DELEGATION_HEADER]


def parse_delegation_table(data):
    _, rows = _read_rows(data, DELEGATION_HEADER)
    records = []
    for line, fields in rows:
        values = [_parse_int(v, line, column) for column, v in zip(DELEGATION_HEADER[1:], fields[1:])]
        records.append(DelegationRecord(fields[0], *values))
    logger.debug('Parsed %d delegation records', len(records))
    return records


def parse_region_table(data):
    _, rows = _read_rows(data, REGION_HEADER)
    return [RegionRow(fields[0], [_parse_int(v, line, column) for column, v in zip(REGION_HEADER[1:], fields[1:])])
            for line, fields in rows]


def parse_horizon_table(data):
    _, rows = _read_rows(data, HORIZON_HEADER)
    seen = {}
    for line, fields in rows:
        horizon = _parse_int(fields[0], line, 'days')
        if horizon in seen:
            raise DuplicateHorizonError(line, horizon)
        values = []
        for column, value in zip(HORIZON_HEADER[1:], fields[1:]):
            probability = _parse_float(value, line, column)
            if not 0.0 <= probability <= 1.0:
                raise FieldParseError(line, column, value, 'probability outside [0, 1]')
            values.append(probability)
        seen[horizon] = values
    horizons = sorted(seen)
    return HorizonTable(horizons, [seen[h] for h in horizons])


def _state_header(header, line=1):
    if header[0] != 'state':
        raise HeaderMismatchError(STATE_HEADER, header)
    try:
        states = [StateId.parse(h) for h in header[1:]]
    except ValueError:
        raise HeaderMismatchError(STATE_HEADER, header)
    if states != list(STATES):
        raise HeaderMismatchError(STATE_HEADER, header)


def _state_rows(data, parse_cell):
    header, rows = _read_rows(data)
    _state_header(header)
    table = {}
    for line, fields in rows:
        try:
            origin = StateId.parse(fields[0])
        except ValueError:
            raise FieldParseError(line, 'state', fields[0], 'unknown state')
        if origin in table:
            raise FieldParseError(line, 'state', fields[0], 'state appears twice')
        table[origin] = [parse_cell(v, line, column) for column, v in zip(STATE_HEADER[1:], fields[1:])]
    missing = [s.label() for s in STATES if s not in table]
    if missing:
        raise FieldParseError(0, 'state', ','.join(missing), 'missing rows')
    return [table[s] for s in STATES]


def parse_count_table(data, locality='CDMX'):
    """Crossed counts; '-' marks an unpublished cell, 'F' is read as D."""
    def cell(value, line, column):
        return None if value == UNPUBLISHED else _parse_int(value, line, column)
    return CountTable(_state_rows(data, cell), locality)


def parse_matrix_rows(data):
    return _state_rows(data, _parse_float)


def parse_matrix_table(data):
    return make_matrix(parse_matrix_rows(data))


def check_delegation_record(record):
    checks = (
        Finding('HospitalizationSplit', record.locality, record.cases,
                record.hospitalized + record.non_hospitalized, 'hospitalized + non_hospitalized'),
        Finding('OutcomeSplit', record.locality, record.cases, record.recovered + record.deaths,
                'recovered + deaths'),
    )
    return Finding.failing(checks)


def check_aggregate(records, total_locality='CDMX'):
    """Each column of the delegations against the city-wide row."""
    totals = [r for r in records if canonical_locality(r.locality) == total_locality]
    if not totals:
        logger.warning('No %s row to check the delegations against', total_locality)
        return []
    parts = [r for r in records if canonical_locality(r.locality) != total_locality]
    findings = []
    for column in DELEGATION_HEADER[1:]:
        findings.append(Finding('AggregateColumn', column, getattr(totals[0], column),
                                sum(getattr(r, column) for r in parts), 'sum over %d delegations' % len(parts)))
    return findings


def rank_delegations(records, key='cases', total_locality='CDMX'):
    if key not in DELEGATION_HEADER[1:]:
        raise DataFileError('cannot rank delegations by %r' % key)
    parts = [r for r in records if canonical_locality(r.locality) != total_locality]
    return sorted(parts, key=lambda r: (-getattr(r, key), canonical_locality(r.locality)))


def _plain(value):
    if value is None or isinstance(value, (str, bool)):
        return value
    if hasattr(value, 'item'):
        value = value.item()
    if isinstance(value, StateId):
        return value.label()
    # JSON has no infinities; they travel as the text the CSV writer uses
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


class ReportSection:
    def __init__(self, name, columns, rows):
        self.name = name
        self.columns = list(columns)
        self.rows = [[_plain(v) for v in row] for row in rows]

    def __eq__(self, other):
        return isinstance(other, ReportSection) and (self.name, self.columns, self.rows) == (
            other.name, other.columns, other.rows)

    def __ne__(self, other):
        return not self == other

    def to_dict(self):
        return {'name': self.name, 'columns': self.columns, 'rows': self.rows}

    @classmethod
    def from_dict(cls, data):
        return cls(data['name'], data['columns'], data['rows'])


class ReportDocument:
    def __init__(self, metadata=None, sections=None):
        self.metadata = dict((k, _plain(v) if not isinstance(v, (list, tuple)) else [_plain(x) for x in v])
                             for k, v in (metadata or {}).items())
        self.sections = list(sections or [])

    def __eq__(self, other):
        return isinstance(other, ReportDocument) and (self.metadata, self.sections) == (
            other.metadata, other.sections)

    def __ne__(self, other):
        return not self == other

    def section(self, name):
        for section in self.sections:
            if section.name == name:
                return section
        raise KeyError(name)

    def to_dict(self):
        return {'metadata': self.metadata, 'sections': [s.to_dict() for s in self.sections]}

    @classmethod
    def from_dict(cls, data):
        return cls(data.get('metadata', {}), [ReportSection.from_dict(s) for s in data.get('sections', [])])


def emit_report(doc, format='csv'):
    """Deterministic bytes for a report; CSV sections reuse the parsers' headers."""
    if format == 'json':
        text = json.dumps(doc.to_dict(), indent=2, sort_keys=True, allow_nan=False) + '\n'
        return text.encode('utf-8')
    if format != 'csv':
        raise DataFileError('unknown report format: %s' % format)
    out = io.StringIO()
    writer = csv.writer(out, lineterminator='\n')
    for key, value in doc.metadata.items():
        if isinstance(value, list):
            value = ','.join(NumberFormatHelper.format_value(v) for v in value)
        out.write('# %s: %s\n' % (key, NumberFormatHelper.format_value(value)))
    for i, section in enumerate(doc.sections):
        if i:
            out.write('\n')
        out.write('# section: %s\n' % section.name)
        writer.writerow(section.columns)
        for row in section.rows:
            writer.writerow([NumberFormatHelper.format_value(v) for v in row])
    return out.getvalue().encode('utf-8')


def parse_report(data):
    try:
        return ReportDocument.from_dict(json.loads(data.decode('utf-8')))
    except (ValueError, KeyError, TypeError) as e:
        raise DataFileError('not a JSON report: %s' % e)


def matrix_section(P, name='matrix'):
    return ReportSection(name, STATE_HEADER, [[s.label()] + list(P.row(s)) for s in STATES])


def count_section(counts, name='counts'):
    return ReportSection(name, STATE_HEADER,
                         [[s.label()] + [UNPUBLISHED if c is None else c for c in counts.counts[s]]
                          for s in STATES])


def horizon_section(table, name='horizons'):
    return ReportSection(name, ['days'] + table.labels(),
                         [[horizon] + list(values) for horizon, values in table.rows()])


def findings_section(findings, name='findings'):
    return ReportSection(name, FINDING_FIELDS, [f.to_row() for f in findings])


def absorption_sections(report):
    transient = [s.label() for s in report.transient_states]
    absorbing = [s.label() for s in report.absorbing_states]
    return [
        ReportSection('fundamental', ['state'] + transient,
                      [[label] + list(row) for label, row in zip(transient, report.fundamental)]),
        ReportSection('absorption_probs', ['state'] + absorbing,
                      [[label] + list(row) for label, row in zip(transient, report.absorption_probs)]),
        ReportSection('expected_steps', ['state', 'days'],
                      [[label, steps] for label, steps in zip(transient, report.expected_steps)]),
    ]


def cohort_section(result, name='occupancy'):
    return ReportSection(name, ['day'] + [s.label() for s in STATES],
                         [[day] + list(counts) for day, counts in enumerate(result.occupancy)])


def zscore_section(scores, name='zscores'):
    return ReportSection(name, ['day', 'state', 'frequency', 'analytic', 'z', 'skipped'],
                         [[z.day, z.state.label(), z.frequency, z.analytic, z.z, z.skipped] for z in scores])


def delegation_section(records, name='delegations'):
    return ReportSection(name, DELEGATION_HEADER, [r.to_row() for r in records])
