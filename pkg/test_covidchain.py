"""covidchain command line testing"""
import pytest

import covidchain
import datafiles
from argumenthandler import ArgumentHandler, UsageError, parse_days, parse_matrix_source
from horizontable import TABLE4_HORIZONS


def run(tmp_path, *args, **kwargs):
    out = tmp_path / kwargs.get('name', 'report.out')
    status = covidchain.main(list(args) + ['--out', str(out)])
    data = out.read_bytes() if out.exists() else b''
    return status, data


def write(tmp_path, name, data):
    path = tmp_path / name
    path.write_bytes(data)
    return str(path)


def published_matrix_csv(s_row='0.68,0.32,0,0,0,0'):
    return ('state,S,E,H,U,I,D\nS,%s\nE,0.31,0.65,0.04,0,0,0\nH,0.66,0,0.08,0.01,0.02,0.23\n'
            'U,0.49,0,0,0.20,0.26,0.05\nI,0.25,0,0,0,0,0.75\nD,0,0,0,0,0,1\n' % s_row).encode()


def test_parse_days():
    assert parse_days('7,15,30') == [7, 15, 30]
    assert parse_days('1..3,2') == [1, 2, 3]
    assert parse_days('table4') == list(TABLE4_HORIZONS)
    assert parse_days(None) is None
    with pytest.raises(UsageError):
        parse_days('-1')
    with pytest.raises(UsageError):
        parse_days('seven')


def test_parse_matrix_source():
    assert parse_matrix_source('paper') == ('paper', None)
    assert parse_matrix_source('file:m.csv') == ('file', 'm.csv')
    assert parse_matrix_source('mle') == ('mle', None)
    assert parse_matrix_source('fit:t.csv') == ('fit', 't.csv')
    with pytest.raises(UsageError):
        parse_matrix_source('file')
    with pytest.raises(UsageError):
        parse_matrix_source('guess')


def test_config_file_supplies_defaults(tmp_path):
    config = write(tmp_path, 'config.yml', b'seed: 7\nn: 500\ndays: [7, 15]\nstart:\n')
    cli = ArgumentHandler(['simulate', '--config-file', config, '--n', '50']).get_config()
    assert cli.seed == 7
    assert cli.n == 50
    assert cli.days == [7, 15]
    assert cli.start.label() == 'I'


def test_malformed_config_file_is_a_usage_error(tmp_path):
    broken = write(tmp_path, 'broken.yml', b'seed: [1, 2\n')
    assert run(tmp_path, 'validate', '--config-file', broken)[0] == 2
    with pytest.raises(UsageError):
        ArgumentHandler.read_config_file(broken)
    listing = write(tmp_path, 'listing.yml', b'- seed\n- n\n')
    assert run(tmp_path, 'validate', '--config-file', listing)[0] == 2


def test_version(capsys):
    assert covidchain.main(['--version']) == 0
    assert capsys.readouterr().out == 'covidchain %s\n' % covidchain.__version__


def test_missing_subcommand():
    assert covidchain.main([]) == 2


def test_usage_errors(tmp_path):
    assert run(tmp_path, 'horizons', '--matrix', 'guess')[0] == 2
    assert run(tmp_path, 'horizons', '--days', 'seven')[0] == 2
    assert run(tmp_path, 'simulate', '--n', '0')[0] == 2
    assert run(tmp_path, 'simulate', '--start', 'X')[0] == 2
    assert run(tmp_path, 'plotdata', '--transitions', 'IFS')[0] == 2
    assert covidchain.main(['nosuchcommand']) == 2


def test_validate_published_matrix(tmp_path):
    status, data = run(tmp_path, 'validate', '--matrix', 'paper')
    assert status == 0
    assert b'# section: matrix' in data


def test_validate_bad_row_sum(tmp_path):
    bad = write(tmp_path, 'bad.csv', published_matrix_csv('0.67,0.32,0,0,0,0'))
    status, data = run(tmp_path, 'validate', '--matrix', 'file:' + bad, '--format', 'json')
    assert status == 1
    rows = datafiles.parse_report(data).section('findings').rows
    assert len(rows) == 1
    assert rows[0][0] == 'RowSumError'
    assert rows[0][1] == 'S'


def test_validate_missing_file(tmp_path):
    assert run(tmp_path, 'validate', '--matrix', 'file:' + str(tmp_path / 'missing.csv'))[0] == 2


def test_validate_matrix_file(tmp_path):
    good = write(tmp_path, 'good.csv', published_matrix_csv())
    assert run(tmp_path, 'validate', '--matrix', 'file:' + good)[0] == 0


def test_horizons_default_days(tmp_path):
    status, data = run(tmp_path, 'horizons')
    assert status == 0
    section = data.split(b'\n\n')[0]
    table = datafiles.parse_horizon_table(section)
    assert table.horizons == TABLE4_HORIZONS


def test_horizons_strict_reports_deviations(tmp_path):
    assert run(tmp_path, 'horizons', '--strict')[0] == 1


def test_horizons_single_day(tmp_path):
    status, data = run(tmp_path, 'horizons', '--days', '7', '--format', 'json')
    assert status == 0
    doc = datafiles.parse_report(data)
    rows = doc.section('horizons').rows
    assert [r[0] for r in rows] == [7]
    assert rows[0][4] == pytest.approx(0.7565, abs=5e-3)
    assert len(doc.section('findings').rows) == 10


def test_absorb(tmp_path):
    status, data = run(tmp_path, 'absorb', '--format', 'json')
    assert status == 0
    doc = datafiles.parse_report(data)
    steps = dict(doc.section('expected_steps').rows)
    assert steps['I'] == pytest.approx(50.5762156728, rel=1e-6)
    assert doc.section('absorption_probs').columns == ['state', 'D']


def test_absorb_identity_matrix(tmp_path):
    identity = write(tmp_path, 'identity.csv', b'state,S,E,H,U,I,D\n' + b''.join(
        ('%s,%s\n' % (s, ','.join('1' if s == t else '0' for t in 'SEHUID'))).encode() for s in 'SEHUID'))
    status, data = run(tmp_path, 'absorb', '--matrix', 'file:' + identity, '--format', 'json')
    assert status == 0
    assert datafiles.parse_report(data).section('expected_steps').rows == []


def test_estimate(tmp_path):
    status, data = run(tmp_path, 'estimate', '--format', 'json')
    assert status == 0
    doc = datafiles.parse_report(data)
    findings = dict(((r[0], r[1]), r[4]) for r in doc.section('findings').rows)
    assert findings[('IntubatedTotal', 'CDMX')] == 2
    assert findings[('CountVsOfficial', 'E:cases')] == 42
    assert findings[('OverlappingDestinations', 'U')] == 1715
    matrix = dict((r[0], r[1:]) for r in doc.section('matrix').rows)
    assert matrix['I'][5] == pytest.approx(12631 / 16795)


def test_estimate_strict(tmp_path):
    assert run(tmp_path, 'estimate', '--strict')[0] == 1


def test_estimate_empty_row(tmp_path):
    counts = write(tmp_path, 'counts.csv', b'state,S,E,H,U,I,D\nS,10,-,-,-,-,-\nE,-,10,-,-,-,-\nH,-,-,0,-,-,-\n'
                                           b'U,-,-,-,10,-,-\nI,-,-,-,-,10,-\nD,-,-,-,-,-,10\n')
    assert run(tmp_path, 'estimate', '--input', counts)[0] == 1


def test_matrix_from_counts(tmp_path):
    assert run(tmp_path, 'validate', '--matrix', 'mle')[0] == 0


def test_fit_appendix_table(tmp_path):
    status, data = run(tmp_path, 'fit', '--input', datafiles.fixture_path('table5'), '--max-iter', '5',
                       '--format', 'json')
    assert status == 0
    summary = datafiles.parse_report(data).section('fit')
    assert summary.columns == ['residual', 'iterations', 'converged', 'reason']
    assert summary.rows[0][1] <= 5


def test_fit_empty_file(tmp_path):
    empty = write(tmp_path, 'empty.csv', b'')
    assert run(tmp_path, 'fit', '--input', empty)[0] == 1


def test_fit_header_only(tmp_path):
    header = write(tmp_path, 'header.csv', b'days,EF,HF,UF,IF,HU,UI,HI,HS,US,IS\n')
    assert run(tmp_path, 'fit', '--input', header)[0] == 1


def test_simulate_is_byte_identical(tmp_path):
    args = ['simulate', '--start', 'I', '--days', '7', '--n', '3000', '--seed', '42']
    first = run(tmp_path, *args, name='first.csv')
    second = run(tmp_path, *(args + ['--workers', '3']), name='second.csv')
    assert first[0] == second[0] == 0
    assert first[1] == second[1]
    assert b'# section: occupancy' in first[1]
    assert b'# section: zscores' in first[1]


def test_plotdata(tmp_path):
    status, data = run(tmp_path, 'plotdata', '--days', '1..3', '--transitions', 'IF,HS', '--format', 'json')
    assert status == 0
    rows = datafiles.parse_report(data).section('plotdata').rows
    assert len(rows) == 6
    assert rows[0] == [1, 'I', 'D', 0.75]


def test_delegations(tmp_path):
    status, data = run(tmp_path, 'delegations', '--format', 'json')
    assert status == 0
    doc = datafiles.parse_report(data)
    ranking = doc.section('ranking').rows
    assert ranking[0][1] == 'Iztapalapa'
    assert len(ranking) == 16
    kinds = set(r[0] for r in doc.section('findings').rows)
    assert {'HospitalizationSplit', 'AggregateColumn', 'IntubatedTotal'} <= kinds


def test_refuses_to_overwrite_input(tmp_path):
    counts = write(tmp_path, 'counts.csv', datafiles.load_fixture('table3'))
    assert covidchain.main(['estimate', '--input', counts, '--out', counts]) == 1
    assert open(counts, 'rb').read() == datafiles.load_fixture('table3')
