"""estimation testing"""
import numpy as np
import pytest

import datafiles
from estimation import (CountTable, EmptyRowError, MaskError, NegativeCountError, RegionRow, StructureMask,
                        canonical_locality, check_counts_against_delegation, check_crossed_consistency,
                        check_region_table, compare_with_reference, count_table_findings, decompose_regions,
                        mle_from_counts)
from finding import Finding
from markovchain import STATES, published_matrix

S, E, H, U, I, D = STATES  # noqa: E741


def table3():
    return datafiles.parse_count_table(datafiles.load_fixture('table3'))


def records():
    return datafiles.parse_delegation_table(datafiles.load_fixture('table1'))


def regions():
    return datafiles.parse_region_table(datafiles.load_fixture('table2'))


def record(name):
    return [r for r in records() if canonical_locality(r.locality) == name][0]


def region(name):
    return [r for r in regions() if canonical_locality(r.locality) == name][0]


def test_mle_rows():
    P = mle_from_counts(table3())
    assert P[I, D] == pytest.approx(12631 / 16795)
    assert P[I, S] == pytest.approx(4164 / 16795)
    assert P[U, I] == pytest.approx(5516 / 9409)
    assert P[U, D] == pytest.approx(3893 / 9409)
    assert P[U, S] == 0.0
    assert P[H, S] == 1.0
    assert P[S, S] == 1.0
    assert P[E, E] == 1.0
    assert P[D, D] == 1.0


def test_mle_synthetic_row():
    counts = [[None] * 6 for _ in STATES]
    for state in STATES:
        counts[state][state] = 10
    counts[I] = [1, 0, 0, 0, 0, 3]
    P = mle_from_counts(CountTable(counts))
    assert list(P.row(I)) == [0.25, 0.0, 0.0, 0.0, 0.0, 0.75]


def test_mle_row_without_counts():
    counts = [[None] * 6 for _ in STATES]
    for state in STATES:
        counts[state][state] = 10
    counts[H][H] = 0
    with pytest.raises(EmptyRowError) as e:
        mle_from_counts(CountTable(counts))
    assert e.value.row == H


def test_negative_count():
    counts = [[1] * 6 for _ in STATES]
    counts[U][I] = -1
    with pytest.raises(NegativeCountError):
        CountTable(counts)


def test_overlapping_destinations():
    findings = count_table_findings(table3())
    assert len(findings) == 1
    assert findings[0].subject == 'U'
    assert findings[0].difference == 9409 - 7694


def test_u_row_differs_from_published_matrix():
    findings = compare_with_reference(mle_from_counts(table3()), published_matrix())
    subjects = [f.subject for f in findings]
    assert 'U->S' in subjects
    u_row = [f for f in findings if f.subject == 'U->S'][0]
    assert u_row.expected == 0.49
    assert u_row.observed == 0.0
    assert all(f.kind == 'MatrixDeviation' for f in findings)


def test_identical_matrices_have_no_deviation():
    assert compare_with_reference(published_matrix(), published_matrix()) == []


def test_counts_against_official_totals():
    findings = check_counts_against_delegation(table3(), record('CDMX'))
    differences = dict((f.subject, f.difference) for f in findings)
    assert differences['E:cases'] == 42
    assert differences['I:intubated'] == 2
    assert differences['S:population'] == 0
    assert differences['D:deaths'] == 0
    assert len(Finding.failing(findings)) == 2


def test_decompose_cdmx():
    venn, violations = decompose_regions(region('CDMX'), 7694, 16793)
    assert venn.uci_total == 7694
    assert venn.intubated_total == 16795
    assert [(v.kind, v.difference) for v in violations] == [('IntubatedTotal', 2)]


def test_decompose_gustavo_a_madero():
    venn, violations = decompose_regions(region('Gustavo A. Madero'), 905, 2246)
    assert venn.uci_total == 905
    assert violations == []


def test_crossed_consistency():
    venn, _ = decompose_regions(region('CDMX'), 7694, 16793)
    findings = check_crossed_consistency(table3(), venn)
    assert [f.kind for f in findings] == ['CrossedUI', 'CrossedUD', 'CrossedID']
    assert all(f.passed for f in findings)


def test_crossed_consistency_detects_shifted_region():
    row = region('CDMX')
    shifted = list(row.regions)
    shifted[6] += 1
    venn, _ = decompose_regions(RegionRow(row.locality, shifted), 7694, 16793)
    findings = check_crossed_consistency(table3(), venn)
    assert [f.difference for f in Finding.failing(findings)] == [1, 1, 1]


def test_region_table_mostly_consistent():
    findings = check_region_table(regions(), records())
    failing_localities = set(f.subject for f in findings)
    assert failing_localities == {'CDMX'}
    assert len(regions()) - len(failing_localities) >= 15


def test_region_table_missing_locality():
    findings = check_region_table([RegionRow('Atlantis', [0] * 8)], records())
    assert [f.kind for f in findings] == ['MissingLocality']


def test_canonical_locality():
    assert canonical_locality('Gustavo A.') == canonical_locality('Gustavo A. Madero')
    assert canonical_locality('Alvaro O') == canonical_locality('Alvaro O.')
    assert canonical_locality('  Tlalpan ') == 'Tlalpan'
    assert canonical_locality('Somewhere') == 'Somewhere'


def test_every_region_row_pairs_with_a_record():
    names = set(canonical_locality(r.locality) for r in records())
    assert all(canonical_locality(r.locality) in names for r in regions())


def test_structure_mask_published():
    mask = StructureMask.published()
    assert mask.allowed[H, U]
    assert not mask.allowed[S, D]
    assert (D, D) in mask.free_entries()


def test_structure_mask_death_row():
    allowed = np.ones((6, 6), dtype=bool)
    with pytest.raises(MaskError) as e:
        StructureMask(allowed)
    assert e.value.row == D


def test_structure_mask_empty_row():
    allowed = np.eye(6, dtype=bool)
    allowed[H, H] = False
    with pytest.raises(MaskError):
        StructureMask(allowed)
