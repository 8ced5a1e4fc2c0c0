import logging

import numpy as np

import datafiles
from datafiles import ReportDocument, ReportSection
from estimation import (check_counts_against_delegation, check_crossed_consistency, check_region_table,
                        canonical_locality, compare_with_reference, count_table_findings, decompose_regions,
                        mle_from_counts, StructureMask)
from finding import Finding
from horizonfit import FitConfig, fit_matrix_from_horizons
from horizontable import TABLE4_HORIZONS, TRANSITIONS, compare_horizon_tables, horizon_table_from_matrix
from markovchain import (ROW_SUM_TOLERANCE, STATES, absorbing_analysis, make_matrix, matrix_power,
                         published_matrix)
from simulation import compare_empirical_analytic, simulate_cohort

logger = logging.getLogger(__name__)

DEFAULT_SIMULATION_DAYS = 7
DEFAULT_PLOT_DAYS = list(range(1, 366))


class ReportService:
    """Runs one subcommand; every command returns (ReportDocument, exit status)."""

    def __init__(self, config):
        self.config = config
        self.commands = {
            'validate': self.cmd_validate,
            'horizons': self.cmd_horizons,
            'absorb': self.cmd_absorb,
            'estimate': self.cmd_estimate,
            'fit': self.cmd_fit,
            'simulate': self.cmd_simulate,
            'plotdata': self.cmd_plotdata,
            'delegations': self.cmd_delegations,
        }

    def run(self):
        logger.info('Running %s with matrix source %s', self.config.subcommand, self.config.matrix_source)
        return self.commands[self.config.subcommand]()

    @staticmethod
    def read_file(path):
        with open(path, 'rb') as fo:
            return fo.read()

    def read_input(self, path, fixture):
        if path:
            return self.read_file(path)
        logger.debug('Using bundled fixture %s', datafiles.fixture_path(fixture))
        return datafiles.load_fixture(fixture)

    def fit_config(self):
        return FitConfig(max_iterations=self.config.max_iter, tolerance=self.config.tolerance)

    def resolve_matrix(self):
        kind, path = self.config.matrix_kind, self.config.matrix_path
        if kind == 'paper':
            return published_matrix()
        if kind == 'file':
            return datafiles.parse_matrix_table(self.read_file(path))
        if kind == 'mle':
            return mle_from_counts(datafiles.parse_count_table(self.read_input(path, 'table3')))
        table = datafiles.parse_horizon_table(self.read_input(path, 'table4'))
        result = fit_matrix_from_horizons(table, StructureMask.published(), self.fit_config())
        logger.info('Fitted matrix source: %s', result)
        return result.matrix

    def metadata(self, **extra):
        metadata = {'command': self.config.subcommand, 'matrix': self.config.matrix_source}
        metadata.update(extra)
        return metadata

    def finish(self, doc, findings):
        Finding.log_findings(findings)
        if self.config.strict and Finding.failing(findings):
            logger.error('%d failing findings with --strict', len(Finding.failing(findings)))
            return doc, 1
        return doc, 0

    def cmd_validate(self):
        if self.config.matrix_kind == 'file':
            rows = np.array(datafiles.parse_matrix_rows(self.read_file(self.config.matrix_path)), dtype=float)
        else:
            rows = self.resolve_matrix().entries
        findings = self.matrix_findings(rows)
        doc = ReportDocument(self.metadata(), [datafiles.findings_section(findings)])
        if findings:
            for f in findings:
                logger.error('Invalid matrix: %s', f)
            return doc, 1
        doc.sections.insert(0, datafiles.matrix_section(make_matrix(rows)))
        return doc, 0

    @staticmethod
    def matrix_findings(rows):
        findings = []
        for a in STATES:
            for b in STATES:
                value = float(rows[a, b])
                if not 0.0 <= value <= 1.0:
                    findings.append(Finding('RangeError', '%s->%s' % (a.label(), b.label()),
                                            float(np.clip(value, 0.0, 1.0)), value, 'entry outside [0, 1]'))
            total = float(rows[a].sum())
            finding = Finding('RowSumError', a.label(), 1.0, total, 'row sum', ROW_SUM_TOLERANCE)
            if not finding.passed:
                findings.append(finding)
        return findings

    def cmd_horizons(self):
        P = self.resolve_matrix()
        days = self.config.days or list(TABLE4_HORIZONS)
        table = horizon_table_from_matrix(P, days)
        reference = datafiles.parse_horizon_table(self.read_input(self.config.input, 'table4'))
        findings = compare_horizon_tables(table, reference)
        sections = [datafiles.horizon_section(table), datafiles.findings_section(findings)]
        return self.finish(ReportDocument(self.metadata(days=list(table.horizons)), sections), findings)

    def cmd_absorb(self):
        report = absorbing_analysis(self.resolve_matrix())
        logger.info('Absorption: %s', report)
        return ReportDocument(self.metadata(), datafiles.absorption_sections(report)), 0

    def locality_records(self):
        delegations = datafiles.parse_delegation_table(self.read_input(self.config.delegations, 'table1'))
        regions = datafiles.parse_region_table(self.read_input(self.config.regions, 'table2'))
        wanted = canonical_locality(self.config.locality)
        record = next((r for r in delegations if canonical_locality(r.locality) == wanted), None)
        region = next((r for r in regions if canonical_locality(r.locality) == wanted), None)
        return record, region

    def cmd_estimate(self):
        counts = datafiles.parse_count_table(self.read_input(self.config.input, 'table3'))
        P = mle_from_counts(counts)
        findings = count_table_findings(counts)
        findings.extend(compare_with_reference(P, published_matrix()))

        record, region = self.locality_records()
        if record is None or region is None:
            logger.warning('Locality %s not found in the official tables, skipping its checks', self.config.locality)
        else:
            venn, violations = decompose_regions(region, record.uci, record.intubated)
            findings.extend(violations)
            if canonical_locality(counts.locality) == canonical_locality(record.locality):
                findings.extend(check_crossed_consistency(counts, venn))
                findings.extend(check_counts_against_delegation(counts, record))
        logger.info('Estimated matrix from counts of %s with %d findings', counts.locality, len(findings))
        sections = [datafiles.matrix_section(P), datafiles.count_section(counts), datafiles.findings_section(findings)]
        return self.finish(ReportDocument(self.metadata(locality=self.config.locality), sections), findings)

    def cmd_fit(self):
        table = datafiles.parse_horizon_table(self.read_input(self.config.input, 'table4'))
        result = fit_matrix_from_horizons(table, StructureMask.published(), self.fit_config())
        fitted = horizon_table_from_matrix(result.matrix, table.horizons)
        summary = ReportSection('fit', ['residual', 'iterations', 'converged', 'reason'],
                                [[result.residual, result.iterations, result.converged, result.reason]])
        sections = [datafiles.matrix_section(result.matrix), summary, datafiles.horizon_section(fitted)]
        doc = ReportDocument(self.metadata(input=self.config.input or datafiles.FIXTURES['table4'],
                                           max_iter=self.config.max_iter, tolerance=self.config.tolerance),
                             sections)
        return doc, 0

    def cmd_simulate(self):
        P = self.resolve_matrix()
        horizon = max(self.config.days) if self.config.days else DEFAULT_SIMULATION_DAYS
        result = simulate_cohort(P, self.config.start, horizon, self.config.n, self.config.seed,
                                 workers=self.config.workers)
        scores = compare_empirical_analytic(result, P)
        doc = ReportDocument(self.metadata(start=self.config.start.label(), days=horizon, n=self.config.n,
                                           seed=self.config.seed),
                             [datafiles.cohort_section(result), datafiles.zscore_section(scores)])
        return doc, 0

    def cmd_plotdata(self):
        P = self.resolve_matrix()
        days = self.config.days or DEFAULT_PLOT_DAYS
        transitions = self.config.transitions or list(TRANSITIONS)
        rows = []
        for day in days:
            power = matrix_power(P, day)
            for a, b in transitions:
                rows.append([day, a.label(), b.label(), power[a, b]])
        section = ReportSection('plotdata', ['day', 'from', 'to', 'probability'], rows)
        return ReportDocument(self.metadata(), [section]), 0

    def cmd_delegations(self):
        records = datafiles.parse_delegation_table(self.read_input(self.config.input or self.config.delegations,
                                                                   'table1'))
        regions = datafiles.parse_region_table(self.read_input(self.config.regions, 'table2'))
        findings = []
        for record in records:
            findings.extend(datafiles.check_delegation_record(record))
        findings.extend(datafiles.check_aggregate(records))
        findings.extend(check_region_table(regions, records))

        by_cases = datafiles.rank_delegations(records, 'cases')
        by_deaths = dict((r.locality, rank) for rank, r in enumerate(datafiles.rank_delegations(records, 'deaths'), 1))
        ranking = ReportSection('ranking', ['rank', 'locality', 'cases', 'deaths', 'deaths_rank'],
                                [[rank, r.locality, r.cases, r.deaths, by_deaths[r.locality]]
                                 for rank, r in enumerate(by_cases, 1)])
        sections = [ranking, datafiles.findings_section(findings)]
        return self.finish(ReportDocument(self.metadata(), sections), findings)
