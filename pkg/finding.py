import logging

from numberformat import NumberFormatHelper

logger = logging.getLogger(__name__)

FIELDS = ['kind', 'subject', 'expected', 'observed', 'difference', 'tolerance', 'status', 'message']


class InvalidFindingError(Exception):
    def __init__(self, value):
        self.value = value

    def __str__(self):
        return repr(self.value)


class Finding:
    """A data inconsistency or check outcome; never raised, always reported."""

    def __init__(self, kind, subject, expected, observed, message='', tolerance=0):
        self.kind = kind
        self.subject = subject
        self.expected = expected
        self.observed = observed
        self.difference = observed - expected
        self.message = message
        self.tolerance = tolerance

    @property
    def passed(self):
        return abs(self.difference) <= self.tolerance

    @property
    def status(self):
        return 'pass' if self.passed else 'fail'

    def __str__(self):
        return 'kind=%s subject=%s expected=%s observed=%s difference=%s status=%s' % (
            self.kind, self.subject, NumberFormatHelper.format_value(self.expected),
            NumberFormatHelper.format_value(self.observed), NumberFormatHelper.format_value(self.difference),
            self.status)

    def __repr__(self):
        return 'Finding(%r, %r, %r, %r)' % (self.kind, self.subject, self.expected, self.observed)

    def __eq__(self, other):
        return isinstance(other, Finding) and self.to_dict() == other.to_dict()

    def __ne__(self, other):
        return not self == other

    def to_row(self):
        return [self.kind, self.subject, self.expected, self.observed, self.difference, self.tolerance, self.status,
                self.message]

    def to_dict(self):
        return dict(zip(FIELDS, self.to_row()))

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(data['kind'], data['subject'], data['expected'], data['observed'], data.get('message', ''),
                       data.get('tolerance', 0))
        except KeyError:
            raise InvalidFindingError(data)

    @staticmethod
    def failing(findings):
        return [f for f in findings if not f.passed]

    @staticmethod
    def log_findings(findings):
        """One warning summarizing the failing findings; each failing finding is logged at debug."""
        failing = Finding.failing(findings)
        for f in failing:
            logger.debug('Finding: %s', f)
        if failing:
            worst = max(failing, key=lambda f: abs(f.difference))
            logger.warning('%d of %d findings fail, largest difference %s (%s %s)', len(failing), len(findings),
                           NumberFormatHelper.format_value(worst.difference), worst.kind, worst.subject)
