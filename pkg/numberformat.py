import numbers

import numpy as np

SCIENTIFIC_BELOW = 1e-3
SIGNIFICANT_DIGITS = 7


class NumberFormatHelper:
    def __init__(self):
        pass

    @staticmethod
    def format_probability(value):
        """Shortest text that re-reads to value, at most 7 significant digits.

        Magnitudes below 1e-3 use scientific notation with a two-digit exponent
        (2.858e-04), matching the published horizon tables.
        """
        value = float(value)
        if value == 0.0:
            return '0'
        if not np.isfinite(value):
            return repr(value)
        if abs(value) < SCIENTIFIC_BELOW:
            return np.format_float_scientific(value, precision=SIGNIFICANT_DIGITS - 1, unique=True,
                                              trim='-', exp_digits=2)
        return np.format_float_positional(value, precision=SIGNIFICANT_DIGITS, unique=True,
                                          fractional=False, trim='-')

    @staticmethod
    def format_value(value):
        if value is None:
            return ''
        if isinstance(value, (bool, np.bool_)):
            return 'true' if value else 'false'
        if isinstance(value, numbers.Integral):
            return '%d' % value
        if isinstance(value, numbers.Real):
            return NumberFormatHelper.format_probability(value)
        return str(value)
