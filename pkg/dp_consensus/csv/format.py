# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0


import numpy as np
import csv
import io

FLOAT_FORMAT = '.17g'


def format_value(value):
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), FLOAT_FORMAT)
    return value


def json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    return value


class CSVFormat(object):
    def __init__(self):
        self.key = None
        self.data = []

    def __lt__(self, other):
        return self.key < other.key

    def __eq__(self, other):
        return self.key == other.key

    def __str__(self):
        """
        Creates a line of csv data from the obj data attribute
        """
        csv.register_dialect('unix_newline', lineterminator='\n')

        s = io.StringIO()
        csv.writer(s, dialect='unix_newline').writerow(
            [format_value(v) for v in self.data])

        line = s.getvalue()
        s.close()
        return line

    def to_dict(self, header):
        return {name: json_value(value)
                for name, value in zip(header.data, self.data)}


# CSV Header classes
class TraceHeader(CSVFormat):
    def __init__(self):
        self.data = ['k', 'agent', 'component', 'x', 'xhat', 'theta', 'eta',
                     'u']


class NormsHeader(CSVFormat):
    def __init__(self):
        self.data = ['k', 'norm_delta', 'norm_e']


class MsHeader(CSVFormat):
    def __init__(self):
        self.data = ['k', 'mean_delta_sq', 'ci_delta', 'mean_e_sq', 'ci_e']


class HistogramHeader(CSVFormat):
    def __init__(self):
        self.data = ['bin', 'left', 'right', 'count_nominal',
                     'count_adjacent']


class ModuliHeader(CSVFormat):
    def __init__(self):
        self.data = ['agent', 'degree', 'l', 'v', 'w']


class EpsilonHeader(CSVFormat):
    def __init__(self):
        self.data = ['agent', 'degree', 'series', 'closed_form',
                     'simplified_bound']


class DesignHeader(CSVFormat):
    def __init__(self):
        self.data = ['agent', 'degree', 'c', 'g', 'epsilon', 'margin']


class LedgerHeader(CSVFormat):
    def __init__(self):
        self.data = ['k', 'term', 'beta_norm']


# CSV Data classes
class TraceCSV(CSVFormat):
    """
    k, agent, component, x, xhat, theta, eta, u (u blank past its width)
    """
    def __init__(self, k, agent, component, x, xhat, theta, eta, u=None):
        self.key = (k, agent, component)
        self.data = [k, agent, component, x, xhat, theta, eta, u]


class NormsCSV(CSVFormat):
    def __init__(self, k, norm_delta, norm_e):
        self.key = k
        self.data = [k, norm_delta, norm_e]


class MsCSV(CSVFormat):
    def __init__(self, k, mean_delta_sq, ci_delta, mean_e_sq, ci_e):
        self.key = k
        self.data = [k, mean_delta_sq, ci_delta, mean_e_sq, ci_e]


class HistogramCSV(CSVFormat):
    def __init__(self, index, left, right, count_nominal, count_adjacent):
        self.key = index
        self.data = [index, left, right, count_nominal, count_adjacent]


class ModuliCSV(CSVFormat):
    """
    agent, degree, l (full-order) or v, w (reduced-order)
    """
    def __init__(self, agent, degree, l=None, v=None, w=None):
        self.key = agent
        self.data = [agent, degree, l, v, w]


class EpsilonCSV(CSVFormat):
    def __init__(self, agent, degree, series, closed_form=None,
                 simplified_bound=None):
        self.key = agent
        self.data = [agent, degree, series, closed_form, simplified_bound]


class DesignCSV(CSVFormat):
    def __init__(self, agent, degree, c, g, epsilon, margin):
        self.key = agent
        self.data = [agent, degree, c, g, epsilon, margin]


class LedgerCSV(CSVFormat):
    def __init__(self, k, term, beta_norm):
        self.key = k
        self.data = [k, term, beta_norm]
