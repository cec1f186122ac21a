# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0


from dp_consensus.csv.format import (
    TraceHeader, NormsHeader, MsHeader, HistogramHeader, ModuliHeader,
    EpsilonHeader, DesignHeader, LedgerHeader, TraceCSV, NormsCSV, MsCSV,
    HistogramCSV, ModuliCSV, EpsilonCSV, DesignCSV, LedgerCSV)
from dp_consensus.sim import MsEstimate
from logging import getLogger
import numpy as np
import json
import csv

logger = getLogger(__name__)

OUTPUT_FORMATS = ('csv', 'json')


class Collector(object):
    """
    Accumulates result rows per table. Only the tables named in files are
    written; a named table with no rows is written with its header only.
    """
    TABLES = {
        'trace': (TraceCSV, TraceHeader),
        'norms': (NormsCSV, NormsHeader),
        'ms': (MsCSV, MsHeader),
        'histogram': (HistogramCSV, HistogramHeader),
        'moduli': (ModuliCSV, ModuliHeader),
        'epsilon': (EpsilonCSV, EpsilonHeader),
        'design': (DesignCSV, DesignHeader),
        'ledger': (LedgerCSV, LedgerHeader),
    }

    def __init__(self, files=()):
        for name in files:
            if name not in self.TABLES:
                raise ValueError('Unknown table: {}'.format(name))
        self.files = list(files)
        self._init_data()

    def _init_data(self):
        self.rows = {name: [] for name in self.files}
        self.headers = {name: self.TABLES[name][1]() for name in self.files}

    def add(self, formatter):
        """
        Add the passed csv formatter object based on type, returns True if
        the formatter is added, False otherwise.
        """
        for name, (row_class, _) in self.TABLES.items():
            if isinstance(formatter, row_class):
                if name not in self.rows:
                    return False
                self.rows[name].append(formatter)
                return True
        raise TypeError(
            'Unknown CSVFormat class: {}'.format(type(formatter)))

    def has_data(self):
        """
        Returns True if the collector contains data, False otherwise.
        """
        for name in self.files:
            if len(self.rows[name]):
                return True
        return False

    def table(self, name):
        return [row.to_dict(self.headers[name]) for row in self.rows[name]]

    def write_files(self, storage, output_format='csv'):
        """
        Writes one file per table to storage, returns the filenames.
        """
        if output_format not in OUTPUT_FORMATS:
            raise ValueError('Unknown output format: {}'.format(output_format))

        filenames = []
        for name in self.files:
            filename = '{}.{}'.format(name, output_format)
            f = storage.open(filename, mode='w')
            try:
                if output_format == 'json':
                    f.write(json.dumps(self.table(name), indent=2,
                                       sort_keys=True))
                    f.write('\n')
                else:
                    f.write(str(self.headers[name]))
                    for line in self.rows[name]:
                        f.write(str(line))
            finally:
                f.close()
            filenames.append(filename)

        logger.debug('Wrote tables: {}'.format(', '.join(filenames)))
        return filenames


def load_ms(path):
    """
    Reads an ms.csv or ms.json table back into an MsEstimate.
    """
    with open(path) as f:
        if path.endswith('.json'):
            rows = json.load(f)
        else:
            rows = list(csv.DictReader(f))

    rows.sort(key=lambda row: int(row['k']))
    columns = {name: np.array([float(row[name]) for row in rows])
               for name in MsHeader().data[1:]}
    return MsEstimate(columns['mean_delta_sq'], columns['ci_delta'],
                      columns['mean_e_sq'], columns['ci_e'], runs=None)
