# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0


from dp_consensus.csv.data import Collector
from dp_consensus.plots import save_svg
from django.core.files.storage import FileSystemStorage
from dataclasses import dataclass, field
from logging import getLogger
import numpy as np
import json
import os

logger = getLogger(__name__)


@dataclass
class ResultBundle:
    summary: dict
    collector: Collector
    plots: dict = field(default_factory=dict)
    exit_code: int = 0
    message: str = None


def jsonable(value):
    """
    Converts numpy containers and scalars inside value to plain Python.
    """
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return jsonable(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def summary_json(summary):
    return json.dumps(jsonable(summary), sort_keys=True, indent=2) + '\n'


class Builder(object):
    files = ()

    def __init__(self, cfg, items=None):
        self.cfg = cfg
        self.data = Collector(self.files)
        self.summary = {}
        self.plots = {}
        self.exit_code = 0
        self.message = None
        self.items = range(cfg.N) if items is None else items
        self.logger = getLogger(__name__)

    def _init_build(self, **kwargs):
        return

    def _process(self, item):
        raise NotImplementedError

    def _finish(self):
        return

    def _write(self):
        self.summary['scenario'] = self.cfg.echo
        self.summary['exit_code'] = self.exit_code
        if self.message:
            self.summary['message'] = self.message
        return ResultBundle(self.summary, self.data, self.plots,
                            self.exit_code, self.message)

    def build(self, **kwargs):
        self._init_build(**kwargs)
        for item in self.items:
            self._process(item)
        self._finish()
        return self._write()

    def fail(self, exit_code, message):
        self.exit_code = exit_code
        self.message = message
        self.logger.warning(message)


def write_outputs(bundle, out_dir, output_format='csv'):
    """
    Writes summary.json, the collector's tables and the bundle's plots to
    out_dir, returns the written filenames.
    """
    os.makedirs(out_dir, exist_ok=True)
    storage = FileSystemStorage(location=out_dir)

    f = storage.open('summary.json', mode='w')
    try:
        f.write(summary_json(bundle.summary))
    finally:
        f.close()

    filenames = ['summary.json']
    filenames.extend(bundle.collector.write_files(storage, output_format))
    for name in sorted(bundle.plots):
        filenames.append(save_svg(bundle.plots[name], storage,
                                  '{}.svg'.format(name)))

    logger.info('Wrote {} files to {}'.format(len(filenames), out_dir))
    return filenames
