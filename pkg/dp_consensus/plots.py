# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0

"""
SVG figures for traces, mean-square estimates and paired histograms.
Output is byte-stable for identical inputs.
"""

from matplotlib.figure import Figure
import matplotlib
import numpy as np
import io

SVG_HASH_SALT = 'dp-consensus'
FIGURE_SIZE = (8, 4.5)


def _positive(values):
    values = np.asarray(values, dtype=float)
    return np.where(values > 0, values, np.nan)


def norms_figure(trace):
    fig = Figure(figsize=FIGURE_SIZE)
    ax = fig.add_subplot(1, 1, 1)
    steps = np.arange(trace.steps)
    ax.semilogy(steps, _positive(trace.norm_delta), label='|delta(k)|')
    ax.semilogy(steps, _positive(trace.norm_e), label='|e(k)|')
    ax.set_xlabel('k')
    ax.set_ylabel('norm')
    ax.grid(True, which='both', alpha=0.3)
    ax.legend()
    return fig


def ms_figure(ms, rate=None):
    fig = Figure(figsize=FIGURE_SIZE)
    ax = fig.add_subplot(1, 1, 1)
    steps = np.arange(ms.horizon + 1)
    ax.semilogy(steps, _positive(ms.mean_delta_sq), label='E|delta(k)|^2')
    ax.semilogy(steps, _positive(ms.mean_e_sq), label='E|e(k)|^2')
    if rate is not None and ms.mean_delta_sq[0] > 0:
        ax.semilogy(steps, ms.mean_delta_sq[0] * rate ** (2.0 * steps),
                    linestyle='--', label='rate {:.4f}'.format(rate))
    ax.set_xlabel('k')
    ax.set_ylabel('mean square')
    ax.grid(True, which='both', alpha=0.3)
    ax.legend()
    return fig


def histogram_figure(result):
    fig = Figure(figsize=FIGURE_SIZE)
    ax = fig.add_subplot(1, 1, 1)
    left = result.edges[:-1]
    widths = np.diff(result.edges)
    ax.bar(left, result.counts_nominal, width=widths, align='edge',
           alpha=0.5, label='nominal')
    ax.bar(left, result.counts_adjacent, width=widths, align='edge',
           alpha=0.5, label='adjacent')
    ax.set_xlabel('theta component {} at k = {}'.format(
        result.component, result.k_star))
    ax.set_ylabel('count')
    ax.set_title('max ratio {:.4g}, bound {:.4g}'.format(
        result.max_ratio, result.bound))
    ax.legend()
    return fig


def render_svg(fig):
    """
    Returns the SVG text of fig with fixed ids and no timestamp.
    """
    stream = io.BytesIO()
    with matplotlib.rc_context({'svg.hashsalt': SVG_HASH_SALT,
                                'svg.fonttype': 'path'}):
        fig.savefig(stream, format='svg', metadata={'Date': None})
    return stream.getvalue().decode('utf-8')


def save_svg(fig, storage, filename):
    f = storage.open(filename, mode='w')
    try:
        f.write(render_svg(fig))
    finally:
        f.close()
    return filename
