# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0


from django.core.management.base import CommandError
from dp_consensus.management.commands import ConsensusCommand
from dp_consensus.builders import write_outputs, summary_json
from dp_consensus.builders.analysis import CheckBuilder, ModuliBuilder
from dp_consensus.builders.privacy import (
    EpsilonBuilder, DesignBuilder, AuditBuilder)
from dp_consensus.builders.sim import (
    TraceBuilder, MonteCarloBuilder, HistogramBuilder)
from dp_consensus.csv.data import OUTPUT_FORMATS
from dp_consensus.dao.scenario import load_scenario

BUILDERS = {
    'check': CheckBuilder,
    'moduli': ModuliBuilder,
    'epsilon': EpsilonBuilder,
    'design': DesignBuilder,
    'audit': AuditBuilder,
    'simulate': TraceBuilder,
    'montecarlo': MonteCarloBuilder,
    'histogram': HistogramBuilder,
}


class Command(ConsensusCommand):
    help = "Analyzes, audits and simulates a private consensus scenario."

    def add_arguments(self, parser):
        parser.add_argument(
            'subcommand', type=str, choices=list(BUILDERS),
            help='Run <subcommand> on the scenario')
        parser.add_argument(
            '--config', type=str, required=True,
            help='Scenario JSON file')
        parser.add_argument(
            '--out', type=str, default=None,
            help='Write summary, tables and plots to this directory')
        parser.add_argument(
            '--seed', type=int, default=None,
            help='Master seed, overriding the scenario and DPC_SEED')
        parser.add_argument(
            '--strict-paper', action='store_true', dest='strict_paper',
            default=False,
            help='Require alpha < l_i < g_i (alpha < v_i < g_i)')
        parser.add_argument(
            '--tol', type=float, default=None,
            help='Series truncation tolerance')
        parser.add_argument(
            '--format', type=str, default='csv', choices=OUTPUT_FORMATS,
            dest='output_format', help='Table format')
        parser.add_argument(
            '--eps-star', type=float, default=None, dest='eps_star',
            help='Target epsilon for design')
        parser.add_argument(
            '--k', type=int, default=None, dest='k_star',
            help='Histogram step')
        parser.add_argument(
            '--runs', type=int, default=None,
            help='Monte Carlo or histogram runs')
        parser.add_argument(
            '--component', type=int, default=0,
            help='Histogram message component')
        parser.add_argument(
            '--workers', type=int, default=1,
            help='Worker processes for Monte Carlo')

    def handle_scenario(self, *args, **options):
        subcommand = options['subcommand']
        cfg = load_scenario(options['config'], seed=options.get('seed'))
        if options.get('strict_paper'):
            cfg.strict_paper = True
            cfg.echo['privacy']['strict_paper'] = True
        if options.get('tol') is not None:
            cfg.tol = cfg.echo['privacy']['tol'] = options['tol']

        if subcommand == 'histogram' and options.get('k_star') is None:
            raise CommandError('histogram needs --k', returncode=2)

        builder = BUILDERS[subcommand](cfg)
        bundle = builder.build(
            eps_star=options.get('eps_star'), k_star=options.get('k_star'),
            runs=options.get('runs'), component=options.get('component', 0),
            workers=options.get('workers', 1))

        out_dir = options.get('out')
        if out_dir:
            write_outputs(bundle, out_dir, options.get('output_format'))
        else:
            self.stdout.write(summary_json(bundle.summary), ending='')

        if bundle.exit_code:
            raise CommandError(bundle.message, returncode=bundle.exit_code)
