# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0


from django.apps import AppConfig


class DPConsensusConfig(AppConfig):
    name = 'dp_consensus'
    verbose_name = 'Differentially private consensus'
