# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0

"""
Base settings for running dp_consensus outside a project, e.g. from the
dpc console script.
"""

import logging
import sys
import os

BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

SECRET_KEY = os.getenv('DJANGO_SECRET', 'dp-consensus-localdev')
DEBUG = os.getenv('ENV', 'localdev') == 'localdev'
USE_TZ = True

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'django.contrib.auth',
    'rest_framework',
    'dp_consensus.apps.DPConsensusConfig',
]

DATABASES = {
    'default': {
        'ENGINE': 'django.db.backends.sqlite3',
        'NAME': os.getenv('DPC_DATABASE', ':memory:'),
    }
}

DEFAULT_AUTO_FIELD = 'django.db.models.AutoField'

DPC_DEFAULT_HORIZON = int(os.getenv('DPC_DEFAULT_HORIZON', 200))
DPC_DEFAULT_RUNS = int(os.getenv('DPC_DEFAULT_RUNS', 500))
DPC_SERIES_TOL = float(os.getenv('DPC_SERIES_TOL', 1e-10))
DPC_INITIAL_BOX = 5.0
DPC_HISTOGRAM_SLACK = 1.2
DPC_HISTOGRAM_MIN_BIN = 50
DPC_HISTOGRAM_MIN_RUNS = 1000
DPC_LEDGER_HORIZON = 500
DPC_FIT_WINDOW = (50, 150)

# stdout is reserved for command output
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'filters': {
        'info_stream': {
            '()': 'django.utils.log.CallbackFilter',
            'callback': lambda record: record.levelno < logging.WARNING
        },
        'error_stream': {
            '()': 'django.utils.log.CallbackFilter',
            'callback': lambda record: record.levelno > logging.INFO
        }
    },
    'formatters': {
        'dp_consensus': {
            'format': '%(levelname)-4s %(asctime)s %(module)s %(message)s '
                      '[%(name)s]',
            'datefmt': '[%Y-%m-%d %H:%M:%S]',
        },
    },
    'handlers': {
        'info': {
            'class': 'logging.StreamHandler',
            'stream': sys.stderr,
            'filters': ['info_stream'],
            'formatter': 'dp_consensus',
        },
        'error': {
            'class': 'logging.StreamHandler',
            'stream': sys.stderr,
            'filters': ['error_stream'],
            'formatter': 'dp_consensus',
        },
        'null': {
            'class': 'logging.NullHandler',
        },
    },
    'loggers': {
        'dp_consensus': {
            'handlers': ['info', 'error'],
            'level': os.getenv('LOG_LEVEL', 'INFO'),
            'propagate': False,
        },
        'matplotlib': {
            'handlers': ['null'],
            'propagate': False,
        },
        '': {
            'handlers': ['info', 'error'],
            'level': 'WARNING',
        },
    }
}
