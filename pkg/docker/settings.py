from dp_consensus.conf import *
import os

if os.getenv('ENV', 'localdev') == 'localdev':
    DEBUG = True
    LOGGING['loggers']['dp_consensus']['level'] = os.getenv(
        'LOG_LEVEL', 'DEBUG')
