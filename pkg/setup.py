#!/usr/bin/env python

import os
from setuptools import setup, find_packages

README = """
Observer-based differentially private consensus: condition checks,
privacy budgets, epsilon*-design, ledger audits and simulation.
"""

version_path = 'dp_consensus/VERSION'
VERSION = open(os.path.join(os.path.dirname(__file__), version_path)).read()
VERSION = VERSION.replace("\n", "")

# allow setup.py to be run from any path
os.chdir(os.path.normpath(os.path.join(os.path.abspath(__file__), os.pardir)))

setup(
    name='dp-consensus',
    version=VERSION,
    packages=find_packages(include=['dp_consensus', 'dp_consensus.*']),
    include_package_data=True,
    package_data={
        'dp_consensus': ['VERSION', 'resources/scenarios/*.json'],
    },
    install_requires=[
        'django~=5.2',
        'djangorestframework~=3.14',
        'numpy>=1.24',
        'scipy>=1.10',
        'matplotlib>=3.7',
    ],
    extras_require={
        'test': ['mock', 'coverage', 'pycodestyle'],
    },
    entry_points={
        'console_scripts': ['dpc = dp_consensus.cli:main'],
    },
    license='Apache License, Version 2.0',
    description='Differentially private observer-based consensus toolkit',
    long_description=README,
    author="UWIT Student & Educational Technology Services",
    author_email="aca-it@uw.edu",
    classifiers=[
        'Environment :: Console',
        'Framework :: Django',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: Apache Software License',
        'Operating System :: OS Independent',
        'Programming Language :: Python',
    ],
)
