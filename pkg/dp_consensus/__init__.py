# Copyright 2026 UW-IT, University of Washington
# SPDX-License-Identifier: Apache-2.0
