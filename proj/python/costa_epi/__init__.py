# SPDX-License-Identifier: Apache-2.0
"""Verification and counterexample search for the matrix-parameter EPI."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
