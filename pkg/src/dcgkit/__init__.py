"""Toolkit for training and evaluating chart-to-code generation models.

The package covers the full loop: curating chart samples into datasets,
rendering generated chart HTML deterministically to frames and video,
scoring outputs with model judges, turning scores into training rewards,
and collecting human preference judgments.
"""

__version__ = "0.1.0"
