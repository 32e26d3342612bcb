"""
CovHuSeg Toolkit - Command Line Package

Batch subcommands (process, evaluate, split, noise, synth, report) and the
argument parser that ties them together.
"""

from cli.main import build_parser, main

__all__ = [
    'build_parser',
    'main',
]
