"""Experiment harness: instance generators, statistical experiments,
file formats, and the command-line interface."""
