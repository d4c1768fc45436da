"""A static analyser and interpreter for a pi-calculus with binary sessions.

The package is organised as a pipeline: `surface` parses and prints the
concrete syntax, `syntax` holds the terms and types, `congruence`
computes normal forms, `typecheck` infers session typings, `depgraph`
builds session dependency graphs and decides transparency, `semantics`
reduces processes, and `progress` certifies or refutes progress.
"""
