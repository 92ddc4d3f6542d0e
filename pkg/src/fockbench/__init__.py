"""Truncated Fock-space toolkit for counting-law coherent states.

Submodules: :mod:`fockbench.fock` (bases, operators, exponentials),
:mod:`fockbench.distributions` (counting laws), :mod:`fockbench.states`
(state constructors), :mod:`fockbench.algebra` (ladder-algebra realizations
and checks), :mod:`fockbench.generation` (exponential/sequential/dynamical
generation routes), :mod:`fockbench.measure` (overcompleteness and slicing
checks), :mod:`fockbench.cli` (command-line front end).

Submodules are imported explicitly by callers; this package module stays
import-light so the CLI can configure threading before numpy loads.
"""

__version__ = "0.1.0"
