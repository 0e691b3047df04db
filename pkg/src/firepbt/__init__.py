"""Population based training variants over simulated training tasks.

The package provides three run modes over a population of toy trainables:
random search (RS), greedy population based training (PBT), and
faster-improvement-rate PBT (FIREPBT), which scores parent sub-populations
by how quickly copies of their weights improve under the child
sub-population's hyperparameters.
"""

__version__ = "0.1.0"
