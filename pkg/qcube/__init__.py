"""Hypercube edge colorings, their SAT encodings and the tools to solve and check them."""
from qcube.cnf import CnfFormula, Cube
from qcube.conjectures import EncodingConfig, build_encoding
from qcube.hypercube import Coloring, Hypercube, Vertex, hypercube

__version__ = "0.1.0"
