"""Transport and decoherence kinetics of a fast particle in a gas"""

__version__ = "1.0.0"
