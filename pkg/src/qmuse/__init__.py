"""qmuse: quantum hyper-die additive synthesis and adaptive note sequencing
on a simulated statevector backend."""

__version__ = "0.1.0"
