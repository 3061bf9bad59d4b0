"""Exact verification toolkit for Enriques surfaces whose canonical cover
resolves to the supersingular K3 surface of Artin invariant 1 in
characteristic 2."""

__version__ = "0.1.0"
