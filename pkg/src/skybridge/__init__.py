"""Deterministic simulator and optimization toolkit for integrated
satellite / HAP / tethered-balloon / terrestrial networks with hybrid
FSO-RF back-hauling."""

__version__ = "0.1.0"
