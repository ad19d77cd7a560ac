"""
Relay Secrecy Modules

Solver components for secret and public messages in a
decode-and-forward relay network with eavesdroppers.
"""

__version__ = "0.1.0"
