"""
qsplit - transmission/reflection decomposition of 1D quantum scattering
Stationary split states, wave-packet synthesis and tunneling times
"""

__version__ = '1.0.0'
