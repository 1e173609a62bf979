"""
Test suite for padic-ode
Scalars, series, operators, modules, decomposition and the command line
"""
