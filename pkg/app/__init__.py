"""
GridComply - Passivity-Based Compliance for Grid-Connected Devices

Rational modelling and passivity checks for converter-interfaced devices:
- Admittance scans of droop inverters, VSGs and loads
- Vector fitting of 2x2 frequency responses
- Interface transforms between device formulations
- Load-flow Jacobian positive-semidefiniteness
"""

__version__ = "1.0.0"
__author__ = "GridComply Team"
