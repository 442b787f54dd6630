"""
stoqverify - Vérification des Hamiltoniens stoquastiques uniformes et des SetCSP
"""

__version__ = '1.0.0'
