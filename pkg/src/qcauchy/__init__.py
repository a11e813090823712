"""Restricted Cauchy identities for q-Whittaker and Schur measures, with Fredholm determinant checks"""

__version__ = "0.1.0"
