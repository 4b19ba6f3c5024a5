"""Numerical tolerance policy shared by every module.

EIGEN_TOL
    eigenvalue comparisons (lambda_1 == 1, spectrum inside [-1, 1], residuals).
STOCHASTIC_TOL
    row sums of transition matrices, total mass of distributions.
BOUND_SLACK
    one-sided slack allowed when asserting that a lower bound does not exceed
    an exact spectral gap (or similar inequalities between computed reals).
"""

EIGEN_TOL = 1e-8
STOCHASTIC_TOL = 1e-12
BOUND_SLACK = 1e-8

# dense routines refuse larger inputs
DENSE_MAX_N = 4096
KIRCHHOFF_MAX_N = 64
CHEEGER_MAX_N = 24
EXHAUSTIVE_CUT_MAX_N = 22
