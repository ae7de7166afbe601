"""Closed-form reference values for the unbalanced-disc embedding."""

import numpy as np


def embedding_coefficients(d):
    """``(A1, A2(p=0), A2 slope in p, b)`` straight from the parameter values."""
    a = d.T_s / d.tau
    return a - 2.0, 1.0 - a, d.m * d.g * d.l * d.T_s**2 / d.J, d.K_m * d.T_s**2 / d.tau


def frozen_pole_oracle(d, p):
    """Roots of ``z^2 + A1 z + A2(p)``."""
    A1, A20, slope, _ = embedding_coefficients(d)
    return np.roots([1.0, A1, A20 + slope * p])


# published reference values for the frozen poles (p=0 pair, p=1 magnitude)
REF_POLES_P0 = (0.99988, 0.87450)
REF_POLE_MAG_P1 = 0.93902
