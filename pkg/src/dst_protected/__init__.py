"""Expected 2-protected nodes in random digital search trees: exact, asymptotic, simulated."""

__version__ = "0.1.0"

from .qseries import PrecisionConfig, PrecisionError, fixed, q_infinity, q_of_x, q_partial, euler_coefficient
from .exact_sequence import (
    l_closed_form,
    l_from_m,
    l_sequence_recursion,
    m_closed_form,
    m_sequence_recursion,
)
from .asymptotics import b_coefficient, delta_fourier, protected_constant, residual_table
from .dst_sim import BitString, build_from_strings, build_random, count_k_protected, count_leaves, monte_carlo
