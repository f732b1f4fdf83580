"""Second-moment stability of linear systems under small noisy parametric forcing."""
from . import errors
from .charfun import (CharacteristicFunction, RankOneSystem, fa_matrix, fa_matrix_derivative,
                      find_roots, fp_from_fa, matrix_charfun)
from .linalg import EigenData, cholesky, companion_roots, eig_general, solve
from .spectral import (NoisePsd, PoleSet, acf_eval, gz_closed, gz_quadrature, poles_residues,
                       psd_eval, psd_integral)
from .stability import (ModePair, StabilityReport, chi_full, chi_matrix, critical_epsilon,
                        ip_eigensum, ip_residues, lambda2, lambda2_bruteforce,
                        select_mode_pair, stability_margin)

__version__ = "0.1.0"
