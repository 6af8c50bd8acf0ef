"""Certified norms on Fourier and Varopoulos algebras of finite groups."""

from .errors import *  # noqa: F401,F403
from .fourier import AFn, RepWitness, a_norm_exact, a_norm_variational, multiplier_apply, theta_embed
from .group import FiniteGroup, MultiFn, build_group, cyclic, dihedral, direct_product, quaternion8, symmetric
from .norms import NormCertificate, haagerup_norm, phi_v_isometry_witness, schur_norm
from .reps import GroupDual, Irrep, compute_dual, dual_of, fourier_transform, inverse_fourier
from .transfer import ClosedSet, DualElement, E_star, N_n, N_n_inverse, P_n, Q_n, ideal, lemma51_check, submodule_transfer
from .varopoulos import VFn, module_action, t_w_apply, t_w_norm_lower, v_norm

__version__ = "0.1.0"
