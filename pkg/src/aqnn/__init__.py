"""Attractor quantum neural networks as quantum channels.

Build the channel families, check complete positivity through Choi
matrices, measure coherence and decohering power, classify channels in the
incoherent-operation hierarchy, construct Stinespring dilations and compute
diamond distances.
"""
from .channels import (
    ChannelSpec, CPTPVerdict, Variant, act, alpha_matrix, apply, apply_extended, apply_kraus, choi,
    choi_closed_form, choi_from_kraus, is_cptp, iterate, kraus, kraus_from_choi, require_cptp,
)
from .classify import (
    ClassReport, check_activation, check_gio, check_mio, classify, io_structural_check,
    search_incoherent_decomposition, shifted_family_sio_certificate, sio_structural_check,
)
from .coherence import (
    DepthQuery, DepthReport, analytic_depth, c_l1, c_relative_entropy, closest_attractor,
    decohering_power, depth, estimate_decohering_power, relative_entropy, simulated_depth,
    von_neumann_entropy,
)
from .diamond import DiamondResult, diamond_analytic_diagonal, diamond_distance, diamond_lower_bound
from .dilation import (
    DilationUnitary, GramVectors, build_generic_dilation, build_gio_dilation, build_sio_dilation,
    complete_isometry, dilation_channel, gram_factorize, verify_dilation,
)
from .errors import *  # noqa: F401,F403
from .linalg import HermitianEigenSystem, herm_eig, kron, partial_trace, trace_norm
from .states import (
    dephase, maximally_coherent, maximally_mixed, purify, random_density, validate_density,
)

__version__ = "0.1.0"
