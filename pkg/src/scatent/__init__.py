"""Dynamical entanglement generated by symmetry-constrained scattering."""

from .angular import BasisMap, CGCoefficient, HalfInt, cg, couple, triangle_range
from .entanglement import Bipartition, EntanglementReport, all_cuts_report, eoe, schmidt
from .hilbert import (
    DensityMatrix,
    Factor,
    StateVector,
    apply_basis_map,
    fidelity_up_to_phase,
    partial_trace,
    product,
)
from .spinmodel import (
    ChannelPhases,
    InStateParams,
    eoe_closed_form,
    in_state,
    out_state,
    s_operator,
    x_param,
)

__version__ = "0.1.0"
