"""Cone-restricted lattice reduction and thin fundamental sets in the plane."""

from .errors import (
    EnumerationError,
    NotAdmissibleError,
    NotIntegralError,
    NotUnimodularError,
    ReductionError,
    SupportError,
    ThinfdError,
)
from .linalg import (
    KANCoords,
    KNACoords,
    Mat2,
    UnimodularInt,
    det,
    from_kan,
    from_kna,
    iwasawa_kan,
    iwasawa_kna,
    perp,
    round_to_unimodular,
)
from .lattice import (
    Cone,
    LatticePoint,
    UnitalLattice,
    cone_contains,
    cone_minimal_vector,
    gauss_reduce,
    phi,
    phi_eps,
    shortest_vectors,
    t_parameter,
)
from .domains import (
    BoundaryRow,
    Epsilon,
    IntervalSet,
    Membership,
    MembershipKind,
    RegionTag,
    admissible_t_set,
    canonical_t_representative,
    classical_membership,
    cusp_width,
    reduce_to_classical,
    reduce_to_thin,
    region_boundary_polyline,
    siegel_contains,
    thin_membership,
    thin_membership_kna,
)
from .verify import (
    McReport,
    OracleConfig,
    TestFunction,
    mc_l2_inequality,
    oracle_admissible_t,
    oracle_min_in_cone,
    random_group_element,
    stabilizer_enumeration,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
