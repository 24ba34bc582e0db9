"""Control sets of matrix semigroups on SO(n) and flag manifolds."""

from .checks import (
    VerificationReport,
    compute_CS,
    compute_CS_for_record,
    compute_WS,
    unipotent_factor,
    verify_conjugacy_CSw,
    verify_counting,
    verify_fiber_unions,
    verify_nu_decomposition,
    verify_pi_compatibility,
    verify_right_translation,
    verify_transitivity_fixed_points,
)
from .compact_action import (
    FixedPointOnK,
    act_on_K,
    fixed_points_on_K,
    iterate_to_attractor,
    right_translate,
)
from .errors import (
    ComplexSpectrumError,
    CycleError,
    FactorizationError,
    FlagdynError,
    InvalidElementError,
    NoConvergenceError,
    NoRegularElementError,
    NotASubgroupError,
    NotRegularError,
    NumericalRankError,
    UnsupportedSpaceError,
)
from .matdecomp import (
    IwasawaTriple,
    RegularSplit,
    group_element,
    is_regular_positive,
    iwasawa_decompose,
    iwasawa_project,
    kappa_batch,
    regular_split_decompose,
)
from .presets import PRESETS, preset_generators
from .projective import (
    act_on_flag,
    act_on_projective,
    fixed_points_on_flag,
    fixed_points_on_projective,
)
from .reach import (
    ControlSetRecord,
    ReachGraph,
    build_matched_graphs,
    build_reach_graph,
    enumerate_words,
    find_control_sets,
    label_control_sets,
    order_control_sets,
)
from .signedperm import (
    SignedPermutation,
    SignVector,
    WeylElement,
    enumerate_M,
    enumerate_Mstar,
    enumerate_W,
    right_cosets,
)
from .spaces import SampleCloud, SpaceIndex, project_cloud, sample_space

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
