"""Finite roots of completely depolarizing channels, forgetful memory channels
and the finitely correlated chain states they generate."""

from .basis import OperatorBasis, basis_from_elements, gellmann_basis, matrix_unit_basis, named_basis
from .channels import (
    Channel,
    ChoiOperator,
    KrausSet,
    bistochastic_cdc,
    cdc_channel,
    channel_to_choi,
    choi_to_channel,
    choi_to_kraus,
    compose,
    is_completely_positive,
    kraus_rank,
    kraus_to_channel,
    picture_dual,
    power,
    structural_predicates,
)
from .errors import ChannelError
from .fcs import chain_generator, check_k_dependence, evaluate_functional, stinespring, transfer_map
from .memory import (
    ForgetfulSpec,
    MemoryChannel,
    construct_strictly_forgetful,
    counterexample_channel,
    entangled_input_check,
    extract_branch,
    is_strictly_forgetful,
    parameterized_branch,
)
from .roots import (
    PauliDiagonalParams,
    QubitRootSpec,
    cb_lower_bound_root,
    max_epsilon,
    perturb_root,
    qubit_maximal_root,
    tetrahedron_check,
    verify_root_order,
)

__version__ = "0.1.0"
