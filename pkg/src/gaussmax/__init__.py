"""Schatten p->q norms of the one-mode quantum-limited attenuator and amplifier on Fock-diagonal inputs."""

from .channels import (
    ChannelSpec,
    KernelMatrix,
    amplifier_kernel,
    apply,
    apply_channel,
    attenuator_kernel,
    duality_residual,
    semigroup_apply,
    thermal_image,
    thinning,
)
from .errors import ConvergenceError, DomainError
from .fock import (
    TruncationPolicy,
    entropy_to_z,
    f_p_closed,
    fock_rearrange,
    majorizes,
    make_thermal,
    renyi_entropy,
    schatten_norm,
    thermal_energy,
    thermal_entropy,
    von_neumann_entropy,
)
from .kkt import KKTReport, SimplexPoint, kkt_residuals, maximize_simplex, recursion_residual
from .moe import MatchedState, match_entropy_state, output_entropy_gap, renyi_chain_check
from .norms import (
    NormReport,
    brute_force_ratio,
    composite_bound,
    divergence_diagnostic,
    gaussian_ratio,
    norm,
    norm_pp,
    optimize_gaussian_z,
)
from .sobolev import (
    F_a,
    F_a_fd_check,
    S_a,
    ShootingResult,
    SobolevPoint,
    dlnnorm_da_check,
    h,
    logsobolev_margin,
    mu,
    nu,
    ode_shoot,
    script_F,
)
