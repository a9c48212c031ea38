"""Classical and quantum dynamics of 1-D quadratic systems with time-dependent coefficients.

The workflow is profile -> EMP solution -> trajectories/caustics -> propagators::

    from quadprop import make_profile, solve_emp, locate_caustics, general_propagator

    p = make_profile("mathieu", {"a": 2, "q": 1})
    sol = solve_emp(p, omega_bar=1.0, t_span=(0, 10))
    chart = locate_caustics(sol)
    K = general_propagator(sol, 0.5, 1.0, 0.0, 0.0)
"""

__version__ = "0.1.0"

from .profiles import (  # noqa: E402
    ParticularSolution, ProfileError, SystemProfile, make_profile, parse_profile_block,
    remove_driving_force, shifted_frequency, time_reparametrize,
)
from .integrators import (  # noqa: E402
    DenseSolution, IntegrationError, QuadratureError, RootBracketError, find_root, gauss_legendre,
    integrate_ivp, quad_complex,
)
from .emp import (  # noqa: E402
    DomainBoundaryError, EmpError, EmpSolution, check_omega_bar, invariant_report, junker_inomata_condition,
    schwarzian_decompose, solve_emp,
)
from .classical import (  # noqa: E402
    CausticChart, FundamentalPair, arnold_map, bargmann_lift, classical_action, fundamental_pair,
    locate_caustics, niederer_forward, niederer_inverse, trajectory,
)
from .propagator import (  # noqa: E402
    CausticError, CausticKernel, GridResolutionError, PropagatorValue, WavePacket, caustic_propagator,
    constant_propagator, dissipative_propagator, evolve_wavepacket, free_propagator, gaussian_packet,
    general_propagator, maslov_index, phase_factor, probability_density, vanvleck_oracle,
)
