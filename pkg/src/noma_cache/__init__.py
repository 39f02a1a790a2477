"""Cache-aided NOMA hybrid multicast/unicast optimization for vehicular links."""

__version__ = "0.1.0"

from .cache import (CachePolicy, Catalog, backhaul_load, prefix_policy, solve_p5,
                    zipf_popularity)
from .channel import (SPEED_OF_LIGHT, ChannelParams, Convention, CsiCoefficients, UserGains,
                      bessel_j0, csi_coefficients, jakes_phi, sample_gains)
from .errors import (BackhaulInfeasible, DomainError, InfeasibleError, MulticastInfeasible,
                     NomaCacheError, RateInfeasible)
from .montecarlo import GainMode, TrialConfig, run_outage_validation, run_rate_sweep
from .outage import MulticastQos, outage_closed_form, outage_monte_carlo, outage_power_bound
from .power import (ExcessProfile, MinPowerProfile, corner_excess_split, excess_from_transformed,
                    excess_transform, min_power_closed_form, min_power_recurrence_oracle,
                    optimal_excess_rate, rho_sum_min_unscaled)
from .rates import (PowerSplit, RateVector, multicast_rate, noma_rates, oma_rates,
                    unicast_rate_exact, unicast_rate_relaxed)
from .scenario import Scenario, ScenarioError, load_scenario, parse_scenario
from .solver import (ProblemInstance, SolveResult, Status, feasibility_report, objective,
                     optimal_split, solve_alternating, solve_oma, solve_p4, solve_p4_bisection)
