"""Call price curves as a semigroup: conjugates, composition and involution."""
from .algebra import (ComposedHat, GridHat, HatCurve, bullet, bullet_direct, compose,
                      countermonotone_price, hat, hat_inverse, involute, leq, unhat)
from .blackscholes import (bs_equality, bs_inequality_gap, cbs, implied_y, sifin_lower_bound,
                           sifin_upper_y, ybs)
from .config import Tolerances, get_tolerances, set_tolerances
from .curvespace import (E, Z, AnalyticCurve, CallCurve, DiscreteDistribution, GridCurve,
                         SpecialCurve, curve_of, dual_cdf, dual_distribution, is_c1, is_cplus,
                         primal_survival, right_derivative, to_grid, validate)
from .errors import (CallspaceError, InputError, InvalidCurve, MeanExceedsOne, NonConcaveInput,
                     NotApplicable, NotConcave, NotInC1, NumericalError, PriceBelowIntrinsic,
                     QuadratureFailure, UnknownFamily)
from .logconcave import (builtin, generator_H, generator_hat, implied_vol_surface, reconstruct,
                         surface_price)
from .peacock import (McReport, PeacockFamily, convex_order_leq, gumbel_martingale_sim,
                      gumbel_primal_sample, verify_peacock)
from .zonoid import (LiftZonoid, contains, lift_zonoid_from_curve, lift_zonoid_from_quantiles,
                     zonoid_leq)

__version__ = "0.1.0"
