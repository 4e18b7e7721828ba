"""covts: covariance and precision matrix estimation for high-dimensional
stationary and locally stationary time series, with the convergence-rate
machinery and a reproducible Monte Carlo harness."""

__version__ = "0.1.0"

from .covmodels import (SiteSet, SmallnessReport, class_membership,
                        counterexample_matrix, gamma_exponential_cov,
                        precision_from_cov, rational_quadratic_cov, smallness,
                        theta_bound_linear, uniform_sites)
from .estimators import (KernelWeights, ThresholdEstimate, default_floor,
                         frob_err, kernel_cov, kernel_smooth_path,
                         kernel_weights, positive_definitize, sample_cov,
                         spectral_err, threshold)
from .glasso import (GlassoSolution, NonConvergence, glasso_correlation_variant,
                     glasso_fit, glasso_objective, kkt_residual,
                     lambda_from_threshold, tv_glasso)
from .processes import (CovPath, InnovationLaw, ProcessSpec, simulate,
                        simulate_iterated_map, simulate_linear_process,
                        simulate_modulated, simulate_nonstat_linear,
                        simulate_var1, stationary_cov, truth_at)
from .rates import (ClassSpectralThreshold, NonMonotone, NoSignChange,
                    RateProfile, RegimeReport, SpectralThreshold, G, G_sharp,
                    G_tilde, H, H_sharp, classify_regime,
                    optimal_threshold_curve, risk_upper_bound,
                    solve_threshold_equation, solve_u_circ, solve_u_dagger,
                    solve_u_diamond, solve_u_flat, solve_u_flat_sharp,
                    spectral_bound, spectral_optimal_threshold,
                    spectral_threshold_classbound, u_bickel_levina)
from .rng import derive_seed, make_generator

__all__ = [name for name in dir() if not name.startswith("_")]
