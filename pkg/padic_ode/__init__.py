# p-adic differential modules: radii, twisted-polynomial factorization and decomposition

__version__ = "1.0.0"

from .errors import (
    CyclicVectorError,
    InputFormatError,
    InternalError,
    PadicError,
    PrecisionExhaustedError,
    PreconditionError,
    RadiiNotSeparatedError,
    WindowInsufficientError,
)
from .config import Settings, get_settings, load_settings, reset_settings
from .padic_core import INF, LogVal, PadicScalar, format_rational, omega, parse_rational
from .series import LogGrowthReport, NewtonPolygon, RingDomain, TruncatedSeries
from .twisted import DerivationContext, HenselReport, TwistedPoly, hensel_factor, tmul
from .diffmod import (
    DiffModule,
    RadiiMultiset,
    RadiiProfile,
    classify_solution_space,
    cyclic_vector,
    from_operator,
    radii_profile,
    solve_horizontal,
    subsidiary_radii_at,
)
from .frobenius import PushedModule, descend, gphi_closure, is_psi_stable, phi_multiset, pushforward
from .decompose import (
    full_split,
    indecomposability_check,
    key_lemma_split,
    main_theorem_check,
)

__all__ = [
    'CyclicVectorError', 'InputFormatError', 'InternalError', 'PadicError', 'PrecisionExhaustedError',
    'PreconditionError', 'RadiiNotSeparatedError', 'WindowInsufficientError',
    'Settings', 'get_settings', 'load_settings', 'reset_settings',
    'INF', 'LogVal', 'PadicScalar', 'format_rational', 'omega', 'parse_rational',
    'LogGrowthReport', 'NewtonPolygon', 'RingDomain', 'TruncatedSeries',
    'DerivationContext', 'HenselReport', 'TwistedPoly', 'hensel_factor', 'tmul',
    'DiffModule', 'RadiiMultiset', 'RadiiProfile', 'classify_solution_space', 'cyclic_vector',
    'from_operator', 'radii_profile', 'solve_horizontal', 'subsidiary_radii_at',
    'PushedModule', 'descend', 'gphi_closure', 'is_psi_stable', 'phi_multiset', 'pushforward',
    'full_split', 'indecomposability_check', 'key_lemma_split', 'main_theorem_check',
]
