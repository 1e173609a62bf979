"""
Pytest configuration and fixtures for padic-ode testing
"""

import pytest
import os
import sys
import json
from fractions import Fraction

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long exact computations (deselect with -m 'not slow')")


@pytest.fixture
def settings():
    """Default settings, independent of any PADIC_* variables in the environment"""
    from padic_ode.config import Settings
    return Settings()


@pytest.fixture
def p():
    return 5


@pytest.fixture
def disc():
    from padic_ode.series import RingDomain
    return RingDomain.disc()


@pytest.fixture
def annulus():
    """Annulus p^(-1/16) <= |t| < 1"""
    from padic_ode.series import RingDomain
    return RingDomain.annulus(Fraction(1, 16))


@pytest.fixture
def series_factory(p):
    """Exact Laurent polynomial from {exponent: rational}"""
    from padic_ode.series import RingDomain, TruncatedSeries

    def make(values, domain=None, lo=None, hi=None, prec=60):
        return TruncatedSeries.from_fractions(p, domain or RingDomain.disc(), values, prec, lo, hi)

    return make


@pytest.fixture
def example_module_annulus(p, annulus):
    """K{T}/K{T}(T^2 + tT + 1) over the annulus"""
    from padic_ode.example_rank2 import example_module
    return example_module(p, 60, annulus)


@pytest.fixture
def synthetic_operator(p, annulus):
    """T^2 - p^(-2) t^(-1) T + p^(-2) t^(-2) = T (T - p^(-2) t^(-1)); radii {9/4, 0} at r = 0"""
    from padic_ode.series import TruncatedSeries
    from padic_ode.twisted import DerivationContext, TwistedPoly

    c = Fraction(1, p ** 2)
    coeffs = (
        TruncatedSeries.monomial(p, annulus, -2, c),
        TruncatedSeries.monomial(p, annulus, -1, -c),
        TruncatedSeries.one(p, annulus),
    )
    return TwistedPoly(DerivationContext(), coeffs)


@pytest.fixture
def synthetic_module(synthetic_operator):
    from padic_ode.diffmod import from_operator
    return from_operator(synthetic_operator)


@pytest.fixture
def example_operator_doc():
    """JSON document of T^2 + tT + 1 over the annulus of log-radius 1/16"""
    return {
        "p": 5,
        "prec": 60,
        "ring": {"kind": "annulus", "alpha": "1/16"},
        "ctx": "d",
        "coeffs": [{"terms": {"0": "1"}}, {"terms": {"1": "1"}}, {"terms": {"0": "1"}}],
    }


@pytest.fixture
def write_json(tmp_path):
    """Write a document to a temporary file and return its path"""

    def write(name, doc):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)

    return write
