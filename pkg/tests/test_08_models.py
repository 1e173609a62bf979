"""
TC-008: JSON Documents
Validates document validation, error locations and conversion to library objects
"""

import pytest
import sys
import os
from fractions import Fraction

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))


def _location(model, raw):
    from padic_ode.models import validate
    from padic_ode.errors import InputFormatError

    with pytest.raises(InputFormatError) as info:
        validate(model, raw)
    return info.value.location


class TestValidation:
    """Test malformed documents are reported where they fail"""

    def test_empty_coefficients(self, example_operator_doc):
        """Test an operator needs at least one coefficient"""
        from padic_ode.models import OperatorDoc

        assert _location(OperatorDoc, {**example_operator_doc, "coeffs": []}) == "coeffs"

    def test_bad_rational(self, example_operator_doc):
        """Test 1/0 is located at its series"""
        from padic_ode.models import OperatorDoc

        doc = {**example_operator_doc, "coeffs": [{"terms": {"0": "1/0"}}]}
        assert _location(OperatorDoc, doc) == "coeffs.0.terms"

    def test_unknown_ring_kind(self, example_operator_doc):
        """Test ring kinds are a closed set"""
        from padic_ode.models import OperatorDoc

        doc = {**example_operator_doc, "ring": {"kind": "sphere"}}
        assert _location(OperatorDoc, doc) == "ring.kind"

    def test_extra_keys(self, example_operator_doc):
        """Test unknown keys are rejected"""
        from padic_ode.models import OperatorDoc

        assert _location(OperatorDoc, {**example_operator_doc, "bogus": 1}) == "bogus"

    def test_non_square_matrix(self):
        """Test module matrices must be square"""
        from padic_ode.models import ModuleDoc

        doc = {"matrix": [[{"terms": {}}, {"terms": {}}]]}
        assert _location(ModuleDoc, doc) == "matrix"

    def test_small_prime(self, example_operator_doc):
        """Test p = 2 is refused"""
        from padic_ode.models import OperatorDoc

        assert _location(OperatorDoc, {**example_operator_doc, "p": 2}) == "p"


class TestConversion:
    """Test documents become series, operators and modules"""

    def test_load_operator(self, example_operator_doc):
        """Test the example operator document"""
        from padic_ode.models import load_operator

        R = load_operator(example_operator_doc)
        assert R.degree == 2
        assert R.domain.is_annulus
        assert R.domain.alpha == Fraction(1, 16)
        assert R.coeff(1).coeffs.keys() == {1}

    def test_annulus_needs_alpha(self):
        """Test an annulus without alpha is located at ring.alpha"""
        from padic_ode.models import RingDoc
        from padic_ode.models.codec import ring_from_doc
        from padic_ode.errors import InputFormatError

        with pytest.raises(InputFormatError) as info:
            ring_from_doc(RingDoc(kind="annulus"))
        assert info.value.location == "ring.alpha"

    def test_context_text(self):
        """Test negated contexts are parsed"""
        from padic_ode.models.codec import ctx_from_text

        assert ctx_from_text("-d").sign == -1
        assert ctx_from_text("d_prime").kind == "d_prime"

    def test_load_module(self):
        """Test a module document with a truncated entry"""
        from padic_ode.models import load_module

        doc = {"p": 7, "matrix": [[{"terms": {"0": "1/2"}}, {}],
                                  [{"terms": {"1": 1}, "hi": 10}, {}]]}
        M = load_module(doc)
        assert M.rank == 2
        assert M.p == 7
        assert M.action[0][0].coeff(0).to_fraction() == Fraction(1, 2)
        assert M.action[1][0].known_hi == 10

    def test_series_to_doc(self, series_factory):
        """Test series are written with num/den coefficients"""
        from padic_ode.models import series_to_doc

        doc = series_to_doc(series_factory({0: Fraction(-3, 4), 2: 5}, hi=9))
        assert doc.terms == {0: "-3/4", 2: "5"}
        assert doc.lo is None
        assert doc.hi == 9

    def test_operator_document_reloads(self, example_operator_doc):
        """Test operator_to_doc output validates again"""
        from padic_ode.models import OperatorDoc, load_operator, operator_to_doc

        R = load_operator(example_operator_doc)
        doc = operator_to_doc(R)
        assert doc.ring.alpha == "1/16"
        again = load_operator(doc.model_dump())
        assert (again - R).is_zero_on_window()


class TestReadJson:
    """Test file reading errors"""

    def test_missing_file(self, tmp_path):
        """Test a missing file is an input error"""
        from padic_ode.models import read_json
        from padic_ode.errors import InputFormatError

        with pytest.raises(InputFormatError):
            read_json(tmp_path / "absent.json")

    def test_invalid_json(self, tmp_path):
        """Test broken JSON is an input error with a position"""
        from padic_ode.models import read_json
        from padic_ode.errors import InputFormatError

        path = tmp_path / "broken.json"
        path.write_text("{\"p\": 5,")
        with pytest.raises(InputFormatError) as info:
            read_json(path)
        assert str(path) in info.value.location
