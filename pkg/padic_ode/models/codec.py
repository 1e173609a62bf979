"""
Conversion between validated documents and library objects
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Type, TypeVar, Union

from pydantic import BaseModel, ValidationError

from padic_ode.diffmod import DiffModule
from padic_ode.errors import InputFormatError
from padic_ode.models.documents import ModuleDoc, OperatorDoc, RingDoc, SeriesDoc
from padic_ode.padic_core import format_rational, parse_rational
from padic_ode.series import RingDomain, TruncatedSeries
from padic_ode.twisted import DerivationContext, TwistedPoly

logger = logging.getLogger(__name__)

Doc = TypeVar("Doc", bound=BaseModel)


def validate(model: Type[Doc], raw: Dict[str, Any]) -> Doc:
    """model_validate with errors mapped to InputFormatError at the first failing location"""
    try:
        return model.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"])
        raise InputFormatError(first["msg"], location=location or None)


def read_json(path: Union[str, Path]) -> Dict[str, Any]:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise InputFormatError(f"no such file {path}", location=str(path))
    except json.JSONDecodeError as e:
        raise InputFormatError(f"invalid JSON: {e.msg}", location=f"{path}:{e.lineno}:{e.colno}")


# === Documents to objects ===

def ring_from_doc(doc: RingDoc) -> RingDomain:
    if doc.kind in ("annulus", "bounded_annulus"):
        if doc.alpha is None:
            raise InputFormatError("annulus needs alpha", location="ring.alpha")
        return RingDomain.annulus(parse_rational(doc.alpha))
    if doc.kind == "open_disc":
        return RingDomain.open_disc()
    return RingDomain.disc()


def ctx_from_text(text: str) -> DerivationContext:
    sign = -1 if text.startswith("-") else 1
    return DerivationContext(text.lstrip("-"), sign)


def series_from_doc(doc: SeriesDoc, p: int, domain: RingDomain, prec: int) -> TruncatedSeries:
    values = {e: parse_rational(c) for e, c in doc.terms.items()}
    return TruncatedSeries.from_fractions(p, domain, values, prec, doc.lo, doc.hi)


def operator_from_doc(doc: OperatorDoc) -> TwistedPoly:
    domain = ring_from_doc(doc.ring)
    coeffs = tuple(series_from_doc(c, doc.p, domain, doc.prec) for c in doc.coeffs)
    return TwistedPoly(ctx_from_text(doc.ctx), coeffs)


def module_from_doc(doc: ModuleDoc) -> DiffModule:
    domain = ring_from_doc(doc.ring)
    rows = [[series_from_doc(c, doc.p, domain, doc.prec) for c in row] for row in doc.matrix]
    return DiffModule.from_matrix(rows, ctx_from_text(doc.ctx))


def load_operator(raw: Dict[str, Any]) -> TwistedPoly:
    return operator_from_doc(validate(OperatorDoc, raw))


def load_module(raw: Dict[str, Any]) -> DiffModule:
    return module_from_doc(validate(ModuleDoc, raw))


# === Objects to documents ===

def series_to_doc(f: TruncatedSeries) -> SeriesDoc:
    terms = {e: format_rational(c.to_fraction()) for e, c in sorted(f.coeffs.items())}
    return SeriesDoc(terms=terms, lo=f.lo, hi=f.hi)


def ring_to_doc(domain: RingDomain) -> RingDoc:
    if domain.is_annulus:
        return RingDoc(kind="annulus", alpha=format_rational(domain.alpha))
    return RingDoc(kind="open_disc" if domain.kind == "open_disc" else "disc")


def operator_to_doc(R: TwistedPoly) -> OperatorDoc:
    return OperatorDoc(p=R.p, prec=R.prec, ring=ring_to_doc(R.domain), ctx=R.ctx.name,
                       coeffs=[series_to_doc(c) for c in R.coeffs])


def module_to_doc(M: DiffModule) -> ModuleDoc:
    return ModuleDoc(p=M.p, prec=M.prec, ring=ring_to_doc(M.domain), ctx=M.ctx.name,
                     matrix=[[series_to_doc(a) for a in row] for row in M.action])
