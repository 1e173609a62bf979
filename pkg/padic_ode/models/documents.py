"""
Pydantic models for the JSON documents read and written by the CLI
Rationals are "num/den" strings (plain integers allowed), infinity is "inf".
"""

from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from padic_ode.padic_core import parse_rational
from padic_ode.errors import InputFormatError

RationalText = Union[str, int]


def _check_rational(value: RationalText) -> str:
    try:
        parse_rational(value)
    except InputFormatError as e:
        raise ValueError(e.message)
    return str(value)


class RingDoc(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["disc", "bounded_disc", "open_disc", "annulus", "bounded_annulus"] = "disc"
    alpha: Optional[RationalText] = None

    @field_validator("alpha")
    @classmethod
    def _alpha(cls, v):
        return None if v is None else _check_rational(v)


class SeriesDoc(BaseModel):
    """terms maps exponents to coefficients; lo/hi bound the known window (null = exact)"""

    model_config = ConfigDict(extra="forbid")

    terms: Dict[int, RationalText] = Field(default_factory=dict)
    lo: Optional[int] = None
    hi: Optional[int] = None

    @field_validator("terms")
    @classmethod
    def _terms(cls, v):
        return {e: _check_rational(c) for e, c in v.items()}


class OperatorDoc(BaseModel):
    """R = sum_k coeffs[k] T^k"""

    model_config = ConfigDict(extra="forbid")

    p: int = Field(5, ge=3)
    prec: int = Field(60, ge=4)
    ring: RingDoc = Field(default_factory=RingDoc)
    ctx: Literal["d", "-d", "d_prime", "-d_prime"] = "d"
    coeffs: List[SeriesDoc] = Field(min_length=1)


class ModuleDoc(BaseModel):
    """D(e_j) = sum_i matrix[i][j] e_i"""

    model_config = ConfigDict(extra="forbid")

    p: int = Field(5, ge=3)
    prec: int = Field(60, ge=4)
    ring: RingDoc = Field(default_factory=RingDoc)
    ctx: Literal["d", "-d", "d_prime", "-d_prime"] = "d"
    matrix: List[List[SeriesDoc]] = Field(min_length=1)

    @field_validator("matrix")
    @classmethod
    def _square(cls, v):
        if any(len(row) != len(v) for row in v):
            raise ValueError("matrix must be square")
        return v


class ReportDoc(BaseModel):
    command: str
    status: Literal["ok", "error"]
    data: Dict[str, Any] = Field(default_factory=dict)


class SeriesFileDoc(BaseModel):
    """A single series with its prime and ring, as read by the loggrowth command"""

    model_config = ConfigDict(extra="forbid")

    p: int = Field(5, ge=3)
    prec: int = Field(60, ge=4)
    ring: RingDoc = Field(default_factory=RingDoc)
    series: SeriesDoc
