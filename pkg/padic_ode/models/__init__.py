# JSON documents: pydantic models and codecs

from .documents import ModuleDoc, OperatorDoc, ReportDoc, RingDoc, SeriesDoc, SeriesFileDoc
from .codec import (
    load_module,
    load_operator,
    module_to_doc,
    operator_to_doc,
    read_json,
    series_from_doc,
    series_to_doc,
    validate,
)

__all__ = [
    'ModuleDoc', 'OperatorDoc', 'ReportDoc', 'RingDoc', 'SeriesDoc', 'SeriesFileDoc',
    'load_module', 'load_operator', 'module_to_doc', 'operator_to_doc', 'read_json',
    'series_from_doc', 'series_to_doc', 'validate',
]
