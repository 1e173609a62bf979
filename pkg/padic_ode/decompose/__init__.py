# Decomposition drivers: key lemma split, full split and the rank-two pipeline

from .state import StepRecord, TheoremState
from .key_lemma import (
    FullSplit,
    SubmoduleResult,
    annihilator_line,
    full_split,
    full_split_with_retries,
    key_lemma_split,
    line_character,
    line_radii,
)
from .boundary import BoundaryReport, bounded_sections, disc_character, finite_zeroes
from .indecomposable import eigen_module, indecomposability_check, quotient_characters
from .graph import build_graph, main_theorem_check

__all__ = [
    'StepRecord', 'TheoremState',
    'FullSplit', 'SubmoduleResult', 'annihilator_line', 'full_split', 'full_split_with_retries',
    'key_lemma_split', 'line_character', 'line_radii',
    'BoundaryReport', 'bounded_sections', 'disc_character', 'finite_zeroes',
    'eigen_module', 'indecomposability_check', 'quotient_characters',
    'build_graph', 'main_theorem_check',
]
