"""
Pipeline state for the rank-two decomposition check
"""

from typing_extensions import TypedDict, NotRequired, Literal, List, Dict, Any


class StepRecord(TypedDict):
    """One verdict line per pipeline step"""
    step: str
    status: Literal["ok", "failed", "skipped"]
    detail: Dict[str, Any]
    error: NotRequired[str]


class TheoremState(TypedDict, total=False):
    """
    State carried through main_theorem_check
    """

    # === Input ===
    module: Any                             # DiffModule of rank 2 over the bounded disc
    settings: Any                           # padic_ode.config.Settings

    # === Solutions ===
    solutions: List[Any]                    # formal horizontal solutions
    solution_report: Any                    # SolutionSpaceReport
    m_prime: int                            # dimension of convergent solutions

    # === Decomposition ===
    radii: Any                              # RadiiMultiset at the generic point
    split: Any                              # FullSplit
    alpha_used: str

    # === Output ===
    steps: List[StepRecord]
    verdict: str                            # "verified", "trivial", "dwork", "incomplete"
    failed: NotRequired[bool]
