"""
LangGraph state machine for the rank-two decomposition check

solve -> classify -> [trivial | dwork | separation -> split -> small_radius_check
    -> no_bounded_sections -> bounded -> finite_zeroes] -> verdict
Any failed step routes straight to the verdict.
"""

import logging
from typing import Any, Dict, Optional

from langgraph.graph import StateGraph, START, END

from padic_ode.config import Settings, get_settings
from padic_ode.decompose.state import TheoremState
from padic_ode.diffmod import DiffModule

logger = logging.getLogger(__name__)


def build_graph():
    """Compile the main_theorem_check pipeline"""
    from padic_ode.decompose.nodes import (
        bounded, classify, dwork, finite_zeroes_check, no_bounded_sections, route_after_classify,
        route_on_failure, separation, small_radius_check, solve, split, trivial, verdict,
    )

    g = StateGraph(TheoremState)

    # === Add all nodes ===
    g.add_node("solve", solve)
    g.add_node("classify", classify)
    g.add_node("trivial", trivial)
    g.add_node("dwork", dwork)
    g.add_node("separation", separation)
    g.add_node("split", split)
    g.add_node("small_radius_check", small_radius_check)
    g.add_node("no_bounded_sections", no_bounded_sections)
    g.add_node("bounded", bounded)
    g.add_node("finite_zeroes", finite_zeroes_check)
    g.add_node("verdict", verdict)

    # === Define the routing logic ===
    g.add_edge(START, "solve")
    g.add_conditional_edges("solve", route_on_failure("classify"), ["classify", "verdict"])
    g.add_conditional_edges(
        "classify",
        route_after_classify,
        ["trivial", "dwork", "separation", "verdict"],
    )

    # m' = 1 chain
    g.add_conditional_edges("separation", route_on_failure("split"), ["split", "verdict"])
    g.add_conditional_edges(
        "split", route_on_failure("small_radius_check"), ["small_radius_check", "verdict"]
    )
    g.add_conditional_edges(
        "small_radius_check", route_on_failure("no_bounded_sections"), ["no_bounded_sections", "verdict"]
    )
    g.add_conditional_edges("no_bounded_sections", route_on_failure("bounded"), ["bounded", "verdict"])
    g.add_conditional_edges("bounded", route_on_failure("finite_zeroes"), ["finite_zeroes", "verdict"])

    for terminal in ["trivial", "dwork", "finite_zeroes"]:
        g.add_edge(terminal, "verdict")
    g.add_edge("verdict", END)

    return g.compile()


def main_theorem_check(M: DiffModule, settings: Optional[Settings] = None) -> Dict[str, Any]:
    """Run the pipeline on a rank-two module over the bounded disc and return the verdict report"""
    settings = settings or get_settings()
    graph = build_graph()
    initial: TheoremState = {"module": M, "settings": settings, "steps": []}
    final = graph.invoke(initial)
    report = {
        "verdict": final.get("verdict", "incomplete"),
        "m_prime": final.get("m_prime"),
        "steps": final.get("steps", []),
    }
    if final.get("alpha_used"):
        report["alpha"] = final["alpha_used"]
    return report


if __name__ == "__main__":
    try:
        build_graph()
        logger.info("✅ main_theorem_check graph compiled")
    except Exception as e:
        logger.error(f"❌ Graph compilation failed: {e}")
