from .assembly import assemble_filtered_graph, lift_to_aut, solvability_report
from .kolchin_driver import KolchinResult, bounce_step, run

__all__ = ["KolchinResult", "assemble_filtered_graph", "bounce_step", "lift_to_aut", "run",
           "solvability_report"]
