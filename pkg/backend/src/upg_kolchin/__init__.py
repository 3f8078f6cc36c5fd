"""UPG Kolchin toolkit - exact computations with UPG outer automorphisms of free groups"""

__version__ = "1.0.0"
__author__ = "UPG Kolchin Team"

from .core.kolchin.kolchin_driver import KolchinResult, run

__all__ = ["KolchinResult", "run"]
