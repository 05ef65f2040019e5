"""Exact locality renormalisation: meromorphic germs, lattice cones and decorated forests."""

from .cones import I_cone, LatticeCone, S_closed, S_open, zeta_closed, zeta_open
from .forests import DecoratedForest, concat, graft, kreimer_R1, kreimer_renormalised
from .germs import IDENTITY, Germ, InnerProduct, LinearForm, numeric_eval
from .projection import project_minus, project_plus, renormalised_value, split
from .series import Coefficient

__all__ = [
    "Coefficient", "DecoratedForest", "Germ", "IDENTITY", "I_cone", "InnerProduct", "LatticeCone",
    "LinearForm", "S_closed", "S_open", "concat", "graft", "kreimer_R1", "kreimer_renormalised",
    "numeric_eval", "project_minus", "project_plus", "renormalised_value", "split",
    "zeta_closed", "zeta_open",
]
