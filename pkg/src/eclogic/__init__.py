"""Workbench for coalition logic with knowledge modalities."""

from .decide import SatResult, SearchBudget, Verdict, sat, valid
from .fileformat import dumps_structure, load_structure, load_structure_text
from .kernels import BACKEND
from .mcheck import extension, holds, valid_in
from .proofcheck import check_proof, load_proof, parse_proof
from .structures import (EffectivityFunction, GameForm, Model, Pseudomodel, alpha_effectivity,
                         validate_effectivity, validate_pseudomodel)
from .syntax import LogicId, closure, parse, to_text
from .transform import filtrate, lift_pseudomodel

__all__ = [
    "BACKEND", "EffectivityFunction", "GameForm", "LogicId", "Model", "Pseudomodel",
    "SatResult", "SearchBudget", "Verdict", "alpha_effectivity", "check_proof", "closure",
    "dumps_structure", "extension", "filtrate", "holds", "lift_pseudomodel", "load_proof",
    "load_structure", "load_structure_text", "parse", "parse_proof", "sat", "to_text",
    "valid", "valid_in", "validate_effectivity", "validate_pseudomodel",
]
