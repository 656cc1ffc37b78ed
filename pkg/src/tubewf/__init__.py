"""Numerical wave-front sets in Fourier Banach function spaces via tube-domain analytic representatives."""

from .bf_spaces import SpaceDescriptor, parse_space
from .decomp import ConeCover, cone_decompose, decomposition_defect
from .kernel import TubePoint, eval_K, eval_K_spectral
from .signals import GridSignal, catalog_names, get_model
from .tube import make_analytic_rep, reconstruct
from .wavefront import Verdict, WfConfig, tube_scan, wf_detect, wf_detect_inf, wf_detect_modulation

__all__ = [
    "ConeCover",
    "GridSignal",
    "SpaceDescriptor",
    "TubePoint",
    "Verdict",
    "WfConfig",
    "catalog_names",
    "cone_decompose",
    "decomposition_defect",
    "eval_K",
    "eval_K_spectral",
    "get_model",
    "make_analytic_rep",
    "parse_space",
    "reconstruct",
    "tube_scan",
    "wf_detect",
    "wf_detect_inf",
    "wf_detect_modulation",
]
