"""
pfmulti: coupled phase field multiphysics finite element solver.

One transient diffusion kernel contract serves phase field fracture,
phase field corrosion, metal-ion transport, porous fluid flow, hydrogen
transport and heat conduction, coupled to small-strain mechanics.
"""

__version__ = "1.0.0"
