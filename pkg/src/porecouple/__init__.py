"""Coupled free-flow / porous-medium flow: homogenised effective parameters,
macroscale Stokes-Darcy solves under two interface-condition sets, and
pore-scale reference simulations."""

__version__ = "0.1.0"
