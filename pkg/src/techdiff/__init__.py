"""Dual-channel technology diffusion: simulator and estimation toolkit.

Subpackages cover geographic distance primitives (:mod:`techdiff.geo`),
graph-Laplacian spectral analysis (:mod:`techdiff.spectral`), spatial decay
fitting (:mod:`techdiff.decay`), the synthetic panel generator
(:mod:`techdiff.simulate`), event-study estimators (:mod:`techdiff.did`),
firm-cluster bootstrap inference (:mod:`techdiff.bootstrap`), and the
command-line front end (:mod:`techdiff.cli`).
"""

__version__ = "0.1.0"
