"""Secrecy rate-distortion toolkit for the Shannon cipher system.

Submodules: ``prob`` (distributions and information measures), ``rd``
(rate-distortion solvers), ``region`` (achievable-region boundaries),
``cipher`` (random codebooks and the likelihood encoder), ``adversary``
(list and henchman attacks), ``subproblem`` (codeword-compression
experiments), ``typeclasses`` (method of types) and ``cli``.
"""
from .kernels import BACKEND
from .prob import Channel, Distribution, DistortionMatrix, JointDistribution
from .rd import distortion_rate, rate_distortion, side_info_distortion_rate

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Channel",
    "Distribution",
    "DistortionMatrix",
    "JointDistribution",
    "distortion_rate",
    "rate_distortion",
    "side_info_distortion_rate",
]
