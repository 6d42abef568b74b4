"""
Predictions and their references: closed-form theory, gamma estimation,
brute-force oracles, AR(1) simulations and the verification suites.
"""

from .theory import DistortionPrediction, GammaEstimate, GammaEstimator, Regime

__all__ = ['DistortionPrediction', 'GammaEstimate', 'GammaEstimator', 'Regime']
