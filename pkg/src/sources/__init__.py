"""Seeded test sources: AR(1) sequences and synthetic frame sequences."""

from .signals import Ar1Config, Ar1Stream, FrameSequenceConfig

__all__ = ['Ar1Config', 'Ar1Stream', 'FrameSequenceConfig']
