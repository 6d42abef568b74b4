"""
Coding primitives: uniform quantizers, orthogonal block transforms and the
coding chains built from them.
"""

from .errors import BbqError, ConfigError, UsageError
from .quant import ScalarQuantizer
from .transform import OrthogonalTransform
from .pipeline import CodedBlock, PipelineConfig, RDPoint

__all__ = ['BbqError', 'ConfigError', 'UsageError', 'ScalarQuantizer',
           'OrthogonalTransform', 'CodedBlock', 'PipelineConfig', 'RDPoint']
