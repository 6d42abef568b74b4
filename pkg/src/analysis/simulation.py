"""
Coding simulations on AR(1) sources: the two RD curves per case and the SNR
gap between them, next to what the closed forms predict.

Case a: blocks of 16 samples, rho 0.4, sigma 1.0911.
Case b: blocks of 256 samples, rho 0.9, sigma 2.2942.
Both use q1 = sigma/10 and q2 = q1 * {8, 4, 2, 1}, so alpha runs 8, 4, 2, 1.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

from analysis.theory import GammaEstimate, theoretical_gap_db
from coding.errors import BbqError
from coding.pipeline import DEFAULT_CHUNK_BLOCKS, RDPoint, rd_sweep, snr_gaps
from coding.transform import make_transform
from sources.signals import Ar1Config

logger = logging.getLogger(__name__)


@dataclass
class SimulationCase:
    name: str
    block_len: int
    rho: float
    sigma: float
    transform: str = "dct"
    q1_fraction: float = 0.1
    q2_multipliers: List[float] = field(default_factory=lambda: [8.0, 4.0, 2.0, 1.0])

    def __post_init__(self):
        if self.block_len < 1:
            raise BbqError(f"block_len must be >= 1, got {self.block_len}")
        if not self.q2_multipliers or min(self.q2_multipliers) < 1.0:
            raise BbqError("q2 multipliers must be >= 1 so that q1 <= q2")

    @property
    def q1(self) -> float:
        return self.sigma * self.q1_fraction

    def q2_list(self) -> List[float]:
        return [self.q1 * m for m in self.q2_multipliers]

    def describe(self) -> str:
        return (f"case {self.name}: L={self.block_len}, rho={self.rho}, "
                f"sigma={self.sigma}, q1={self.q1:.5g}, transform {self.transform}")


CASES: Dict[str, SimulationCase] = {
    "a": SimulationCase("a", block_len=16, rho=0.4, sigma=1.0911),
    "b": SimulationCase("b", block_len=256, rho=0.9, sigma=2.2942),
}


@dataclass
class GapRow:
    q2: float
    alpha: float
    gap_db: float
    theory_db: float


@dataclass
class SimulationResult:
    case: SimulationCase
    coarse: List[RDPoint]
    negligible: List[RDPoint]
    gaps: List[GapRow]

    def gap_vector(self) -> List[float]:
        return [row.gap_db for row in self.gaps]


def run_case(case: SimulationCase, blocks: int = 50_000, seed: int = 0,
             gamma_lookup: Optional[Callable[[float], GammaEstimate]] = None,
             scenario: str = "two_baseband",
             chunk_blocks: int = DEFAULT_CHUNK_BLOCKS) -> SimulationResult:
    """gamma_lookup(alpha) supplies estimates where alpha < 2; without it those
    theory values are NaN."""
    logger.info("simulating %s with %d blocks per point", case.describe(), blocks)
    source = Ar1Config(rho=case.rho, sigma=case.sigma,
                       length=blocks * case.block_len, seed=seed)
    transform = make_transform(case.transform, case.block_len)
    q2s = case.q2_list()
    coarse = rd_sweep(source, transform, case.q1, q2s, "coarse_q1", blocks,
                      chunk_blocks, scenario)
    negligible = rd_sweep(source, transform, case.q1, q2s, "negligible_q1", blocks,
                          chunk_blocks, scenario)

    rows = []
    for q2, gap in zip(q2s, snr_gaps(negligible, coarse)):
        alpha = q2 / case.q1
        if alpha >= 2.0 or scenario == "one_baseband":
            theory = theoretical_gap_db(alpha, None, scenario)
        elif gamma_lookup is not None:
            theory = theoretical_gap_db(alpha, gamma_lookup(alpha), scenario)
        else:
            theory = math.nan
        rows.append(GapRow(q2=q2, alpha=alpha, gap_db=gap, theory_db=theory))
    return SimulationResult(case=case, coarse=coarse, negligible=negligible, gaps=rows)
