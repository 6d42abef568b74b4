"""Check the coding chains: the main branch against the centroid formula, the
predictive loop against its residue-domain form, the bitrate estimate and the
RD sweep. About ten seconds."""
import math
import os
import sys

HERE = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, os.path.join(os.path.dirname(HERE), "src"))
sys.path.insert(0, HERE)

import numpy as np  # noqa: E402

from analysis.theory import centroid_direct  # noqa: E402
from analysis.verify import TIE_FREE_STEPS  # noqa: E402
from checks import run_checks  # noqa: E402
from coding.errors import BbqError  # noqa: E402
from coding.pipeline import (CodedBlock, PipelineConfig, code_blocks,  # noqa: E402
                             code_equivalent, code_main_branch, code_one_baseband,
                             code_predictive, code_residue_nonpredictive,
                             estimate_bitrate, frame_errors, mse_of,
                             previous_integer, previous_reconstruction, rd_sweep,
                             scaled_previous, snr_gaps, zero_predictor)
from coding.transform import make_dct, make_random_orthogonal, make_rotation_2x2  # noqa: E402
from sources.signals import Ar1Config, FrameSequenceConfig, gen_frame_sequence  # noqa: E402

SIGMA_A = 1.0911


def frames_for(seed, n=16, count=10, temporal=2.0):
    return gen_frame_sequence(FrameSequenceConfig(
        frame_count=count, pixels_per_frame=n, spatial_rho=0.9,
        temporal_innovation_sigma=temporal, base_sigma=10.0, seed=seed))


# 1. Zero in, zero out; lattice input with q1 = q2 and N = 1 passes through.
def test_main_branch_fixed_points():
    """zero block codes to zero; on-lattice 1-D input with q1 = q2 is unchanged"""
    cfg = PipelineConfig(q1=0.5, q2=2.0, transform=make_dct(8))
    coded = code_main_branch(np.zeros(8), cfg)
    assert not np.any(coded.indices) and not np.any(coded.reconstruction)
    assert coded.indices.dtype == np.int64
    one = PipelineConfig(q1=0.4, q2=0.4, transform=make_dct(1))
    for n in (-9, 0, 2, 31):
        r = np.array([0.4 * n])
        assert np.allclose(code_main_branch(r, one).reconstruction, r, atol=1e-12)


# 2. The main branch lands each lattice point on its region's centroid.
def test_main_branch_matches_centroid():
    """code_blocks(q1 p) equals the centroid formula for random p in Z_50^2"""
    t = make_rotation_2x2()
    cfg = PipelineConfig(q1=1.0, q2=2.7, transform=t)
    p = np.random.default_rng(0).integers(-50, 50, size=(5000, 2), endpoint=True).astype(float)
    _, rec = code_blocks(cfg.q1 * p, cfg)
    assert np.max(np.abs(rec - centroid_direct(p, cfg.q1, cfg.q2, t))) < 1e-9


# 3. Without the output rounding the chain is the one-baseband variant.
def test_one_baseband_chain():
    """code_one_baseband is code_blocks without the final Q1"""
    cfg = PipelineConfig(q1=0.3, q2=1.1, transform=make_dct(16))
    x = np.random.default_rng(1).normal(0.0, 3.0, size=(50, 16))
    _, rec = code_blocks(x, cfg, final_quantizer=False)
    assert np.array_equal(code_one_baseband(x, cfg), rec)
    assert np.max(np.abs(code_one_baseband(x[0], cfg) - rec[0])) < 1e-9


# 4. With nothing to predict from, the loop is the main branch.
def test_single_frame_is_main_branch():
    """one frame with the zero predictor codes like the main branch"""
    cfg = PipelineConfig(q1=0.7071, q2=2.0, transform=make_dct(16))
    frame = frames_for(3, count=1)
    rec = code_predictive(frame, cfg, zero_predictor)[0]
    assert np.max(np.abs(rec - code_main_branch(frame[0], cfg).reconstruction)) < 1e-9


# 5. The loop and its residue-domain form agree to rounding noise.
def test_predictive_equals_residue_form():
    """code_predictive and code_equivalent errors agree within 1e-9 (30 sequences)"""
    rng = np.random.default_rng(5)
    transforms = (make_dct(16), make_random_orthogonal(16, 1))
    predictors = (previous_integer, scaled_previous(0.9), previous_reconstruction)
    worst = 0.0
    for i in range(30):
        q1 = TIE_FREE_STEPS[i % len(TIE_FREE_STEPS)]
        cfg = PipelineConfig(q1=q1, q2=q1 * float(rng.choice([1.0, 1.5, 2.5, 4.0])),
                             transform=transforms[i % 2])
        frames = frames_for(100 + i)
        predictor = predictors[i % 3]
        direct = frame_errors(frames, code_predictive(frames, cfg, predictor))
        split = code_equivalent(frames, cfg, predictor)
        worst = max(worst, max(float(np.max(np.abs(a - b))) for a, b in zip(direct, split)))
    assert worst < 1e-9, worst


# 6. Lattice predictions through the DCT put the codec on exact Q2 ties.
def test_residue_form_agrees_at_codec_ties():
    """previous reconstruction, DCT-16, q1 1.2732, alpha 1.5/2/4: both chains agree within 1e-9"""
    t = make_dct(16)
    worst = 0.0
    for seed in (108, 126, 0, 1, 2, 3):
        frames = frames_for(seed)
        for alpha in (1.5, 2.0, 4.0):
            cfg = PipelineConfig(q1=1.2732, q2=1.2732 * alpha, transform=t)
            recon = code_predictive(frames, cfg, previous_reconstruction)
            direct = frame_errors(frames, recon)
            split = code_equivalent(frames, cfg, previous_reconstruction)
            worst = max(worst, max(float(np.max(np.abs(a - b))) for a, b in zip(direct, split)))
            # every reconstruction sits on the q1 lattice
            assert all(np.max(np.abs(r / cfg.q1 - np.rint(r / cfg.q1))) < 1e-9 for r in recon)
    assert worst < 1e-9, worst


# 7. Lattice predictions leave nothing for the dropped branch.
def test_lattice_prediction_needs_no_remainder():
    """predictions on the q1 lattice: non-predictive residue coding is exact"""
    cfg = PipelineConfig(q1=0.3183, q2=1.0, transform=make_dct(16))
    frames = frames_for(7)
    full = code_equivalent(frames, cfg, previous_reconstruction)
    approx = code_residue_nonpredictive(frames, cfg, previous_reconstruction)
    assert max(float(np.max(np.abs(a - b))) for a, b in zip(full, approx)) < 1e-9
    zeros = [np.zeros(16)] * 4
    assert mse_of(code_residue_nonpredictive(zeros, cfg)) == 0.0


# 8. Small q1: dropping the J%q1 branch barely moves the MSE.
def test_nonpredictive_approximation():
    """q1 well below the residue spread: non-predictive MSE within 5% of the loop"""
    frames = gen_frame_sequence(FrameSequenceConfig(
        frame_count=40, pixels_per_frame=256, spatial_rho=0.9,
        temporal_innovation_sigma=1.0, base_sigma=10.0, seed=0))
    cfg = PipelineConfig(q1=0.0493, q2=4 * 0.0493, transform=make_dct(256))
    full = mse_of(frame_errors(frames, code_predictive(frames, cfg)))
    approx = mse_of(code_residue_nonpredictive(frames, cfg))
    assert abs(approx / full - 1.0) < 0.05, (approx, full)


# 9. A static scene with equal steps stays within the worst-case cell bound.
def test_static_scene_bounded():
    """constant frames, q1 = q2: per-frame MSE <= N q2^2 / 4"""
    cfg = PipelineConfig(q1=0.5, q2=0.5, transform=make_dct(16))
    frames = frames_for(2, temporal=0.0)
    for err in frame_errors(frames, code_predictive(frames, cfg)):
        assert float(np.mean(err * err)) <= 16 * 0.25 / 4


# 10. Entropy of the index histogram.
def test_bitrate_estimate():
    """identical indices cost 0 bits; a fair {0, 1} split costs 1 bit"""
    same = [CodedBlock(np.full(4, 3, dtype=np.int64), np.zeros(4)) for _ in range(5)]
    assert estimate_bitrate(same) == 0.0
    half = [CodedBlock(np.array([0, 1, 0, 1], dtype=np.int64), np.zeros(4))] * 3
    assert abs(estimate_bitrate(half) - 1.0) < 1e-12
    try:
        estimate_bitrate([])
    except BbqError:
        pass
    else:
        raise AssertionError("empty list accepted")


# 11. Without a baseband quantizer the SNR is the codec's q2^2/12 alone.
def test_negligible_q1_snr():
    """negligible q1: SNR within 0.05 dB of 10 log10(sigma^2 / (q2^2/12))"""
    source = Ar1Config(rho=0.4, sigma=SIGMA_A, seed=0)
    q2 = SIGMA_A / 5.0
    point = rd_sweep(source, make_dct(16), q2 / 8, [q2], "negligible_q1", blocks=20_000)[0]
    expect = 10.0 * math.log10(SIGMA_A ** 2 / (q2 * q2 / 12.0))
    assert abs(point.snr_db - expect) < 0.05, (point.snr_db, expect)
    assert point.q1 == q2 * 1e-4 and point.blocks == 20_000


# 12. The codec step alone sets the rate.
def test_rate_set_by_codec_step():
    """fixed q2: bitrate varies < 2% across q1 in {q2/8, q2/4, q2/2, q2}"""
    source = Ar1Config(rho=0.4, sigma=SIGMA_A, seed=1)
    q2 = SIGMA_A / 4.0
    rates = [rd_sweep(source, make_dct(16), q2 / d, [q2], "coarse_q1", blocks=20_000)[0]
             .bits_per_sample for d in (8.0, 4.0, 2.0, 1.0)]
    assert (max(rates) - min(rates)) / min(rates) < 0.02, rates


# 13. Gaps come out in q2 order and grow as q1 approaches q2.
def test_sweep_order_and_gaps():
    """points follow q2 order; the gap grows as alpha falls"""
    source = Ar1Config(rho=0.4, sigma=SIGMA_A, seed=2)
    q1 = SIGMA_A / 10
    q2s = [q1 * m for m in (8.0, 4.0, 2.0, 1.0)]
    coarse = rd_sweep(source, make_dct(16), q1, q2s, "coarse_q1", blocks=10_000)
    ref = rd_sweep(source, make_dct(16), q1, q2s, "negligible_q1", blocks=10_000)
    assert [p.q2 for p in coarse] == q2s
    gaps = snr_gaps(ref, coarse)
    assert all(a < b for a, b in zip(gaps, gaps[1:])), gaps
    assert all(coarse[i].bits_per_sample < coarse[i + 1].bits_per_sample for i in range(3))


# 14. Bad configurations are refused.
def test_rejections():
    """q1 > q2, block-length mismatch, unknown modes and q1 above min(q2) raise"""
    source = Ar1Config(rho=0.4, seed=0)
    attempts = (lambda: PipelineConfig(q1=2.0, q2=1.0, transform=make_dct(4)),
                lambda: PipelineConfig(q1=1.0, q2=2.0, transform=make_dct(4), block_len=8),
                lambda: code_blocks(np.zeros((3, 5)), PipelineConfig(1.0, 2.0, make_dct(4))),
                lambda: code_blocks(np.full((1, 4), np.nan), PipelineConfig(1.0, 2.0, make_dct(4))),
                lambda: rd_sweep(source, make_dct(4), 0.1, [1.0], "fine_q1", blocks=10),
                lambda: rd_sweep(source, make_dct(4), 2.0, [1.0, 4.0], blocks=10),
                lambda: code_predictive([], PipelineConfig(1.0, 2.0, make_dct(4))))
    for i, attempt in enumerate(attempts):
        try:
            attempt()
        except BbqError:
            continue
        raise AssertionError(f"attempt {i} accepted")


if __name__ == "__main__":
    run_checks(globals())
