import numpy as np
import pytest

from simkit.layout_bench import (MATVECS_PER_ELEMENT, PackedVec3Array,
                                 run_layout_benchmark)


def test_checksums_match_seed7():
    rep = run_layout_benchmark(2048, 2, seed=7)
    assert rep.checksum_aligned == rep.checksum_packed
    assert rep.checksums_match()


def test_checksums_deterministic_across_runs():
    a = run_layout_benchmark(1024, 1, seed=42)
    b = run_layout_benchmark(1024, 1, seed=42)
    assert a.checksum_aligned == b.checksum_aligned
    assert a.checksum_packed == b.checksum_packed


def test_self_comparison_ratio_is_noise():
    rep = run_layout_benchmark(65536, 5, seed=3, foil="aligned")
    assert rep.checksums_match()
    assert 0.5 < rep.speedup_ratio < 2.0


def test_report_fields_and_text():
    rep = run_layout_benchmark(1024, 2, seed=1)
    assert rep.n_ops == 1024 * 2 * MATVECS_PER_ELEMENT
    assert rep.aligned_throughput > 0
    assert rep.packed_throughput > 0
    assert rep.speedup_ratio == pytest.approx(
        rep.aligned_throughput / rep.packed_throughput)
    text = rep.as_text()
    assert "\n" not in text
    for key in ("n_ops=", "aligned_throughput=", "packed_throughput=",
                "speedup_ratio=", "checksum_aligned=", "checksum_packed="):
        assert key in text


def test_input_validation():
    with pytest.raises(ValueError):
        run_layout_benchmark(100, 1, seed=0)
    with pytest.raises(ValueError):
        run_layout_benchmark(1024, 0, seed=0)
    with pytest.raises(ValueError):
        run_layout_benchmark(1024, 1, seed=0, foil="nope")


def test_packed_layout_stride_is_12_bytes():
    arr = PackedVec3Array(64)
    assert arr.data.strides == (12, 4)
    assert len(arr) == 64
    with pytest.raises(ValueError):
        PackedVec3Array.from_data(np.zeros((4, 4), dtype=np.float32))
    with pytest.raises(ValueError):
        PackedVec3Array.from_data(np.zeros((4, 3), dtype=np.float64))
