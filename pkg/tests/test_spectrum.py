import numpy as np
import pytest

import fiberspec as fs
from fiberspec import errors
from fiberspec.spectrum import Partition

from conftest import curve1, curve2, curve3


def test_partition_from_ranges_half_open(cfg):
    p = Partition.from_ranges(
        cfg.ogrid, ((1, 0.0, 0.5), (2, 0.5, 1.0))
    )
    labels = p.labels_by_node()
    nodes = cfg.ogrid.nodes
    assert np.all(labels[nodes < 0.5] == 1)
    assert np.all(labels[nodes >= 0.5] == 2)


def test_partition_gap_rejected(cfg):
    with pytest.raises(errors.IncompletePartition):
        Partition.from_ranges(cfg.ogrid, ((1, 0.0, 0.4),))


def test_partition_overlap_rejected():
    with pytest.raises(errors.IncompletePartition):
        Partition(4, ((1, (0, 1, 2)), (2, (2, 3))))


def test_partition_bad_indices():
    with pytest.raises(errors.IndexOutOfRange):
        Partition(3, ((1, (0, 1, 5)),))
    with pytest.raises(ValueError):
        Partition(2, ((-1, (0, 1)),))


def test_fiber_spectrum_contains_zero(decomposition):
    spec = fs.fiber_spectrum(decomposition, 10)
    assert spec.shape == (4,)  # three curves plus the null eigenvalue
    assert spec[-1] == 0.0
    assert np.all(np.diff(spec) <= 0)
    with pytest.raises(errors.IndexOutOfRange):
        fs.fiber_spectrum(decomposition, 64)


def test_mix_field_thirds_closed_form(cfg, decomposition):
    p = Partition.from_ranges(
        cfg.ogrid,
        ((1, 0.0, 1.0 / 3.0), (2, 1.0 / 3.0, 2.0 / 3.0), (3, 2.0 / 3.0, 1.0)),
    )
    mixed = fs.mix_field(decomposition, p)
    nodes = cfg.ogrid.nodes
    want = np.where(
        nodes < 1.0 / 3.0,
        curve1(nodes),
        np.where(nodes < 2.0 / 3.0, curve2(nodes), curve3(nodes)),
    )
    assert np.max(np.abs(mixed.values - want)) < 1e-10


def test_mix_label_zero_is_null_curve(cfg, decomposition):
    p = Partition.from_ranges(cfg.ogrid, ((0, 0.0, 1.0),))
    mixed = fs.mix_field(decomposition, p)
    assert np.all(mixed.values == 0.0)


def test_mix_unknown_curve(cfg, decomposition):
    p = Partition.from_ranges(cfg.ogrid, ((7, 0.0, 1.0),))
    with pytest.raises(errors.UnknownCurveLabel):
        fs.mix_field(decomposition, p)


def test_mix_sorted_versus_aligned(cfg, decomposition):
    # label 1 means aligned curve 0 when aligned, but the largest
    # eigenvalue when unaligned; they differ past the curve crossing
    p = Partition.from_ranges(cfg.ogrid, ((1, 0.0, 1.0),))
    aligned = fs.mix_field(decomposition, p, use_aligned=True)
    by_rank = fs.mix_field(decomposition, p, use_aligned=False)
    nodes = cfg.ogrid.nodes
    assert np.max(np.abs(aligned.values - curve1(nodes))) < 1e-10
    top = np.maximum(np.maximum(curve1(nodes), curve2(nodes)), curve3(nodes))
    assert np.max(np.abs(by_rank.values - top)) < 1e-10


def test_mix_partition_size_guard(decomposition):
    p = Partition(3, ((1, (0, 1, 2)),))
    with pytest.raises(errors.GridMismatch):
        fs.mix_field(decomposition, p)


def test_membership_distances_zero_on_curves(cfg, decomposition):
    field = fs.ScalarField(cfg.ogrid, curve2(cfg.ogrid.nodes))
    dists = fs.membership_distances(decomposition, field)
    assert np.max(dists) < 1e-10


def test_spm_membership_pass_and_fail(cfg, decomposition):
    member, violations = fs.spm_membership(
        decomposition, fs.ScalarField.constant(cfg.ogrid, 0.0), 1e-8
    )
    assert member and violations == []
    member, violations = fs.spm_membership(
        decomposition, fs.ScalarField.constant(cfg.ogrid, 0.9), 1e-8
    )
    assert not member
    assert violations
    node, dist = violations[0]
    assert isinstance(node, int) and dist > 1e-8


def test_membership_respects_tolerance(cfg, decomposition):
    # a field just off a curve passes with a loose tolerance and fails
    # with a tight one
    field = fs.ScalarField(cfg.ogrid, curve1(cfg.ogrid.nodes) + 5e-7)
    ok_loose, _ = fs.spm_membership(decomposition, field, 1e-6)
    ok_tight, _ = fs.spm_membership(decomposition, field, 1e-8)
    assert ok_loose and not ok_tight
