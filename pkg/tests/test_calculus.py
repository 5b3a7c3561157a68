import numpy as np
import pytest

import fiberspec as fs
from fiberspec import errors
from fiberspec.expr import parse

from conftest import curve1, curve2, tf_ref, t2f_ref


@pytest.fixture(scope="module")
def f_section(cfg):
    return fs.sample_section(
        parse("omega*sin(pi*t)+sin(2*pi*t)"), cfg.ogrid, cfg.squad
    )


def grid_mesh(cfg):
    return cfg.ogrid.nodes[:, None], cfg.squad.nodes[None, :]


def test_apply_quadrature_closed_form(cfg, f_section):
    w, t = grid_mesh(cfg)
    out = fs.apply_quadrature(cfg.kernel, f_section)
    assert np.max(np.abs(out.values - tf_ref(w, t))) < 1e-12


def test_apply_spectral_closed_form(cfg, decomposition, f_section):
    w, t = grid_mesh(cfg)
    out = fs.apply_spectral(decomposition, f_section)
    assert np.max(np.abs(out.values - tf_ref(w, t))) < 1e-10


def test_two_paths_agree(cfg, decomposition, f_section):
    a = fs.apply_quadrature(cfg.kernel, f_section)
    b = fs.apply_spectral(decomposition, f_section)
    assert np.max(np.abs(a.values - b.values)) < 1e-10


def test_apply_quadrature_sampled_matches_separable(cfg, grids):
    # the same kernel through the dense sampled representation, on a small
    # grid because sampling evaluates the expression at every node triple
    ogrid, squad = grids
    dense = fs.sample_kernel(
        parse(
            "2*cos(pi*omega/2)^2*sin(pi*t)*sin(pi*s)"
            "+sin(pi*omega)^2*sin(2*pi*t)*sin(2*pi*s)"
            "+2/3*omega^2*sin(3*pi*t)*sin(3*pi*s)"
        ),
        ogrid,
        squad,
    )
    f = fs.sample_section(parse("omega*sin(pi*t)+sin(2*pi*t)"), ogrid, squad)
    a = fs.apply_quadrature(cfg.kernel, f)
    b = fs.apply_quadrature(dense, f)
    assert np.max(np.abs(a.values - b.values)) < 1e-12


def test_projector_threshold_selection(cfg, decomposition, f_section):
    # at lambda = 0.4 the first curve is kept only where cos^2(pi w/2) <= 0.4
    # and the second only where sin^2(pi w)/2 <= 0.4; f has no third or
    # null component
    w, t = grid_mesh(cfg)
    lam = fs.ThresholdField.constant(cfg.ogrid, 0.4)
    out = fs.projector_apply(decomposition, lam, f_section)
    keep1 = curve1(w) <= 0.4
    keep2 = curve2(w) <= 0.4
    want = keep1 * w * np.sin(np.pi * t) + keep2 * np.sin(2 * np.pi * t)
    assert np.max(np.abs(out.values - want)) < 1e-8


def test_projector_keeps_null_component(cfg, decomposition):
    # sin(4 pi t) is orthogonal to the kernel range, so it sits in the
    # null space: kept whenever lambda >= 0, dropped whenever lambda < 0
    f4 = fs.sample_section(parse("sin(4*pi*t)"), cfg.ogrid, cfg.squad)
    kept = fs.projector_apply(
        decomposition, fs.ThresholdField.constant(cfg.ogrid, 0.01), f4
    )
    assert np.max(np.abs(kept.values - f4.values)) < 1e-10
    dropped = fs.projector_apply(
        decomposition, fs.ThresholdField.constant(cfg.ogrid, -0.01), f4
    )
    assert np.max(np.abs(dropped.values)) < 1e-10


def test_projector_boundaries_are_exact(cfg, decomposition, f_section):
    below = fs.ThresholdField.constant(cfg.ogrid, -1.0)
    out = fs.projector_apply(decomposition, below, f_section)
    assert np.all(out.values == 0.0)
    above = fs.ThresholdField.constant(cfg.ogrid, 2.0)
    out = fs.projector_apply(decomposition, above, f_section)
    assert np.array_equal(out.values, f_section.values)


def test_projector_tie_tolerance(cfg):
    # constant curve 1/2: thresholds within tie_tol of the eigenvalue
    # still include it
    k = fs.SeparableKernel(((parse("1/2"), parse("sqrt(2)*sin(pi*t)")),))
    d = fs.decompose_all_fibers(k, cfg.ogrid, cfg.squad)
    phi1 = fs.sample_section(parse("sqrt(2)*sin(pi*t)"), cfg.ogrid, cfg.squad)
    at = fs.projector_apply(d, fs.ThresholdField.constant(cfg.ogrid, 0.5), phi1)
    assert np.max(np.abs(at.values - phi1.values)) < 1e-10
    grazing = fs.projector_apply(
        d,
        fs.ThresholdField.constant(cfg.ogrid, 0.5 - 1e-13, tie_tol=1e-12),
        phi1,
    )
    assert np.max(np.abs(grazing.values - phi1.values)) < 1e-10
    strictly_under = fs.projector_apply(
        d, fs.ThresholdField.constant(cfg.ogrid, 0.49), phi1
    )
    # phi1 is not in the null space, so its only component is dropped
    assert np.max(np.abs(strictly_under.values)) < 1e-10


def test_projector_idempotent_and_self_adjoint(cfg, decomposition, f_section):
    lam = fs.ThresholdField.constant(cfg.ogrid, 0.3)
    g = fs.sample_section(parse("t*omega+sin(3*pi*t)"), cfg.ogrid, cfg.squad)
    ef = fs.projector_apply(decomposition, lam, f_section)
    eef = fs.projector_apply(decomposition, lam, ef)
    assert np.max(np.abs(eef.values - ef.values)) < 1e-12
    eg = fs.projector_apply(decomposition, lam, g)
    lhs = fs.fiber_inner_product(ef, g).values
    rhs = fs.fiber_inner_product(f_section, eg).values
    assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_funcalc_identity_is_spectral_apply(decomposition, f_section):
    a = fs.functional_calculus(decomposition, parse("lambda"), f_section)
    b = fs.apply_spectral(decomposition, f_section)
    assert np.array_equal(a.values, b.values)


def test_funcalc_constant_one_is_identity(decomposition, f_section):
    out = fs.functional_calculus(decomposition, parse("1"), f_section)
    assert np.array_equal(out.values, f_section.values)


def test_funcalc_square_closed_form(cfg, decomposition, f_section):
    w, t = grid_mesh(cfg)
    out = fs.functional_calculus(decomposition, parse("lambda^2"), f_section)
    assert np.max(np.abs(out.values - t2f_ref(w, t))) < 1e-10


def test_funcalc_affine_combination(decomposition, f_section):
    # g(x) = 2x + 3 must equal 2*Tf + 3*f by linearity of the calculus
    out = fs.functional_calculus(decomposition, parse("2*lambda+3"), f_section)
    tf = fs.apply_spectral(decomposition, f_section)
    want = 2.0 * tf.values + 3.0 * f_section.values
    assert np.max(np.abs(out.values - want)) < 1e-12


def test_funcalc_rejects_stray_variables(decomposition, f_section):
    with pytest.raises(errors.MissingBinding):
        fs.functional_calculus(decomposition, parse("lambda+s"), f_section)


def test_funcalc_domain_probe(decomposition, f_section):
    # log is undefined at the lower end of the spectral interval (0)
    with pytest.raises(errors.DomainError):
        fs.functional_calculus(decomposition, parse("log(lambda)"), f_section)


def test_funcalc_continuous_on_interval(decomposition, f_section):
    out = fs.functional_calculus(
        decomposition, parse("sqrt(abs(lambda))"), f_section
    )
    assert np.all(np.isfinite(out.values))


def test_rs_invalid_mesh(decomposition, f_section):
    for mesh in (0.0, -0.1, float("nan"), float("inf")):
        with pytest.raises(errors.InvalidMesh):
            fs.riemann_stieltjes_apply(
                decomposition, parse("lambda"), f_section, mesh
            )


def test_rs_single_cell_constant(decomposition, f_section):
    # one cell spanning the whole interval: the sum collapses to
    # g(m*) E_{m*} f + g(c_1)(E_top - E_{m*}) f = g * f for constant g
    out = fs.riemann_stieltjes_apply(decomposition, parse("3"), f_section, mesh=5.0)
    assert np.max(np.abs(out.values - 3.0 * f_section.values)) < 1e-12


def test_rs_converges_to_apply(cfg, decomposition, f_section):
    tf = fs.apply_quadrature(cfg.kernel, f_section)
    nf = fs.l22_norm(f_section)
    prev = None
    for mesh in (0.08, 0.04, 0.02):
        out = fs.riemann_stieltjes_apply(
            decomposition, parse("lambda"), f_section, mesh
        )
        err = fs.l22_norm(
            fs.Section(cfg.ogrid, cfg.squad, out.values - tf.values)
        )
        assert err <= mesh * nf
        if prev is not None:
            assert err < prev
        prev = err


def test_eigenspace_multiplicity_and_closure(cfg, decomposition):
    lam = fs.ThresholdField(fs.sample_field(parse("cos(pi*omega/2)^2"), cfg.ogrid))
    space = fs.eigenspace(decomposition, lam, tol=1e-8)
    assert np.all(space.multiplicity.values == 1.0)
    # the basis row is the first sine mode up to quadrature error
    t = cfg.squad.nodes
    want = np.sqrt(2.0) * np.sin(np.pi * t)
    for i in (0, 30, 63):
        row = space.bases[i][0]
        assert np.max(np.abs(row - want)) < 1e-6


def test_eigenspace_empty_off_spectrum(cfg, decomposition):
    lam = fs.ThresholdField.constant(cfg.ogrid, 0.77)
    space = fs.eigenspace(decomposition, lam, tol=1e-10)
    assert np.any(space.multiplicity.values == 0.0)


def test_grid_mismatch_guard(cfg, decomposition, grids):
    other = fs.build_s_quadrature("gauss_legendre", 32)
    f = fs.sample_section(parse("t"), cfg.ogrid, other)
    with pytest.raises(errors.GridMismatch):
        fs.apply_spectral(decomposition, f)
    # a separable kernel adapts to any grid, only sampled kernels carry one
    ogrid, squad = grids
    sampled = fs.sample_kernel(parse("t*s"), ogrid, squad)
    g = fs.sample_section(parse("t"), ogrid, fs.build_s_quadrature("trapezoid", 9))
    with pytest.raises(errors.GridMismatch):
        fs.apply_quadrature(sampled, g)
