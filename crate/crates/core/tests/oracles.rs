//! Cross-checks of the estimators against independent dense computations.

use lattice_limit_core::estimators::*;
use lattice_limit_core::lattice::*;
use lattice_limit_core::scaling::ScalingFunction;
use lattice_limit_core::symbols::*;
use lattice_limit_core::C64;
use nalgebra::DMatrix;
use std::f64::consts::PI;

fn oscillator() -> PotentialSpec {
    PotentialKind::Quadratic { a: 1.0 }.into()
}

/// Dense matrix of `P_h^* P_h` on the fine box, built column by column.
fn dense_pstar_p(emb: &Embedding) -> DMatrix<C64> {
    let n = emb.fine().len();
    let mut m = DMatrix::<C64>::zeros(n, n);
    let mut e = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = C64::new(1.0, 0.0);
        let col = emb.synthesize(&emb.analyze(&e));
        m.set_column(j, &nalgebra::DVector::from_column_slice(&col));
        e[j] = C64::new(0.0, 0.0);
    }
    m
}

#[test]
fn free1_box_norm_matches_dense_oracle() {
    let sf = ScalingFunction::meyer(1);
    let probe = ResolventProbe::default();
    for h in [0.25, 0.125] {
        let lattice = LatticeSpec::new(1, h, 16).unwrap();
        let fine = lattice.refine(4).unwrap();
        let emb = Embedding::new(&sf, lattice, fine).unwrap();
        let n = fine.len();
        let h0 = dense_matrix(&ContinuumHamiltonian::new(fine, &PotentialSpec::zero()));
        let shifted = h0 - DMatrix::<C64>::identity(n, n) * probe.mu();
        let resolvent = shifted.try_inverse().unwrap();
        let map = (DMatrix::<C64>::identity(n, n) - dense_pstar_p(&emb)) * resolvent;
        let dense = map.singular_values().max();
        let fiber = fiber_norm_max_on_box(FiberKind::Free1, h, lattice.n, &probe, &sf);
        assert!((dense - fiber).abs() <= 1e-10 * fiber, "h = {h}: dense {dense}, fiber {fiber}");
    }
}

#[test]
fn free_spectrum_distance_in_closed_form() {
    // V = 0: eigenvalues are the symbols on the modes 0, ±1, ±2, ±3.
    let pot = PotentialSpec::zero();
    let extent = 8.0;
    let reference = LatticeSpec::with_extent(1, extent, 1.0 / 32.0).unwrap();
    let hs = [0.5, 0.25, 0.125];
    let sweep = resolvent_spectrum_hausdorff(&pot, None, &hs, extent, 7, &reference, &EigenOptions::default()).unwrap();
    let m = 2.0;
    let modes = [0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0];
    let image = |values: Vec<f64>| {
        let mut s: Vec<f64> = values.into_iter().map(|l| 1.0 / (l + m)).collect();
        s.push(0.0);
        s
    };
    let cont = image(modes.iter().map(|k| (2.0 * PI * k / extent).powi(2)).collect());
    for row in &sweep.rows {
        let lat = image(modes.iter().map(|k| h0h_symbol(&[k / extent], row.h).unwrap()).collect());
        let expect = hausdorff_distance(&lat, &cont).unwrap();
        assert!((row.distance - expect).abs() < 1e-9, "h = {}: {} vs {expect}", row.h, row.distance);
        let mode_wise = lat.iter().zip(&cont).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!((row.distance - mode_wise).abs() < 1e-9);
    }
}

#[test]
fn oscillator_eigenvalues_against_dense_and_hermite() {
    let lattice = LatticeSpec::with_extent(1, 20.0, 0.05).unwrap();
    let op = LatticeHamiltonian::new(lattice, &oscillator());
    let got = lowest_eigenvalues(&op, 5, 1e-9).unwrap();
    let dense = dense_matrix(&op).symmetric_eigenvalues();
    let mut dense: Vec<f64> = dense.iter().cloned().collect();
    dense.sort_by(f64::total_cmp);
    for (j, g) in got.iter().enumerate() {
        assert!((g - dense[j]).abs() < 1e-8, "{got:?} vs {:?}", &dense[..5]);
        assert!((g - (2 * j + 1) as f64).abs() < 5e-2);
    }
}

#[test]
fn resolvent_difference_stable_under_refinement() {
    let sf = ScalingFunction::meyer(1);
    let probe = ResolventProbe::default();
    let pot: PotentialSpec = PotentialKind::Hoelder {
        alpha: 0.5,
        wavenumber: 0.25,
    }
    .into();
    let lattice = LatticeSpec::with_extent(1, 4.0, 1.0 / 16.0).unwrap();
    let value = |r: usize| {
        let fine = lattice.refine(r).unwrap();
        resolvent_diff_norm(&pot, &probe, &lattice, &fine, &sf, &SolverOptions::default(), &NormOptions::default())
            .unwrap()
            .value
    };
    let (a, b) = (value(4), value(8));
    assert!((a - b).abs() < 0.02 * b, "{a} vs {b}");
}

#[test]
fn smooth_commutator_decreases() {
    let sf = ScalingFunction::meyer(1);
    let g: PotentialSpec = PotentialKind::BoundedUc { wavenumber: 0.25 }.into();
    let hs: Vec<f64> = (3..=6).map(|k| 0.5f64.powi(k)).collect();
    let sweep = commutator_rate(&g, &sf, &hs, 4.0, 4, 0.9, 4.0, &NormOptions::default()).unwrap();
    let rep = sweep.direct_report(
        "commutator",
        RateCriterion::Decreasing {
            slack: 0.0,
            final_max: None,
        },
    );
    assert!(rep.pass, "{:?}", rep.pairs);
    assert!(sweep.schur_dominates(0.0));
}

#[test]
fn oscillator_projections() {
    let sf = ScalingFunction::meyer(1);
    let fine = LatticeSpec::with_extent(1, 20.0, 0.0125).unwrap();
    let ground = SpectralWindow::new(0.0, 2.0).unwrap();
    let pair = SpectralWindow::new(0.0, 4.0).unwrap();
    let mut previous = f64::INFINITY;
    for h in [0.2, 0.1, 0.05] {
        let lattice = LatticeSpec::with_extent(1, 20.0, h).unwrap();
        let d = spectral_projection_diff(&oscillator(), &ground, &lattice, &fine, &sf, &SpectralOptions::default())
            .unwrap();
        assert!(d.value <= previous * 1.05);
        previous = d.value;
        let two = spectral_projection_diff(&oscillator(), &pair, &lattice, &fine, &sf, &SpectralOptions::default())
            .unwrap();
        assert_eq!(two.lattice_rank(), 2);
        assert!((0.0..=1.0).contains(&two.value));
    }
}

#[test]
fn window_on_eigenvalue_is_rejected() {
    let sf = ScalingFunction::meyer(1);
    let lattice = LatticeSpec::with_extent(1, 20.0, 0.2).unwrap();
    let fine = lattice.refine(4).unwrap();
    let lowest = lowest_eigenvalues(&LatticeHamiltonian::new(lattice, &oscillator()), 1, 1e-10).unwrap()[0];
    let window = SpectralWindow::new(-1.0, lowest).unwrap();
    let err = spectral_projection_diff(&oscillator(), &window, &lattice, &fine, &sf, &SpectralOptions::default());
    assert!(matches!(err, Err(lattice_limit_core::Error::WindowTouchesSpectrum { .. })), "{err:?}");
}
