use approx::assert_relative_eq;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use thinns::diagnostics::series::{DiagnosticSeries, Sample, SeriesMeta};
use thinns::gronwall::thresholds::{default_alpha, threshold_row, ThresholdParams};
use thinns::gronwall::{check_trajectory, inverse_rescale, literature_thresholds, rescale, solve_envelope, InequalitySystem, SystemRegime};
use thinns::spectral::{SpectralField, Torus};

const EPS: f64 = 0.25;

fn system(c: [f64; 10], u: f64, f: f64) -> InequalitySystem {
    InequalitySystem { c, c18: 1.0, c19: 1.0, u, f, eps: EPS, regime: SystemRegime::Lemma3 }
}

/// Closed-form solution of the unforced equality system.
fn exact(sys: &InequalitySystem, t: f64) -> [f64; 3] {
    let c = |i: usize| sys.c[i - 1];
    let u2 = sys.u * sys.u;
    let a_phi = 1.0 / (c(4) * c(2) * c(2));
    let a_psi = 1.0 / (c(6) * c(3) * c(3));
    let a_theta = 1.0 / (c(9) * c(1));
    let b = c(7) / sys.eps;
    let phi2 = u2 * (-a_phi * t).exp();
    let psi2 = u2 * (-a_psi * t + b * u2 * (1.0 - (-a_phi * t).exp()) / a_phi).exp();
    [u2 * (-a_theta * t).exp(), phi2, psi2]
}

fn series_from(sys: &InequalitySystem, damping: f64, n: usize, horizon: f64) -> DiagnosticSeries {
    let torus = Torus::new([1.0, 1.0, EPS], [2, 2, 1]).unwrap();
    let mut s = DiagnosticSeries::new(SeriesMeta {
        label: "synthetic".into(),
        torus,
        domain: None,
        nu: 1.0,
        u0_h1: sys.u,
        f_bound: sys.f,
        dt: horizon / n as f64,
        scheme: "none".into(),
        dealias: true,
    });
    for i in 0..=n {
        let t = horizon * i as f64 / n as f64;
        let [th, ph, ps] = exact(sys, t);
        let d = (-damping * t).exp();
        s.push(Sample { t, theta: (th * d).sqrt(), dr: (ph * d).sqrt(), ds: (ps * d).sqrt(), ..Default::default() });
    }
    s
}

#[test]
fn envelope_matches_closed_form() {
    let sys = system([1.3, 0.8, 1.1, 0.9, 2.0, 0.7, 0.05, 1.5, 1.2, 0.6], 0.7, 0.0);
    let env = solve_envelope(&sys, 2.0, 40).unwrap();
    for (i, t) in env.times.iter().enumerate() {
        let [th, ph, ps] = exact(&sys, *t);
        assert_relative_eq!(env.theta2[i], th, max_relative = 1e-10);
        assert_relative_eq!(env.phi2[i], ph, max_relative = 1e-10);
        assert_relative_eq!(env.psi2[i], ps, max_relative = 1e-10);
    }
}

#[test]
fn equality_and_damped_series_are_contained() {
    let sys = system([1.0, 1.2, 0.9, 0.8, 1.0, 1.1, 0.1, 1.0, 0.7, 1.0], 0.9, 0.0);
    let eq = check_trajectory(&series_from(&sys, 0.0, 200, 3.0), &sys, 1e-8).unwrap();
    assert!(eq.contained, "{:?}", eq.first_violation);
    assert!(eq.max_ratio.iter().all(|r| (r - 1.0).abs() < 1e-8), "{:?}", eq.max_ratio);
    let damped = check_trajectory(&series_from(&sys, 0.5, 200, 3.0), &sys, 0.0).unwrap();
    assert!(damped.contained);
    assert!(damped.max_ratio.iter().all(|r| *r <= 1.0 + 1e-12));
}

#[test]
fn excess_growth_is_caught() {
    let sys = system([1.0; 10], 0.5, 0.0);
    let report = check_trajectory(&series_from(&sys, -0.2, 100, 2.0), &sys, 1e-6).unwrap();
    let v = report.first_violation.expect("violation");
    assert!(v.t > 0.0 && v.value > v.bound);
}

fn random_field(t: Torus, seed: u64) -> SpectralField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SpectralField::from_fn(t, |_| [(); 3].map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn envelopes_grow_with_data(
        c in prop::array::uniform10(0.2f64..2.0),
        u in 0.0f64..1.0, du in 0.0f64..0.5,
        f in 0.0f64..1.0, df in 0.0f64..0.5,
    ) {
        let lo = solve_envelope(&system(c, u, f), 1.0, 20).unwrap();
        let hi = solve_envelope(&system(c, u + du, f + df), 1.0, 20).unwrap();
        for (a, b) in [(&lo.theta2, &hi.theta2), (&lo.phi2, &hi.phi2), (&lo.psi2, &hi.psi2)] {
            for (x, y) in a.iter().zip(b) {
                prop_assert!(*y >= *x * (1.0 - 1e-12), "{} < {}", y, x);
            }
        }
    }

    #[test]
    fn rescale_inverts(l1 in 1.0f64..3.0, l2 in 0.3f64..1.0, nu in 0.1f64..2.0, seed in any::<u64>()) {
        let t = Torus::new([l1, l2, 0.1], [3, 2, 1]).unwrap();
        let u = random_field(t, seed);
        let f = random_field(t, seed ^ 1);
        let r = rescale(&u, &f, nu).unwrap();
        let (u2, f2) = inverse_rescale(&r, t, nu).unwrap();
        prop_assert!(u2.sub(&u).unwrap().norm_l2() <= 1e-12 * u.norm_l2());
        prop_assert!(f2.sub(&f).unwrap().norm_l2() <= 1e-12 * f.norm_l2());
    }

    #[test]
    fn never_crossed_means_below_threshold(scale in 0.01f64..10.0, c18 in 0.1f64..10.0, c19 in 0.1f64..10.0) {
        let mut sys = system([1.0; 10], scale, 0.0);
        sys.regime = SystemRegime::Lemma5;
        sys.c18 = c18;
        sys.c19 = c19;
        let r = check_trajectory(&series_from(&sys, 0.3, 60, 1.0), &sys, 1e-6).unwrap();
        let peak = r.guard.iter().map(|g| g.1).fold(0.0f64, f64::max);
        prop_assert_eq!(peak, r.guard_max);
        match r.guard_crossing {
            None => prop_assert!(r.guard_max <= r.threshold),
            Some(t) => {
                let first = r.guard.iter().find(|g| g.1 > r.threshold).unwrap();
                prop_assert_eq!(first.0, t);
            }
        }
    }
}

#[test]
fn threshold_table_shapes() {
    let eps: Vec<f64> = (2..=6).map(|k| 2f64.powi(-k)).collect();
    let rows = literature_thresholds(&eps, &ThresholdParams::uniform(0.0, 1.0), &default_alpha).unwrap();
    assert_eq!(rows.len(), 5);
    for w in rows.windows(2) {
        // shrinking eps tightens the planar conditions and relaxes the oscillating ones
        assert!(w[1].rs2_pu < w[0].rs2_pu);
        assert!(w[1].rs2_qf > w[0].rs2_qf);
    }
    let e = (-1.0f64).exp();
    let r = threshold_row(e, &ThresholdParams::uniform(0.0, 1.0), &|_| 0.0).unwrap();
    assert_relative_eq!(r.rs2_qu, e.powf(-5.0 / 48.0), max_relative = 1e-14);
}
