use std::f64::consts::PI;

use approx::assert_relative_eq;
use proptest::prelude::*;

use thinns::diagnostics::fit::{fit, InequalityData, Sign, Term};
use thinns::diagnostics::series::Regime;
use thinns::solver::RunConfig;

#[test]
fn poincare_chains_hold_on_every_sample() {
    let cfg = RunConfig::parse(
        "preset = full\nl1 = 1.5\nn1 = 5\nn2 = 4\nn3 = 2\neps = 0.2\nnu = 0.1\namplitude = 1\nq_fraction = 0.5\n\
         forcing = random\nforcing_amplitude = 0.5\nforcing_planar = false\ndt = 2e-3\nt_end = 0.4\ndiag_stride = 4\n",
    )
    .unwrap();
    let s = cfg.solver().unwrap().run(&cfg.initial_field().unwrap()).unwrap();
    let t = s.meta.torus;
    let kp = 2.0 * PI * t.min_wavenumber().unwrap();
    let kq = 2.0 * PI * t.min_wavenumber_q().unwrap();
    let tol = 1.0 + 1e-12;
    for x in &s.samples {
        assert!(kp * x.theta <= x.du * tol);
        assert!(kp * x.dr <= x.d2r * tol && kp * x.ds <= x.d2s * tol);
        assert!(kq * x.dw <= x.d2w * tol);
        for r in [Regime::Planar, Regime::Full] {
            assert!(kp * x.phi(r) <= x.phi_tilde(r) * tol);
            assert!(kp * x.psi(r) <= x.psi_tilde(r) * tol);
        }
        assert_relative_eq!(x.du * x.du, x.dr * x.dr + x.ds * x.ds + x.dw * x.dw, max_relative = 1e-12);
    }
}

fn law(consts: &[f64], signs: &[Sign], terms: &[Vec<f64>], bound: &[f64]) -> InequalityData {
    let m = bound.len();
    let lhs: Vec<f64> = (0..m)
        .map(|i| {
            bound[i]
                + consts
                    .iter()
                    .zip(signs)
                    .zip(terms)
                    .map(|((c, s), t)| if *s == Sign::Source { c * t[i] } else { -c * t[i] })
                    .sum::<f64>()
        })
        .collect();
    InequalityData {
        name: "law".into(),
        trajectory: "synthetic".into(),
        times: (0..m).map(|i| i as f64).collect(),
        lhs,
        bound: bound.to_vec(),
        terms: (0..consts.len())
            .map(|j| Term { constant: format!("k{j}"), sign: signs[j], values: terms[j].clone() })
            .collect(),
        links: vec![],
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fit_recovers_planted_law(
        consts in prop::collection::vec(0.1f64..5.0, 1..4),
        dissipative in prop::collection::vec(any::<bool>(), 3),
        raw in prop::collection::vec(0.0f64..1.0, 3 * 30),
        bound in prop::collection::vec(5.0f64..10.0, 30),
    ) {
        let n = consts.len();
        let signs: Vec<Sign> = (0..n).map(|j| if dissipative[j] { Sign::Dissipative } else { Sign::Source }).collect();
        let terms: Vec<Vec<f64>> = (0..n).map(|j| raw[j * 30..(j + 1) * 30].to_vec()).collect();
        let r = fit(&law(&consts, &signs, &terms, &bound), 1e-6).unwrap();
        prop_assert!(r.pass);
        for (j, c) in consts.iter().enumerate() {
            let got = r.constant(&format!("k{j}")).unwrap();
            prop_assert!((got - c).abs() <= 1e-6 * c.max(1.0), "k{} = {} vs {}", j, got, c);
        }
    }
}
