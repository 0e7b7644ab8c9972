//! Independent brute-force checks of the library against first principles.

use ckmax_core::{
    AtomicSpace, BlockPartition, Index, LatticeFunctional, NormFamily, QuasiNorm, WeightFunction,
};
use proptest::prelude::*;

fn family_strategy(n: usize) -> impl Strategy<Value = NormFamily> {
    let idx = prop_oneof![
        Just(Index::finite(0.5)),
        Just(Index::finite(1.0)),
        Just(Index::finite(1.7)),
        Just(Index::finite(3.0)),
        Just(Index::Infinite),
    ];
    prop_oneof![
        idx.clone().prop_map(|p| NormFamily::WeightedLp { p }),
        (0.4f64..3.0, 0.3f64..2.0, -0.8f64..1.0).prop_map(|(r, c, a)| NormFamily::LorentzLambda {
            r,
            weight: WeightFunction::power(c, a).unwrap(),
        }),
        (0.6f64..3.0, idx.clone()).prop_map(|(p, r)| NormFamily::ClassicalLorentz { p, r }),
        (idx.clone(), idx, 1..=n).prop_map(move |(r, s, cut)| {
            let blocks = if cut == n {
                BlockPartition::singletons(n)
            } else {
                BlockPartition::new(vec![0..cut, cut..n]).unwrap()
            };
            NormFamily::Amalgam { r, s, blocks }
        }),
    ]
}

fn setup() -> impl Strategy<Value = (QuasiNorm, Vec<f64>, Vec<f64>)> {
    (1usize..=6).prop_flat_map(|n| {
        (
            prop::collection::vec(0.2f64..3.0, n),
            family_strategy(n),
            prop::collection::vec(-4.0f64..4.0, n),
            prop::collection::vec(-4.0f64..4.0, n),
        )
            .prop_map(|(w, fam, f, g)| {
                let norm = QuasiNorm::new(fam, AtomicSpace::new(w).unwrap()).unwrap();
                (norm, f, g)
            })
    })
}

fn abs(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| x.abs()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn quasi_norm_axioms((norm, f, g) in setup(), c in -5.0f64..5.0, shrink in 0.0f64..1.0) {
        let nf = norm.eval_values(&f).unwrap();
        let ng = norm.eval_values(&g).unwrap();
        prop_assert!(nf >= 0.0);

        let cf: Vec<f64> = f.iter().map(|v| c * v).collect();
        let ncf = norm.eval_values(&cf).unwrap();
        prop_assert!((ncf - c.abs() * nf).abs() <= 1e-12 * nf.max(1.0) * c.abs().max(1.0));

        let smaller: Vec<f64> = f.iter().enumerate().map(|(i, v)| v * shrink.powi(i as i32 % 3)).collect();
        prop_assert!(norm.eval_values(&smaller).unwrap() <= nf * (1.0 + 1e-12));

        let sum: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
        // increasing Lorentz weights have no tabulated constant
        if let Ok(kappa) = norm.kappa() {
            prop_assert!(norm.eval_values(&sum).unwrap() <= kappa * (nf + ng) * (1.0 + 1e-12));
        }
        prop_assert_eq!(norm.eval_abs(&abs(&f)), nf);
    }

    #[test]
    fn rearrangement_invariance((norm, f, _) in setup(), rot in 0usize..6) {
        prop_assume!(norm.is_rearrangement_invariant());
        // equal weights make any permutation measure preserving
        let n = f.len();
        let uniform = norm.with_space(AtomicSpace::new(vec![0.7; n]).unwrap()).unwrap();
        let mut h = f.clone();
        h.rotate_left(rot % n);
        h.reverse();
        let a = uniform.eval_values(&f).unwrap();
        let b = uniform.eval_values(&h).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }
}

/// `∫₀^∞ (f**)ʳ c·tᵃ dt`, piece by piece: the first piece is exact, the
/// middle pieces use fine Simpson rules, the tail is exact.
fn gamma_oracle(values: &[f64], mu: &[f64], r: f64, c: f64, a: f64) -> f64 {
    let mut pairs: Vec<(f64, f64)> = values
        .iter()
        .map(|v| v.abs())
        .zip(mu.iter().copied())
        .filter(|p| p.0 > 0.0)
        .collect();
    pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
    let prim = |t: f64| c * t.powf(a + 1.0) / (a + 1.0);
    let (mut m, mut s) = (0.0, 0.0);
    let mut total = 0.0;
    for (k, &(v, w)) in pairs.iter().enumerate() {
        let (lo, hi) = (m, m + w);
        if k == 0 {
            total += v.powf(r) * prim(hi);
        } else {
            let g = |t: f64| ((s + v * (t - lo)) / t).powf(r) * c * t.powf(a);
            let steps = 20_000;
            let h = (hi - lo) / steps as f64;
            let mut acc = g(lo) + g(hi);
            for i in 1..steps {
                acc += g(lo + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            total += acc * h / 3.0;
        }
        m = hi;
        s += v * w;
    }
    total + s.powf(r) * c * m.powf(a + 1.0 - r) / (r - a - 1.0)
}

#[test]
fn gamma_norm_matches_simpson() {
    let cases: [(&[f64], &[f64], f64, f64, f64); 4] = [
        (&[2.0, 1.0, 0.0], &[1.0, 1.0, 1.0], 2.0, 1.0, 0.0),
        (
            &[3.0, -1.0, 0.5, 2.0],
            &[0.5, 2.0, 1.0, 0.3],
            1.5,
            0.7,
            -0.3,
        ),
        (&[1.0, 1.0], &[1.0, 2.0], 3.0, 2.0, 0.5),
        (&[0.2, -4.0, 1.5], &[1.3, 0.4, 0.9], 1.2, 1.0, -0.5),
    ];
    for (f, mu, r, c, a) in cases {
        let space = AtomicSpace::new(mu.to_vec()).unwrap();
        let norm =
            QuasiNorm::lorentz_gamma(space, r, WeightFunction::power(c, a).unwrap()).unwrap();
        let got = norm.eval_values(f).unwrap().powf(r);
        let want = gamma_oracle(f, mu, r, c, a);
        assert!((got - want).abs() <= 1e-8 * want, "{got} vs {want}");
    }
}

#[test]
fn gamma_dominates_lambda() {
    // f** ≥ f* pointwise
    let space = AtomicSpace::new(vec![1.0, 0.5, 2.0]).unwrap();
    let w = WeightFunction::power(1.0, 0.2).unwrap();
    let lam = QuasiNorm::lorentz_lambda(space.clone(), 2.0, w.clone()).unwrap();
    let gam = QuasiNorm::lorentz_gamma(space, 2.0, w).unwrap();
    for f in [[1.0, 2.0, 3.0], [0.0, -1.0, 0.1], [5.0, 5.0, 5.0]] {
        assert!(gam.eval_values(&f).unwrap() >= lam.eval_values(&f).unwrap());
    }
}

#[test]
fn diagonal_amalgam_is_weighted_lebesgue() {
    let space = AtomicSpace::new(vec![0.3, 1.0, 2.0, 0.8, 1.1, 0.6]).unwrap();
    let f = [1.0, -2.0, 0.5, 0.0, 3.0, -0.25];
    for r in [0.5, 1.0, 2.5, f64::INFINITY] {
        let am =
            QuasiNorm::amalgam(space.clone(), r, r, BlockPartition::equal(6, 3).unwrap()).unwrap();
        let lp = QuasiNorm::lp(space.clone(), r);
        let (a, b) = (am.eval_values(&f).unwrap(), lp.eval_values(&f).unwrap());
        assert!((a - b).abs() <= 1e-14 * b);
        assert_eq!(am.lp_exponent(), Some(Index::from(r)));
    }
}

#[test]
fn classical_lorentz_indicator_normalisation() {
    // ‖χ_A‖_{p,r} = μ(A)^{1/p}
    let space = AtomicSpace::new(vec![0.5, 1.5, 2.0, 0.25]).unwrap();
    for (p, r) in [
        (2.0, Index::finite(1.0)),
        (0.8, Index::finite(3.0)),
        (3.0, Index::Infinite),
    ] {
        let norm = QuasiNorm::classical_lorentz(space.clone(), p, r).unwrap();
        let chi = [1.0, 0.0, 1.0, 1.0];
        let want = 2.75f64.powf(1.0 / p);
        let got = norm.eval_values(&chi).unwrap();
        assert!(
            (got - want).abs() <= 1e-12 * want,
            "({p},{r}) {got} vs {want}"
        );
    }
}
