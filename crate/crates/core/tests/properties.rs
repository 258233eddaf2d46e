mod common;

use kisinram::algebra::{q, Field, Prec, USeries};
use kisinram::mixedchar::{EisensteinPoly, OKElem, OKRing};
use kisinram::ramification::{lower_breaks, BreakData};
use kisinram::solver::{solve_triangular, SolveOptions};
use kisinram::KisinModule;
use proptest::prelude::*;

fn small_field() -> impl Strategy<Value = Field> {
    (prop::sample::select(vec![3u64, 5, 7]), 1usize..=3).prop_map(|(p, m)| Field::canonical(p, m).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_inverse_and_pth_root(f in small_field(), i in any::<u64>(), j in any::<u64>()) {
        let a = f.element(i as u128 % f.order());
        let b = f.element(j as u128 % f.order());
        prop_assert_eq!(a.frobenius().pth_root(), a.clone());
        prop_assert_eq!(a.pth_root().frobenius(), a.clone());
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
            prop_assert!(a.pow(f.order() - 1).is_one());
        }
        prop_assert_eq!(&(&a + &b) * &b, &(&a * &b) + &(&b * &b));
    }

    #[test]
    fn series_inverse(seed in any::<u64>(), n in 1i64..20) {
        let f = Field::prime(5).unwrap();
        let mut rng = common::rng(seed);
        let coeffs: Vec<i64> = (0..6).map(|k| if k == 0 { 1 + (seed % 4) as i64 } else { rand::Rng::gen_range(&mut rng, 0..5) }).collect();
        let g = common::poly(&f, &coeffs);
        let inv = g.invert_to(n).unwrap();
        let one = USeries::constant(f.one(), Prec::Exact).truncate(n);
        prop_assert!(g.mul(&inv).truncate(n).agrees_with(&one));
    }

    #[test]
    fn ok_ring_axioms(xs in prop::collection::vec(-40i64..40, 9), e in 1usize..5) {
        let eis = EisensteinPoly::standard(3, e, &Field::prime(3).unwrap().from_int(-1)).unwrap();
        let ring = OKRing::new(eis, 3).unwrap();
        let a = OKElem::from_poly(&ring, &xs[0..3]);
        let b = OKElem::from_poly(&ring, &xs[3..6]);
        let c = OKElem::from_poly(&ring, &xs[6..9]);
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        prop_assert_eq!(a.add(&b).sub(&b), a.clone());
        if a.is_unit() {
            prop_assert_eq!(a.mul(&a.inv().unwrap()), OKElem::from_int(&ring, 1));
        }
        // π^e reduces to u^e = 0 in F_p[u]/(u^e)
        prop_assert!(OKElem::pi(&ring).pow(e as u64).reduce_mod_p().iter().all(|&c| c == 0));
    }

    #[test]
    fn rank_one_break_closed_form(p in prop::sample::select(vec![3u64, 5, 7]), e in 1i64..=5, r in 1i64..=2, s in 0i64..=10) {
        prop_assume!(s <= e * r);
        let f = Field::prime(p).unwrap();
        let m = KisinModule::rank_one(s, f.one(), e, r, f.from_int(-1)).unwrap();
        let bd = lower_breaks(&solve_triangular(&m, &SolveOptions::default()).unwrap()).unwrap();
        prop_assert_eq!(bd.jumps, vec![(q(s, p as i64 - 1), p as usize - 1)]);
    }

    #[test]
    fn module_json_round_trip(seed in any::<u64>()) {
        let m = common::random_triangular(&mut common::rng(seed));
        let back = KisinModule::from_json(&m.to_json()).unwrap();
        prop_assert!(back.agrees_with(&m));
        prop_assert_eq!(back.to_json(), m.to_json());
    }

    #[test]
    fn breaks_json_round_trip(seed in any::<u64>()) {
        let m = common::random_triangular(&mut common::rng(seed));
        let bd = lower_breaks(&solve_triangular(&m, &SolveOptions::default()).unwrap()).unwrap();
        prop_assert_eq!(BreakData::from_json(m.p(), &bd.to_json()).unwrap(), bd);
    }

    #[test]
    fn height_of_smith_product(seed in any::<u64>()) {
        let m = common::random_stride_module(&mut common::rng(seed));
        let snf = m.snf(3).unwrap();
        prop_assert_eq!(m.e_height().unwrap(), *snf.exps.iter().max().unwrap());
        let det_val: i64 = snf.exps.iter().sum();
        let det = kisinram::algebra::series::mat_det(m.matrix());
        prop_assert_eq!(det.valuation(), Some(det_val));
    }

    #[test]
    fn dual_is_an_involution(seed in any::<u64>()) {
        let m = common::random_triangular(&mut common::rng(seed));
        prop_assert!(m.dual().unwrap().dual().unwrap().agrees_with(&m));
    }
}
