#![allow(dead_code)]

use kisinram::algebra::{Field, Mat, Prec, USeries};
use kisinram::KisinModule;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn poly(f: &Field, coeffs: &[i64]) -> USeries {
    USeries::new(f, coeffs.iter().map(|&c| f.from_int(c)).collect(), Prec::Exact)
}

pub fn mono(f: &Field, c: i64, k: usize) -> USeries {
    USeries::monomial(f.from_int(c), k, Prec::Exact)
}

fn random_poly(rng: &mut ChaCha8Rng, f: &Field, deg: usize, stride: usize) -> USeries {
    let p = f.p() as i64;
    let terms: Vec<_> = (0..=deg).map(|k| (k * stride, f.from_int(rng.gen_range(0..p)))).collect();
    USeries::from_terms(f, &terms, Prec::Exact)
}

fn random_unit(rng: &mut ChaCha8Rng, f: &Field, deg: usize, stride: usize) -> USeries {
    let p = f.p() as i64;
    let c0 = f.from_int(rng.gen_range(1..p));
    let rest = random_poly(rng, f, deg, stride).shift(stride);
    USeries::constant(c0, Prec::Exact).add(&rest)
}

/// Random admissible triangular module over `F_p` (rank `1..=3`).
pub fn random_triangular(rng: &mut ChaCha8Rng) -> KisinModule {
    loop {
        let p = if rng.gen_bool(0.7) { 3 } else { 5 };
        let f = Field::prime(p).unwrap();
        let d = rng.gen_range(1..=3usize);
        let e = rng.gen_range(1..=4i64);
        let r = if rng.gen_bool(0.8) { 1 } else { 2 };
        let upper = rng.gen_bool(0.5);
        let mut a: Mat = vec![vec![USeries::zero(&f, Prec::Exact); d]; d];
        for i in 0..d {
            let s = rng.gen_range(0..=e * r) as usize;
            a[i][i] = random_unit(rng, &f, 1, 1).shift(s);
            for j in 0..d {
                let below = j < i;
                if j != i && below != upper && rng.gen_bool(0.6) {
                    a[i][j] = random_poly(rng, &f, 2, 1);
                }
            }
        }
        let c0 = f.from_int(if rng.gen_bool(0.75) { -1 } else { rng.gen_range(1..p as i64) });
        if let Ok(m) = KisinModule::new(&f, e, r, c0, a, None) {
            return m;
        }
    }
}

fn random_const_invertible(rng: &mut ChaCha8Rng, p: u64, d: usize) -> Vec<Vec<i64>> {
    loop {
        let m: Vec<Vec<i64>> = (0..d).map(|_| (0..d).map(|_| rng.gen_range(0..p as i64)).collect()).collect();
        if det_mod(&m, p as i64) != 0 {
            return m;
        }
    }
}

fn det_mod(m: &[Vec<i64>], p: i64) -> i64 {
    let n = m.len();
    if n == 1 {
        return m[0][0].rem_euclid(p);
    }
    let mut acc = 0;
    for j in 0..n {
        let minor: Vec<Vec<i64>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| *x).collect()).collect();
        let sign = if j % 2 == 0 { 1 } else { -1 };
        acc += sign * m[0][j] * det_mod(&minor, p);
    }
    acc.rem_euclid(p)
}

/// `U` with invertible constant term and higher terms in `u^stride`.
pub fn random_gl(rng: &mut ChaCha8Rng, f: &Field, d: usize, stride: usize) -> Mat {
    let c = random_const_invertible(rng, f.p(), d);
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| {
                    let hi = random_poly(rng, f, 1, stride).shift(stride);
                    USeries::constant(f.from_int(c[i][j]), Prec::Exact).add(&hi)
                })
                .collect()
        })
        .collect()
}

/// `A = U·diag(u^{s_i})·V` over `F_3[[u^3]]` with `3 | s_i <= e`, `e ∈ {3, 6}`.
pub fn random_stride_module(rng: &mut ChaCha8Rng) -> KisinModule {
    let f = Field::prime(3).unwrap();
    let e = if rng.gen_bool(0.5) { 3 } else { 6 };
    let d = rng.gen_range(1..=3usize);
    let u = random_gl(rng, &f, d, 3);
    let v = random_gl(rng, &f, d, 3);
    let mut dmat: Mat = vec![vec![USeries::zero(&f, Prec::Exact); d]; d];
    for (i, row) in dmat.iter_mut().enumerate() {
        let s = 3 * rng.gen_range(0..=e / 3) as usize;
        row[i] = mono(&f, 1, s);
    }
    let a = kisinram::algebra::series::mat_mul(&kisinram::algebra::series::mat_mul(&u, &dmat), &v);
    KisinModule::new(&f, e, 1, f.from_int(-1), a, None).expect("U·D·V has height max s_i")
}

/// The rank-two module `[[u, 1], [0, u]]` over `F_3`, `e = 2`.
pub fn rank_two_example() -> KisinModule {
    let f = Field::prime(3).unwrap();
    let a = vec![vec![mono(&f, 1, 1), mono(&f, 1, 0)], vec![USeries::zero(&f, Prec::Exact), mono(&f, 1, 1)]];
    KisinModule::new(&f, 2, 1, f.from_int(-1), a, None).unwrap()
}
