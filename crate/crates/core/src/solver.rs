//! Points of the group scheme attached to a Kisin module: all solutions of
//! `x_j^p = Σ_i A_{i,j}·x_i` as vectors of Puiseux series.
//!
//! Triangular matrices are solved one variable at a time. Each layer is an
//! additive equation `y^p − g·y = h` whose solutions are expanded term by
//! term from the Newton polygon of `y^p − g·y`.

use crate::algebra::field::{ff_solve_artin_schreier, ff_solve_kummer};
use crate::algebra::rational::{q, qi};
use crate::algebra::{Embedding, FFElem, Field, Prec, PuiseuxSeries, USeries, Q};
use crate::error::{Error, Result};
use crate::fp_linalg::{self, FpMat, Subspace};
use crate::kisin::KisinModule;

/// Precision target used when none is requested: `er/(p−1) + e`.
pub fn default_target(p: u64, e: i64, r: i64) -> Q {
    q(e * r, p as i64 - 1) + qi(e)
}

/// Largest exponent denominator allowed by default: `(p−1)·p^4`.
pub fn default_denom_cap(p: u64) -> i64 {
    (p as i64 - 1) * (p as i64).pow(4)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveOptions {
    pub target_prec: Option<Q>,
    pub denom_cap: Option<i64>,
}

impl SolveOptions {
    pub fn target(&self, m: &KisinModule) -> Q {
        self.target_prec.unwrap_or_else(|| default_target(m.p(), m.e(), m.r()))
    }

    pub fn cap(&self, p: u64) -> i64 {
        self.denom_cap.unwrap_or_else(|| default_denom_cap(p))
    }
}

/// Newton-polygon data of `y^p − g·y`: `v(g)` and the field prime.
#[derive(Clone, Copy)]
struct Slopes {
    p: Q,
    vg: Q,
}

impl Slopes {
    fn lambda_star(self) -> Q {
        self.vg / (self.p - qi(1))
    }

    /// Valuation of the correction forced by a residual of valuation `mu`.
    fn forced(self, mu: Q) -> Q {
        if mu < self.p * self.lambda_star() {
            mu / self.p
        } else {
            mu - self.vg
        }
    }

    /// Smallest residual valuation that pins a solution modulo `u^target`.
    fn needed(self, target: Q) -> Q {
        if target <= self.lambda_star() {
            self.p * target
        } else {
            target + self.vg
        }
    }
}

/// Solutions of one additive equation `y^p − g·y = h`.
#[derive(Clone, Debug)]
pub struct ScalarSolution {
    pub particular: PuiseuxSeries,
    pub homogeneous: PuiseuxSeries,
    /// From the field of `g` to the field of the results.
    pub embedding: Embedding,
}

struct Peeled {
    y: PuiseuxSeries,
    emb: Embedding,
}

/// Refine `y` until the residual `res = h − (y^p − g·y)` is known to vanish
/// below `stop`, or the exponent denominators hit `cap`.
fn peel(
    g: &PuiseuxSeries,
    mut y: PuiseuxSeries,
    mut res: PuiseuxSeries,
    stop: Q,
    cap: i64,
    strict_start: bool,
) -> Result<Peeled> {
    let mut g = g.clone();
    let (vg, mut lg) = g.leading().ok_or_else(|| Error::SingularMatrix("zero diagonal entry".into()))?;
    let field = g.field().clone();
    let sl = Slopes { p: qi(field.p() as i64), vg };
    let boundary = sl.p * sl.lambda_star();
    let mut emb = Embedding::identity(&field);
    let mut steps = 0usize;
    let reached: Prec = loop {
        let mu = match res.valuation() {
            None => break res.prec(),
            Some(mu) if mu >= stop => break Prec::Upto(mu),
            Some(mu) => mu,
        };
        steps += 1;
        if steps > 100_000 {
            return Err(Error::PrecisionExhausted("Newton-polygon expansion does not terminate".into()));
        }
        let lc = res.coeff(mu);
        let (lam, c) = if mu < boundary {
            let lam = mu / sl.p;
            if *lam.denom() > cap {
                if strict_start && y.is_zero() {
                    return Err(Error::DenominatorOverflow { den: *lam.denom(), cap });
                }
                break Prec::Upto(mu);
            }
            (lam, lc.pth_root())
        } else if mu > boundary {
            (mu - vg, -&(&lc * &lg.inv()?))
        } else {
            let (c, ext) = ff_solve_artin_schreier(&lg, &lc)?;
            if !ext.is_identity() {
                g = g.embed(&ext);
                y = y.embed(&ext);
                res = res.embed(&ext);
                lg = ext.apply(&lg);
                emb = emb.then(&ext);
            }
            (sl.lambda_star(), c)
        };
        let ys = PuiseuxSeries::monomial(c, lam, Prec::Exact);
        res = res.sub(&ys.frobenius()).add(&g.mul(&ys));
        y = y.add(&ys);
    };
    let prec = match reached {
        Prec::Exact => Prec::Exact,
        Prec::Upto(mu) => Prec::Upto(sl.forced(mu)),
    };
    Ok(Peeled { y: y.with_prec(prec), emb })
}

/// A generator of the `F_p`-line of solutions of `y^p = g·y`, known at
/// least modulo `u^target` when precision allows.
pub fn solve_homogeneous(g: &USeries, target: Q, cap: i64) -> Result<(PuiseuxSeries, Embedding)> {
    let (vg, lg) = match (g.valuation(), g.leading()) {
        (Some(v), Some(l)) => (qi(v), l),
        _ => return Err(Error::SingularMatrix("zero diagonal entry".into())),
    };
    let (c, e1) = ff_solve_kummer(&lg)?;
    let gp = PuiseuxSeries::from_useries(g).embed(&e1);
    let sl = Slopes { p: qi(g.field().p() as i64), vg };
    let eta0 = PuiseuxSeries::monomial(c, sl.lambda_star(), Prec::Exact);
    let res0 = gp.mul(&eta0).sub(&eta0.frobenius());
    let out = peel(&gp, eta0, res0, sl.needed(target), cap, false)?;
    Ok((out.y, e1.then(&out.emb)))
}

/// A solution of `y^p − g·y = h` with non-negative valuation.
pub fn solve_particular(g: &USeries, h: &PuiseuxSeries, target: Q, cap: i64) -> Result<(PuiseuxSeries, Embedding)> {
    let vg = g.valuation().ok_or_else(|| Error::SingularMatrix("zero diagonal entry".into()))?;
    let gp = PuiseuxSeries::from_useries(g);
    let sl = Slopes { p: qi(g.field().p() as i64), vg: qi(vg) };
    let zero = PuiseuxSeries::zero(g.field(), Prec::Exact);
    let out = peel(&gp, zero, h.clone(), sl.needed(target), cap, true)?;
    Ok((out.y, out.emb))
}

/// Particular and homogeneous solutions of `y^p − g·y = h`; every solution
/// is `particular + c·homogeneous` with `c ∈ F_p`.
pub fn solve_additive_scalar(g: &USeries, h: &PuiseuxSeries, target: Q, cap: i64) -> Result<ScalarSolution> {
    let (eta, e1) = solve_homogeneous(g, target, cap)?;
    let g1 = g.embed(&e1);
    let (y, e2) = solve_particular(&g1, &h.embed(&e1), target, cap)?;
    Ok(ScalarSolution { particular: y, homogeneous: eta.embed(&e2), embedding: e1.then(&e2) })
}

/// The `p^d` points of a module, through an `F_p`-basis.
#[derive(Clone, Debug)]
pub struct SolutionSet {
    /// The module with coefficients moved into the solution field.
    pub module: KisinModule,
    pub basis: Vec<Vec<PuiseuxSeries>>,
    /// From the module's own field to the solution field.
    pub embedding: Embedding,
    /// From the field the solve started in to the solution field.
    pub extension: Embedding,
    /// Coordinate solved at each layer; basis vector `k` carries the
    /// homogeneous generator of layer `k` in coordinate `order[k]`.
    pub order: Vec<usize>,
}

impl SolutionSet {
    pub fn field(&self) -> &Field {
        self.module.field()
    }

    pub fn p(&self) -> u64 {
        self.module.p()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Smallest coordinate precision over the basis.
    pub fn prec(&self) -> Prec {
        self.basis.iter().flatten().map(PuiseuxSeries::prec).min().unwrap_or(Prec::Exact)
    }

    /// The point `Σ c_k·basis_k`.
    pub fn point(&self, coeffs: &[u64]) -> Vec<PuiseuxSeries> {
        let d = self.module.rank();
        let mut x: Vec<PuiseuxSeries> = (0..d).map(|_| PuiseuxSeries::zero(self.field(), Prec::Exact)).collect();
        for (c, b) in coeffs.iter().zip(&self.basis) {
            if *c == 0 {
                continue;
            }
            let s = self.field().from_int(*c as i64);
            for (xi, bi) in x.iter_mut().zip(b) {
                *xi = xi.add(&bi.scale(&s));
            }
        }
        x
    }

    /// All points with their coordinate tuples, in lexicographic order.
    pub fn points(&self) -> impl Iterator<Item = (Vec<u64>, Vec<PuiseuxSeries>)> + '_ {
        fp_linalg::all_vectors(self.dim(), self.p()).map(move |c| {
            let x = self.point(&c);
            (c, x)
        })
    }

    pub fn embed(&self, emb: &Embedding) -> SolutionSet {
        if emb.is_identity() {
            return self.clone();
        }
        SolutionSet {
            module: self.module.embed(emb),
            basis: self.basis.iter().map(|b| b.iter().map(|x| x.embed(emb)).collect()).collect(),
            embedding: self.embedding.then(emb),
            extension: self.extension.then(emb),
            order: self.order.clone(),
        }
    }
}

/// Solve a triangular module; see [`solve_triangular_from`].
pub fn solve_triangular(m: &KisinModule, opts: &SolveOptions) -> Result<SolutionSet> {
    solve_triangular_from(m, &Embedding::identity(m.field()), opts)
}

/// Solve a triangular module with coefficients first moved along `start`.
///
/// Upper triangular matrices are solved from the first variable on, lower
/// triangular ones from the last. Each layer contributes its homogeneous
/// generator as a new basis vector and a particular solution to every
/// earlier basis vector.
pub fn solve_triangular_from(m: &KisinModule, start: &Embedding, opts: &SolveOptions) -> Result<SolutionSet> {
    let d = m.rank();
    let order: Vec<usize> = if m.is_upper_triangular() {
        (0..d).collect()
    } else if m.is_lower_triangular() {
        (0..d).rev().collect()
    } else {
        return Err(Error::NotTriangular);
    };
    let p = m.p();
    let cap = opts.cap(p);
    let target = opts.target(m);
    // earlier layers feed later ones, so they need more digits
    let mut targets = vec![target; d];
    for k in (0..d.saturating_sub(1)).rev() {
        let t = targets[k + 1];
        targets[k] = std::cmp::max(t * qi(p as i64), t + qi(m.er()));
    }
    let mut emb = start.clone();
    let mut ext = Embedding::identity(start.target());
    let mut module = m.embed(&emb);
    let mut basis: Vec<Vec<PuiseuxSeries>> = Vec::with_capacity(d);
    for (pos, &j) in order.iter().enumerate() {
        let g = module.matrix()[j][j].clone();
        let (mut eta, e1) = solve_homogeneous(&g, targets[pos], cap)?;
        if !e1.is_identity() {
            module = module.embed(&e1);
            basis = embed_all(&basis, &e1);
            emb = emb.then(&e1);
            ext = ext.then(&e1);
        }
        for k in 0..basis.len() {
            let h = layer_rhs(&module, &basis[k], j);
            let g = &module.matrix()[j][j];
            let (y, e2) = solve_particular(g, &h, targets[pos], cap)?;
            if !e2.is_identity() {
                module = module.embed(&e2);
                basis = embed_all(&basis, &e2);
                emb = emb.then(&e2);
                ext = ext.then(&e2);
                eta = eta.embed(&e2);
            }
            basis[k][j] = y;
        }
        let field = module.field().clone();
        let mut b: Vec<PuiseuxSeries> = (0..d).map(|_| PuiseuxSeries::zero(&field, Prec::Exact)).collect();
        b[j] = eta;
        basis.push(b);
    }
    Ok(SolutionSet { module, basis, embedding: emb, extension: ext, order })
}

fn embed_all(basis: &[Vec<PuiseuxSeries>], emb: &Embedding) -> Vec<Vec<PuiseuxSeries>> {
    basis.iter().map(|b| b.iter().map(|x| x.embed(emb)).collect()).collect()
}

/// `Σ_{i≠j} A_{i,j}·x_i`.
fn layer_rhs(m: &KisinModule, x: &[PuiseuxSeries], j: usize) -> PuiseuxSeries {
    let mut h = PuiseuxSeries::zero(m.field(), Prec::Exact);
    for (i, xi) in x.iter().enumerate() {
        if i != j && !(xi.is_zero() && xi.prec().is_exact()) {
            h = h.add(&xi.mul_series(&m.matrix()[i][j]));
        }
    }
    h
}

/// Result of plugging a vector back into the defining equations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Residual {
    /// Smallest valuation of a visible residual term.
    Val(Q),
    /// No residual term is visible below this precision.
    AbovePrecision(Prec),
}

/// `min_j v(x_j^p − Σ_i A_{i,j}·x_i)`.
pub fn residual_valuation(m: &KisinModule, x: &[PuiseuxSeries]) -> Residual {
    let mut best: Option<Q> = None;
    let mut prec = Prec::Exact;
    for j in 0..m.rank() {
        let mut r = x[j].frobenius();
        for (i, xi) in x.iter().enumerate() {
            r = r.sub(&xi.mul_series(&m.matrix()[i][j]));
        }
        prec = prec.min(r.prec());
        if let Some(v) = r.valuation() {
            best = Some(best.map_or(v, |b: Q| b.min(v)));
        }
    }
    match best {
        Some(v) => Residual::Val(v),
        None => Residual::AbovePrecision(prec),
    }
}

/// Truncated Puiseux polynomials `F_{p^M}[u^{1/D}]/(u^{≥T})`.
#[derive(Clone, Debug)]
pub struct QuotientAlgebra {
    pub field: Field,
    pub den: i64,
    pub trunc: Q,
}

impl QuotientAlgebra {
    pub fn new(field: &Field, den: i64, trunc: Q) -> QuotientAlgebra {
        QuotientAlgebra { field: field.clone(), den, trunc }
    }

    /// Number of exponents `k/D < T`.
    pub fn exponents(&self) -> usize {
        (self.trunc * qi(self.den)).ceil().to_integer().max(0) as usize
    }

    /// Dimension over `F_p`.
    pub fn fp_dim(&self) -> usize {
        self.exponents() * self.field.degree()
    }

    fn slot(&self, coord: usize, k: usize, a: usize) -> usize {
        (coord * self.exponents() + k) * self.field.degree() + a
    }

    fn push_elem(&self, out: &mut [u64], coord: usize, k: usize, c: &FFElem) {
        let p = self.field.p();
        for (a, &x) in c.coeffs().iter().enumerate() {
            let s = self.slot(coord, k, a);
            out[s] = (out[s] + x) % p;
        }
    }

    /// Coordinates of a truncated vector over `F_p`.
    pub fn encode(&self, x: &[PuiseuxSeries]) -> Result<Vec<u64>> {
        let mut out = vec![0u64; x.len() * self.fp_dim()];
        for (j, s) in x.iter().enumerate() {
            for (e, c) in s.terms() {
                if *e >= self.trunc {
                    break;
                }
                let scaled = *e * qi(self.den);
                if !scaled.is_integer() {
                    return Err(Error::ExponentNotRepresentable(format!("{e} with D = {}", self.den)));
                }
                self.push_elem(&mut out, j, scaled.to_integer() as usize, c);
            }
        }
        Ok(out)
    }
}

/// `F_p`-basis of the kernel of `x ↦ (x_j^p − Σ_i A_{i,j}x_i)_j` on `Alg^d`.
pub fn kernel_over_quotient(m: &KisinModule, alg: &QuotientAlgebra) -> Result<Subspace> {
    let m = if m.field().same(&alg.field) {
        m.clone()
    } else {
        m.embed(&Embedding::new(m.field(), &alg.field)?)
    };
    let d = m.rank();
    let p = alg.field.p();
    let kmax = alg.exponents();
    let deg = alg.field.degree();
    let n = d * kmax * deg;
    let mut cols: FpMat = Vec::with_capacity(n);
    for i in 0..d {
        for k in 0..kmax {
            for a in 0..deg {
                let mut col = vec![0u64; n];
                let mut cc = vec![0i64; deg];
                cc[a] = 1;
                let c = alg.field.from_coeffs(&cc)?;
                // Frobenius term lands in coordinate i
                let pk = k * p as usize;
                if pk < kmax {
                    alg.push_elem(&mut col, i, pk, &c.frobenius());
                }
                for j in 0..d {
                    for (ex, aij) in m.matrix()[i][j].terms() {
                        let kk = k + ex * alg.den as usize;
                        if kk < kmax {
                            alg.push_elem(&mut col, j, kk, &-&(aij * &c));
                        }
                    }
                }
                cols.push(col);
            }
        }
    }
    let rows: FpMat = (0..n).map(|r| cols.iter().map(|c| c[r]).collect()).collect();
    Ok(Subspace::span(n, p, &fp_linalg::kernel(&rows, n, p)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f3() -> Field {
        Field::prime(3).unwrap()
    }

    fn mono(f: &Field, c: i64, k: usize) -> USeries {
        USeries::monomial(f.from_int(c), k, Prec::Exact)
    }

    #[test]
    fn homogeneous_rank_one() {
        let f = f3();
        let (eta, emb) = solve_homogeneous(&mono(&f, 1, 1), qi(3), 162).unwrap();
        assert!(emb.is_identity());
        assert_eq!(eta, PuiseuxSeries::monomial(f.one(), q(1, 2), Prec::Exact));
    }

    #[test]
    fn particular_expands_by_branch_a() {
        let f = f3();
        let h = PuiseuxSeries::monomial(f.one(), q(1, 2), Prec::Exact);
        let (y, _) = solve_particular(&mono(&f, 1, 1), &h, qi(3), 162).unwrap();
        let terms: Vec<Q> = y.terms().map(|(e, _)| *e).collect();
        assert_eq!(&terms[..2], &[q(1, 6), q(7, 18)]);
        assert_eq!(y.coeff(q(1, 6)), f.one());
        // the expansion stalls below 1/2 and says so
        let pr = y.prec().finite().unwrap();
        assert!(pr < q(1, 2) && pr > q(7, 18));
        let m = KisinModule::rank_one(1, f.one(), 2, 1, f.from_int(-1)).unwrap();
        // y solves y^3 − u·y = u^{1/2}: residual vanishes to its precision
        let r = y.frobenius().sub(&y.mul_series(&m.matrix()[0][0])).sub(&h);
        assert!(r.is_zero());
    }

    #[test]
    fn tbar_like_homogeneous_extends_field() {
        let f = f3();
        // g = −u^2 has no square root of its leading coefficient in F_3
        let (eta, emb) = solve_homogeneous(&mono(&f, -1, 2), qi(3), 162).unwrap();
        assert_eq!(emb.target().degree(), 2);
        let t = emb.target().generator();
        assert_eq!(eta, PuiseuxSeries::monomial(t, qi(1), Prec::Exact));
    }

    #[test]
    fn rank_two_profile() {
        let f = f3();
        let a = vec![vec![mono(&f, 1, 1), mono(&f, 1, 0)], vec![USeries::zero(&f, Prec::Exact), mono(&f, 1, 1)]];
        let m = KisinModule::new(&f, 2, 1, f.from_int(-1), a, None).unwrap();
        let sols = solve_triangular(&m, &SolveOptions::default()).unwrap();
        let mut vals: Vec<Q> = Vec::new();
        for (c, x) in sols.points() {
            if c.iter().all(|&v| v == 0) {
                continue;
            }
            vals.push(x.iter().filter_map(PuiseuxSeries::valuation).min().unwrap());
            assert!(matches!(residual_valuation(&sols.module, &x), Residual::AbovePrecision(_)));
        }
        vals.sort();
        assert_eq!(vals, vec![q(1, 6); 6].into_iter().chain(vec![q(1, 2); 2]).collect::<Vec<_>>());
    }

    #[test]
    fn residual_of_perturbed_solution() {
        let f = f3();
        let m = KisinModule::rank_one(1, f.one(), 2, 1, f.from_int(-1)).unwrap();
        let exact = PuiseuxSeries::monomial(f.one(), q(1, 2), Prec::Exact);
        assert_eq!(residual_valuation(&m, &[exact.clone()]), Residual::AbovePrecision(Prec::Exact));
        // (u^{1/2} + u)^3 − u(u^{1/2} + u) = u^3 − u^2: leading term u^2
        let x = exact.add(&PuiseuxSeries::monomial(f.one(), qi(1), Prec::Exact));
        assert_eq!(residual_valuation(&m, &[x]), Residual::Val(qi(2)));
        assert!(matches!(
            residual_valuation(&m, &[PuiseuxSeries::zero(&f, Prec::Exact)]),
            Residual::AbovePrecision(_)
        ));
    }

    #[test]
    fn quotient_kernel_rank_one() {
        let f = f3();
        let m = KisinModule::rank_one(1, f.one(), 2, 1, f.from_int(-1)).unwrap();
        let alg = QuotientAlgebra::new(&f, 2, qi(3));
        let ker = kernel_over_quotient(&m, &alg).unwrap();
        for c in [1, 2] {
            let x = PuiseuxSeries::monomial(f.from_int(c), q(1, 2), Prec::Exact);
            assert!(ker.contains(&alg.encode(&[x]).unwrap()));
        }
        // truncation artifact
        let art = PuiseuxSeries::monomial(f.one(), q(5, 2), Prec::Exact);
        assert!(ker.contains(&alg.encode(&[art]).unwrap()));
        let not = PuiseuxSeries::monomial(f.one(), q(1, 1), Prec::Exact);
        assert!(!ker.contains(&alg.encode(&[not]).unwrap()));
        let bad = PuiseuxSeries::monomial(f.one(), q(1, 3), Prec::Exact);
        assert!(matches!(alg.encode(&[bad]), Err(Error::ExponentNotRepresentable(_))));
    }

    #[test]
    fn etale_kernel_is_prime_field() {
        let f9 = Field::canonical(3, 2).unwrap();
        let m = KisinModule::new(&f9, 2, 1, f9.from_int(-1), vec![vec![mono(&f9, 1, 0)]], None).unwrap();
        let alg = QuotientAlgebra::new(&f9, 1, qi(2));
        let ker = kernel_over_quotient(&m, &alg).unwrap();
        assert_eq!(ker.dim(), 1);
        assert!(ker.contains(&alg.encode(&[PuiseuxSeries::monomial(f9.one(), qi(0), Prec::Exact)]).unwrap()));
    }
}
