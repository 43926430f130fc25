//! The harmonic cocycle attached to a p-new eigensymbol: edge values by
//! transport to the base edge, harmonicity checks, ball moments and
//! boundedness diagnostics. All arithmetic here is exact.

use crate::bttree::{
    cover, gamma_to_base, is_positively_oriented, ord_rational, Ball, Edge, Vertex,
};
use crate::error::Result;
use crate::modsym::{eval_symbol, CuspDivisor, Eigenform};
use crate::weightmod::{act_dual, DualVn, Mat2, PolyN};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use std::collections::HashMap;
use std::sync::RwLock;

type DivisorKey = Vec<(i128, i128, i64)>;

fn divisor_key(d: &CuspDivisor) -> DivisorKey {
    let mut out: Vec<(i128, i128, i64)> = Vec::new();
    for (c, k) in &d.terms {
        out.push((c.a, c.b, *k));
    }
    out.sort();
    out
}

/// A p-new cuspidal eigensymbol together with its tree transfer.
pub struct HarmonicEigensymbol {
    pub form: Eigenform,
    pub p: u64,
    memo: RwLock<HashMap<(Edge, DivisorKey), DualVn<BigRational>>>,
}

impl HarmonicEigensymbol {
    pub fn new(form: Eigenform) -> Self {
        let p = form.level;
        HarmonicEigensymbol { form, p, memo: RwLock::new(HashMap::new()) }
    }

    pub fn n(&self) -> usize {
        self.form.weight as usize - 2
    }

    /// Edge value of the cocycle on a degree-zero cuspidal divisor:
    /// for a positively oriented edge with transporter g, the value is
    /// g^{-1} || phi(g D); odd edges by oddness.
    pub fn eval(&self, div: &CuspDivisor, e: &Edge) -> Result<DualVn<BigRational>> {
        if !is_positively_oriented(e) {
            return Ok(self.eval(div, &e.reversed())?.neg());
        }
        let key = (e.clone(), divisor_key(div));
        if let Some(v) = self.memo.read().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let g = gamma_to_base(self.p, e)?;
        let moved = div.apply_rational(&g);
        let raw = eval_symbol(&self.form.symbol, &moved);
        let value = act_dual(&raw, &g.inv());
        self.memo.write().unwrap().insert(key, value.clone());
        Ok(value)
    }

    /// Sum of the cocycle over the p+1 edges leaving a vertex; zero exactly
    /// when the symbol is new at p.
    pub fn vertex_sum(&self, div: &CuspDivisor, v: &Vertex) -> Result<DualVn<BigRational>> {
        let n = self.n();
        let mut acc = DualVn::zero_of_degree(&BigRational::zero(), n);
        for w in v.neighbors() {
            acc = acc.add(&self.eval(div, &Edge::new(v.clone(), w))?);
        }
        Ok(acc)
    }

    pub fn check_harmonic(&self, div: &CuspDivisor, v: &Vertex) -> Result<bool> {
        Ok(self.vertex_sum(div, v)?.is_zero())
    }

    /// Moments about a rational center: entry j is the value at (t - a)^j.
    pub fn moments(
        &self,
        div: &CuspDivisor,
        e: &Edge,
        center: &BigRational,
    ) -> Result<Vec<BigRational>> {
        let n = self.n();
        let val = self.eval(div, e)?;
        let mut out = Vec::with_capacity(n + 1);
        for j in 0..=n {
            // (t - a)^j = sum_i binom(j,i) (-a)^(j-i) t^i
            let mut acc = BigRational::zero();
            let mut binom = BigRational::one();
            for i in 0..=j {
                // binom(j, i)
                let b = binomial(j, i);
                let sign_pow = neg_pow(center, j - i);
                acc += b * sign_pow * &val.values[i];
                let _ = &mut binom;
            }
            out.push(acc);
        }
        Ok(out)
    }

    /// Monomial moment of the ball of an away-pointing edge, refined to
    /// extra_depth levels below; supports exponents above the weight bound.
    pub fn ball_moment_refined(
        &self,
        div: &CuspDivisor,
        ball: &Ball,
        exponent: usize,
        extra_depth: u32,
    ) -> Result<BigRational> {
        let n = self.n();
        assert!(!ball.infinite_chart, "refined moments are for finite-chart balls");
        let a = &ball.center;
        let mut acc = BigRational::zero();
        let deep = ball.depth + extra_depth;
        for (e, b) in cover(self.p, deep) {
            if b.infinite_chart || !ball.contains(self.p, Some(&b.center)) {
                continue;
            }
            // (t - a)^exponent = sum_l binom(e,l) (a_sub - a)^(e-l) (t - a_sub)^l,
            // keep l <= n and drop the rest (they vanish as depth grows)
            let sub = self.moments(div, &e, &b.center)?;
            let shift = &b.center - a;
            for l in 0..=n.min(exponent) {
                let c = binomial(exponent, l) * rat_pow(&shift, exponent - l);
                acc += c * &sub[l];
            }
        }
        Ok(acc)
    }

    /// Sup over edges within the given depth of the transported value size,
    /// reported as the exponent A with norm p^A.
    pub fn norm_bound(&self, div: &CuspDivisor, depth: u32) -> Result<i32> {
        let g = self.p;
        let _ = g;
        let mut best: Option<i32> = None;
        for d in 1..=depth {
            for (e, _) in cover(self.p, d) {
                let e_pos = if is_positively_oriented(&e) { e.clone() } else { e.reversed() };
                let t = gamma_to_base(self.p, &e_pos)?;
                let moved = div.apply_rational(&t);
                let raw = eval_symbol(&self.form.symbol, &moved);
                for x in &raw.values {
                    if !x.is_zero() {
                        let a = -ord_rational(self.p, x);
                        best = Some(best.map_or(a, |b: i32| b.max(a)));
                    }
                }
            }
        }
        Ok(best.unwrap_or(0))
    }
}

fn binomial(n: usize, k: usize) -> BigRational {
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    BigRational::new(num, den)
}

fn neg_pow(a: &BigRational, e: usize) -> BigRational {
    rat_pow(&(-a.clone()), e)
}

fn rat_pow(a: &BigRational, e: usize) -> BigRational {
    let mut acc = BigRational::one();
    for _ in 0..e {
        acc *= a;
    }
    acc
}

/// Evaluate an exact dual vector at a rational-coefficient polynomial.
pub fn pair_value(v: &DualVn<BigRational>, poly: &PolyN<BigRational>) -> BigRational {
    v.apply(poly)
}

/// Transport matrices for the level-one neighbors, used by tests.
pub fn neighbor_transporter(a: u64) -> Mat2 {
    Mat2::from_i64(0, -1, 1, -(a as i64))
}
