//! The two pairings against the harmonic cocycle: exact path sums for the
//! ord integral, and depth-d cover sums with degree-n Taylor contractions
//! for the log integral.

use crate::bttree::{cover, dist, gamma_to_base, reduce_point, Ball, Edge, Vertex};
use crate::error::{Error, Result};
use crate::harmonic::HarmonicEigensymbol;
use crate::modsym::{p1_class_id, unimodular_pieces, Cusp, CuspDivisor, Eigenform, MatI};
use crate::padic::{
    log_one_plus, max_rel_prec, padic_log, quad_nonresidue, LogBranch, PadicScalar, QuadExtScalar,
};
use crate::weightmod::{Mat2, PolyN};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

/// Upper bound on n + 1 across the supported weights.
const NMAX: usize = 6;

type PVec = [PadicScalar; NMAX];
type QVec = [QuadExtScalar; NMAX];

/// One term D tensor (tau2 - tau1) tensor P of a chain.
#[derive(Debug, Clone)]
pub struct ChainTerm {
    pub div: CuspDivisor,
    pub tau1: QuadExtScalar,
    pub tau2: QuadExtScalar,
    pub poly: PolyN<BigRational>,
}

/// Finite formal sum of chain terms.
#[derive(Debug, Clone)]
pub struct ChainElt {
    pub terms: Vec<ChainTerm>,
}

impl ChainElt {
    pub fn zero() -> Self {
        ChainElt { terms: vec![] }
    }

    pub fn concat(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        ChainElt { terms }
    }

    /// Transport by a group element: D -> gD, tau -> g tau, P -> P g^{-1}.
    pub fn transport(&self, g: &Mat2) -> Result<Self> {
        let ginv = g.inv();
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in &self.terms {
            terms.push(ChainTerm {
                div: t.div.apply_rational(g),
                tau1: g.moebius(&t.tau1)?,
                tau2: g.moebius(&t.tau2)?,
                poly: crate::weightmod::act_poly(&t.poly, &ginv),
            });
        }
        Ok(ChainElt { terms })
    }
}

/// Result of a log integral with its accuracy bookkeeping.
#[derive(Debug, Clone)]
pub struct IntegralResult {
    pub value: QuadExtScalar,
    pub guaranteed_valuation: i32,
    pub depth: u32,
}

/// Exact ord integral: the sum of cocycle values along the geodesic between
/// the reductions of the endpoints.
pub fn int_ord(
    h: &HarmonicEigensymbol,
    div: &CuspDivisor,
    tau1: &QuadExtScalar,
    tau2: &QuadExtScalar,
    poly: &PolyN<BigRational>,
) -> Result<BigRational> {
    let v1 = reduce_point(tau1)?;
    let v2 = reduce_point(tau2)?;
    let mut acc = BigRational::zero();
    for e in crate::bttree::path(&v1, &v2) {
        let val = h.eval(div, &e)?;
        acc += val.apply(poly);
    }
    Ok(acc)
}

/// Exact ord pairing of a chain.
pub fn pair_ord(h: &HarmonicEigensymbol, z: &ChainElt) -> Result<BigRational> {
    let mut acc = BigRational::zero();
    for t in &z.terms {
        acc += int_ord(h, &t.div, &t.tau1, &t.tau2, &t.poly)?;
    }
    Ok(acc)
}

/// Matrix with entries in Z[1/p]: m / p^k with the common p-power stripped.
#[derive(Debug, Clone, Copy)]
struct MatP {
    m: MatI,
    k: u32,
}

impl MatP {
    fn identity() -> Self {
        MatP { m: MatI::identity(), k: 0 }
    }

    fn normalize(mut self, p: u64) -> Self {
        let pp = p as i128;
        while self.k > 0
            && self.m.a % pp == 0
            && self.m.b % pp == 0
            && self.m.c % pp == 0
            && self.m.d % pp == 0
        {
            self.m = MatI { a: self.m.a / pp, b: self.m.b / pp, c: self.m.c / pp, d: self.m.d / pp };
            self.k -= 1;
        }
        self
    }

    fn mul(&self, p: u64, o: &MatP) -> MatP {
        MatP { m: self.m.mul(&o.m), k: self.k + o.k }.normalize(p)
    }

    fn from_mat2(p: u64, g: &Mat2) -> MatP {
        // entries in Z[1/p]; clear the p-power denominator
        let mut k = 0u32;
        let pb = BigInt::from(p);
        for q in [&g.a, &g.b, &g.c, &g.d] {
            let mut d = q.denom().abs();
            let mut e = 0u32;
            while (&d % &pb).is_zero() {
                d /= &pb;
                e += 1;
            }
            assert!(d == BigInt::from(1), "matrix entry has a denominator away from p");
            k = k.max(e);
        }
        let scale = BigRational::from(pb.pow(k));
        let e = |q: &BigRational| (q * &scale).to_integer().to_i128().expect("entry fits i128");
        MatP { m: MatI { a: e(&g.a), b: e(&g.b), c: e(&g.c), d: e(&g.d) }, k }.normalize(p)
    }
}

fn ord_i128(p: u64, mut x: i128) -> i32 {
    debug_assert!(x != 0);
    let pp = p as i128;
    let mut e = 0;
    while x % pp == 0 {
        x /= pp;
        e += 1;
    }
    e
}

/// Monomial action rows over i128: rows[i][j] = coeff of x^j in x^i || g.
fn vn_rows_i128(n: usize, g: &MatI) -> [[i128; NMAX]; NMAX] {
    let mut rows = [[0i128; NMAX]; NMAX];
    for (i, row) in rows.iter_mut().enumerate().take(n + 1) {
        // (a x + b)^i (c x + d)^(n-i)
        let mut acc = [0i128; NMAX];
        acc[0] = 1;
        let mut deg = 0usize;
        for _ in 0..i {
            let mut next = [0i128; NMAX];
            for (t, v) in acc.iter().enumerate().take(deg + 1) {
                next[t] = next[t].checked_add(v.checked_mul(g.b).expect("overflow")).unwrap();
                next[t + 1] =
                    next[t + 1].checked_add(v.checked_mul(g.a).expect("overflow")).unwrap();
            }
            acc = next;
            deg += 1;
        }
        for _ in 0..(n - i) {
            let mut next = [0i128; NMAX];
            for (t, v) in acc.iter().enumerate().take(deg + 1) {
                next[t] = next[t].checked_add(v.checked_mul(g.d).expect("overflow")).unwrap();
                next[t + 1] =
                    next[t + 1].checked_add(v.checked_mul(g.c).expect("overflow")).unwrap();
            }
            acc = next;
            deg += 1;
        }
        row[..n + 1].copy_from_slice(&acc[..n + 1]);
    }
    rows
}

/// Engine for log integrals against a fixed eigensymbol.
pub struct Integrator {
    pub p: u64,
    pub n: usize,
    pub r: u64,
    pub branch: LogBranch,
    level: u64,
    slope: i32,
    table_abs: i32,
    /// embedded Manin table: values[class][i]
    table: Vec<PVec>,
    /// transporters for the level-one finite branches
    finite_letters: Vec<MatP>,
    /// transporters pushing a standard child edge back to the base pair
    child_letters: Vec<MatP>,
}

impl Integrator {
    pub fn new(form: &Eigenform, target_prec: i32, branch_log_p: Option<QuadExtScalar>) -> Result<Self> {
        let p = form.level;
        let n = form.weight as usize - 2;
        assert!(n + 1 <= NMAX, "weight too large for the fixed-size engine");
        let r = quad_nonresidue(p);
        let slope = {
            let mut v = 0i32;
            let mut num = form.a_p.numer().abs();
            let pb = BigInt::from(p);
            while (&num % &pb).is_zero() {
                num /= &pb;
                v += 1;
            }
            v
        };
        // denominator size of the symbol table
        let sym = form.symbol.primitive_scaled();
        let cap = max_rel_prec(p);
        let table_abs = (target_prec + slope * 10 + 6).min(cap - 2);
        if table_abs < target_prec {
            return Err(Error::PrecisionOverflow(p));
        }
        let ncl = crate::modsym::p1_size(p);
        let mut table = Vec::with_capacity(ncl);
        for u in 0..ncl {
            let mut row = [PadicScalar::zero(p, table_abs); NMAX];
            for i in 0..=n {
                row[i] = PadicScalar::from_rational(p, &sym.manin[u * (n + 1) + i], table_abs);
            }
            table.push(row);
        }
        // letter tables from the exact transporter search
        let base = Vertex::base(p);
        let mut finite_letters = Vec::with_capacity(p as usize);
        for a in 0..p {
            let e = Edge::new(base.clone(), base.child(a));
            let g = gamma_to_base(p, &e)?;
            finite_letters.push(MatP::from_mat2(p, &g));
        }
        let mut child_letters = Vec::with_capacity(p as usize);
        let hat = Vertex::hat_base(p);
        for (e, b) in cover(p, 2) {
            if !b.infinite_chart {
                continue;
            }
            // standard child edges continue the base edge below the hat vertex
            debug_assert_eq!(e.s, hat);
            let digit = (&b.center / BigRational::from(BigInt::from(p))).to_integer();
            let idx = digit.to_u64().unwrap() as usize;
            let g = gamma_to_base(p, &e.reversed())?;
            while child_letters.len() <= idx {
                child_letters.push(MatP::identity());
            }
            child_letters[idx] = MatP::from_mat2(p, &g);
        }
        let branch = match branch_log_p {
            Some(v) => LogBranch::with_value(v),
            None => LogBranch::iwasawa(p, table_abs, r),
        };
        Ok(Integrator {
            p,
            n,
            r,
            branch,
            level: p,
            slope,
            table_abs,
            table,
            finite_letters,
            child_letters,
        })
    }

    pub fn working_prec(&self) -> i32 {
        self.table_abs
    }

    fn zero_q(&self) -> QuadExtScalar {
        QuadExtScalar::zero(self.p, self.table_abs, self.r)
    }

    fn embed_rat(&self, x: &BigRational) -> PadicScalar {
        PadicScalar::from_rational(self.p, x, self.table_abs)
    }

    /// phi evaluated on a divisor, embedded: the vector of monomial values.
    fn eval_divisor_padic(&self, terms: &[(Cusp, i64)]) -> PVec {
        let n = self.n;
        let mut acc = [PadicScalar::zero(self.p, self.table_abs); NMAX];
        for (cusp, coeff) in terms {
            if *coeff == 0 {
                continue;
            }
            let cc = PadicScalar::from_i64(self.p, *coeff, self.table_abs);
            for g in unimodular_pieces(cusp) {
                let class = p1_class_id(self.level, g.c, g.d);
                let row = &self.table[class];
                if n == 0 {
                    acc[0] = acc[0].add(&row[0].mul(&cc));
                    continue;
                }
                let rows = vn_rows_i128(n, &g);
                for i in 0..=n {
                    let mut s = PadicScalar::zero(self.p, self.table_abs);
                    for j in 0..=n {
                        if rows[i][j] != 0 {
                            let c = PadicScalar::from_i128(self.p, rows[i][j], self.table_abs);
                            s = s.add(&c.mul(&row[j]));
                        }
                    }
                    acc[i] = acc[i].add(&s.mul(&cc));
                }
            }
        }
        acc
    }

    /// Monomial moments of the ball of the away edge with transporter gam:
    /// u[l] = mu_D(t^l restricted to the ball), without the orientation sign.
    fn ball_monomial_moments(&self, div: &[(Cusp, i64)], gam: &MatP) -> PVec {
        let n = self.n;
        let moved: Vec<(Cusp, i64)> = div.iter().map(|(c, k)| (c.apply(&gam.m), *k)).collect();
        let v = self.eval_divisor_padic(&moved);
        let adj = gam.m.adj();
        let rows = vn_rows_i128(n, &adj);
        let shift = -(gam.k as i32) * n as i32;
        let mut u = [PadicScalar::zero(self.p, self.table_abs); NMAX];
        for l in 0..=n {
            let mut s = PadicScalar::zero(self.p, self.table_abs + shift.abs());
            for i in 0..=n {
                if rows[l][i] != 0 {
                    let c = PadicScalar::from_i128(self.p, rows[l][i], self.table_abs);
                    s = s.add(&c.mul(&v[i]));
                }
            }
            u[l] = s.mul_pow_p(shift);
        }
        u
    }

    /// The log double integral over the depth-d cover.
    pub fn int_log(
        &self,
        div: &CuspDivisor,
        tau1: &QuadExtScalar,
        tau2: &QuadExtScalar,
        poly: &PolyN<BigRational>,
        depth: u32,
    ) -> Result<IntegralResult> {
        let red1 = reduce_point(tau1)?;
        let red2 = reduce_point(tau2)?;
        let base = Vertex::base(self.p);
        let need = dist(&red1, &base).max(dist(&red2, &base)) as u32 + 2;
        if depth < need {
            return Err(Error::DepthTooShallow);
        }
        let s1 = tau1.with_abs_prec(self.table_abs);
        let s2 = tau2.with_abs_prec(self.table_abs);
        let pc: QVec = {
            let mut out = [self.zero_q(); NMAX];
            for (i, c) in poly.coeffs.iter().enumerate().take(self.n + 1) {
                out[i] = QuadExtScalar::from_base(self.embed_rat(c), self.r);
            }
            out
        };
        let dstar: Vec<(Cusp, i64)> = div.terms.clone();
        // top-level balls: p finite residues and the ball at infinity
        let mut jobs: Vec<TopJob> = (0..self.p)
            .map(|a| TopJob { infinite: false, center: a as i128 })
            .collect();
        jobs.push(TopJob { infinite: true, center: 0 });
        let results: Result<Vec<(QuadExtScalar, i32)>> = jobs
            .par_iter()
            .map(|job| self.walk_top(job, &dstar, &s1, &s2, &pc, depth))
            .collect();
        let mut value = self.zero_q();
        let mut guard = i32::MAX;
        for (v, g) in results? {
            value = value.add(&v);
            guard = guard.min(g);
        }
        let guard = guard.min(value.abs_prec());
        Ok(IntegralResult { value, guaranteed_valuation: guard, depth })
    }

    fn walk_top(
        &self,
        job: &TopJob,
        div: &[(Cusp, i64)],
        s1: &QuadExtScalar,
        s2: &QuadExtScalar,
        pc: &QVec,
        depth: u32,
    ) -> Result<(QuadExtScalar, i32)> {
        if job.infinite {
            let one = QuadExtScalar::one(self.p, self.table_abs, self.r);
            let node = Node {
                center: 0,
                j: 1,
                gam: MatP::identity(),
                a1: one,
                a2: one,
                inv1: one,
                inv2: one,
                l0: self.zero_q(),
            };
            self.dfs(true, &node, div, s1, s2, pc, depth)
        } else {
            let c = QuadExtScalar::from_base(
                PadicScalar::from_i128(self.p, job.center, self.table_abs),
                self.r,
            );
            let a1 = c.sub(s1);
            let a2 = c.sub(s2);
            let inv1 = a1.inv().map_err(|_| Error::DepthTooShallow)?;
            let inv2 = a2.inv().map_err(|_| Error::DepthTooShallow)?;
            let ratio = a2.mul(&inv1);
            let l0 = padic_log(&ratio, &self.branch)?;
            let node = Node {
                center: job.center,
                j: 1,
                gam: self.finite_letters[job.center as usize],
                a1,
                a2,
                inv1,
                inv2,
                l0,
            };
            self.dfs(false, &node, div, s1, s2, pc, depth)
        }
    }

    /// Index of the standard child ball that gam sends this child into.
    fn std_child_index(&self, gam: &MatP, num: i128, den: i128) -> usize {
        let m = &gam.m;
        let un = m.a * num + m.b * den;
        let vn = m.c * num + m.d * den;
        // w = 1/(gam t) = vn/un; the image lies in the standard far ball
        if vn == 0 {
            return 0;
        }
        debug_assert!(un != 0, "image of a cover point cannot be zero here");
        let ou = ord_i128(self.p, un);
        let ov = ord_i128(self.p, vn);
        debug_assert!(ov - ou >= 1, "image must land inside the far ball");
        if ov - ou >= 2 {
            return 0;
        }
        let pp = self.p as i128;
        let uu = (un / pp.pow(ou as u32)).rem_euclid(pp);
        let vv = (vn / pp.pow(ov as u32)).rem_euclid(pp);
        let inv = crate::modsym::MatI { a: 0, b: 0, c: 0, d: 0 };
        let _ = inv;
        let digit = (vv * mod_inv_small(uu, pp)).rem_euclid(pp);
        digit as usize
    }

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        &self,
        infinite: bool,
        node: &Node,
        div: &[(Cusp, i64)],
        s1: &QuadExtScalar,
        s2: &QuadExtScalar,
        pc: &QVec,
        depth: u32,
    ) -> Result<(QuadExtScalar, i32)> {
        if node.j == depth {
            return self.leaf(infinite, node, div, s1, s2, pc);
        }
        let pj = (self.p as i128).pow(node.j);
        let mut total = self.zero_q();
        let mut guard = i32::MAX;
        for b in 0..self.p {
            let delta_i = b as i128 * pj;
            let center = node.center + delta_i;
            // standard child index under the current transporter
            let (num, den) = if infinite {
                // the child ball sits around t = 1/center in the w-chart
                if center == 0 {
                    (1i128, 0i128)
                } else {
                    (1i128, center)
                }
            } else {
                (center, 1i128)
            };
            let idx = self.std_child_index(&node.gam, num, den);
            let gam = self.child_letters[idx].mul(self.p, &node.gam);
            let delta = QuadExtScalar::from_base(
                PadicScalar::from_i128(self.p, delta_i, self.table_abs),
                self.r,
            );
            let child = if infinite {
                // b_i -> b_i - sigma_i * delta
                let a1 = node.a1.sub(&s1.mul(&delta));
                let a2 = node.a2.sub(&s2.mul(&delta));
                let inv1 = a1.inv().map_err(|_| Error::DepthTooShallow)?;
                let inv2 = a2.inv().map_err(|_| Error::DepthTooShallow)?;
                // l0 -> l0 + log(1 - s2 d / b2) - log(1 - s1 d / b1)
                let t2 = log_one_plus(&s2.mul(&delta).mul(&node.inv2).neg())?;
                let t1 = log_one_plus(&s1.mul(&delta).mul(&node.inv1).neg())?;
                let l0 = node.l0.add(&t2).sub(&t1);
                Node { center, j: node.j + 1, gam, a1, a2, inv1, inv2, l0 }
            } else {
                let a1 = node.a1.add(&delta);
                let a2 = node.a2.add(&delta);
                let inv1 = a1.inv().map_err(|_| Error::DepthTooShallow)?;
                let inv2 = a2.inv().map_err(|_| Error::DepthTooShallow)?;
                let t2 = log_one_plus(&delta.mul(&node.inv2))?;
                let t1 = log_one_plus(&delta.mul(&node.inv1))?;
                let l0 = node.l0.add(&t2).sub(&t1);
                Node { center, j: node.j + 1, gam, a1, a2, inv1, inv2, l0 }
            };
            let (v, g) = self.dfs(infinite, &child, div, s1, s2, pc, depth)?;
            total = total.add(&v);
            guard = guard.min(g);
        }
        Ok((total, guard))
    }

    #[allow(clippy::too_many_arguments)]
    fn leaf(
        &self,
        infinite: bool,
        node: &Node,
        div: &[(Cusp, i64)],
        s1: &QuadExtScalar,
        s2: &QuadExtScalar,
        pc: &QVec,
    ) -> Result<(QuadExtScalar, i32)> {
        let n = self.n;
        let d = node.j as i32;
        let u = self.ball_monomial_moments(div, &node.gam);
        let sign_neg = node.j % 2 == 0;
        let cs = PadicScalar::from_i128(self.p, node.center, self.table_abs);
        // moments about the center in the working chart
        let mut m = [PadicScalar::zero(self.p, self.table_abs); NMAX];
        for i in 0..=n {
            let mut s = PadicScalar::zero(self.p, self.table_abs);
            let mut shift_pow = PadicScalar::from_i64(self.p, 1, self.table_abs);
            // (x - c)^i = sum_l binom(i,l) (-c)^(i-l) x^l, assembled from high l down
            for l in (0..=i).rev() {
                let bc = PadicScalar::from_i128(self.p, binom_i128(i, l), self.table_abs);
                let idx = if infinite { n - l } else { l };
                s = s.add(&bc.mul(&shift_pow).mul(&u[idx]));
                shift_pow = shift_pow.mul(&cs.neg());
            }
            m[i] = s;
        }
        // Taylor coefficients of the integrand factor about the center
        let mut ell = [self.zero_q(); NMAX];
        ell[0] = node.l0;
        if infinite {
            // -(1/a) [ (s2/b2)^a - (s1/b1)^a ] with s_i/b_i = 1 - inv... use
            // q_i := sigma_i * inv_i directly
            let q1 = node.inv1.mul(&node.a1.sub(&QuadExtScalar::one(self.p, self.table_abs, self.r)).neg());
            let q2 = node.inv2.mul(&node.a2.sub(&QuadExtScalar::one(self.p, self.table_abs, self.r)).neg());
            // a_i = 1 - sigma_i c_w, so sigma_i = (1 - a_i)/c_w; avoid dividing
            // by c_w = 0: q_i above is sigma_i * c_w * inv_i; recompute cleanly:
            let _ = (q1, q2);
            let mut e1 = node.sigma_inv1;
            let mut e2 = node.sigma_inv2;
            for a in 1..=n {
                let inv_a = PadicScalar::from_i64(self.p, a as i64, self.table_abs);
                let term = e2.sub(&e1).mul_base(&inv_a.inv()?).neg();
                ell[a] = term;
                e1 = e1.mul(&node.sigma_inv1);
                e2 = e2.mul(&node.sigma_inv2);
            }
        } else {
            let mut e1 = node.inv1;
            let mut e2 = node.inv2;
            for a in 1..=n {
                // (-1)^(a-1)/a * (inv2^a - inv1^a)
                let inv_a = PadicScalar::from_i64(self.p, a as i64, self.table_abs);
                let mut term = e2.sub(&e1).mul_base(&inv_a.inv()?);
                if a % 2 == 0 {
                    term = term.neg();
                }
                ell[a] = term;
                e1 = e1.mul(&node.inv1);
                e2 = e2.mul(&node.inv2);
            }
        }
        // polynomial factor expanded about the center (reversed in the w-chart)
        let mut pexp = [self.zero_q(); NMAX];
        for b in 0..=n {
            let mut s = self.zero_q();
            let mut cpow = PadicScalar::from_i64(self.p, 1, self.table_abs);
            for t in b..=n {
                let src = if infinite { n - t } else { t };
                let bc = PadicScalar::from_i128(self.p, binom_i128(t, b), self.table_abs);
                s = s.add(&pc[src].mul_base(&bc.mul(&cpow)));
                cpow = cpow.mul(&cs);
            }
            pexp[b] = s;
        }
        let mut tco = [self.zero_q(); NMAX];
        for i in 0..=n {
            let mut s = self.zero_q();
            for a in 0..=i {
                s = s.add(&ell[a].mul(&pexp[i - a]));
            }
            tco[i] = s;
        }
        let mut value = self.zero_q();
        for i in 0..=n {
            value = value.add(&tco[i].mul_base(&m[i]));
        }
        if sign_neg {
            value = value.neg();
        }
        // accuracy estimate: one Taylor step beyond the available moments
        let s_b = {
            let o1 = node.a1.valuation().ok_or(Error::DepthTooShallow)?;
            let o2 = node.a2.valuation().ok_or(Error::DepthTooShallow)?;
            o1.max(o2).max(0)
        };
        let pole = if infinite {
            let ow = if node.center == 0 { d } else { ord_i128(self.p, node.center) };
            self.n as i32 * ow
        } else {
            0
        };
        let mval = (0..=n).filter_map(|i| m[i].valuation()).min().unwrap_or(0);
        let tval = (0..=n).filter_map(|i| tco[i].valuation()).min().unwrap_or(0).min(0);
        let est = mval + tval + (d - s_b) - s_b - pole - 1;
        Ok((value, est))
    }
}

fn mod_inv_small(a: i128, m: i128) -> i128 {
    let (mut r0, mut r1) = (m, a.rem_euclid(m));
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    s0.rem_euclid(m)
}

fn binom_i128(n: usize, k: usize) -> i128 {
    let mut num = 1i128;
    for i in 0..k {
        num = num * (n - i) as i128 / (i + 1) as i128;
    }
    num
}

struct TopJob {
    infinite: bool,
    center: i128,
}

#[derive(Clone, Copy)]
struct Node {
    center: i128,
    j: u32,
    gam: MatP,
    /// finite chart: a_i = center - sigma_i; infinite chart: a_i = 1 - sigma_i * c_w
    a1: QuadExtScalar,
    a2: QuadExtScalar,
    inv1: QuadExtScalar,
    inv2: QuadExtScalar,
    l0: QuadExtScalar,
    // infinite chart only: sigma_i / (1 - sigma_i c_w)
    sigma_inv1: QuadExtScalar,
    sigma_inv2: QuadExtScalar,
}

/// Log pairing of a chain at the given depth.
pub fn pair_log(intg: &Integrator, z: &ChainElt, depth: u32) -> Result<IntegralResult> {
    let mut value = QuadExtScalar::zero(intg.p, intg.working_prec(), intg.r);
    let mut guard = i32::MAX;
    for t in &z.terms {
        let r = intg.int_log(&t.div, &t.tau1, &t.tau2, &t.poly, depth)?;
        value = value.add(&r.value);
        guard = guard.min(r.guaranteed_valuation);
    }
    Ok(IntegralResult { value, guaranteed_valuation: guard, depth })
}
