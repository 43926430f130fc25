//! Weight-k modular symbols for Gamma_0(M) over exact rationals: Manin
//! presentation, Hecke and Atkin-Lehner operators, the Eisenstein/cuspidal
//! split, the p-new subspace and rational eigenforms.

use crate::error::{Error, Result};
use crate::exact_linalg as la;
use crate::weightmod::{act_poly_unnorm, DualVn, Mat2, PolyN};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

/// A cusp a/b in lowest terms with b >= 0; infinity is 1/0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Cusp {
    pub a: i128,
    pub b: i128,
}

impl Cusp {
    pub fn new(a: i128, b: i128) -> Self {
        assert!(a != 0 || b != 0);
        let g = gcd_i128(a.abs(), b.abs());
        let (mut a, mut b) = (a / g, b / g);
        if b < 0 || (b == 0 && a < 0) {
            a = -a;
            b = -b;
        }
        Cusp { a, b }
    }

    pub fn infinity() -> Self {
        Cusp { a: 1, b: 0 }
    }

    pub fn zero() -> Self {
        Cusp { a: 0, b: 1 }
    }

    pub fn is_infinity(&self) -> bool {
        self.b == 0
    }

    pub fn apply(&self, m: &MatI) -> Cusp {
        Cusp::new(m.a * self.a + m.b * self.b, m.c * self.a + m.d * self.b)
    }

    fn new_from_bigint(a: BigInt, b: BigInt) -> Cusp {
        let a = a.to_i128().expect("cusp numerator fits i128");
        let b = b.to_i128().expect("cusp denominator fits i128");
        Cusp::new(a, b)
    }
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.max(1)
    } else {
        gcd_i128(b, a % b)
    }
}

/// Small exact 2x2 integer-entry matrix for hot paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MatI {
    pub a: i128,
    pub b: i128,
    pub c: i128,
    pub d: i128,
}

impl MatI {
    pub fn identity() -> Self {
        MatI { a: 1, b: 0, c: 0, d: 1 }
    }

    pub fn det(&self) -> i128 {
        self.a * self.d - self.b * self.c
    }

    pub fn mul(&self, o: &MatI) -> MatI {
        MatI {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    /// Adjugate: det * inverse.
    pub fn adj(&self) -> MatI {
        MatI { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    pub fn to_mat2(&self) -> Mat2 {
        Mat2::from_i64(self.a as i64, self.b as i64, self.c as i64, self.d as i64)
    }
}

/// Apply a cusp-level Moebius map given by a rational matrix.
pub fn cusp_apply_rational(m: &Mat2, x: &Cusp) -> Cusp {
    // scale the matrix to integer entries first
    let lcm = [&m.a, &m.b, &m.c, &m.d]
        .iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let s = BigRational::from(lcm);
    let e = |q: &BigRational| (q * &s).to_integer();
    let (a, b, c, d) = (e(&m.a), e(&m.b), e(&m.c), e(&m.d));
    let na = &a * BigInt::from(x.a) + &b * BigInt::from(x.b);
    let nb = &c * BigInt::from(x.a) + &d * BigInt::from(x.b);
    Cusp::new_from_bigint(na, nb)
}

/// Degree-zero divisor supported on cusps, with integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CuspDivisor {
    pub terms: Vec<(Cusp, i64)>,
}

impl CuspDivisor {
    pub fn path(from: Cusp, to: Cusp) -> Self {
        CuspDivisor { terms: vec![(to, 1), (from, -1)] }
    }

    pub fn zero() -> Self {
        CuspDivisor { terms: vec![] }
    }

    pub fn degree(&self) -> i64 {
        self.terms.iter().map(|(_, c)| c).sum()
    }

    pub fn apply(&self, m: &MatI) -> Self {
        CuspDivisor { terms: self.terms.iter().map(|(x, c)| (x.apply(m), *c)).collect() }
    }

    pub fn apply_rational(&self, m: &Mat2) -> Self {
        CuspDivisor {
            terms: self.terms.iter().map(|(x, c)| (cusp_apply_rational(m, x), *c)).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        CuspDivisor { terms }
    }

    pub fn negate(&self) -> Self {
        CuspDivisor { terms: self.terms.iter().map(|(x, c)| (*x, -c)).collect() }
    }
}

/// P^1(Z/M) bookkeeping; levels are 1 or prime here.
pub fn p1_size(m: u64) -> usize {
    if m == 1 {
        1
    } else {
        m as usize + 1
    }
}

pub fn p1_class_id(m: u64, c: i128, d: i128) -> usize {
    if m == 1 {
        return 0;
    }
    let mm = m as i128;
    let c = c.rem_euclid(mm);
    let d = d.rem_euclid(mm);
    if c == 0 {
        assert!(d != 0, "(0:0) is not a projective class");
        return m as usize; // class (0:1)
    }
    // (c:d) = (1 : d c^{-1})
    let cinv = mod_inv_i128(c, mm);
    (d * cinv).rem_euclid(mm) as usize
}

fn mod_inv_i128(a: i128, m: i128) -> i128 {
    let (mut r0, mut r1) = (m, a.rem_euclid(m));
    let (mut s0, mut s1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (s0, s1) = (s1, s0 - q * s1);
    }
    assert!(r0 == 1, "non-invertible residue");
    s0.rem_euclid(m)
}

/// Representative in SL2(Z) whose bottom row realizes the class.
fn p1_rep(m: u64, id: usize) -> MatI {
    if m == 1 {
        return MatI::identity();
    }
    if id == m as usize {
        MatI::identity() // bottom row (0, 1)
    } else {
        // bottom row (1, id)
        MatI { a: 0, b: -1, c: 1, d: id as i128 }
    }
}

fn p1_act(m: u64, id: usize, g: &MatI) -> usize {
    let rep = p1_rep(m, id);
    let (c, d) = (rep.c, rep.d);
    p1_class_id(m, c * g.a + d * g.c, c * g.b + d * g.d)
}

/// The space of weight-k modular symbols for Gamma_0(M), presented by Manin
/// generators indexed by P^1(Z/M) and the torsion relations.
#[derive(Debug, Clone)]
pub struct SymbolSpace {
    pub level: u64,
    pub weight: u32,
    /// kernel basis; each vector lists the V_n values of every Manin generator
    pub basis: Vec<Vec<BigRational>>,
    n: usize,
    nclasses: usize,
}

/// A modular symbol: the full vector of Manin generator values.
#[derive(Debug, Clone, PartialEq)]
pub struct ModSymElt {
    pub level: u64,
    pub weight: u32,
    pub manin: Vec<BigRational>,
}

impl ModSymElt {
    fn n(&self) -> usize {
        self.weight as usize - 2
    }

    pub fn is_zero(&self) -> bool {
        self.manin.iter().all(|x| x.is_zero())
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        ModSymElt {
            level: self.level,
            weight: self.weight,
            manin: self.manin.iter().map(|x| x * s).collect(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        ModSymElt {
            level: self.level,
            weight: self.weight,
            manin: self.manin.iter().zip(&o.manin).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        ModSymElt {
            level: self.level,
            weight: self.weight,
            manin: self.manin.iter().zip(&o.manin).map(|(x, y)| x - y).collect(),
        }
    }

    fn manin_value(&self, class: usize) -> DualVn<BigRational> {
        let n = self.n();
        DualVn { values: self.manin[class * (n + 1)..(class + 1) * (n + 1)].to_vec() }
    }

    /// Clear denominators and content, for stable integral evaluation tables.
    pub fn primitive_scaled(&self) -> ModSymElt {
        let mut lcm = BigInt::one();
        for x in &self.manin {
            lcm = lcm.lcm(x.denom());
        }
        let scaled: Vec<BigInt> =
            self.manin.iter().map(|x| (x * BigRational::from(lcm.clone())).to_integer()).collect();
        let mut content = BigInt::zero();
        for x in &scaled {
            content = content.gcd(x);
        }
        if content.is_zero() {
            content = BigInt::one();
        }
        ModSymElt {
            level: self.level,
            weight: self.weight,
            manin: scaled.iter().map(|x| BigRational::from(x / &content)).collect(),
        }
    }
}

/// Action matrix of g on V_n in the monomial basis, unnormalized weight action.
fn vn_action_matrix(n: usize, g: &MatI) -> Vec<Vec<BigRational>> {
    let proto = BigRational::zero();
    let gm = g.to_mat2();
    (0..=n)
        .map(|i| {
            let mono: PolyN<BigRational> = PolyN::monomial(&proto, n, i);
            act_poly_unnorm(&mono, &gm).coeffs
        })
        .collect()
}

/// Unimodular pieces of the path from infinity to a/b: determinant-one
/// matrices g with {infty, a/b} = sum of g{0, infty}.
pub fn unimodular_pieces(x: &Cusp) -> Vec<MatI> {
    if x.is_infinity() {
        return vec![];
    }
    let (a, b) = (x.a, x.b);
    // continued fraction convergents of a/b with floored quotients
    let mut quots = Vec::new();
    let (mut r0, mut r1) = (a, b);
    while r1 != 0 {
        let q = r0.div_euclid(r1);
        quots.push(q);
        (r0, r1) = (r1, r0 - q * r1);
    }
    let (mut pk1, mut qk1) = (1i128, 0i128); // p_{-1}, q_{-1}
    let (mut pk, mut qk) = (quots[0], 1i128);
    let mut out = Vec::new();
    let push_piece = |out: &mut Vec<MatI>, pk: i128, pk1: i128, qk: i128, qk1: i128| {
        let mut m = MatI { a: pk, b: pk1, c: qk, d: qk1 };
        if m.det() == -1 {
            m = MatI { a: -m.a, b: m.b, c: -m.c, d: m.d };
        }
        debug_assert_eq!(m.det(), 1);
        out.push(m);
    };
    push_piece(&mut out, pk, pk1, qk, qk1);
    for &q in &quots[1..] {
        let (p2, q2) = (q * pk + pk1, q * qk + qk1);
        (pk1, qk1) = (pk, qk);
        (pk, qk) = (p2, q2);
        push_piece(&mut out, pk, pk1, qk, qk1);
    }
    out
}

impl SymbolSpace {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nclasses(&self) -> usize {
        self.nclasses
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn element(&self, coords: &[BigRational]) -> ModSymElt {
        let mut manin = vec![BigRational::zero(); self.nclasses * (self.n + 1)];
        for (c, v) in coords.iter().zip(&self.basis) {
            for (m, x) in manin.iter_mut().zip(v) {
                *m += c * x;
            }
        }
        ModSymElt { level: self.level, weight: self.weight, manin }
    }

    pub fn coordinates(&self, x: &ModSymElt) -> Option<Vec<BigRational>> {
        la::solve_columns(&self.basis, &x.manin)
    }
}

/// Build the symbol space: Manin generators and the 2- and 3-term torsion
/// relations, solved exactly over Q.
pub fn build_space(level: u64, weight: u32) -> Result<SymbolSpace> {
    if weight < 2 || weight % 2 != 0 {
        return Err(Error::Config(format!("weight must be even and at least 2, got {weight}")));
    }
    if level != 1 && !is_prime(level) {
        return Err(Error::Config(format!(
            "only level 1 and prime levels are supported, got {level}"
        )));
    }
    let n = weight as usize - 2;
    let ncl = p1_size(level);
    let ncols = ncl * (n + 1);
    let s = MatI { a: 0, b: -1, c: 1, d: 0 };
    let t3 = MatI { a: 0, b: -1, c: 1, d: -1 }; // order three
    let smat = vn_action_matrix(n, &s);
    let tmat = vn_action_matrix(n, &t3);
    let t2mat = vn_action_matrix(n, &t3.mul(&t3));
    let mut rows: Vec<la::Row> = Vec::new();
    for u in 0..ncl {
        let us = p1_act(level, u, &s);
        let ut = p1_act(level, u, &t3);
        let ut2 = p1_act(level, u, &t3.mul(&t3));
        for i in 0..=n {
            // M(u)_i + sum_j smat[i][j] M(uS)_j = 0
            let mut row = vec![BigRational::zero(); ncols];
            row[u * (n + 1) + i] += BigRational::one();
            for j in 0..=n {
                row[us * (n + 1) + j] += smat[i][j].clone();
            }
            rows.push(row);
            let mut row = vec![BigRational::zero(); ncols];
            row[u * (n + 1) + i] += BigRational::one();
            for j in 0..=n {
                row[ut * (n + 1) + j] += tmat[i][j].clone();
                row[ut2 * (n + 1) + j] += t2mat[i][j].clone();
            }
            rows.push(row);
        }
    }
    let basis = la::kernel(rows, ncols);
    Ok(SymbolSpace { level, weight, basis, n, nclasses: ncl })
}

fn is_prime(m: u64) -> bool {
    if m < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Evaluate a symbol on a degree-zero cuspidal divisor.
pub fn eval_symbol(phi: &ModSymElt, div: &CuspDivisor) -> DualVn<BigRational> {
    debug_assert_eq!(div.degree(), 0, "divisor must have degree zero");
    let n = phi.n();
    let mut acc = DualVn::zero_of_degree(&BigRational::zero(), n);
    for (cusp, coeff) in &div.terms {
        if *coeff == 0 {
            continue;
        }
        let v = eval_to_cusp(phi, cusp);
        let c = BigRational::from(BigInt::from(*coeff));
        acc = acc.add(&v.scale(&c));
    }
    acc
}

/// Direct value of phi on the unimodular path g{0,infinity}: g || M(class g).
pub fn manin_piece_value(phi: &ModSymElt, g: &MatI) -> DualVn<BigRational> {
    debug_assert_eq!(g.det(), 1);
    let n = phi.n();
    let class = p1_class_id(phi.level, g.c, g.d);
    let val = phi.manin_value(class);
    let gm = vn_action_matrix(n, g);
    let mut moved = DualVn::zero_of_degree(&BigRational::zero(), n);
    for i in 0..=n {
        let mut s = BigRational::zero();
        for j in 0..=n {
            s += &gm[i][j] * &val.values[j];
        }
        moved.values[i] = s;
    }
    moved
}

/// Value on the path from infinity to the cusp.
pub fn eval_to_cusp(phi: &ModSymElt, cusp: &Cusp) -> DualVn<BigRational> {
    let n = phi.n();
    let mut acc = DualVn::zero_of_degree(&BigRational::zero(), n);
    for g in unimodular_pieces(cusp) {
        let class = p1_class_id(phi.level, g.c, g.d);
        let val = phi.manin_value(class);
        // phi(g{0,infty}) = g || M(class)
        let gm = vn_action_matrix(n, &g);
        let mut moved = DualVn::zero_of_degree(&BigRational::zero(), n);
        for i in 0..=n {
            let mut s = BigRational::zero();
            for j in 0..=n {
                s += &gm[i][j] * &val.values[j];
            }
            moved.values[i] = s;
        }
        acc = acc.add(&moved);
    }
    acc
}

/// Hecke and Atkin-Lehner operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeckeOp {
    T(u64),
    U(u64),
    Wp,
    Winf,
}

fn hecke_cosets(op: HeckeOp, level: u64) -> Result<Vec<MatI>> {
    match op {
        HeckeOp::T(l) => {
            if level % l == 0 {
                return Err(Error::BadOperator(format!("T_{l} at level divisible by {l}")));
            }
            let mut v: Vec<MatI> =
                (0..l).map(|j| MatI { a: 1, b: j as i128, c: 0, d: l as i128 }).collect();
            v.push(MatI { a: l as i128, b: 0, c: 0, d: 1 });
            Ok(v)
        }
        HeckeOp::U(l) => {
            if level % l != 0 {
                return Err(Error::BadOperator(format!("U_{l} requires {l} | level")));
            }
            Ok((0..l).map(|j| MatI { a: 1, b: j as i128, c: 0, d: l as i128 }).collect())
        }
        _ => unreachable!("involution operators have dedicated paths"),
    }
}

/// Apply a Hecke operator to a symbol.
pub fn hecke(op: HeckeOp, phi: &ModSymElt) -> Result<ModSymElt> {
    let n = phi.n();
    let level = phi.level;
    match op {
        HeckeOp::Wp => {
            let p = level as i128;
            let w = MatI { a: 0, b: -1, c: p, d: 0 };
            let out = apply_coset_sum(phi, &[w]);
            // normalize by p^(n/2) so the operator is an involution
            let scale = BigRational::new(BigInt::one(), BigInt::from(level).pow(n as u32 / 2));
            Ok(out.scale(&scale))
        }
        HeckeOp::Winf => {
            let eta = MatI { a: -1, b: 0, c: 0, d: 1 };
            Ok(apply_coset_sum(phi, &[eta]))
        }
        _ => {
            let cosets = hecke_cosets(op, level)?;
            Ok(apply_coset_sum(phi, &cosets))
        }
    }
}

/// sum_i adj(alpha_i) || phi(alpha_i D), recorded on every Manin generator;
/// right multiplication by the group permutes the left cosets, which makes
/// this equivariant.
fn apply_coset_sum(phi: &ModSymElt, cosets: &[MatI]) -> ModSymElt {
    let n = phi.n();
    let level = phi.level;
    let ncl = p1_size(level);
    let mut manin = vec![BigRational::zero(); ncl * (n + 1)];
    for u in 0..ncl {
        let g = p1_rep(level, u);
        let base = CuspDivisor::path(Cusp::zero().apply(&g), Cusp::infinity().apply(&g));
        let mut total = DualVn::zero_of_degree(&BigRational::zero(), n);
        for alpha in cosets {
            let d = base.apply(alpha);
            let v = eval_symbol(phi, &d);
            let am = vn_action_matrix(n, &alpha.adj());
            let mut moved = DualVn::zero_of_degree(&BigRational::zero(), n);
            for i in 0..=n {
                let mut s = BigRational::zero();
                for j in 0..=n {
                    s += &am[i][j] * &v.values[j];
                }
                moved.values[i] = s;
            }
            total = total.add(&moved);
        }
        // pull back along g to a Manin value: M(u) = g^{-1} || value
        let ginv = g.adj(); // det 1
        let gm = vn_action_matrix(n, &ginv);
        for i in 0..=n {
            let mut s = BigRational::zero();
            for j in 0..=n {
                s += &gm[i][j] * &total.values[j];
            }
            manin[u * (n + 1) + i] = s;
        }
    }
    ModSymElt { level, weight: phi.weight, manin }
}

/// Matrix of an operator on a list of symbols spanning an invariant space.
fn operator_matrix(space_basis: &[ModSymElt], op: HeckeOp) -> Result<Vec<la::Row>> {
    let cols: Vec<la::Row> = space_basis.iter().map(|b| b.manin.clone()).collect();
    let mut out: Vec<la::Row> = vec![vec![BigRational::zero(); space_basis.len()]; space_basis.len()];
    for (j, b) in space_basis.iter().enumerate() {
        let img = hecke(op, b)?;
        let coords = la::solve_columns(&cols, &img.manin)
            .ok_or_else(|| Error::Config("operator does not preserve the subspace".into()))?;
        for (i, c) in coords.into_iter().enumerate() {
            out[i][j] = c;
        }
    }
    Ok(out)
}

/// The cuspidal subspace: image of t_l = T_l - l^(k-1) - 1 for the smallest
/// good prime l; t_l kills the Eisenstein part and is invertible on the
/// cuspidal part.
pub fn cuspidal_subspace(space: &SymbolSpace) -> Result<Vec<ModSymElt>> {
    let l = (2..).find(|l| is_prime(*l) && space.level % *l != 0).unwrap();
    let shift = BigRational::from(BigInt::from(l).pow(space.weight - 1) + BigInt::one());
    let mut image_cols: Vec<la::Row> = Vec::new();
    for b in &space.basis {
        let elt = ModSymElt { level: space.level, weight: space.weight, manin: b.clone() };
        let img = hecke(HeckeOp::T(l), &elt)?.sub(&elt.scale(&shift));
        image_cols.push(img.manin);
    }
    let basis = la::column_space(&image_cols);
    Ok(basis
        .into_iter()
        .map(|v| ModSymElt { level: space.level, weight: space.weight, manin: v })
        .collect())
}

/// A p-new rational eigenform together with its eigensymbol.
#[derive(Debug, Clone)]
pub struct Eigenform {
    pub level: u64,
    pub weight: u32,
    pub a_table: Vec<(u64, BigRational)>,
    pub a_p: BigRational,
    pub w_inf: i8,
    pub symbol: ModSymElt,
}

impl Eigenform {
    pub fn a_of(&self, l: u64) -> Option<&BigRational> {
        if l == self.level {
            return Some(&self.a_p);
        }
        self.a_table.iter().find(|(q, _)| *q == l).map(|(_, a)| a)
    }
}

/// Rational eigenforms on the p-new cuspidal part, restricted to a sign of
/// the involution at infinity.
pub fn cuspidal_pnew_eigenforms(space: &SymbolSpace, w_inf: i8) -> Result<Vec<Eigenform>> {
    let p = space.level;
    if p == 1 {
        return Ok(vec![]);
    }
    // every cusp form here must be new at p: the level-one cuspidal space
    // must vanish (true through weight 10)
    let level_one = build_space(1, space.weight)?;
    if !cuspidal_subspace(&level_one)?.is_empty() {
        return Err(Error::NonRationalEigenvalue(
            "level-one cusp forms present; p-new projection not implemented for weight >= 12".into(),
        ));
    }
    let cusp = cuspidal_subspace(space)?;
    if cusp.is_empty() {
        return Ok(vec![]);
    }
    // w_infinity eigenspace projection
    let winf_mat = operator_matrix(&cusp, HeckeOp::Winf)?;
    let dim = cusp.len();
    let sign = BigRational::from(BigInt::from(w_inf as i64));
    let mut proj_rows: Vec<la::Row> = Vec::new();
    for i in 0..dim {
        let mut row = winf_mat[i].clone();
        row[i] -= &sign;
        proj_rows.push(row);
    }
    let eig_coords = la::kernel(proj_rows, dim);
    if eig_coords.is_empty() {
        return Ok(vec![]);
    }
    let eigvecs: Vec<ModSymElt> = eig_coords
        .iter()
        .map(|c| {
            let mut acc = cusp[0].scale(&c[0]);
            for (x, b) in c.iter().zip(&cusp).skip(1) {
                acc = acc.add(&b.scale(x));
            }
            acc
        })
        .collect();
    // split into Hecke eigenlines with rational (hence integer) eigenvalues
    let mut lines = vec![eigvecs];
    for l in [2u64, 3, 5, 7, 11, 13] {
        if p % l == 0 {
            continue;
        }
        let mut next = Vec::new();
        for line in lines {
            if line.len() == 1 {
                next.push(line);
                continue;
            }
            next.extend(split_by_integer_eigenvalues(&line, HeckeOp::T(l), space.weight)?);
        }
        lines = next;
        if lines.iter().all(|l| l.len() == 1) {
            break;
        }
    }
    let mut out = Vec::new();
    for line in lines {
        if line.len() != 1 {
            return Err(Error::NonRationalEigenvalue(format!(
                "a Hecke orbit of dimension {} did not split over Q",
                line.len()
            )));
        }
        let symbol = line.into_iter().next().unwrap().primitive_scaled();
        let mut a_table = Vec::new();
        for l in [2u64, 3, 5, 7, 11, 13, 17, 19] {
            if l == p {
                continue;
            }
            let img = hecke(HeckeOp::T(l), &symbol)?;
            let a = eigen_ratio(&img, &symbol).ok_or_else(|| {
                Error::NonRationalEigenvalue(format!("T_{l} does not act as a scalar"))
            })?;
            a_table.push((l, a));
        }
        let up = hecke(HeckeOp::U(p), &symbol)?;
        let a_p = eigen_ratio(&up, &symbol)
            .ok_or_else(|| Error::NonRationalEigenvalue("U_p does not act as a scalar".into()))?;
        out.push(Eigenform { level: p, weight: space.weight, a_table, a_p, w_inf, symbol });
    }
    // deterministic order: by a_2
    out.sort_by(|x, y| {
        x.a_table
            .first()
            .map(|(_, a)| a.clone())
            .partial_cmp(&y.a_table.first().map(|(_, a)| a.clone()))
            .unwrap()
    });
    Ok(out)
}

fn eigen_ratio(img: &ModSymElt, sym: &ModSymElt) -> Option<BigRational> {
    let mut ratio: Option<BigRational> = None;
    for (x, y) in img.manin.iter().zip(&sym.manin) {
        if y.is_zero() {
            if !x.is_zero() {
                return None;
            }
            continue;
        }
        let r = x / y;
        match &ratio {
            None => ratio = Some(r),
            Some(q) if *q == r => {}
            _ => return None,
        }
    }
    ratio
}

fn split_by_integer_eigenvalues(
    line: &[ModSymElt],
    op: HeckeOp,
    weight: u32,
) -> Result<Vec<Vec<ModSymElt>>> {
    let l = match op {
        HeckeOp::T(l) => l,
        _ => unreachable!(),
    };
    let mat = operator_matrix(line, op)?;
    let dim = line.len();
    // Deligne bound: |a_l| <= 2 l^((k-1)/2)
    let bound = (2.0 * (l as f64).powf((weight as f64 - 1.0) / 2.0)).ceil() as i64;
    let mut found: Vec<Vec<ModSymElt>> = Vec::new();
    let mut covered = 0usize;
    for lam in -bound..=bound {
        let mut rows = mat.clone();
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] -= BigRational::from(BigInt::from(lam));
        }
        let ker = la::kernel(rows, dim);
        if ker.is_empty() {
            continue;
        }
        covered += ker.len();
        let vecs = ker
            .iter()
            .map(|c| {
                let mut acc = line[0].scale(&c[0]);
                for (x, b) in c.iter().zip(line).skip(1) {
                    acc = acc.add(&b.scale(x));
                }
                acc
            })
            .collect();
        found.push(vecs);
        if covered == dim {
            break;
        }
    }
    if covered != dim {
        return Err(Error::NonRationalEigenvalue(format!(
            "operator T_{l} has irrational eigenvalues on a {dim}-dimensional block"
        )));
    }
    Ok(found)
}

/// Divisors of the Manin generators, one per projective class.
pub fn manin_generator_divisors(level: u64) -> Vec<CuspDivisor> {
    (0..p1_size(level))
        .map(|u| {
            let g = p1_rep(level, u);
            CuspDivisor::path(Cusp::zero().apply(&g), Cusp::infinity().apply(&g))
        })
        .collect()
}

/// Gamma_0(M)-equivariance witness for tests: phi(gD) = g || phi(D).
pub fn equivariance_defect(phi: &ModSymElt, g: &MatI, div: &CuspDivisor) -> DualVn<BigRational> {
    let n = phi.n();
    let lhs = eval_symbol(phi, &div.apply(g));
    let rhs_raw = eval_symbol(phi, div);
    let gm = vn_action_matrix(n, g);
    let mut rhs = DualVn::zero_of_degree(&BigRational::zero(), n);
    for i in 0..=n {
        let mut s = BigRational::zero();
        for j in 0..=n {
            s += &gm[i][j] * &rhs_raw.values[j];
        }
        rhs.values[i] = s;
    }
    lhs.sub(&rhs)
}

/// Hash of the defining data, for cache freshness checks.
pub fn content_hash(space: &SymbolSpace) -> String {
    use sha2::{Digest, Sha256};
    let mut h = Sha256::new();
    h.update(space.level.to_le_bytes());
    h.update(space.weight.to_le_bytes());
    for b in &space.basis {
        for x in b {
            h.update(x.numer().to_string().as_bytes());
            h.update(b"/");
            h.update(x.denom().to_string().as_bytes());
            h.update(b";");
        }
    }
    format!("{:x}", h.finalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::rat;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// q-expansion oracle for eta products: q prod (1-q^n)^e1 (1-q^(Mn))^e2.
    fn eta_product_coeffs(m_level: usize, e1: u32, e2: u32, count: usize) -> Vec<i64> {
        let terms = count + 2;
        let mut series = vec![0i64; terms];
        series[0] = 1;
        let mut mul_factor = |step: usize, times: u32| {
            for _ in 0..times {
                // multiply by (1 - q^step)
                let mut next = series.clone();
                for i in step..terms {
                    next[i] -= series[i - step];
                }
                series = next;
            }
        };
        for nn in 1..terms {
            if nn < terms {
                mul_factor(nn, e1);
            }
            if m_level * nn < terms {
                mul_factor(m_level * nn, e2);
            }
        }
        // shift by q
        let mut out = vec![0i64; count + 1];
        for i in 1..=count {
            out[i] = series[i - 1];
        }
        out
    }

    #[test]
    fn dimensions_match_oracles() {
        // (11,2): cuspidal dimension 2 = twice the genus of the level-11 curve
        let s = build_space(11, 2).unwrap();
        assert_eq!(cuspidal_subspace(&s).unwrap().len(), 2);
        // (5,4): cuspidal dimension 2
        let s = build_space(5, 4).unwrap();
        assert_eq!(cuspidal_subspace(&s).unwrap().len(), 2);
        // (1,2): nothing
        let s = build_space(1, 2).unwrap();
        assert_eq!(cuspidal_subspace(&s).unwrap().len(), 0);
        // (7,4): cuspidal dimension 2
        let s = build_space(7, 4).unwrap();
        assert_eq!(cuspidal_subspace(&s).unwrap().len(), 2);
    }

    #[test]
    fn eta_oracle_eigenvalues_level_11() {
        // q prod (1-q^n)^2 (1-q^(11n))^2
        let coeffs = eta_product_coeffs(11, 2, 2, 20);
        let s = build_space(11, 2).unwrap();
        let forms = cuspidal_pnew_eigenforms(&s, 1).unwrap();
        assert_eq!(forms.len(), 1);
        let f = &forms[0];
        for (l, a) in &f.a_table {
            assert_eq!(*a, rat(coeffs[*l as usize], 1), "a_{l} at (11,2)");
        }
        assert_eq!(f.a_p, rat(coeffs[11], 1));
        assert_eq!(f.a_p, rat(1, 1), "11a1 is split multiplicative at 11");
    }

    #[test]
    fn eta_oracle_eigenvalues_level_5_weight_4() {
        // eta(z)^4 eta(5z)^4
        let coeffs = eta_product_coeffs(5, 4, 4, 20);
        let s = build_space(5, 4).unwrap();
        let forms = cuspidal_pnew_eigenforms(&s, 1).unwrap();
        assert_eq!(forms.len(), 1);
        let f = &forms[0];
        for (l, a) in &f.a_table {
            assert_eq!(*a, rat(coeffs[*l as usize], 1), "a_{l} at (5,4)");
        }
        assert_eq!(f.a_p, rat(coeffs[5], 1));
        // a_p = +/- p^((k-2)/2)
        assert_eq!(f.a_p, rat(-5, 1));
    }

    #[test]
    fn deligne_bound_on_eigenvalues() {
        for (p, k) in [(11u64, 2u32), (5, 4), (7, 4)] {
            let s = build_space(p, k).unwrap();
            for f in cuspidal_pnew_eigenforms(&s, 1).unwrap() {
                for (l, a) in &f.a_table {
                    let bound = 2.0 * (*l as f64).powf((k as f64 - 1.0) / 2.0);
                    let av = a.to_integer().to_f64().unwrap().abs();
                    assert!(av <= bound + 1e-9, "Deligne bound at l={l}");
                }
            }
        }
    }

    #[test]
    fn hecke_operators_commute() {
        let s = build_space(11, 2).unwrap();
        let basis: Vec<ModSymElt> = s
            .basis
            .iter()
            .map(|b| ModSymElt { level: 11, weight: 2, manin: b.clone() })
            .collect();
        for x in &basis {
            let a = hecke(HeckeOp::T(3), &hecke(HeckeOp::T(2), x).unwrap()).unwrap();
            let b = hecke(HeckeOp::T(2), &hecke(HeckeOp::T(3), x).unwrap()).unwrap();
            assert_eq!(a, b);
            let a = hecke(HeckeOp::T(7), &hecke(HeckeOp::T(5), x).unwrap()).unwrap();
            let b = hecke(HeckeOp::T(5), &hecke(HeckeOp::T(7), x).unwrap()).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn involutions_square_to_identity() {
        for (p, k) in [(11u64, 2u32), (5, 4)] {
            let s = build_space(p, k).unwrap();
            for b in &s.basis {
                let x = ModSymElt { level: p, weight: k, manin: b.clone() };
                let w2 = hecke(HeckeOp::Winf, &hecke(HeckeOp::Winf, &x).unwrap()).unwrap();
                assert_eq!(w2, x, "W_inf^2 = 1");
                let wp2 = hecke(HeckeOp::Wp, &hecke(HeckeOp::Wp, &x).unwrap()).unwrap();
                assert_eq!(wp2, x, "W_p^2 = 1");
            }
        }
    }

    #[test]
    fn eisenstein_killed_by_t_ell() {
        // the Eisenstein part is ker t_2; check t_3 kills it too
        let s = build_space(11, 2).unwrap();
        let shift2 = rat(2i64.pow(1) + 1, 1);
        let mut rows = Vec::new();
        for b in &s.basis {
            let x = ModSymElt { level: 11, weight: 2, manin: b.clone() };
            let img = hecke(HeckeOp::T(2), &x).unwrap().sub(&x.scale(&shift2));
            rows.push(img.manin);
        }
        // kernel of t_2 in coordinates
        let dim = s.basis.len();
        let cols: Vec<Vec<BigRational>> = rows;
        let mut mat = vec![vec![BigRational::zero(); dim]; s.basis[0].len()];
        for (j, c) in cols.iter().enumerate() {
            for (i, x) in c.iter().enumerate() {
                mat[i][j] = x.clone();
            }
        }
        let ker = la::kernel(mat, dim);
        assert_eq!(ker.len(), 1, "one Eisenstein line at (11,2)");
        let eis = s.element(&ker[0]);
        let shift3 = rat(3 + 1, 1);
        let t3 = hecke(HeckeOp::T(3), &eis).unwrap().sub(&eis.scale(&shift3));
        assert!(t3.is_zero(), "t_3 annihilates the Eisenstein part");
    }

    #[test]
    fn winding_evaluation_is_nonzero() {
        let s = build_space(11, 2).unwrap();
        let f = &cuspidal_pnew_eigenforms(&s, 1).unwrap()[0];
        let d = CuspDivisor::path(Cusp::infinity(), Cusp::zero());
        let v = eval_symbol(&f.symbol, &d);
        assert!(!v.is_zero(), "value on {{0}} - {{infinity}} vanishes");
    }

    #[test]
    fn evaluation_is_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for (p, k) in [(11u64, 2u32), (5, 4)] {
            let s = build_space(p, k).unwrap();
            let f = &cuspidal_pnew_eigenforms(&s, 1).unwrap()[0];
            for _ in 0..100 {
                // random element of Gamma_0(p) as a word in [[1,1],[0,1]] and [[1,0],[p,1]]
                let mut g = MatI::identity();
                for _ in 0..rng.gen_range(1..6) {
                    let t = if rng.gen_bool(0.5) {
                        MatI { a: 1, b: rng.gen_range(-2..3), c: 0, d: 1 }
                    } else {
                        MatI { a: 1, b: 0, c: p as i128 * rng.gen_range(-1..2), d: 1 }
                    };
                    g = g.mul(&t);
                }
                let d = CuspDivisor::path(
                    Cusp::new(rng.gen_range(-6..6), rng.gen_range(1..6)),
                    Cusp::new(rng.gen_range(-6..6), rng.gen_range(1..6)),
                );
                let defect = equivariance_defect(&f.symbol, &g, &d);
                assert!(defect.is_zero(), "equivariance defect under {g:?}");
            }
        }
    }

    #[test]
    fn zero_divisor_evaluates_to_zero() {
        let s = build_space(5, 4).unwrap();
        let f = &cuspidal_pnew_eigenforms(&s, 1).unwrap()[0];
        let v = eval_symbol(&f.symbol, &CuspDivisor::zero());
        assert!(v.is_zero());
    }

    #[test]
    fn level_one_is_empty() {
        let s = build_space(1, 2).unwrap();
        assert!(cuspidal_pnew_eigenforms(&s, 1).unwrap().is_empty());
        let s = build_space(1, 4).unwrap();
        assert!(cuspidal_pnew_eigenforms(&s, 1).unwrap().is_empty());
    }

    #[test]
    fn bad_operator_is_rejected() {
        let s = build_space(11, 2).unwrap();
        let x = ModSymElt { level: 11, weight: 2, manin: s.basis[0].clone() };
        assert!(matches!(hecke(HeckeOp::T(11), &x), Err(Error::BadOperator(_))));
    }
}
