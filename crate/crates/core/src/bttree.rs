//! The Bruhat-Tits tree of PGL2(Q_p): canonical vertex and edge forms,
//! neighbors, geodesics, parity, point reduction, boundary balls and
//! transporters to the base edge inside SL2(Z[1/p]).

use crate::error::{Error, Result};
use crate::padic::QuadExtScalar;
use crate::weightmod::Mat2;
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Homothety class of a rank-two lattice, in the normal form
/// [[p^level, c], [0, 1]] with c = num / p^s taken mod p^level.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Vertex {
    p: u64,
    level: i32,
    s: u32,
    num: BigUint,
}

impl Vertex {
    pub fn base(p: u64) -> Self {
        Vertex { p, level: 0, s: 0, num: BigUint::zero() }
    }

    /// The target of the base edge: the class of Z_p + p Z_p scaled, at level -1.
    pub fn hat_base(p: u64) -> Self {
        Vertex { p, level: -1, s: 0, num: BigUint::zero() }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> i32 {
        self.level
    }

    /// Build the class of c mod p^level from a rational representative.
    pub fn from_level_and_rational(p: u64, level: i32, c: &BigRational) -> Self {
        if c.is_zero() {
            return Vertex { p, level, s: 0, num: BigUint::zero() };
        }
        let pb = BigInt::from(p);
        let mut num = c.numer().clone();
        let mut den = c.denom().clone();
        let mut e = 0i32;
        while (&num % &pb).is_zero() {
            num /= &pb;
            e += 1;
        }
        while (&den % &pb).is_zero() {
            den /= &pb;
            e -= 1;
        }
        if e >= level {
            return Vertex { p, level, s: 0, num: BigUint::zero() };
        }
        let s = (-e).max(0) as u32;
        let modulus_exp = level + s as i32;
        debug_assert!(modulus_exp > 0);
        let m = pb.pow(modulus_exp as u32);
        // c * p^s = num * p^(e+s) / den with den a p-unit
        let shifted = &num * pb.pow((e + s as i32) as u32);
        let dinv = mod_inv_big(&den, &m);
        let a = ((shifted * dinv) % &m + &m) % &m;
        Vertex::canonical(p, level, s, a.to_biguint().unwrap())
    }

    fn canonical(p: u64, level: i32, mut s: u32, mut num: BigUint) -> Self {
        let pb = BigUint::from(p);
        if num.is_zero() {
            return Vertex { p, level, s: 0, num };
        }
        while s > 0 && (&num % &pb).is_zero() {
            num /= &pb;
            s -= 1;
        }
        let modulus_exp = level + s as i32;
        if modulus_exp <= 0 {
            return Vertex { p, level, s: 0, num: BigUint::zero() };
        }
        num %= pb.pow(modulus_exp as u32);
        if num.is_zero() {
            return Vertex { p, level, s: 0, num };
        }
        while s > 0 && (&num % &pb).is_zero() {
            num /= &pb;
            s -= 1;
        }
        Vertex { p, level, s, num }
    }

    /// The rational representative num / p^s of the class.
    pub fn c_rational(&self) -> BigRational {
        let n = BigInt::from(self.num.clone());
        BigRational::new(n, BigInt::from(self.p).pow(self.s))
    }

    pub fn to_matrix(&self) -> Mat2 {
        let p = BigRational::from(BigInt::from(self.p));
        let pl = rat_pow(&p, self.level);
        Mat2::new(pl, self.c_rational(), BigRational::zero(), BigRational::one())
    }

    pub fn parent(&self) -> Vertex {
        Vertex::canonical(self.p, self.level - 1, self.s, self.num.clone())
    }

    pub fn child(&self, j: u64) -> Vertex {
        debug_assert!(j < self.p);
        // c + j * p^level with c = num / p^s; raise s when level + s < 0
        let s = self.s.max((-self.level).max(0) as u32);
        let num = &self.num * BigUint::from(self.p).pow(s - self.s);
        let add = BigUint::from(j) * BigUint::from(self.p).pow((self.level + s as i32) as u32);
        Vertex::canonical(self.p, self.level + 1, s, num + add)
    }

    pub fn neighbors(&self) -> Vec<Vertex> {
        let mut out: Vec<Vertex> = (0..self.p).map(|j| self.child(j)).collect();
        out.push(self.parent());
        out
    }

    pub fn is_adjacent(&self, other: &Vertex) -> bool {
        (other.level == self.level - 1 && self.parent() == *other)
            || (self.level == other.level - 1 && other.parent() == *self)
    }

    /// Residue class index in 0..p for a level-1 vertex.
    pub fn branch_index(&self) -> Option<u64> {
        if self.level != 1 || self.s != 0 {
            return None;
        }
        self.num.to_u64()
    }
}

fn mod_inv_big(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    ((e.x % m) + m) % m
}

fn rat_pow(x: &BigRational, e: i32) -> BigRational {
    if e >= 0 {
        x.pow(e)
    } else {
        BigRational::one() / x.pow(-e)
    }
}

/// Canonical form of the column-span lattice class of an invertible matrix.
pub fn normalize(p: u64, m: &Mat2) -> Result<Vertex> {
    if m.det().is_zero() {
        return Err(Error::SingularMatrix);
    }
    let ordp = |x: &BigRational| -> Option<i32> {
        if x.is_zero() {
            return None;
        }
        let pb = BigInt::from(p);
        let mut e = 0i32;
        let mut n = x.numer().clone();
        while (&n % &pb).is_zero() {
            n /= &pb;
            e += 1;
        }
        let mut d = x.denom().clone();
        while (&d % &pb).is_zero() {
            d /= &pb;
            e -= 1;
        }
        Some(e)
    };
    // choose pivot column with the smaller bottom-entry valuation
    let (mut col1, mut col2) = ((m.a.clone(), m.c.clone()), (m.b.clone(), m.d.clone()));
    let vc = ordp(&col1.1);
    let vd = ordp(&col2.1);
    let swap = match (vc, vd) {
        (None, _) => false,
        (_, None) => true,
        (Some(x), Some(y)) => x < y,
    };
    if swap {
        std::mem::swap(&mut col1, &mut col2);
    }
    // col2 is the pivot (bottom entry of minimal valuation, nonzero)
    let factor = &col1.1 / &col2.1;
    let top = &col1.0 - &factor * &col2.0;
    // lattice = span{(top, 0), (col2.0, col2.1)} ; scale by 1/col2.1
    let alpha = &top / &col2.1;
    let beta = &col2.0 / &col2.1;
    let n = ordp(&alpha).ok_or(Error::SingularMatrix)?;
    Ok(Vertex::from_level_and_rational(p, n, &beta))
}

pub fn apply_to_vertex(p: u64, g: &Mat2, v: &Vertex) -> Vertex {
    normalize(p, &g.mul(&v.to_matrix())).expect("group element acting on a vertex")
}

/// Oriented edge between adjacent vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub s: Vertex,
    pub t: Vertex,
}

impl Edge {
    pub fn new(s: Vertex, t: Vertex) -> Self {
        debug_assert!(s.is_adjacent(&t), "edge endpoints must be adjacent");
        Edge { s, t }
    }

    pub fn base(p: u64) -> Self {
        Edge { s: Vertex::base(p), t: Vertex::hat_base(p) }
    }

    pub fn reversed(&self) -> Edge {
        Edge { s: self.t.clone(), t: self.s.clone() }
    }
}

pub fn apply_to_edge(p: u64, g: &Mat2, e: &Edge) -> Edge {
    Edge { s: apply_to_vertex(p, g, &e.s), t: apply_to_vertex(p, g, &e.t) }
}

/// Geodesic from v to w as a list of oriented edges.
pub fn path(v: &Vertex, w: &Vertex) -> Vec<Edge> {
    let mut up_v: Vec<Vertex> = vec![v.clone()];
    let mut up_w: Vec<Vertex> = vec![w.clone()];
    let mut a = v.clone();
    let mut b = w.clone();
    let mut guard = 0;
    while a != b {
        if a.level >= b.level {
            a = a.parent();
            up_v.push(a.clone());
        } else {
            b = b.parent();
            up_w.push(b.clone());
        }
        guard += 1;
        assert!(guard < 10_000, "path search failed to converge");
    }
    let mut edges = Vec::new();
    for i in 0..up_v.len() - 1 {
        edges.push(Edge::new(up_v[i].clone(), up_v[i + 1].clone()));
    }
    for i in (0..up_w.len() - 1).rev() {
        edges.push(Edge::new(up_w[i + 1].clone(), up_w[i].clone()));
    }
    edges
}

pub fn dist(v: &Vertex, w: &Vertex) -> usize {
    path(v, w).len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Plus,
    Minus,
}

/// Parity of the distance to the base vertex.
pub fn parity(v: &Vertex) -> Parity {
    if dist(v, &Vertex::base(v.prime())) % 2 == 0 {
        Parity::Plus
    } else {
        Parity::Minus
    }
}

pub fn is_positively_oriented(e: &Edge) -> bool {
    parity(&e.s) == Parity::Plus
}

/// Reduction of a point of K_p minus Q_p to a vertex of the tree.
pub fn reduce_point(tau: &QuadExtScalar) -> Result<Vertex> {
    let y_val = tau.b.valuation().ok_or(Error::PointTooCloseToBoundary)?;
    if tau.a.abs_prec() <= y_val {
        return Err(Error::PointTooCloseToBoundary);
    }
    let x = tau.a.canonical_rational();
    Ok(Vertex::from_level_and_rational(tau.prime(), y_val, &x))
}

/// Exact variant for rational test data: tau = x + y w.
pub fn reduce_point_exact(p: u64, x: &BigRational, y: &BigRational) -> Result<Vertex> {
    if y.is_zero() {
        return Err(Error::PointTooCloseToBoundary);
    }
    let pb = BigInt::from(p);
    let mut e = 0i32;
    let mut n = y.numer().clone();
    while (&n % &pb).is_zero() {
        n /= &pb;
        e += 1;
    }
    let mut d = y.denom().clone();
    while (&d % &pb).is_zero() {
        d /= &pb;
        e -= 1;
    }
    Ok(Vertex::from_level_and_rational(p, e, x))
}

pub fn omega_matrix(p: u64) -> Mat2 {
    Mat2::new(
        BigRational::zero(),
        BigRational::one(),
        BigRational::from(BigInt::from(p)),
        BigRational::zero(),
    )
}

/// Letter of SL2(Z) rotating the level-1 branch a onto the hat direction.
fn rot_letter(a: u64) -> Mat2 {
    Mat2::from_i64(0, -1, 1, -(a as i64))
}

fn conj_by_omega(p: u64, g: &Mat2) -> Mat2 {
    let w = omega_matrix(p);
    w.mul(g).mul(&w.inv())
}

/// Transporter in SL2(Z[1/p]) carrying a positively oriented edge to the base edge.
pub fn gamma_to_base(p: u64, e: &Edge) -> Result<Mat2> {
    if !is_positively_oriented(e) {
        return Err(Error::WrongOrientation);
    }
    let base = Vertex::base(p);
    let hat = Vertex::hat_base(p);
    let base_edge = Edge::base(p);
    let mut cur = e.clone();
    let mut g = Mat2::identity();
    for _ in 0..(4 * (dist(&cur.s, &base) + dist(&cur.t, &base) + 4)) {
        if cur == base_edge {
            return Ok(g);
        }
        let ds = dist(&cur.s, &base);
        let dt = dist(&cur.t, &base);
        let far = if ds > dt { &cur.s } else { &cur.t };
        let geo = path(&base, far);
        let x1 = geo[0].t.clone();
        let letter = if x1 == hat {
            // rotate at the hat vertex: conjugated letter
            let x2 = geo[1].t.clone();
            let y = apply_to_vertex(p, &omega_matrix(p).inv(), &x2);
            let a = y.branch_index().ok_or(Error::WrongOrientation)?;
            conj_by_omega(p, &rot_letter(a))
        } else {
            let a = x1.branch_index().ok_or(Error::WrongOrientation)?;
            rot_letter(a)
        };
        cur = apply_to_edge(p, &letter, &cur);
        g = letter.mul(&g);
    }
    Err(Error::WrongOrientation)
}

/// Boundary ball of P^1(Q_p): a + p^depth Z_p in the finite chart, or its
/// image under t -> 1/t in the infinite chart (w-coordinate ball).
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub infinite_chart: bool,
    pub center: BigRational,
    pub depth: u32,
}

impl Ball {
    /// Membership of a rational point; None stands for the point at infinity.
    pub fn contains(&self, p: u64, t: Option<&BigRational>) -> bool {
        let w_or_t = match (self.infinite_chart, t) {
            (false, None) => return false,
            (true, None) => BigRational::zero(),
            (false, Some(t)) => t.clone(),
            (true, Some(t)) => {
                if t.is_zero() {
                    return false;
                }
                BigRational::one() / t
            }
        };
        let diff = w_or_t - &self.center;
        if diff.is_zero() {
            return true;
        }
        ord_rational(p, &diff) >= self.depth as i32
    }
}

pub fn ord_rational(p: u64, x: &BigRational) -> i32 {
    assert!(!x.is_zero());
    let pb = BigInt::from(p);
    let mut e = 0i32;
    let mut n = x.numer().abs();
    while (&n % &pb).is_zero() {
        n /= &pb;
        e += 1;
    }
    let mut d = x.denom().abs();
    while (&d % &pb).is_zero() {
        d /= &pb;
        e -= 1;
    }
    e
}

/// Vertex under an infinite-chart ball, via the chart swap t = 1/w.
fn vertex_of_infinite_ball(p: u64, center: &BigRational, depth: u32) -> Vertex {
    let swap = Mat2::from_i64(0, 1, 1, 0);
    let w_vertex = Vertex::from_level_and_rational(p, depth as i32, center);
    normalize(p, &swap.mul(&w_vertex.to_matrix())).expect("chart swap is invertible")
}

fn edge_of_ball(p: u64, ball: &Ball) -> Edge {
    if ball.infinite_chart {
        let t = vertex_of_infinite_ball(p, &ball.center, ball.depth);
        let s = if ball.depth == 1 {
            Vertex::base(p)
        } else {
            let parent_center = truncate_center(p, &ball.center, ball.depth - 1);
            vertex_of_infinite_ball(p, &parent_center, ball.depth - 1)
        };
        Edge::new(s, t)
    } else {
        let t = Vertex::from_level_and_rational(p, ball.depth as i32, &ball.center);
        let s = t.parent();
        Edge::new(s, t)
    }
}

fn truncate_center(p: u64, c: &BigRational, depth: u32) -> BigRational {
    // canonical representative of c mod p^depth
    Vertex::from_level_and_rational(p, depth as i32, c).c_rational()
}

/// The depth-d cover of P^1(Q_p) by (p+1)p^(d-1) balls, each attached to the
/// depth-d edge pointing away from the base vertex; deterministic order:
/// finite-chart balls by center, then infinite-chart balls by center.
pub fn cover(p: u64, d: u32) -> Vec<(Edge, Ball)> {
    assert!(d >= 1);
    let mut out = Vec::new();
    let pd = BigInt::from(p).pow(d);
    let mut a = BigInt::zero();
    while a < pd {
        let ball = Ball {
            infinite_chart: false,
            center: BigRational::from(a.clone()),
            depth: d,
        };
        out.push((edge_of_ball(p, &ball), ball));
        a += 1;
    }
    // infinite chart: w in p*b' + p^d Z_p for b' mod p^(d-1)
    let pd1 = BigInt::from(p).pow(d - 1);
    let mut b = BigInt::zero();
    while b < pd1 {
        let ball = Ball {
            infinite_chart: true,
            center: BigRational::from(&b * BigInt::from(p)),
            depth: d,
        };
        out.push((edge_of_ball(p, &ball), ball));
        b += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{rand_gamma, rat};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const P: u64 = 5;

    #[test]
    fn normalize_identity_and_homothety() {
        let v = normalize(P, &Mat2::identity()).unwrap();
        assert_eq!(v, Vertex::base(P));
        let five = Mat2::from_i64(5, 0, 0, 5);
        assert_eq!(normalize(P, &five).unwrap(), Vertex::base(P));
    }

    #[test]
    fn normalize_index_five_sublattice() {
        // [[1,3],[0,5]] spans Z + 5Z, a depth-1 vertex; brute-force check
        // that it appears among the neighbors of the base vertex.
        let m = Mat2::from_i64(1, 3, 0, 5);
        let v = normalize(P, &m).unwrap();
        let nbrs = Vertex::base(P).neighbors();
        assert!(nbrs.contains(&v));
        assert_eq!(dist(&v, &Vertex::base(P)), 1);
    }

    #[test]
    fn neighbors_count_and_distinct() {
        let v = Vertex::base(P);
        let n = v.neighbors();
        assert_eq!(n.len(), (P + 1) as usize);
        assert!(n.contains(&Vertex::hat_base(P)));
        for i in 0..n.len() {
            for j in 0..i {
                assert_ne!(n[i], n[j]);
            }
        }
    }

    #[test]
    fn bfs_layer_counts() {
        // layer d has (p+1) p^(d-1) vertices
        use std::collections::HashSet;
        let mut seen: HashSet<Vertex> = HashSet::new();
        let mut frontier = vec![Vertex::base(P)];
        seen.insert(Vertex::base(P));
        for d in 1..=3usize {
            let mut next = Vec::new();
            for v in &frontier {
                for w in v.neighbors() {
                    if seen.insert(w.clone()) {
                        next.push(w);
                    }
                }
            }
            let expect = (P + 1) as usize * (P as usize).pow(d as u32 - 1);
            assert_eq!(next.len(), expect, "layer {d}");
            frontier = next;
        }
    }

    #[test]
    fn parity_matches_distance() {
        let mut frontier = vec![Vertex::base(P)];
        let mut all = vec![(Vertex::base(P), 0usize)];
        let mut seen = std::collections::HashSet::new();
        seen.insert(Vertex::base(P));
        for d in 1..=4usize {
            let mut next = Vec::new();
            for v in &frontier {
                for w in v.neighbors() {
                    if seen.insert(w.clone()) {
                        all.push((w.clone(), d));
                        next.push(w);
                    }
                }
            }
            frontier = next;
        }
        for (v, d) in all {
            assert_eq!(dist(&v, &Vertex::base(P)), d);
            let expect = if d % 2 == 0 { Parity::Plus } else { Parity::Minus };
            assert_eq!(parity(&v), expect);
        }
    }

    #[test]
    fn path_examples() {
        let v = Vertex::base(P);
        assert!(path(&v, &v).is_empty());
        let e = path(&v, &Vertex::hat_base(P));
        assert_eq!(e.len(), 1);
        assert_eq!(e[0], Edge::base(P));
    }

    #[test]
    fn path_length_matches_bfs_distance() {
        // brute BFS oracle on random vertex pairs
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let base = Vertex::base(P);
        for _ in 0..20 {
            let mut v = base.clone();
            for _ in 0..rng.gen_range(0..5) {
                let n = v.neighbors();
                v = n[rng.gen_range(0..n.len())].clone();
            }
            let mut w = base.clone();
            for _ in 0..rng.gen_range(0..5) {
                let n = w.neighbors();
                w = n[rng.gen_range(0..n.len())].clone();
            }
            // BFS distance
            let mut depth = std::collections::HashMap::new();
            depth.insert(v.clone(), 0usize);
            let mut frontier = vec![v.clone()];
            'outer: for d in 1..=12usize {
                let mut next = Vec::new();
                for x in &frontier {
                    for y in x.neighbors() {
                        if !depth.contains_key(&y) {
                            depth.insert(y.clone(), d);
                            if y == w {
                                break 'outer;
                            }
                            next.push(y);
                        }
                    }
                }
                frontier = next;
            }
            assert_eq!(path(&v, &w).len(), depth[&w]);
        }
    }

    #[test]
    fn reduce_point_basics() {
        // w reduces to the base vertex
        let v = reduce_point_exact(P, &rat(0, 1), &rat(1, 1)).unwrap();
        assert_eq!(v, Vertex::base(P));
        // Galois conjugation fixes the reduction: x - yw reduces like x + yw
        let a = reduce_point_exact(P, &rat(7, 3), &rat(10, 1)).unwrap();
        let b = reduce_point_exact(P, &rat(7, 3), &rat(-10, 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reduce_point_equivariance() {
        // red(g tau) = g red(tau) for 100 random group elements, exact.
        // Moebius on tau = x + y w over Q(w), w^2 = r.
        let r = crate::padic::quad_nonresidue(P) as i64;
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..100 {
            let g = rand_gamma(&mut rng, P, 6);
            let x = rat(rng.gen_range(-50..50), (P as i64).pow(rng.gen_range(0..3)));
            let y = rat(
                rng.gen_range(1..50) * if rng.gen_bool(0.5) { 1 } else { -1 },
                (P as i64).pow(rng.gen_range(0..3)),
            );
            // g(tau) = (a tau + b) / (c tau + d) in Q(w)
            let (a, b, c, d) = (&g.a, &g.b, &g.c, &g.d);
            // numerator: (a x + b) + a y w ; denominator: (c x + d) + c y w
            let nx = a * &x + b;
            let ny = a * &y;
            let dx = c * &x + d;
            let dy = c * &y;
            // divide: multiply by conjugate of denominator / norm
            let norm = &dx * &dx - rat(r, 1) * &dy * &dy;
            if norm.is_zero() {
                continue;
            }
            let gx = (&nx * &dx - rat(r, 1) * &ny * &dy) / &norm;
            let gy = (&ny * &dx - &nx * &dy) / &norm;
            let lhs = reduce_point_exact(P, &gx, &gy).unwrap();
            let rhs = apply_to_vertex(P, &g, &reduce_point_exact(P, &x, &y).unwrap());
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn gamma_to_base_fixes_base_edge() {
        let g = gamma_to_base(P, &Edge::base(P)).unwrap();
        assert!(g.is_identity());
    }

    #[test]
    fn gamma_to_base_on_random_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..100 {
            let len = rng.gen_range(1..8);
            let g = rand_gamma(&mut rng, P, len);
            let e = apply_to_edge(P, &g, &Edge::base(P));
            assert!(is_positively_oriented(&e));
            let t = gamma_to_base(P, &e).unwrap();
            assert_eq!(apply_to_edge(P, &t, &e), Edge::base(P));
            assert!(t.is_in_gamma(P));
        }
    }

    #[test]
    fn gamma_to_base_rejects_wrong_orientation() {
        let e = Edge::base(P).reversed();
        assert_eq!(gamma_to_base(P, &e), Err(Error::WrongOrientation));
    }

    #[test]
    fn gamma_to_base_composition_coset() {
        // gamma_to_base(g e) * g differs from gamma_to_base(e) by the
        // base-edge stabilizer, i.e. an integral matrix with p | c, det 1.
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        for _ in 0..25 {
            let g0 = rand_gamma(&mut rng, P, 4);
            let e = apply_to_edge(P, &g0, &Edge::base(P));
            let g = rand_gamma(&mut rng, P, 3);
            let t1 = gamma_to_base(P, &e).unwrap();
            let t2 = gamma_to_base(P, &apply_to_edge(P, &g, &e)).unwrap();
            let h = t2.mul(&g).mul(&t1.inv());
            assert!(h.det().is_one());
            assert!(h.a.is_integer() && h.b.is_integer() && h.c.is_integer() && h.d.is_integer());
            let c = h.c.to_integer();
            assert!((c % BigInt::from(P)).is_zero(), "coset defect not in the stabilizer");
        }
    }

    #[test]
    fn cover_partitions_the_boundary() {
        for d in 1..=2u32 {
            let balls = cover(P, d);
            assert_eq!(balls.len(), ((P + 1) * P.pow(d - 1)) as usize);
            let mut rng = ChaCha8Rng::seed_from_u64(5 + d as u64);
            for _ in 0..100 {
                let t = if rng.gen_bool(0.05) {
                    None
                } else {
                    Some(rat(
                        rng.gen_range(-200..200),
                        (P as i64).pow(rng.gen_range(0..4)) * if rng.gen_bool(0.5) { 1 } else { 3 },
                    ))
                };
                let hits = balls.iter().filter(|(_, b)| b.contains(P, t.as_ref())).count();
                assert_eq!(hits, 1, "each point lies in exactly one ball: {t:?} depth {d}");
            }
        }
    }

    #[test]
    fn cover_depth_one_edges() {
        let balls = cover(P, 1);
        // finite balls sit under the level-1 children; infinite ball under the base edge
        for (e, b) in &balls {
            if b.infinite_chart {
                assert_eq!(*e, Edge::base(P));
            } else {
                assert_eq!(e.s, Vertex::base(P));
                assert_eq!(e.t.level(), 1);
            }
        }
    }

    #[test]
    fn cover_refinement() {
        // each depth-d ball is the disjoint union of its p depth-(d+1) children
        let coarse = cover(P, 1);
        let fine = cover(P, 2);
        for (_, cb) in &coarse {
            let mut count = 0;
            for (_, fb) in &fine {
                // sample the child's center inside the parent
                let pt = if fb.infinite_chart {
                    if fb.center.is_zero() {
                        None
                    } else {
                        Some(BigRational::one() / &fb.center)
                    }
                } else {
                    Some(fb.center.clone())
                };
                if cb.contains(P, pt.as_ref()) {
                    count += 1;
                }
            }
            assert_eq!(count, P as usize, "parent splits into p children");
        }
    }

    #[test]
    fn edge_counts_up_to_depth_five() {
        for d in 1..=5u32 {
            // count away-edges at depth d via the cover
            assert_eq!(cover(3, d).len(), (4 * 3u64.pow(d - 1)) as usize);
        }
    }
}
