//! Polynomial coefficient modules of even weight: P_n with its right matrix
//! action, the dual V_n, and the discriminant pairing on quadratics.

use crate::padic::{PadicScalar, QuadExtScalar};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Scalars a coefficient module can be built over.
pub trait Coeff: Clone + std::fmt::Debug {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn from_rat_like(&self, x: &BigRational) -> Self;
    fn div_exact(&self, o: &Self) -> Self;
    fn is_zero_elem(&self) -> bool;
}

impl Coeff for BigRational {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn zero_like(&self) -> Self {
        BigRational::zero()
    }
    fn one_like(&self) -> Self {
        BigRational::one()
    }
    fn from_rat_like(&self, x: &BigRational) -> Self {
        x.clone()
    }
    fn div_exact(&self, o: &Self) -> Self {
        self / o
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
}

impl Coeff for QuadExtScalar {
    fn add(&self, o: &Self) -> Self {
        QuadExtScalar::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        QuadExtScalar::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        QuadExtScalar::mul(self, o)
    }
    fn neg(&self) -> Self {
        QuadExtScalar::neg(self)
    }
    fn zero_like(&self) -> Self {
        QuadExtScalar::zero(self.prime(), self.abs_prec(), self.r())
    }
    fn one_like(&self) -> Self {
        QuadExtScalar::one(self.prime(), self.abs_prec(), self.r())
    }
    fn from_rat_like(&self, x: &BigRational) -> Self {
        QuadExtScalar::from_base(PadicScalar::from_rational(self.prime(), x, self.abs_prec()), self.r())
    }
    fn div_exact(&self, o: &Self) -> Self {
        self.div(o).expect("division by non-unit in coefficient ring")
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
}

/// 2x2 matrix over Q with cached determinant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mat2 {
    pub a: BigRational,
    pub b: BigRational,
    pub c: BigRational,
    pub d: BigRational,
    det: BigRational,
}

impl Mat2 {
    pub fn new(a: BigRational, b: BigRational, c: BigRational, d: BigRational) -> Self {
        let det = &a * &d - &b * &c;
        Mat2 { a, b, c, d, det }
    }

    pub fn from_i64(a: i64, b: i64, c: i64, d: i64) -> Self {
        let r = |x: i64| BigRational::from(BigInt::from(x));
        Mat2::new(r(a), r(b), r(c), r(d))
    }

    pub fn identity() -> Self {
        Mat2::from_i64(1, 0, 0, 1)
    }

    pub fn det(&self) -> &BigRational {
        &self.det
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            &self.a * &o.a + &self.b * &o.c,
            &self.a * &o.b + &self.b * &o.d,
            &self.c * &o.a + &self.d * &o.c,
            &self.c * &o.b + &self.d * &o.d,
        )
    }

    pub fn inv(&self) -> Mat2 {
        assert!(!self.det.is_zero(), "singular matrix");
        Mat2::new(
            &self.d / &self.det,
            -&self.b / &self.det,
            -&self.c / &self.det,
            &self.a / &self.det,
        )
    }

    pub fn scale(&self, s: &BigRational) -> Mat2 {
        Mat2::new(&self.a * s, &self.b * s, &self.c * s, &self.d * s)
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        Mat2::new(&self.a + &o.a, &self.b + &o.b, &self.c + &o.c, &self.d + &o.d)
    }

    pub fn trace(&self) -> BigRational {
        &self.a + &self.d
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_one() && self.b.is_zero() && self.c.is_zero() && self.d.is_one()
    }

    /// True when all entries are integers away from p and the determinant is 1.
    pub fn is_in_gamma(&self, p: u64) -> bool {
        let pw = BigInt::from(p);
        let ok = |x: &BigRational| {
            let mut d = x.denom().clone();
            while (&d % &pw).is_zero() {
                d /= &pw;
            }
            d.abs().is_one()
        };
        self.det.is_one() && ok(&self.a) && ok(&self.b) && ok(&self.c) && ok(&self.d)
    }

    /// Moebius action on a point of K_p.
    pub fn moebius(&self, tau: &QuadExtScalar) -> crate::error::Result<QuadExtScalar> {
        let emb = |x: &BigRational| tau.from_rat_like(x);
        let num = emb(&self.a).mul(tau).add(&emb(&self.b));
        let den = emb(&self.c).mul(tau).add(&emb(&self.d));
        num.div(&den)
    }
}

/// Polynomial of degree at most n; the weight is k = n + 2.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyN<T: Coeff> {
    pub coeffs: Vec<T>,
}

impl<T: Coeff> PolyN<T> {
    pub fn new(coeffs: Vec<T>) -> Self {
        assert!(!coeffs.is_empty());
        PolyN { coeffs }
    }

    pub fn zero_of_degree(proto: &T, n: usize) -> Self {
        PolyN { coeffs: vec![proto.zero_like(); n + 1] }
    }

    pub fn monomial(proto: &T, n: usize, j: usize) -> Self {
        assert!(j <= n);
        let mut c = vec![proto.zero_like(); n + 1];
        c[j] = proto.one_like();
        PolyN { coeffs: c }
    }

    pub fn n(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn add(&self, o: &Self) -> Self {
        PolyN { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(x, y)| x.add(y)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        PolyN { coeffs: self.coeffs.iter().zip(&o.coeffs).map(|(x, y)| x.sub(y)).collect() }
    }

    pub fn scale(&self, s: &T) -> Self {
        PolyN { coeffs: self.coeffs.iter().map(|x| x.mul(s)).collect() }
    }

    pub fn eval(&self, x: &T) -> T {
        let mut acc = self.coeffs.last().unwrap().clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero_elem())
    }
}

/// Multiply two coefficient arrays, truncating above cap.
fn poly_mul<T: Coeff>(a: &[T], b: &[T], cap: usize, zero: &T) -> Vec<T> {
    let mut out = vec![zero.zero_like(); cap + 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero_elem() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if i + j > cap {
                break;
            }
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

/// (alpha x + beta)^e as a coefficient array.
fn linear_pow<T: Coeff>(alpha: &T, beta: &T, e: usize, zero: &T) -> Vec<T> {
    let mut acc = vec![zero.one_like()];
    for _ in 0..e {
        acc = poly_mul(&acc, &[beta.clone(), alpha.clone()], e, zero);
    }
    acc
}

/// Weight-n right action (P . g)(x) = (cx+d)^n / det(g)^(n/2) * P((ax+b)/(cx+d)).
pub fn act_poly<T: Coeff>(poly: &PolyN<T>, g: &Mat2) -> PolyN<T> {
    let n = poly.n();
    assert!(n % 2 == 0, "weight action requires even n");
    let mut out = act_poly_unnorm(poly, g);
    let det_pow = {
        let mut d = BigRational::one();
        for _ in 0..(n / 2) {
            d *= g.det();
        }
        d
    };
    let proto = &poly.coeffs[0];
    let s = proto.from_rat_like(&det_pow);
    out.coeffs = out.coeffs.iter().map(|c| c.div_exact(&s)).collect();
    out
}

/// Same action without the determinant normalization.
pub fn act_poly_unnorm<T: Coeff>(poly: &PolyN<T>, g: &Mat2) -> PolyN<T> {
    let n = poly.n();
    let proto = &poly.coeffs[0];
    let zero = proto.zero_like();
    let a = proto.from_rat_like(&g.a);
    let b = proto.from_rat_like(&g.b);
    let c = proto.from_rat_like(&g.c);
    let d = proto.from_rat_like(&g.d);
    let mut out = vec![zero.zero_like(); n + 1];
    for (j, pj) in poly.coeffs.iter().enumerate() {
        if pj.is_zero_elem() {
            continue;
        }
        let top = linear_pow(&a, &b, j, &zero);
        let bot = linear_pow(&c, &d, n - j, &zero);
        let term = poly_mul(&top, &bot, n, &zero);
        for (i, t) in term.into_iter().enumerate() {
            out[i] = out[i].add(&t.mul(pj));
        }
    }
    PolyN { coeffs: out }
}

/// Product of two polynomials with the degree cap of the ambient module.
pub fn poly_product<T: Coeff>(a: &PolyN<T>, b: &PolyN<T>, n_out: usize) -> PolyN<T> {
    let zero = a.coeffs[0].zero_like();
    let coeffs = poly_mul(&a.coeffs, &b.coeffs, n_out, &zero);
    PolyN { coeffs }
}

/// Power P^m inside P_{2m * deg-ish}; caller fixes the ambient degree.
pub fn poly_pow<T: Coeff>(p: &PolyN<T>, m: usize, n_out: usize) -> PolyN<T> {
    let proto = &p.coeffs[0];
    let mut acc = PolyN::monomial(proto, n_out, 0);
    for _ in 0..m {
        acc = poly_product(&acc, p, n_out);
    }
    acc
}

/// Functional on P_n recorded by its values on the monomial basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DualVn<T: Coeff> {
    pub values: Vec<T>,
}

impl<T: Coeff> DualVn<T> {
    pub fn zero_of_degree(proto: &T, n: usize) -> Self {
        DualVn { values: vec![proto.zero_like(); n + 1] }
    }

    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn apply(&self, p: &PolyN<T>) -> T {
        let mut acc = self.values[0].zero_like();
        for (v, c) in self.values.iter().zip(&p.coeffs) {
            acc = acc.add(&v.mul(c));
        }
        acc
    }

    pub fn add(&self, o: &Self) -> Self {
        DualVn { values: self.values.iter().zip(&o.values).map(|(x, y)| x.add(y)).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        DualVn { values: self.values.iter().zip(&o.values).map(|(x, y)| x.sub(y)).collect() }
    }

    pub fn neg(&self) -> Self {
        DualVn { values: self.values.iter().map(|x| x.neg()).collect() }
    }

    pub fn scale(&self, s: &T) -> Self {
        DualVn { values: self.values.iter().map(|x| x.mul(s)).collect() }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero_elem())
    }
}

/// Left dual action (g . v)(P) = v(P . g), with the normalized weight action.
pub fn act_dual<T: Coeff>(v: &DualVn<T>, g: &Mat2) -> DualVn<T> {
    let n = v.n();
    let proto = &v.values[0];
    let values = (0..=n)
        .map(|i| {
            let mono = PolyN::monomial(proto, n, i);
            v.apply(&act_poly(&mono, g))
        })
        .collect();
    DualVn { values }
}

/// Left dual action without determinant normalization.
pub fn act_dual_unnorm<T: Coeff>(v: &DualVn<T>, g: &Mat2) -> DualVn<T> {
    let n = v.n();
    let proto = &v.values[0];
    let values = (0..=n)
        .map(|i| {
            let mono = PolyN::monomial(proto, n, i);
            v.apply(&act_poly_unnorm(&mono, g))
        })
        .collect();
    DualVn { values }
}

/// Discriminant pairing on quadratics: <P, P> = (4ac - b^2)/4 = -disc/4,
/// invariant under the simultaneous determinant-one action.
pub fn disc_pairing<T: Coeff>(p: &PolyN<T>, q: &PolyN<T>) -> T {
    assert!(p.n() == 2 && q.n() == 2, "discriminant pairing lives on quadratics");
    let (c0, b0, a0) = (&p.coeffs[0], &p.coeffs[1], &p.coeffs[2]);
    let (c1, b1, a1) = (&q.coeffs[0], &q.coeffs[1], &q.coeffs[2]);
    let two = a0.one_like().add(&a0.one_like());
    let four = two.mul(&two);
    let s = two.mul(&a0.mul(c1).add(&a1.mul(c0))).sub(&b0.mul(b1));
    s.div_exact(&four)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{rand_sl2z, rat};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_poly(rng: &mut ChaCha8Rng, n: usize) -> PolyN<BigRational> {
        PolyN::new((0..=n).map(|_| rat(rng.gen_range(-9..9), 1)).collect())
    }

    #[test]
    fn identity_acts_trivially() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let p = rand_poly(&mut rng, 4);
            assert_eq!(act_poly(&p, &Mat2::identity()), p);
        }
    }

    #[test]
    fn translation_on_square() {
        // n = 2, X^2 . [[1,1],[0,1]] = (X+1)^2
        let p: PolyN<BigRational> = PolyN::monomial(&BigRational::zero().one_like(), 2, 2);
        let g = Mat2::from_i64(1, 1, 0, 1);
        let q = act_poly(&p, &g);
        assert_eq!(q.coeffs, vec![rat(1, 1), rat(2, 1), rat(1, 1)]);
    }

    #[test]
    fn right_action_law_on_random_triples() {
        // oracle: direct double evaluation, (P.g).h = P.(gh)
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let p = rand_poly(&mut rng, 4);
            let g = rand_sl2z(&mut rng, 4);
            let h = rand_sl2z(&mut rng, 4);
            let lhs = act_poly(&act_poly(&p, &g), &h);
            let rhs = act_poly(&p, &g.mul(&h));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn dual_left_action_law_and_adjunction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let n = 2;
            let v = DualVn::<BigRational> {
                values: (0..=n).map(|_| rat(rng.gen_range(-9..9), 1)).collect(),
            };
            let p = rand_poly(&mut rng, n);
            let g = rand_sl2z(&mut rng, 3);
            let h = rand_sl2z(&mut rng, 3);
            // adjunction (g.v)(P) = v(P.g)
            assert_eq!(act_dual(&v, &g).apply(&p), v.apply(&act_poly(&p, &g)));
            // left action law g.(h.v) = (gh).v
            let lhs = act_dual(&act_dual(&v, &h), &g);
            let rhs = act_dual(&v, &g.mul(&h));
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn inverse_action_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let p = rand_poly(&mut rng, 6);
            let g = rand_sl2z(&mut rng, 4);
            assert_eq!(act_poly(&act_poly(&p, &g), &g.inv()), p);
        }
    }

    #[test]
    fn disc_pairing_values() {
        // <X^2 - 2, X^2 - 2> = -disc/4 = -8/4 = -2
        let p = PolyN::new(vec![rat(-2, 1), rat(0, 1), rat(1, 1)]);
        assert_eq!(disc_pairing(&p, &p), rat(-2, 1));
        let zero = PolyN::zero_of_degree(&BigRational::zero(), 2);
        assert_eq!(disc_pairing(&zero, &p), rat(0, 1));
    }

    #[test]
    fn disc_pairing_invariant_under_det_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let p = rand_poly(&mut rng, 2);
            let q = rand_poly(&mut rng, 2);
            let g = rand_sl2z(&mut rng, 5);
            let lhs = disc_pairing(&act_poly(&p, &g), &act_poly(&q, &g));
            assert_eq!(lhs, disc_pairing(&p, &q));
        }
    }
}
