use cycles_core::modsym::*;
use num_rational::BigRational;
use num_bigint::BigInt;
use cycles_core::weightmod::{DualVn, act_poly_unnorm, PolyN};
use num_traits::Zero;

fn rr(n: i64) -> BigRational { BigRational::from(BigInt::from(n)) }

fn act_v(n: usize, g: &MatI, v: &DualVn<BigRational>) -> DualVn<BigRational> {
    let gm = g.to_mat2();
    let mut out = DualVn::zero_of_degree(&BigRational::zero(), n);
    for i in 0..=n {
        let mono: PolyN<BigRational> = PolyN::monomial(&BigRational::zero(), n, i);
        let img = act_poly_unnorm(&mono, &gm);
        let mut s = BigRational::zero();
        for j in 0..=n { s += &img.coeffs[j] * &v.values[j]; }
        out.values[i] = s;
    }
    out
}

#[test]
fn dbg_hecke_equiv() {
    let s = build_space(5, 4).unwrap();
    let n = 2usize;
    let mut c = vec![rr(0); s.dim()]; c[1] = rr(1);
    let phi = s.element(&c);
    let cosets: Vec<MatI> = (0..2).map(|j| MatI{a:1,b:j,c:0,d:2}).chain([MatI{a:2,b:0,c:0,d:1}]).collect();
    let gam = MatI{a:1,b:0,c:5,d:1};
    let d = CuspDivisor::path(Cusp::new(1,3), Cusp::new(-2,7));
    // lhs: (T phi)(gam D)
    let mut lhs = DualVn::zero_of_degree(&BigRational::zero(), n);
    for al in &cosets {
        let dd = d.apply(&gam).apply(&al.adj());
        lhs = lhs.add(&act_v(n, al, &eval_symbol(&phi, &dd)));
    }
    // rhs: gam || (T phi)(D)
    let mut raw = DualVn::zero_of_degree(&BigRational::zero(), n);
    for al in &cosets {
        let dd = d.apply(&al.adj());
        raw = raw.add(&act_v(n, al, &eval_symbol(&phi, &dd)));
    }
    let rhs = act_v(n, &gam, &raw);
    let diff: Vec<String> = lhs.sub(&rhs).values.iter().map(|x| x.to_string()).collect();
    eprintln!("hecke equivariance diff: {:?}", diff);

    // also: does the apply_coset_sum Manin vector satisfy the relations?
    let img = hecke(HeckeOp::T(2), &phi).unwrap();
    // manually: M'(u) vs直接 (T phi)(g_u{0,inf}) pulled back -- compare img's manin piece value to direct sum
    for u_g in [MatI{a:0,b:-1,c:1,d:0}, MatI{a:0,b:-1,c:1,d:3}] {
        let base = CuspDivisor::path(Cusp::new(u_g.b, u_g.d), Cusp::new(u_g.a, u_g.c));
        let mut direct = DualVn::zero_of_degree(&BigRational::zero(), n);
        for al in &cosets {
            let dd = base.apply(&al.adj());
            direct = direct.add(&act_v(n, al, &eval_symbol(&phi, &dd)));
        }
        let via = manin_piece_value(&img, &u_g);
        let diff: Vec<String> = via.sub(&direct).values.iter().map(|x| x.to_string()).collect();
        eprintln!("piece vs direct for g=({},{},{},{}): {:?}", u_g.a,u_g.b,u_g.c,u_g.d, diff);
    }
}
