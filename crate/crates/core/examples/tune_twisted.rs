use spinboson::c64;
use spinboson::fock::FockSpinOperator;
use spinboson::open::*;
use spinboson::yang_baxter::{r_matrix, qdet_bulk_scalar, ModelParams};
use spinboson::C64;
use ndarray::Array2;

fn singlet_project(p: &ModelParams, u_m: &[[FockSpinOperator;2];2], x: &Array2<C64>, u_p: &[[FockSpinOperator;2];2]) -> FockSpinOperator {
    let dim = 2 * p.n_t;
    let mut acc = Array2::<C64>::zeros((dim, dim));
    let s = [ (1usize, 1.0f64), (2usize, -1.0f64) ];
    for &(ia, wa) in &s {
        let (a1, a2) = (ia / 2, ia % 2);
        for &(ib, wb) in &s {
            let (b1, b2) = (ib / 2, ib % 2);
            for c1 in 0..2 { let c2 = a2;
                for d2 in 0..2 { let d1 = b1;
                    let xv = x[(2*c1+c2, 2*d1+d2)];
                    if xv.norm() == 0.0 { continue; }
                    let m = u_m[a1][c1].mul(&u_p[d2][b2]);
                    acc = acc + m.matrix().mapv(|z| z * (xv * wa * wb * 0.5));
                }
            }
        }
    }
    FockSpinOperator::from_matrix(p.n_t, acc).unwrap()
}

fn main() {
    let p = ModelParams::new(c64(1.0,0.0), c64(0.2,0.0), c64(0.1,0.0), c64(0.8,0.0), c64(0.7,0.0), 12, 4).unwrap();
    let r = ReflectionParams::new(c64(1.3,0.0), c64(0.9,0.0), c64(0.4,0.0), c64(0.55,0.0), c64(0.25,0.0), c64(-0.3,0.0)).unwrap();
    let chain = build_u_matrix(&p, &r).unwrap();
    let (dp, dm) = open_delta_pair(&p, &r);
    let eta = p.eta;
    let h = eta * c64(0.5,0.0);
    let composed = |x: C64| dp.eval(x - h) * dm.eval(x + h);
    let u = &chain.u;
    let dbulk = qdet_bulk_scalar(&p).unwrap();
    println!("x, ratio, ratio*(2x-eta)/(2x+eta)... candidates");
    for k in 0..8 {
        let x = c64(0.35 + 0.25*k as f64, 0.0);
        let um = u.eval(x - h);
        let up = u.eval(x + h);
        let xm = r_matrix(2.0*x-eta, c64(0.0,0.0), eta).unwrap();
        let q = singlet_project(&p, &um, &xm, &up);
        let (z, _) = q.edge_safe_scalar(p.margin);
        let ratio = z / composed(x);
        // candidate normalizers
        let c1 = ratio * (2.0*x + eta) / (2.0*x - eta);
        let c2 = ratio * (2.0*x) / (2.0*x - eta);
        let c3 = ratio * (2.0*x + eta);
        let c4 = ratio * (2.0*x - eta);
        let c5 = ratio * (2.0*x)*(2.0*x);
        let db1 = dbulk.eval(-x-h); let db2 = dbulk.eval(x-h);
        println!("x={:.2}: ratio={:.6} | *(2x+η)/(2x-η)={:.6} *(2x)/(2x-η)={:.6} *(2x+η)={:.6} *(2x-η)={:.6} *(4x²)={:.6} /δ(-x-h)={:.6} /δ(x-h)={:.6}",
            x.re, ratio.re, c1.re, c2.re, c3.re, c4.re, c5.re, (ratio/db1).re, (ratio/db2).re);
    }
}
