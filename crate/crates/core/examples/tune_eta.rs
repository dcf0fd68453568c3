use spinboson::c64;
use spinboson::open::*;
use spinboson::spectral::{eigenvalue_polynomials, EigenPolyOptions};
use spinboson::yang_baxter::ModelParams;
use spinboson::C64;

fn main() {
    let p = ModelParams::new(c64(1.0,0.0), c64(0.2,0.0), c64(0.1,0.0), c64(0.8,0.0), c64(0.7,0.0), 20, 4).unwrap();
    let r = ReflectionParams::new(c64(1.3,0.0), c64(0.9,0.0), c64(0.4,0.0), c64(0.55,0.0), c64(0.25,0.0), c64(-0.3,0.0)).unwrap();
    let chain = build_u_matrix(&p, &r).unwrap();
    let nodes: Vec<C64> = (0..9).map(|k| c64(0.25 + 0.13*k as f64, 0.2 - 0.09*k as f64)).collect();
    let mut opts = EigenPolyOptions::new(6, p.margin);
    opts.parity_even = true;
    let recs = eigenvalue_polynomials(&|x| chain.transfer_at(x), &nodes, &opts, None).unwrap();
    let lat = open_lattice(&p);
    let bd = bar_delta(&p, &r);
    let rhs = bd.minus(lat.x_s_plus) * bd.plus(lat.x_s_minus);
    println!("2x2 determinant RHS = {rhs}");
    let mut n = 0;
    for rec in recs.iter().filter(|r| r.trusted) {
        let lhs = rec.coeffs.eval(lat.x_s_plus) * rec.coeffs.eval(lat.x_s_minus);
        let rel = (lhs - rhs).norm() / rhs.norm();
        println!("trusted record: leak={:.1e} det-rel={:.3e}", rec.leak, rel);
        // boson chain: Q-recursion tail diagnostic
        let mut q = vec![c64(1.0,0.0)];
        let mut growth = Vec::new();
        for k in 0..10usize {
            let x = lat.x_b[k];
            let mut next = rec.coeffs.eval(x) * q[k];
            if k > 0 { next -= bd.minus(x) * q[k-1]; }
            next /= bd.plus(x);
            growth.push(next.norm() / q[k].norm().max(1e-300));
            q.push(next);
        }
        println!("   Q-tail growth ratios: {:?}", growth.iter().map(|g| format!("{g:.2}")).collect::<Vec<_>>());
        n += 1;
        if n >= 4 { break; }
    }
}
