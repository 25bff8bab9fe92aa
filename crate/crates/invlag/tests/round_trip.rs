//! Forward and backward passes between Lagrangian data and SODEs.

mod common;

use invlag::conditions::{check_dissipative, check_implicit, check_multiplier_dissipative, ImplicitSystem};
use invlag::expr::{Expr, Var};
use invlag::geometry::SodeGeometry;
use invlag::reconstruct::{
    forward_sode, hessian, reconstruct_dissipative, vertical_homotopy2, verify_dissipative, Force,
};
use invlag::tensor::TensorField;
use rand::Rng;

const SYSTEMS: usize = 25;

fn systems(stream: u64) -> Vec<common::Mechanical> {
    let mut rng = common::rng(stream);
    (0..SYSTEMS)
        .map(|_| {
            let n = rng.gen_range(2..=3);
            common::random_mechanical(&mut rng, n)
        })
        .collect()
}

#[test]
fn forward_then_check_and_reconstruct() {
    for m in systems(0x70a1) {
        let n = m.ctx.n();
        let s = forward_sode(&m.ctx, &m.lagrangian, &m.dissipation).unwrap();
        let geo = SodeGeometry::new(&s).unwrap();
        let g = hessian(&m.lagrangian, n);
        let report = check_dissipative(&geo, &g, &m.dissipation).unwrap();
        assert!(report.pass, "{}", report.display(&m.ctx));
        assert!(check_multiplier_dissipative(&geo, &g).unwrap().pass);
        assert!(verify_dissipative(&s, &m.lagrangian, &m.dissipation).pass);

        let cert = reconstruct_dissipative(&geo, &g).unwrap();
        assert_eq!(hessian(&cert.lagrangian, n).entries(), g.entries());
        let Force::Dissipation(d) = &cert.force else { panic!("dissipative certificate") };
        let verdict = verify_dissipative(&s, &cert.lagrangian, d);
        assert!(verdict.pass, "{}", verdict.display(&m.ctx));
        assert!(cert.verify(&s).unwrap().pass);
    }
}

#[test]
fn implicit_forms_pass_and_perturbations_fail() {
    let mut rng = common::rng(0x1a9);
    for m in systems(0x70a1) {
        let sys = common::implicit_form(&m);
        let report = check_implicit(&sys);
        assert!(report.pass, "{}", report.display(sys.ctx()));

        let n = sys.n();
        let i = rng.gen_range(0..n);
        let j = (i + rng.gen_range(1..n)) % n;
        let vj = Expr::var(Var::v(j + 1));
        let mut f = sys.f().to_vec();
        f[i] = &f[i] + &(&vj * &vj);
        let perturbed = ImplicitSystem::new(sys.ctx().clone(), f).unwrap();
        assert!(!check_implicit(&perturbed).pass);
    }
}

#[test]
fn fibre_homotopy_inverts_the_hessian() {
    let mut rng = common::rng(0x4e55);
    for _ in 0..SYSTEMS {
        let n = rng.gen_range(2..=3);
        let q = common::positions(n);
        let v = common::velocities(n);
        // M = Hessian of a random function quadratic-to-quintic in v, so that
        // M is symmetric with symmetric vertical derivative and degree ≤ 3
        let vars: Vec<Var> = q.iter().chain(&v).copied().collect();
        let basis: Vec<Expr> = common::monomials(&vars, 2, 5)
            .into_iter()
            .filter(|e| {
                let deg = e.numer().terms().next().unwrap().0.degree_where(Var::is_velocity);
                (2..=5).contains(&deg)
            })
            .collect();
        let f = common::random_poly(&mut rng, &basis, 4);
        let m: TensorField = hessian(&f, n);
        let l = vertical_homotopy2(&m).unwrap();
        assert_eq!(hessian(&l, n).entries(), m.entries());
    }
}
