//! Structural identities of the SODE geometry on random polynomial systems.

mod common;

use invlag::expr::{rat, Expr};
use invlag::geometry::{horizontal_apply, vertical, SodeGeometry};
use invlag::tensor::{Symmetry, TensorField};
use rand::Rng;

const SYSTEMS: usize = 25;

fn random_geometries() -> Vec<SodeGeometry> {
    let mut rng = common::rng(0x6e0);
    (0..SYSTEMS)
        .map(|_| {
            let n = rng.gen_range(2..=3);
            SodeGeometry::new(&common::random_sode(&mut rng, n)).expect("both curvature formulas agree")
        })
        .collect()
}

#[test]
fn vertical_derivative_of_jacobi_is_three_curvatures() {
    for geo in random_geometries() {
        let three_r = geo.curvature.map(|e| e.scale(&rat(3)));
        assert_eq!(geo.vertical_exterior_jacobi().entries(), three_r.entries());
    }
}

#[test]
fn curvature_formulas_agree() {
    for geo in random_geometries() {
        let s = &geo.sode;
        let n = geo.n();
        let third = Expr::ratio(1, 3);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let conn = &geo.connection;
                    let from_connection =
                        horizontal_apply(s, j, conn.at(k, i)) - horizontal_apply(s, i, conn.at(k, j));
                    let from_jacobi = &third * &(vertical(i, geo.jacobi.at(k, j)) - vertical(j, geo.jacobi.at(k, i)));
                    assert!((&from_connection - &from_jacobi).is_zero());
                    assert_eq!(geo.curvature.at3(k, i, j), &from_connection);
                }
            }
        }
    }
}

#[test]
fn horizontal_derivative_of_jacobi_is_covariant_curvature() {
    for geo in random_geometries() {
        let dh = geo.horizontal_exterior_jacobi();
        let nr = geo.nabla12(&geo.curvature).unwrap();
        assert!((0..dh.entries().len()).all(|i| (&dh.entries()[i] - &nr.entries()[i]).is_zero()));
    }
}

#[test]
fn connection_is_torsion_free_and_theta_symmetric() {
    for geo in random_geometries() {
        let n = geo.n();
        for j in 0..n {
            for i in 0..n {
                for k in 0..n {
                    assert_eq!(vertical(i, geo.connection.at(j, k)), vertical(k, geo.connection.at(j, i)));
                }
            }
        }
        assert!(geo.theta.satisfies(Symmetry::Symmetric(1, 2)));
        assert!(geo.curvature.satisfies(Symmetry::Antisymmetric(1, 2)));
    }
}

#[test]
fn covariant_derivative_obeys_leibniz_on_products() {
    // ∇(λg) = Γ(λ)g + λ∇g for a scalar λ
    let mut rng = common::rng(0x1e1b);
    for geo in random_geometries().into_iter().take(8) {
        let n = geo.n();
        let vars: Vec<_> = common::positions(n).into_iter().chain(common::velocities(n)).collect();
        let basis = common::monomials(&vars, 0, 2);
        let g = TensorField::from_fn(0, 2, n, |ix| {
            let (i, j) = (ix[0].min(ix[1]), ix[0].max(ix[1]));
            Expr::int((i * n + j) as i64 + 1)
        });
        let lambda = common::random_poly(&mut rng, &basis, 2);
        let lhs = geo.nabla02(&g.map(|e| &lambda * e)).unwrap();
        let glambda = geo.gamma(&lambda);
        let ng = geo.nabla02(&g).unwrap();
        for (idx, e) in lhs.entries().iter().enumerate() {
            let rhs = &glambda * &g.entries()[idx] + &lambda * &ng.entries()[idx];
            assert_eq!(e, &rhs);
        }
    }
}
