#![allow(clippy::needless_range_loop)]

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stfem::assembly::{CoefficientField, DofMap, DofStatus};
use stfem::fem::eval_p1;
use stfem::manufactured::Zero;
use stfem::mesh::{Geometry, NodeKind, SpaceTimeMesh};
use stfem::norms::{convergence_order, h1_error_cylinder, l2_error_cylinder, DiscreteField, InfSupEvaluator};
use stfem::linsolve::SolverConfig;
use stfem::sparse::CsrMatrix;

fn geometry() -> impl Strategy<Value = Geometry> {
    prop_oneof![Just(Geometry::UnitSquare), Just(Geometry::Trapezoid), Just(Geometry::UnitCube)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn meshes_are_valid_and_fill_the_domain(geometry in geometry(), n in 1usize..7) {
        let mesh = SpaceTimeMesh::build(n, geometry).unwrap();
        prop_assert!(mesh.validate().is_ok());
        let volume: f64 = (0..mesh.n_cells()).map(|c| mesh.signed_volume(c)).sum();
        prop_assert!((volume - geometry.volume()).abs() < 1e-12);
        prop_assert!((0..mesh.n_cells()).all(|c| mesh.signed_volume(c) > 0.0));
        for v in 0..mesh.n_vertices() {
            let p = mesh.vertex(v);
            let on_dirichlet = geometry.on_lateral(p) || p[p.len() - 1].abs() < 1e-12;
            prop_assert_eq!(mesh.classify_node(v) == NodeKind::Constrained, on_dirichlet);
        }
    }

    #[test]
    fn p1_partition_of_unity(a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0) {
        for dim in [2usize, 3] {
            let point = [a / dim as f64, b / dim as f64, c / dim as f64];
            let e = eval_p1(dim, &point);
            let sum: f64 = e.values[..=dim].iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-15);
            for k in 0..dim {
                let g: f64 = e.gradients[..=dim].iter().map(|g| g[k]).sum();
                prop_assert_eq!(g, 0.0);
            }
        }
    }

    #[test]
    fn dofmap_round_trip(geometry in geometry(), n in 1usize..5, seed in any::<u64>()) {
        let mesh = SpaceTimeMesh::build(n, geometry).unwrap();
        let dofmap = DofMap::with_dirichlet(&mesh, |p| p.iter().sum()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let free = common::random_free_vector(&mut rng, &dofmap);
        let nodal = dofmap.expand(&free);
        prop_assert_eq!(dofmap.restrict(&nodal), free);
        for v in 0..mesh.n_vertices() {
            match dofmap.status(v) {
                DofStatus::Constrained(g) => prop_assert_eq!(nodal[v], g),
                DofStatus::Free(k) => prop_assert_eq!(dofmap.free_node(k), v),
            }
        }
    }

    #[test]
    fn orders_invert_power_laws(e in 1e-8f64..1.0, p in 0.1f64..4.0) {
        let order = convergence_order(e, e / 2f64.powf(p)).unwrap();
        prop_assert!((order - p).abs() < 1e-12);
    }

    #[test]
    fn triplets_match_dense_accumulation(entries in prop::collection::vec((0usize..6, 0usize..5, -10.0f64..10.0), 0..40)) {
        let m = CsrMatrix::from_triplets(6, 5, &entries).unwrap();
        let mut dense = vec![vec![0.0; 5]; 6];
        for &(r, c, v) in &entries {
            dense[r][c] += v;
        }
        let got = m.to_dense();
        for r in 0..6 {
            for c in 0..5 {
                prop_assert!((got[r][c] - dense[r][c]).abs() < 1e-12);
            }
        }
        for r in 0..6 {
            let (cols, _) = m.row(r);
            prop_assert!(cols.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn h1_dominates_l2(geometry in geometry(), n in 1usize..4, seed in any::<u64>()) {
        let mesh = SpaceTimeMesh::build(n, geometry).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let values = common::random_free_vector(&mut rng, &DofMap::all_free(mesh.n_vertices()));
        let field = DiscreteField::new(&mesh, values).unwrap();
        let l2 = l2_error_cylinder(&field, &Zero).unwrap();
        prop_assert!(l2 >= 0.0);
        prop_assert!(h1_error_cylinder(&field, &Zero).unwrap() >= l2);
    }

    #[test]
    fn infsup_bound_on_random_fields(geometry in geometry(), n in 2usize..5, seed in any::<u64>()) {
        let n = if geometry == Geometry::UnitCube { n.min(3) } else { n };
        let mesh = SpaceTimeMesh::build(n, geometry).unwrap();
        let a = CoefficientField::identity(geometry.spatial_dim());
        let eval = InfSupEvaluator::new(&mesh, &a, &SolverConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = common::random_free_vector(&mut rng, &DofMap::homogeneous(&mesh));
        prop_assert!(eval.ratio(&c).unwrap() >= 1.0 / 8f64.sqrt() - 1e-10);
    }
}

#[test]
fn infsup_bound_with_variable_coefficient() {
    let mesh = SpaceTimeMesh::build(4, Geometry::UnitCube).unwrap();
    let a = CoefficientField::new(2, |p| {
        let s = 1.0 + 0.5 * p[0] * p[2];
        [[s, 0.2], [0.2, 2.0 - p[1]]]
    });
    a.check_at((0..=4).map(|k| vec![k as f64 / 4.0, 1.0, 1.0])).unwrap();
    let eval = InfSupEvaluator::new(&mesh, &a, &SolverConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let c = common::random_free_vector(&mut rng, &DofMap::homogeneous(&mesh));
        assert!(eval.ratio(&c).unwrap() >= 1.0 / 8f64.sqrt() - 1e-10);
    }
}
