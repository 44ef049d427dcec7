mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stfem::assembly::{assemble_system, DofMap, SparseSystem};
use stfem::linsolve::{solve, Method, Preconditioner, Solver, SolverConfig};
use stfem::manufactured::example;
use stfem::mesh::{Geometry, SpaceTimeMesh};
use stfem::Error;

fn example1_system(n: usize) -> SparseSystem {
    let sol = example(1).unwrap();
    let mesh = SpaceTimeMesh::build(n, Geometry::UnitSquare).unwrap();
    let dofmap = DofMap::with_dirichlet(&mesh, |p| (sol.u)(p)).unwrap();
    assemble_system(&mesh, &dofmap, &sol.coefficient, &|p| (sol.f)(p), 5).unwrap()
}

fn relative_residual(system: &SparseSystem, x: &[f64]) -> f64 {
    let ax = system.matrix.mul_vec(x);
    let r: Vec<f64> = ax.iter().zip(&system.rhs).map(|(a, b)| b - a).collect();
    let zero = vec![0.0; r.len()];
    common::relative_difference(&r, &zero) / common::relative_difference(&system.rhs, &zero)
}

#[test]
fn direct_lu_matches_dense_elimination() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..100 {
        let matrix = common::random_sparse_matrix(&mut rng, 20, 0.15);
        let rhs: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let expected = common::dense_solve(matrix.to_dense(), rhs.clone()).unwrap();
        let x = solve(&SparseSystem { matrix, rhs }, &SolverConfig::with_method(Method::DirectLu)).unwrap();
        assert!(common::relative_difference(&x, &expected) <= 1e-9);
    }
}

#[test]
fn gmres_matches_dense_elimination() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for precond in [Preconditioner::None, Preconditioner::Ilu0] {
        for _ in 0..20 {
            let matrix = common::random_sparse_matrix(&mut rng, 20, 0.15);
            let rhs: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let expected = common::dense_solve(matrix.to_dense(), rhs.clone()).unwrap();
            let config = SolverConfig { method: Method::Gmres, preconditioner: precond, ..SolverConfig::default() };
            match solve(&SparseSystem { matrix, rhs }, &config) {
                Ok(x) => assert!(common::relative_difference(&x, &expected) <= 1e-7),
                // ILU(0) of a row-permuted matrix can meet a zero pivot
                Err(Error::SingularMatrix(_)) if precond == Preconditioner::Ilu0 => {}
                Err(e) => panic!("{e}"),
            }
        }
    }
}

#[test]
fn example1_residual_post_check() {
    let system = example1_system(4);
    let x = solve(&system, &SolverConfig::with_method(Method::DirectLu)).unwrap();
    assert_eq!(x.len(), system.dim());
    assert!(relative_residual(&system, &x) <= 1e-10);
}

#[test]
fn galerkin_residual_after_solve() {
    for n in [4, 8, 16, 32] {
        let system = example1_system(n);
        for method in [Method::DirectLu, Method::Gmres] {
            let x = solve(&system, &SolverConfig::with_method(method)).unwrap();
            let ax = system.matrix.mul_vec(&x);
            let res = ax.iter().zip(&system.rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let scale = system.rhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
            assert!(res <= 1e-9 * scale, "N={n} {method:?}: {res:e}");
        }
    }
}

#[test]
fn gmres_agrees_with_lu_on_example1() {
    for n in [4, 8, 16] {
        let system = example1_system(n);
        let lu = solve(&system, &SolverConfig::with_method(Method::DirectLu)).unwrap();
        let gmres = solve(&system, &SolverConfig::with_method(Method::Gmres)).unwrap();
        assert!(relative_residual(&system, &gmres) <= 1e-10);
        let diff = common::relative_difference(&gmres, &lu);
        assert!(diff <= 1e-7, "N={n}: {diff:e}");
    }
}

#[test]
fn spd_path_matches_dense_elimination() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let n = 15;
    for _ in 0..20 {
        // BᵀB + I
        let b: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let mut triplets = Vec::new();
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let v: f64 = (0..n).map(|k| b[k][i] * b[k][j]).sum::<f64>() + if i == j { 1.0 } else { 0.0 };
                dense[i][j] = v;
                triplets.push((i, j, v));
            }
        }
        let matrix = stfem::sparse::CsrMatrix::from_triplets(n, n, &triplets).unwrap();
        let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let expected = common::dense_solve(dense, rhs.clone()).unwrap();
        let x = Solver::new_spd(&matrix, &SolverConfig::default()).unwrap().solve(&rhs).unwrap();
        assert!(common::relative_difference(&x, &expected) <= 1e-9);
    }
}

#[test]
fn memory_guard_on_a_3d_system() {
    let sol = example(2).unwrap();
    let mesh = SpaceTimeMesh::build(8, Geometry::UnitCube).unwrap();
    let dofmap = DofMap::with_dirichlet(&mesh, |p| (sol.u)(p)).unwrap();
    let system = assemble_system(&mesh, &dofmap, &sol.coefficient, &|p| (sol.f)(p), 4).unwrap();
    let tight = SolverConfig { memory_budget: 1 << 10, ..SolverConfig::with_method(Method::DirectLu) };
    match solve(&system, &tight) {
        Err(Error::Resource(msg)) => assert!(msg.contains("memory budget")),
        other => panic!("expected a resource error, got {other:?}"),
    }
    let auto = SolverConfig { method: Method::Auto, ..tight };
    let solver = Solver::new(&system.matrix, &auto).unwrap();
    assert!(!solver.is_direct());
    let x = solver.solve(&system.rhs).unwrap();
    assert!(relative_residual(&system, &x) <= 1e-10);
}
