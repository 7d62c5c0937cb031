use std::time::Instant;
use openbook::mesh::*;
use openbook::fem::*;
use openbook::eigen::*;
fn main() {
    let spec = openbook::geometry::fixtures::flat_book(3, std::f64::consts::PI, 1.0);
    let t0 = Instant::now();
    let e0 = spec.epsilon0().unwrap();
    println!("epsilon0 = {:.4} in {:?}", e0.value, t0.elapsed());
    let t0 = Instant::now();
    let smesh = triangulate_pages(&spec, &SurfaceMeshOptions::for_eps(0.16, 0.2)).unwrap();
    println!("surface mesh: {} nodes in {:?}", smesh.n_nodes(), t0.elapsed());
    let t0 = Instant::now();
    let vmesh = assemble_volume_mesh_on(&smesh, 0.2, 10).unwrap();
    println!("volume mesh: {} nodes, {} tets in {:?}", vmesh.n_nodes(), vmesh.tets.len(), t0.elapsed());
    let t0 = Instant::now();
    let pair = assemble_volume(&vmesh).unwrap();
    println!("assembled (nnz {}) in {:?}", pair.stiffness.nnz(), t0.elapsed());
    let t0 = Instant::now();
    let r = solve_lowest(&pair, &SolverOpts { n_eigs: 6, tol: 1e-7, max_iter: 2500, seed: 7, ..Default::default() }).unwrap();
    println!("eigensolve: {} iters in {:?}: {:?}", r.iterations, t0.elapsed(), r.values);
}
