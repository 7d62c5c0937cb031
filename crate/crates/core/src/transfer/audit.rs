//! Numerical audits of the inequality machinery: near-isometry and energy
//! bounds of the transfer pair, fiber and cross-section Poincare constants,
//! smallness of eigenfunction mass on the fattened bindings, and the offset
//! metric perturbation.  Every record carries a stable inequality identifier,
//! both sides of the inequality, and a pass flag; sweeps are merged into
//! fitted log-log slopes.

use serde::Serialize;

use super::ops::TransferOps;
use crate::eigen::EigenResult;
use crate::fem::{assemble_volume_region, FemPair, VolumeRestriction};
use crate::geometry::ParamChart;
use crate::mesh::{RegionTag, VolumeMesh};
use crate::study::{fit_rate, RateFit};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct AuditRecord {
    /// Stable identifier of the audited inequality.
    pub inequality: String,
    /// Eigenfunction index when the record is per-mode.
    pub mode: Option<usize>,
    pub eps: f64,
    pub left: f64,
    pub right: f64,
    pub ratio: f64,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct AuditReport {
    pub records: Vec<AuditRecord>,
    /// Fitted eps-slopes per inequality (filled by `merge_sweep`).
    pub slopes: Vec<(String, RateFit)>,
    pub mesh: serde_json::Value,
}

impl AuditReport {
    pub fn pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn push(
        &mut self,
        inequality: &str,
        mode: Option<usize>,
        eps: f64,
        left: f64,
        right: f64,
        pass: bool,
        detail: String,
    ) {
        self.records.push(AuditRecord {
            inequality: inequality.into(),
            mode,
            eps,
            left,
            right,
            ratio: if right != 0.0 { left / right } else { f64::INFINITY },
            pass,
            detail,
        });
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "records": self.records,
            "slopes": self.slopes,
            "mesh": self.mesh,
            "pass": self.pass(),
        })
    }
}

/// Merge per-eps reports of the same audit into one report with fitted
/// log-log slopes of `left` against eps, per (inequality, mode).
pub fn merge_sweep(reports: &[AuditReport]) -> AuditReport {
    let mut merged = AuditReport::default();
    for r in reports {
        merged.records.extend(r.records.iter().cloned());
    }
    let mut keys: Vec<(String, Option<usize>)> = merged
        .records
        .iter()
        .map(|r| (r.inequality.clone(), r.mode))
        .collect();
    keys.sort();
    keys.dedup();
    for (ineq, mode) in keys {
        let series: Vec<(f64, f64)> = merged
            .records
            .iter()
            .filter(|r| r.inequality == ineq && r.mode == mode)
            .map(|r| (r.eps, r.left))
            .collect();
        if series.len() >= 3 {
            if let Ok(fit) = fit_rate(&series) {
                let name = match mode {
                    Some(m) => format!("{ineq}[{m}]"),
                    None => ineq.clone(),
                };
                merged.slopes.push((name, fit));
            }
        }
    }
    merged
}

/// H^1-squared norm of a coefficient vector under a pair.
fn h1_sq(pair: &FemPair, u: &[f64]) -> f64 {
    pair.mass.quad(u) + pair.stiffness.quad(u)
}

/// Near-isometry and energy audits of the transfer pair on all eigenpairs
/// below the truncation index, plus the Rayleigh-ratio inequalities with the
/// pinned factor 1 + 3 sqrt(eps).
pub fn audit_transfer(
    surf_pair: &FemPair,
    vol_pair: &FemPair,
    ops: &TransferOps,
    surf_eig: &EigenResult,
    vol_eig: &EigenResult,
    below: usize,
) -> Result<AuditReport> {
    let eps = ops.eps;
    let mut rep = AuditReport {
        mesh: serde_json::json!({
            "eps": eps,
            "surface_dofs": surf_pair.dim(),
            "volume_dofs": vol_pair.dim(),
        }),
        ..Default::default()
    };
    if surf_eig.n_pairs() < below || vol_eig.n_pairs() < below {
        return Err(Error::Size(format!(
            "need {below} pairs on both sides, have {} and {}",
            surf_eig.n_pairs(),
            vol_eig.n_pairs()
        )));
    }
    // Truncation level in a spectral gap: warn when the cap splits a cluster.
    for (name, eig) in [("volume", vol_eig), ("surface", surf_eig)] {
        if below < eig.n_pairs() {
            let a = eig.values[below - 1];
            let b = eig.values[below];
            if (b - a).abs() <= 1e-6 * b.abs().max(1.0) {
                log::warn!("truncation level splits a {name} eigenvalue cluster at {a}");
            }
        }
    }
    let rayleigh_factor = 1.0 + 3.0 * eps.sqrt();

    for i in 0..below {
        // Averaging side: u lives on the fattened domain.
        let u = vol_eig.vector(i);
        let lam = vol_eig.values[i];
        let ju = ops.to_surface.apply(&u);
        let u_l2 = vol_pair.mass.quad(&u);
        let ju_l2 = surf_pair.mass.quad(&ju);
        let u_h1 = h1_sq(vol_pair, &u);
        let iso = (u_l2 - ju_l2).abs() / u_h1;
        rep.push(
            "j_isometry_defect",
            Some(i),
            eps,
            iso,
            1.0,
            iso.is_finite(),
            format!("| |u|^2 - |Ju|^2 | / |u|^2_H1 at lambda = {lam:.6}"),
        );
        let q_ju = surf_pair.stiffness.quad(&ju);
        let q_u = vol_pair.stiffness.quad(&u);
        let energy_defect = if q_u > 1e-12 { (q_ju - q_u).max(0.0) / q_u } else { (q_ju - q_u).max(0.0) };
        rep.push(
            "j_energy_defect",
            Some(i),
            eps,
            energy_defect,
            1.0,
            energy_defect.is_finite(),
            "positive part of (Q(Ju) - Q_eps(u)) / Q_eps(u)".into(),
        );
        let lhs = if ju_l2 > 0.0 { q_ju / ju_l2 } else { 0.0 };
        let rhs = rayleigh_factor * if u_l2 > 0.0 { q_u / u_l2 } else { 0.0 };
        rep.push(
            "rayleigh_ratio_averaging",
            Some(i),
            eps,
            lhs,
            rhs,
            lhs <= rhs + 1e-9,
            "Q(Ju)/|Ju|^2 <= (1 + 3 sqrt(eps)) Q_eps(u)/|u|^2".into(),
        );

        // Extension side: v lives on the surface.
        let v = surf_eig.vector(i);
        let lam_s = surf_eig.values[i];
        let kv = ops.to_volume.apply(&v);
        let v_l2 = surf_pair.mass.quad(&v);
        let kv_l2 = vol_pair.mass.quad(&kv);
        let v_h1 = h1_sq(surf_pair, &v);
        let iso = (v_l2 - kv_l2).abs() / v_h1;
        rep.push(
            "k_isometry_defect",
            Some(i),
            eps,
            iso,
            1.0,
            iso.is_finite(),
            format!("| |v|^2 - |Kv|^2 | / |v|^2_G1 at lambda = {lam_s:.6}"),
        );
        let q_kv = vol_pair.stiffness.quad(&kv);
        let q_v = surf_pair.stiffness.quad(&v);
        let energy_defect = if q_v > 1e-12 { (q_kv - q_v).max(0.0) / q_v } else { (q_kv - q_v).max(0.0) };
        rep.push(
            "k_energy_defect",
            Some(i),
            eps,
            energy_defect,
            1.0,
            energy_defect.is_finite(),
            "positive part of (Q_eps(Kv) - Q(v)) / Q(v)".into(),
        );
        let lhs = if kv_l2 > 0.0 { q_kv / kv_l2 } else { 0.0 };
        let rhs = rayleigh_factor * if v_l2 > 0.0 { q_v / v_l2 } else { 0.0 };
        rep.push(
            "rayleigh_ratio_extension",
            Some(i),
            eps,
            lhs,
            rhs,
            lhs <= rhs + 1e-9,
            "Q_eps(Kv)/|Kv|^2 <= (1 + 3 sqrt(eps)) Q(v)/|v|^2".into(),
        );

        // Round trip: J K v - v vanishes on constants, O(sqrt(eps)) below the cap.
        let jkv = ops.to_surface.apply(&kv);
        let diff: Vec<f64> = jkv.iter().zip(&v).map(|(a, b)| a - b).collect();
        let rel = (surf_pair.mass.quad(&diff) / v_l2).sqrt();
        rep.push(
            "round_trip_defect",
            Some(i),
            eps,
            rel,
            eps.sqrt(),
            rel.is_finite(),
            "|JKv - v| / |v| in L2(M)".into(),
        );
    }
    Ok(rep)
}

/// Fiber Poincare audit on the fattened pages plus the cross-section
/// analogue on the fattened bindings.
pub fn audit_poincare(
    vmesh: &VolumeMesh,
    vol_pair: &FemPair,
    ops: &TransferOps,
    eig: Option<&EigenResult>,
    n_random: usize,
    seed: u64,
) -> Result<AuditReport> {
    use rand::{Rng, SeedableRng};
    let eps = vmesh.eps;
    let n = vol_pair.dim();
    let page_pair = assemble_volume_region(vmesh, VolumeRestriction::Pages)?;
    let h_max = max_edge(vmesh);
    let factor = 1.0 + 10.0 * eps + h_max * h_max;
    let bound = 4.0 * eps * eps / (std::f64::consts::PI * std::f64::consts::PI);
    let mut rep = AuditReport {
        mesh: serde_json::json!({"eps": eps, "layers": vmesh.layers, "h_max": h_max}),
        ..Default::default()
    };

    // Extend a surface vector fiber-constantly over the page columns.
    let extend = |surf_vals: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; n];
        for c in &vmesh.fiber_columns {
            for &v in &c.vol_nodes {
                out[v] = surf_vals[c.surf_node];
            }
        }
        out
    };
    let check = |rep: &mut AuditReport, u: &[f64], label: &str, mode: Option<usize>| {
        let nu = ops.fiber_average.apply(u);
        let ext = extend(&nu);
        let diff: Vec<f64> = u.iter().zip(&ext).map(|(a, b)| a - b).collect();
        // Restrict the difference to page columns; elsewhere the page mass
        // ignores it anyway.
        let lhs = page_pair.mass.quad(&diff);
        let grad = page_pair.stiffness.quad(u);
        let rhs = bound * factor * grad;
        rep.push(
            "fiber_poincare",
            mode,
            eps,
            lhs,
            rhs,
            lhs <= rhs + 1e-14,
            format!("{label}: |u - Nu|^2_pages <= (4 eps^2/pi^2)(1 + 10 eps + h^2) |grad u|^2"),
        );
    };

    // Fiber-constant fields sit in the kernel.
    let mut flat = vec![0.0; n];
    for (i, c) in vmesh.fiber_columns.iter().enumerate() {
        for &v in &c.vol_nodes {
            flat[v] = (i % 7) as f64 - 3.0;
        }
    }
    {
        let nu = ops.fiber_average.apply(&flat);
        let ext = extend(&nu);
        let diff: Vec<f64> = flat.iter().zip(&ext).map(|(a, b)| a - b).collect();
        let lhs = page_pair.mass.quad(&diff);
        rep.push(
            "fiber_poincare_kernel",
            None,
            eps,
            lhs,
            1e-20,
            lhs <= 1e-18,
            "fiber-constant field has zero defect".into(),
        );
    }

    // Extremal transverse mode sin(pi z / 2 eps) attains the constant.
    {
        let mut u = vec![0.0; n];
        let l = vmesh.layers;
        for c in &vmesh.fiber_columns {
            for (j, &v) in c.vol_nodes.iter().enumerate() {
                let z = -eps + 2.0 * eps * j as f64 / l as f64;
                u[v] = (std::f64::consts::PI * z / (2.0 * eps)).sin();
            }
        }
        let lhs = page_pair.mass.quad(&u); // Nu = 0 by odd symmetry
        let grad = page_pair.stiffness.quad(&u);
        let ratio = lhs / grad;
        rep.push(
            "fiber_poincare_extremal",
            None,
            eps,
            ratio,
            bound,
            (ratio / bound - 1.0).abs() <= 0.02,
            "transverse half-wave attains 4 eps^2 / pi^2 within 2%".into(),
        );
        check(&mut rep, &u, "extremal", None);
    }

    // Eigenfunctions and random fields never violate the bound.
    if let Some(eig) = eig {
        for i in 0..eig.n_pairs() {
            check(&mut rep, &eig.vector(i), "eigenfunction", Some(i));
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n_random {
        let u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        check(&mut rep, &u, "random", None);
    }

    // Cross-section average: |u - Pu|^2 on each fattened binding is O(eps^2)
    // of the energy there; report the measured constant.
    for bd in &vmesh.bindings {
        let m = bd.binding;
        let bind_pair = assemble_volume_region(vmesh, VolumeRestriction::Region(RegionTag::Binding(m)))?;
        let pu = ops.cross_section_average.apply(&flat_test_field(vmesh, seed));
        let _ = pu;
        let mut worst: f64 = 0.0;
        let fields: Vec<Vec<f64>> = (0..4)
            .map(|k| {
                (0..n)
                    .map(|i| {
                        let p = vmesh.nodes[i];
                        match k {
                            0 => p.x + 0.3 * p.y,
                            1 => p.z * p.z,
                            2 => (2.0 * p.x).sin() + p.z,
                            _ => p.norm(),
                        }
                    })
                    .collect()
            })
            .collect();
        for u in &fields {
            let pu = ops.cross_section_average.apply(u);
            // Station-constant extension over the binding solid.
            let mut ext = u.clone();
            for (si, st) in bd.stations.iter().enumerate() {
                let center = vmesh.surface.binding_nodes[m]
                    [si.min(vmesh.surface.binding_nodes[m].len() - 1)];
                for &vid in &st.vol_ids {
                    ext[vid] = pu[center];
                }
            }
            let diff: Vec<f64> = u.iter().zip(&ext).map(|(a, b)| a - b).collect();
            let lhs = bind_pair.mass.quad(&diff);
            let grad = bind_pair.stiffness.quad(u).max(1e-300);
            worst = worst.max(lhs / (eps * eps * grad));
        }
        rep.push(
            "cross_section_poincare_constant",
            None,
            eps,
            worst,
            10.0,
            worst.is_finite(),
            format!("measured |u - Pu|^2 / (eps^2 |grad u|^2) on fattened binding {m}"),
        );
    }
    Ok(rep)
}

fn flat_test_field(vmesh: &VolumeMesh, _seed: u64) -> Vec<f64> {
    (0..vmesh.n_nodes()).map(|i| vmesh.nodes[i].x).collect()
}

fn max_edge(vmesh: &VolumeMesh) -> f64 {
    let mut h: f64 = 0.0;
    for t in &vmesh.tets {
        for a in 0..4 {
            for b in (a + 1)..4 {
                h = h.max((vmesh.nodes[t.v[a]] - vmesh.nodes[t.v[b]]).norm());
            }
        }
    }
    h
}

/// Mass (and H^1 mass) of eigenfunctions on the fattened bindings, relative
/// to their full H^1 norm: the smallness that drives the convergence proof.
pub fn audit_binding_smallness(
    vmesh: &VolumeMesh,
    vol_pair: &FemPair,
    eig: &EigenResult,
    below: usize,
) -> Result<AuditReport> {
    let eps = vmesh.eps;
    let bind_pair = assemble_volume_region(vmesh, VolumeRestriction::Bindings)?;
    let mut rep = AuditReport {
        mesh: serde_json::json!({"eps": eps, "volume_dofs": vol_pair.dim()}),
        ..Default::default()
    };
    for i in 0..below.min(eig.n_pairs()) {
        let u = eig.vector(i);
        let h1 = h1_sq(vol_pair, &u);
        let l2_e = bind_pair.mass.quad(&u);
        let h1_e = l2_e + bind_pair.stiffness.quad(&u);
        rep.push(
            "binding_l2_smallness",
            Some(i),
            eps,
            l2_e / h1,
            1.0,
            (l2_e / h1).is_finite(),
            "|u|^2_L2(fattened bindings) / |u|^2_H1".into(),
        );
        rep.push(
            "binding_h1_smallness",
            Some(i),
            eps,
            h1_e / h1,
            1.0,
            (h1_e / h1).is_finite(),
            "|u|^2_H1(fattened bindings) / |u|^2_H1".into(),
        );
    }
    Ok(rep)
}

/// Offset-metric perturbation audit on a catalog chart: compares the product
/// metric with (a) the two-term offset matrix (first form minus z times the
/// second form) and (b) the exact induced metric of the offset embedding
/// X + z N, reporting Frobenius norms of the relative perturbation for both.
pub fn audit_metric(chart: &ParamChart, eps: f64) -> Result<AuditReport> {
    let mut rep = AuditReport {
        mesh: serde_json::json!({"eps": eps, "chart": chart.tag}),
        ..Default::default()
    };
    let mut worst_two_term: f64 = 0.0;
    let mut worst_exact: f64 = 0.0;
    let mut flat_dir_max: f64 = 0.0;
    let grid = 9;
    for i in 0..grid {
        for j in 0..grid {
            let y = chart.interior_sample(i, j, grid);
            let forms = chart.fundamental_forms(y)?;
            let (ee, ff, gg) = forms.first;
            let (se, sf, sg) = forms.second;
            let g0 = nalgebra::Matrix2::new(ee, ff, ff, gg);
            // Derivative of the unit normal through the shape operator.
            let shape = g0.try_inverse().unwrap() * nalgebra::Matrix2::new(se, sf, sf, sg);
            let (_, jac, _) = chart.eval_unchecked(y);
            let n1 = -(jac[0] * shape[(0, 0)] + jac[1] * shape[(1, 0)]);
            let n2 = -(jac[0] * shape[(0, 1)] + jac[1] * shape[(1, 1)]);
            for q in [-1.0f64, -0.5, 0.5, 1.0] {
                let z = q * eps;
                let g_two = nalgebra::Matrix2::new(
                    ee - z * se,
                    ff - z * sf,
                    ff - z * sf,
                    gg - z * sg,
                );
                let xu = jac[0] + n1 * z;
                let xv = jac[1] + n2 * z;
                let g_exact = nalgebra::Matrix2::new(
                    xu.dot(&xu),
                    xu.dot(&xv),
                    xu.dot(&xv),
                    xv.dot(&xv),
                );
                let b_two = (g_two - g0)
                    * g_two.try_inverse().ok_or_else(|| {
                        Error::Geometry("two-term offset metric not invertible".into())
                    })?;
                let b_exact = (g_exact - g0)
                    * g_exact.try_inverse().ok_or_else(|| {
                        Error::Geometry("offset metric not invertible".into())
                    })?;
                worst_two_term = worst_two_term.max(b_two.norm());
                worst_exact = worst_exact.max(b_exact.norm());
                flat_dir_max = flat_dir_max
                    .max(b_two[(0, 1)].abs())
                    .max(b_two[(1, 0)].abs())
                    .max(b_two[(1, 1)].abs());
            }
        }
    }
    rep.push(
        "metric_offset_two_term",
        None,
        eps,
        worst_two_term,
        1.0,
        worst_two_term.is_finite(),
        "Frobenius norm of B with the two-term offset matrix".into(),
    );
    rep.push(
        "metric_offset_exact",
        None,
        eps,
        worst_exact,
        1.0,
        worst_exact.is_finite(),
        "Frobenius norm of B with the exact offset embedding metric".into(),
    );
    rep.push(
        "metric_offset_offdiagonal",
        None,
        eps,
        flat_dir_max,
        1.0,
        flat_dir_max.is_finite(),
        "largest perturbation entry outside the leading curved direction".into(),
    );
    Ok(rep)
}
