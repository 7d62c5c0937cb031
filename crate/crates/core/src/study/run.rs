//! The eps-sweep experiment: mesh-converged fattened spectra against the
//! mesh-converged limit spectrum, index-wise gap tables, rate fits, and
//! attached inequality audits.

use serde::Serialize;

use super::{fit_rate, richardson, RateFit, StudyPlan};
use crate::eigen::{solve_lowest, EigenResult, SolverOpts};
use crate::fem::{assemble_surface, assemble_volume};
use crate::geometry::{BindingKind, ChartKind};
use crate::mesh::{assemble_volume_mesh_on, triangulate_pages, SurfaceMeshOptions};
use crate::oracle::OracleSpectrum;
use crate::transfer::{
    audit_binding_smallness, audit_metric, audit_poincare, audit_transfer, build_transfer,
    merge_sweep, AuditReport,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct LadderValues {
    pub h: Vec<f64>,
    /// Eigenvalues per rung, coarse to fine.
    pub values: Vec<Vec<f64>>,
    /// Richardson-extrapolated values from the two finest rungs.
    pub extrapolated: Vec<f64>,
    /// Per-index error estimates (absolute).
    pub mesh_error: Vec<f64>,
    /// All rungs nested (refinement reduced every eigenvalue)?
    pub nested: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GapRow {
    pub n: usize,
    pub eps: f64,
    pub lambda_limit: f64,
    pub lambda_eps: f64,
    pub gap: f64,
    pub rel_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StudyReport {
    pub n_eigs: usize,
    pub eps: Vec<f64>,
    pub limit: LadderValues,
    pub limit_oracle: Option<Vec<f64>>,
    pub fattened: Vec<(f64, LadderValues)>,
    pub gaps: Vec<GapRow>,
    /// Index-wise: are the gaps non-increasing along the sweep?
    pub monotone: Vec<bool>,
    pub slopes: Vec<(usize, RateFit)>,
    pub audits: serde_json::Value,
    /// Mesh error subdominant to the eps-effect at the largest eps.
    pub valid: bool,
    /// All eigensolves converged.
    pub complete: bool,
    /// Truncation guard: largest limit eigenvalue times eps_max below 1/2.
    pub truncation_guard_ok: bool,
    pub seed: u64,
    pub created_unix: u64,
}

impl StudyReport {
    /// Gap table CSV with the frozen schema.
    pub fn gaps_csv(&self) -> String {
        let mut s = String::from("# schema: openbook-gaps v1\nn,eps,lambda_limit,lambda_eps,gap\n");
        for g in &self.gaps {
            s.push_str(&format!(
                "{},{:.6e},{:.16e},{:.16e},{:.6e}\n",
                g.n, g.eps, g.lambda_limit, g.lambda_eps, g.gap
            ));
        }
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("report serializes")
    }
}

fn solve_ladder<F>(mut build: F, hs: &[f64], n_eigs: usize, seed: u64) -> Result<LadderValues>
where
    F: FnMut(f64) -> Result<crate::fem::FemPair>,
{
    let mut values = Vec::new();
    for &h in hs {
        let pair = build(h)?;
        let opts = SolverOpts {
            n_eigs,
            tol: 1e-7,
            max_iter: 2500,
            seed,
            ..Default::default()
        };
        let r = solve_lowest(&pair, &opts)?;
        if !r.converged {
            return Err(Error::NonConverged(format!(
                "eigensolve at h = {h} stopped after {} iterations",
                r.iterations
            )));
        }
        values.push(r.values);
    }
    let k = values.len();
    let (extrapolated, mesh_error, nested) = if k >= 2 {
        let coarse = &values[k - 2];
        let fine = &values[k - 1];
        let mut ex = Vec::new();
        let mut er = Vec::new();
        let mut nested = true;
        for i in 0..n_eigs {
            let (v, e, ok) = richardson(coarse[i], fine[i]);
            ex.push(v);
            er.push(e);
            nested &= ok;
        }
        (ex, er, nested)
    } else {
        (values[0].clone(), vec![f64::INFINITY; n_eigs], true)
    };
    Ok(LadderValues { h: hs.to_vec(), values, extrapolated, mesh_error, nested })
}

/// Semi-analytic limit oracle for recognizable fixtures: axisymmetric books
/// or flat test-mode books.
pub fn oracle_for_spec(
    spec: &crate::geometry::OpenBookSpec,
    count: usize,
) -> Option<OracleSpectrum> {
    if let Ok(s) = crate::oracle::axisym_spectrum(spec, 8, count) {
        return Some(s);
    }
    // Flat book: identical rectangle pages on one segment binding.
    if spec.bindings.len() == 1 && !spec.pages.is_empty() {
        let all_flat = spec.pages.iter().all(|p| matches!(p.kind, ChartKind::FlatRectangle { .. }));
        let seg = matches!(spec.bindings[0].kind, BindingKind::Segment { .. });
        if all_flat && seg {
            let l = spec.bindings[0].length();
            let a = spec.pages[0].transverse_extent(crate::geometry::Side::Y2Min);
            let k = spec.incidence_for(0).map(|i| i.entries.len()).unwrap_or(0);
            if k == spec.pages.len() {
                return crate::oracle::flat_book_spectrum(k, l, a, count).ok();
            }
        }
    }
    None
}

/// Run the full convergence experiment for a plan.
pub fn run_convergence(plan: &StudyPlan) -> Result<StudyReport> {
    plan.validate()?;
    let spec = &plan.spec;
    let report = spec.validate();
    if !report.pass {
        return Err(Error::Validation("study geometry does not validate".into()));
    }
    let eps0 = spec.epsilon0()?.value;
    if plan.eps[0] > eps0 {
        return Err(Error::Fattening(format!(
            "largest eps {} exceeds the feasible eps0 = {eps0}",
            plan.eps[0]
        )));
    }

    let mut ladder = plan.ladder.max(1);
    let mut complete = true;

    // Limit side once per ladder depth; deepen when the mesh error is not
    // subdominant to the measured gap at the largest eps.
    let mut result = None;
    for attempt in 0..3 {
        let hs: Vec<f64> = (0..ladder).map(|r| plan.h / 2f64.powi(r as i32)).collect();
        let limit = solve_ladder(
            |h| {
                let mesh = triangulate_pages(spec, &SurfaceMeshOptions::plain(h))?;
                assemble_surface(&mesh)
            },
            &hs,
            plan.n_eigs,
            plan.seed,
        )?;

        let mut fattened = Vec::new();
        for &eps in &plan.eps {
            let lv = solve_ladder(
                |h| {
                    let layers = plan.layers_for(eps, h);
                    let smesh = triangulate_pages(spec, &SurfaceMeshOptions::for_eps(h, eps))?;
                    let vmesh = assemble_volume_mesh_on(&smesh, eps, layers)?;
                    assemble_volume(&vmesh)
                },
                &hs,
                plan.n_eigs,
                plan.seed,
            );
            match lv {
                Ok(lv) => fattened.push((eps, lv)),
                Err(Error::NonConverged(msg)) => {
                    log::warn!("eps = {eps}: {msg}; study flagged incomplete");
                    complete = false;
                }
                Err(e) => return Err(e),
            }
        }

        // Gap table on mesh-converged values.
        let mut gaps = Vec::new();
        for (eps, lv) in &fattened {
            for n in 0..plan.n_eigs {
                let a = limit.extrapolated[n];
                let b = lv.extrapolated[n];
                gaps.push(GapRow {
                    n,
                    eps: *eps,
                    lambda_limit: a,
                    lambda_eps: b,
                    gap: (a - b).abs(),
                    rel_gap: (a - b).abs() / a.abs().max(1e-12),
                });
            }
        }

        // Validity: at the largest eps the mesh error must stay below 20% of
        // the measured gap for the nonzero modes.
        let mut valid = true;
        if let Some((eps_max, lv)) = fattened.first() {
            for n in 1..plan.n_eigs {
                let gap = gaps
                    .iter()
                    .find(|g| g.n == n && g.eps == *eps_max)
                    .map(|g| g.gap)
                    .unwrap_or(0.0);
                let err = lv.mesh_error[n].max(limit.mesh_error[n]);
                if err >= 0.2 * gap && gap > 0.0 {
                    valid = false;
                }
            }
        }
        if !valid && attempt < 2 && ladder < 4 {
            ladder += 1;
            log::info!("mesh error not subdominant; deepening the ladder to {ladder}");
            continue;
        }

        result = Some((limit, fattened, gaps, valid));
        break;
    }
    let (limit, fattened, gaps, valid) = result.expect("ladder loop always yields");

    // Index-wise monotone decrease along the descending eps sweep.
    let mut monotone = Vec::new();
    for n in 0..plan.n_eigs {
        let series: Vec<f64> = plan
            .eps
            .iter()
            .filter_map(|e| gaps.iter().find(|g| g.n == n && g.eps == *e).map(|g| g.gap))
            .collect();
        monotone.push(series.windows(2).all(|w| w[1] <= w[0] + 1e-9));
    }

    // Slopes per index (skip the flat index 0 and series with too few points).
    let mut slopes = Vec::new();
    for n in 0..plan.n_eigs {
        let series: Vec<(f64, f64)> = plan
            .eps
            .iter()
            .filter_map(|e| {
                gaps.iter().find(|g| g.n == n && g.eps == *e).map(|g| (*e, g.gap))
            })
            .collect();
        if let Ok(fit) = fit_rate(&series) {
            slopes.push((n, fit));
        }
    }

    let limit_oracle = oracle_for_spec(spec, plan.n_eigs).map(|s| s.values);

    // Truncation guard.
    let lambda_top = *limit.extrapolated.last().unwrap_or(&0.0);
    let truncation_guard_ok = lambda_top * plan.eps[0] < 0.5;

    // Attached audits at each eps on the finest-rung meshes.
    let audits = run_audits(plan, &fattened)?;

    Ok(StudyReport {
        n_eigs: plan.n_eigs,
        eps: plan.eps.clone(),
        limit,
        limit_oracle,
        fattened,
        gaps,
        monotone,
        slopes,
        audits,
        valid,
        complete,
        truncation_guard_ok,
        seed: plan.seed,
        created_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    })
}

fn run_audits(plan: &StudyPlan, fattened: &[(f64, LadderValues)]) -> Result<serde_json::Value> {
    if plan.audits.is_empty() || fattened.is_empty() {
        return Ok(serde_json::json!({}));
    }
    let spec = &plan.spec;
    let h = plan.h;
    let mut per_kind: std::collections::HashMap<String, Vec<AuditReport>> = Default::default();
    for &(eps, _) in fattened {
        if plan.audits.iter().any(|a| a == "metric") {
            for chart in &spec.pages {
                if !matches!(chart.kind, ChartKind::FlatRectangle { .. }) {
                    per_kind
                        .entry(format!("metric:{}", chart.tag))
                        .or_default()
                        .push(audit_metric(chart, eps)?);
                }
            }
        }
        let needs_mesh = plan.audits.iter().any(|a| a == "transfer" || a == "poincare" || a == "binding");
        if !needs_mesh || spec.bindings.is_empty() {
            continue;
        }
        let layers = plan.layers_for(eps, h);
        let smesh = triangulate_pages(spec, &SurfaceMeshOptions::for_eps(h, eps))?;
        let vmesh = assemble_volume_mesh_on(&smesh, eps, layers)?;
        let vol_pair = assemble_volume(&vmesh)?;
        let surf_pair = assemble_surface(&vmesh.surface)?;
        let n_pairs = plan.n_eigs.max(6);
        let opts = SolverOpts { n_eigs: n_pairs, tol: 1e-7, max_iter: 2500, seed: plan.seed, ..Default::default() };
        let vol_eig = solve_lowest(&vol_pair, &opts)?;
        let surf_eig = solve_lowest(&surf_pair, &opts)?;
        let ops = build_transfer(&vmesh, None)?;
        for audit in &plan.audits {
            let rep = match audit.as_str() {
                "transfer" => {
                    audit_transfer(&surf_pair, &vol_pair, &ops, &surf_eig, &vol_eig, n_pairs)?
                }
                "poincare" => audit_poincare(&vmesh, &vol_pair, &ops, Some(&vol_eig), 20, plan.seed)?,
                "binding" => audit_binding_smallness(&vmesh, &vol_pair, &vol_eig, n_pairs)?,
                "metric" => continue,
                other => return Err(Error::Config(format!("unknown audit `{other}`"))),
            };
            per_kind.entry(audit.clone()).or_default().push(rep);
        }
    }
    let mut out = serde_json::Map::new();
    for (k, reports) in per_kind {
        out.insert(k, merge_sweep(&reports).to_json());
    }
    Ok(serde_json::Value::Object(out))
}

/// Eigensolve helper shared by the CLI subcommands.
pub fn limit_spectrum(
    spec: &crate::geometry::OpenBookSpec,
    h: f64,
    n_eigs: usize,
    seed: u64,
) -> Result<EigenResult> {
    let mesh = triangulate_pages(spec, &SurfaceMeshOptions::plain(h))?;
    let pair = assemble_surface(&mesh)?;
    solve_lowest(&pair, &SolverOpts { n_eigs, tol: 1e-8, max_iter: 2500, seed, ..Default::default() })
}

/// Fattened spectrum helper shared by the CLI subcommands.
pub fn fattened_spectrum(
    spec: &crate::geometry::OpenBookSpec,
    eps: f64,
    h: f64,
    layers: usize,
    n_eigs: usize,
    seed: u64,
) -> Result<EigenResult> {
    let opts = if spec.bindings.is_empty() {
        SurfaceMeshOptions::plain(h)
    } else {
        SurfaceMeshOptions::for_eps(h, eps)
    };
    let smesh = triangulate_pages(spec, &opts)?;
    let vmesh = assemble_volume_mesh_on(&smesh, eps, layers)?;
    let pair = assemble_volume(&vmesh)?;
    solve_lowest(&pair, &SolverOpts { n_eigs, tol: 1e-7, max_iter: 2500, seed, ..Default::default() })
}
