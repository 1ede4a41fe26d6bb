//! Report documents and their three renderings (JSON, CSV, human).
//!
//! JSON floats are printed with 17 significant digits so every double
//! round-trips exactly; rendering is deterministic, and the timestamp is the
//! only field that varies between reruns (suppressed by --deterministic).

use std::collections::BTreeMap;
use std::io::{self, Write};

use confsimplex::analysis::{HessianReport, PathStep, SolveResult, SweepReport};
use confsimplex::hyperbolic::HyperbolicVolume;
use confsimplex::pairs::EDGE_LABELS;
use confsimplex::{DihedralAngles, EdgeLengths, Geometry, Radii, SolidAngles, SymMatrix4, SymMatrix6};
use serde::Serialize;

/// serde_json formatter printing every f64 with 17 significant digits.
struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter);
    value.serialize(&mut ser).expect("reports serialize");
    String::from_utf8(out).expect("json is utf8")
}

fn f(value: f64) -> String {
    format!("{value:.16e}")
}

#[derive(Serialize)]
pub struct InputEcho {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radii: Option<Radii>,
    pub lengths: EdgeLengths,
}

#[derive(Serialize)]
pub struct McVolume {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Serialize)]
pub struct ComputeReport {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<f64>,
    pub geometry: Geometry,
    pub input: InputEcho,
    pub tolerances: BTreeMap<&'static str, f64>,
    pub cayley_menger_det: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub volume_euclidean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub volume_hyperbolic: Option<HyperbolicVolume>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub volume_monte_carlo: Option<McVolume>,
    pub angles: DihedralAngles,
    pub solid_angles: SolidAngles,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_value: Option<f64>,
    pub r_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grad_s: Option<SolidAngles>,
    pub grad_r: DihedralAngles,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hessian_s: Option<SymMatrix4>,
    pub hessian_r: SymMatrix6,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hessian_s_report: Option<HessianReport>,
    pub hessian_r_report: HessianReport,
}

#[derive(Serialize)]
pub struct VerifyReport {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    pub tolerances: BTreeMap<&'static str, f64>,
    pub sweeps: Vec<SweepReport>,
    pub passed: bool,
}

#[derive(Serialize)]
pub struct PathReport {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<f64>,
    pub geometry: Geometry,
    pub from: Radii,
    pub to: Radii,
    pub steps: usize,
    pub tolerances: BTreeMap<&'static str, f64>,
    pub rows: Vec<PathStep>,
}

#[derive(Serialize)]
pub struct SolveReport {
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<f64>,
    pub geometry: Geometry,
    pub targets: [f64; 4],
    pub start: Radii,
    pub tolerances: BTreeMap<&'static str, f64>,
    pub result: SolveResult,
    /// Set when the solve ended without convergence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub enum ReportDoc {
    Compute(Box<ComputeReport>),
    Verify(VerifyReport),
    Path(PathReport),
    Solve(SolveReport),
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Human,
}

impl ReportDoc {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => match self {
                ReportDoc::Compute(r) => to_json(r),
                ReportDoc::Verify(r) => to_json(r),
                ReportDoc::Path(r) => to_json(r),
                ReportDoc::Solve(r) => to_json(r),
            },
            Format::Csv => match self {
                ReportDoc::Compute(r) => compute_csv(r),
                ReportDoc::Verify(r) => verify_csv(r),
                ReportDoc::Path(r) => path_csv(r),
                ReportDoc::Solve(r) => solve_csv(r),
            },
            Format::Human => match self {
                ReportDoc::Compute(r) => compute_human(r),
                ReportDoc::Verify(r) => verify_human(r),
                ReportDoc::Path(r) => path_human(r),
                ReportDoc::Solve(r) => solve_human(r),
            },
        }
    }
}

const VERTEX_LABELS: [&str; 4] = ["1", "2", "3", "4"];

fn push_row(out: &mut String, quantity: &str, label: &str, value: f64) {
    out.push_str(&format!("{quantity},{label},{}\n", f(value)));
}

fn compute_csv(r: &ComputeReport) -> String {
    let mut out = String::from("quantity,label,value\n");
    push_row(&mut out, "cayley_menger_det", "", r.cayley_menger_det);
    if let Some(v) = r.volume_euclidean {
        push_row(&mut out, "volume_euclidean", "", v);
    }
    if let Some(v) = &r.volume_hyperbolic {
        push_row(&mut out, "volume_hyperbolic", "", v.value);
        push_row(&mut out, "volume_hyperbolic_error", "", v.abs_error_estimate);
    }
    if let Some(v) = &r.volume_monte_carlo {
        push_row(&mut out, "volume_monte_carlo", "", v.value);
        push_row(&mut out, "volume_monte_carlo_error", "", v.abs_error_estimate);
    }
    for (e, &label) in EDGE_LABELS.iter().enumerate() {
        push_row(&mut out, "angle", label, r.angles.get(e));
    }
    for (v, &label) in VERTEX_LABELS.iter().enumerate() {
        push_row(&mut out, "solid_angle", label, r.solid_angles.get(v));
    }
    if let Some(s) = r.s_value {
        push_row(&mut out, "s", "", s);
    }
    push_row(&mut out, "r", "", r.r_value);
    if let Some(g) = &r.grad_s {
        for (v, &label) in VERTEX_LABELS.iter().enumerate() {
            push_row(&mut out, "grad_s", label, g.get(v));
        }
    }
    for (e, &label) in EDGE_LABELS.iter().enumerate() {
        push_row(&mut out, "grad_r", label, r.grad_r.get(e));
    }
    if let Some(h) = &r.hessian_s {
        for (i, li) in VERTEX_LABELS.iter().enumerate() {
            for (j, lj) in VERTEX_LABELS.iter().enumerate() {
                push_row(&mut out, "hessian_s", &format!("{li}{lj}"), h.get(i, j));
            }
        }
    }
    for (i, li) in EDGE_LABELS.iter().enumerate() {
        for (j, lj) in EDGE_LABELS.iter().enumerate() {
            push_row(&mut out, "hessian_r", &format!("{li}:{lj}"), r.hessian_r.get(i, j));
        }
    }
    if let Some(rep) = &r.hessian_s_report {
        for (k, ev) in rep.eigenvalues.iter().enumerate() {
            push_row(&mut out, "eigenvalue_s", &(k + 1).to_string(), *ev);
        }
        push_row(&mut out, "rank_s", "", rep.rank as f64);
    }
    for (k, ev) in r.hessian_r_report.eigenvalues.iter().enumerate() {
        push_row(&mut out, "eigenvalue_r", &(k + 1).to_string(), *ev);
    }
    push_row(&mut out, "rank_r", "", r.hessian_r_report.rank as f64);
    out
}

fn verify_csv(r: &VerifyReport) -> String {
    let mut out =
        String::from("geometry,index,probe,r1,r2,r3,r4,eig1,eig2,eig3,eig4,rank,kernel_angle,pass\n");
    for sweep in &r.sweeps {
        for rec in &sweep.records {
            let eig: Vec<String> = (0..4)
                .map(|k| rec.eigenvalues.get(k).map(|&v| f(v)).unwrap_or_default())
                .collect();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                sweep.geometry,
                rec.index,
                rec.probe,
                f(rec.radii[0]),
                f(rec.radii[1]),
                f(rec.radii[2]),
                f(rec.radii[3]),
                eig[0],
                eig[1],
                eig[2],
                eig[3],
                rec.rank,
                rec.kernel_angle.map(f).unwrap_or_default(),
                rec.pass,
            ));
        }
    }
    out
}

fn path_csv(r: &PathReport) -> String {
    let mut out = String::from("t,rank,eig1,eig2,eig3,eig4\n");
    for row in &r.rows {
        let eig: Vec<String> = (0..4)
            .map(|k| row.eigenvalues.get(k).map(|&v| f(v)).unwrap_or_default())
            .collect();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            f(row.t),
            row.rank,
            eig[0],
            eig[1],
            eig[2],
            eig[3]
        ));
    }
    out
}

fn solve_csv(r: &SolveReport) -> String {
    let mut out = String::from("iteration,r1,r2,r3,r4,residual_norm\n");
    match &r.result.path {
        Some(path) => {
            for (k, it) in path.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    k,
                    f(it.radii[0]),
                    f(it.radii[1]),
                    f(it.radii[2]),
                    f(it.radii[3]),
                    f(it.residual_norm)
                ));
            }
        }
        None => {
            let radii = r.result.radii.as_array();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.result.iterations,
                f(radii[0]),
                f(radii[1]),
                f(radii[2]),
                f(radii[3]),
                f(r.result.residual_norm)
            ));
        }
    }
    out
}

fn hessian_report_human(name: &str, rep: &HessianReport, out: &mut String) {
    out.push_str(&format!(
        "{name}: rank {} ({:?}), eigenvalues {:?}\n",
        rep.rank, rep.classification, rep.eigenvalues
    ));
    if let Some(angle) = rep.reference_angle {
        out.push_str(&format!("  kernel angle to reference: {angle:.3e} rad\n"));
    }
}

fn compute_human(r: &ComputeReport) -> String {
    let mut out = format!("geometry: {}\n", r.geometry);
    if let Some(radii) = &r.input.radii {
        out.push_str(&format!("radii: {:?}\n", radii.as_array()));
    }
    out.push_str(&format!("lengths: {:?}\n", r.input.lengths.as_array()));
    out.push_str(&format!("cayley_menger_det: {:.12e}\n", r.cayley_menger_det));
    if let Some(v) = r.volume_euclidean {
        out.push_str(&format!("volume: {v:.12}\n"));
    }
    if let Some(v) = &r.volume_hyperbolic {
        out.push_str(&format!(
            "volume: {:.12} (quadrature error estimate {:.2e})\n",
            v.value, v.abs_error_estimate
        ));
    }
    if let Some(v) = &r.volume_monte_carlo {
        out.push_str(&format!(
            "volume (Monte Carlo, {} samples): {:.8} +- {:.2e}\n",
            v.samples, v.value, v.abs_error_estimate
        ));
    }
    out.push_str(&format!("dihedral angles: {:?}\n", r.angles.as_array()));
    out.push_str(&format!("solid angles: {:?}\n", r.solid_angles.as_array()));
    if let Some(s) = r.s_value {
        out.push_str(&format!("S = {s:.15}\n"));
    }
    out.push_str(&format!("R = {:.15}\n", r.r_value));
    if let Some(rep) = &r.hessian_s_report {
        hessian_report_human("H(S)", rep, &mut out);
    }
    hessian_report_human("H(R)", &r.hessian_r_report, &mut out);
    out
}

fn verify_human(r: &VerifyReport) -> String {
    let mut out = String::new();
    for sweep in &r.sweeps {
        out.push_str(&format!(
            "{}: {} simplices checked ({} draws rejected as unrealizable), {} failures, worst margin {:.3e}\n",
            sweep.geometry,
            sweep.samples,
            sweep.rejected,
            sweep.failures.len(),
            sweep.worst_margin
        ));
        for fail in &sweep.failures {
            out.push_str(&format!("  FAIL sample {} radii {:?}", fail.index, fail.radii));
            if let Some(e) = &fail.error {
                out.push_str(&format!(" error: {e}"));
            }
            if let Some(rep) = &fail.report {
                out.push_str(&format!(" eigenvalues {:?}", rep.eigenvalues));
            }
            out.push('\n');
        }
    }
    out.push_str(if r.passed { "verdict: PASS\n" } else { "verdict: FAIL\n" });
    out
}

fn path_human(r: &PathReport) -> String {
    let mut out = format!(
        "rank of H(S) along {:?} -> {:?} ({}):\n",
        r.from.as_array(),
        r.to.as_array(),
        r.geometry
    );
    for row in &r.rows {
        out.push_str(&format!(
            "  t = {:.4}  rank {}  eigenvalues {:?}\n",
            row.t, row.rank, row.eigenvalues
        ));
    }
    let ranks: Vec<usize> = r.rows.iter().map(|s| s.rank).collect();
    let constant = ranks.windows(2).all(|w| w[0] == w[1]);
    out.push_str(&format!(
        "rank constant: {}\n",
        if constant { "yes" } else { "NO" }
    ));
    out
}

fn solve_human(r: &SolveReport) -> String {
    let mut out = format!(
        "prescribed solid angles {:?} ({}), start {:?}\n",
        r.targets,
        r.geometry,
        r.start.as_array()
    );
    out.push_str(&format!(
        "converged: {} after {} iterations, residual {:.3e}\n",
        r.result.converged, r.result.iterations, r.result.residual_norm
    ));
    out.push_str(&format!("radii: {:?}\n", r.result.radii.as_array()));
    if let Some(path) = &r.result.path {
        for (k, it) in path.iter().enumerate() {
            out.push_str(&format!(
                "  iter {k}: {:?} residual {:.3e}\n",
                it.radii, it.residual_norm
            ));
        }
    }
    if let Some(e) = &r.error {
        out.push_str(&format!("error: {e}\n"));
    }
    out
}
