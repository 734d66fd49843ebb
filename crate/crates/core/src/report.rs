//! Deterministic reports: dimension grids as aligned markdown and JSON.
//! Reports carry dimensions and verdicts; matrices appear only on request.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::complexes::FilteredComplex;
use crate::exactlin::format_scalar;
use crate::fibration::{FibrationData, FibrationError, LerayAnalysis};
use crate::specseq::{self, SpectralRun};

/// A rectangular table of cell dimensions, `p` across and `q` up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimGrid {
    max_p: usize,
    max_q: usize,
    cells: BTreeMap<(usize, usize), usize>,
}

impl DimGrid {
    pub fn from_map(cells: BTreeMap<(usize, usize), usize>) -> Self {
        let max_p = cells
            .iter()
            .filter(|&(_, &d)| d > 0)
            .map(|(&(p, _), _)| p)
            .max()
            .unwrap_or(0);
        let max_q = cells
            .iter()
            .filter(|&(_, &d)| d > 0)
            .map(|(&(_, q), _)| q)
            .max()
            .unwrap_or(0);
        DimGrid {
            max_p,
            max_q,
            cells,
        }
    }

    pub fn dim(&self, p: usize, q: usize) -> usize {
        self.cells.get(&(p, q)).copied().unwrap_or(0)
    }

    pub fn anti_diagonal_totals(&self) -> Vec<usize> {
        let mut out = vec![0usize; self.max_p + self.max_q + 1];
        for (&(p, q), &d) in &self.cells {
            if d > 0 {
                out[p + q] += d;
            }
        }
        out
    }

    /// Aligned markdown: columns are `p`, rows are `q` from the top down.
    pub fn markdown(&self) -> String {
        let mut width = 1usize;
        for (_, &d) in &self.cells {
            width = width.max(d.to_string().len());
        }
        let pw = (self.max_p.to_string().len()).max(width).max(1);
        let mut out = String::new();
        let _ = write!(out, "| q\\p |");
        for p in 0..=self.max_p {
            let _ = write!(out, " {:>pw$} |", p);
        }
        out.push('\n');
        let _ = write!(out, "|-----|");
        for _ in 0..=self.max_p {
            let _ = write!(out, "{}|", "-".repeat(pw + 2));
        }
        out.push('\n');
        for q in (0..=self.max_q).rev() {
            let _ = write!(out, "| {:>3} |", q);
            for p in 0..=self.max_p {
                let _ = write!(out, " {:>pw$} |", self.dim(p, q));
            }
            out.push('\n');
        }
        out
    }

    /// `grid[q][p]`, `q` ascending.
    pub fn json(&self) -> Value {
        let rows: Vec<Vec<usize>> = (0..=self.max_q)
            .map(|q| (0..=self.max_p).map(|p| self.dim(p, q)).collect())
            .collect();
        json!({ "max_p": self.max_p, "max_q": self.max_q, "rows_by_q": rows })
    }
}

/// Report for a plain engine run on one filtered complex.
pub struct PagesReport {
    pub grids: Vec<(usize, DimGrid)>,
    pub limit: DimGrid,
    pub stable_from: usize,
    pub convergence_ok: bool,
    pub mismatches: Vec<String>,
}

impl PagesReport {
    pub fn from_run(
        src: &FilteredComplex,
        run: &SpectralRun,
        r_max: usize,
    ) -> Result<Self, crate::complexes::ComplexDefect> {
        let mut grids = Vec::new();
        for r in 1..=r_max {
            grids.push((r, DimGrid::from_map(run.page(r).dims())));
        }
        let limit = DimGrid::from_map(run.limit.clone());
        let conv = specseq::convergence_check(src, run)?;
        let mismatches = conv
            .mismatches()
            .into_iter()
            .map(|c| {
                format!(
                    "({},{}): E_inf = {}, graded H = {}",
                    c.p, c.q, c.limit_dim, c.graded_dim
                )
            })
            .collect();
        Ok(PagesReport {
            grids,
            limit,
            stable_from: run.stable_from,
            convergence_ok: conv.ok(),
            mismatches,
        })
    }

    pub fn markdown(&self) -> String {
        let mut out = String::new();
        for (r, grid) in &self.grids {
            let _ = writeln!(out, "## Page E_{r}\n");
            out.push_str(&grid.markdown());
            out.push('\n');
        }
        let _ = writeln!(out, "## Limit page E_inf (stable from r = {})\n", self.stable_from);
        out.push_str(&self.limit.markdown());
        out.push('\n');
        let _ = writeln!(
            out,
            "Convergence (E_inf vs graded cohomology): {}",
            if self.convergence_ok { "PASS" } else { "FAIL" }
        );
        for m in &self.mismatches {
            let _ = writeln!(out, "  mismatch at {m}");
        }
        out
    }

    pub fn json(&self) -> Value {
        json!({
            "pages": self.grids.iter().map(|(r, g)| json!({"r": r, "grid": g.json()})).collect::<Vec<_>>(),
            "limit": self.limit.json(),
            "stable_from": self.stable_from,
            "convergence_ok": self.convergence_ok,
            "mismatches": self.mismatches,
        })
    }
}

/// Everything the fibration pipeline reports.
pub struct LerayReport {
    pub model: String,
    pub window_note: String,
    pub lambda: Option<String>,
    pub axioms_total_ok: bool,
    pub axioms_base_ok: bool,
    pub axiom_failures: Vec<String>,
    pub n_table: Vec<(usize, usize, Option<usize>, usize)>,
    pub fibration_ok: bool,
    pub fiber_b_linear_checked: usize,
    pub hat_ranks: Vec<(usize, Option<usize>, usize)>,
    pub nabla_curvature_zero: Vec<(usize, bool)>,
    pub pages: Vec<(usize, DimGrid)>,
    pub e2_theorem: DimGrid,
    pub second_page_complete: bool,
    pub einf: DimGrid,
    pub einf_totals: Vec<usize>,
    pub sheaf_dims: Vec<usize>,
    pub convergence_ok: bool,
    pub cross_ok: bool,
    pub clipped: usize,
    pub verbose_nabla: Option<Vec<(usize, String)>>,
}

/// Run the full pipeline and assemble the report. Fails with
/// `FibrationError::NotAFibration` (carrying the witness) on non-fibrations.
pub fn build_leray_report(
    fd: &FibrationData,
    r_max: usize,
    lambda: Option<String>,
    verbose: bool,
) -> Result<LerayReport, FibrationError> {
    let analysis = LerayAnalysis::new(fd)?;
    build_leray_report_from(&analysis, r_max, lambda, verbose)
}

/// As [`build_leray_report`], reusing an already-built analysis.
pub fn build_leray_report_from(
    analysis: &LerayAnalysis,
    r_max: usize,
    lambda: Option<String>,
    verbose: bool,
) -> Result<LerayReport, FibrationError> {
    let fd = analysis.data();
    let total_axioms = fd.total().check_axioms();
    let base_axioms = fd.base().check_axioms();
    let mut axiom_failures: Vec<String> = total_axioms
        .failures
        .iter()
        .map(|f| format!("total: {}: {}", f.check, f.witness))
        .collect();
    axiom_failures.extend(
        base_axioms
            .failures
            .iter()
            .map(|f| format!("base: {}: {}", f.check, f.witness)),
    );

    analysis.require_fibration()?;
    let fiber_b_linear_checked = analysis.check_fiber_b_linearity()?;

    let mut n_table = Vec::new();
    for p in 0..=analysis.top_degree() {
        for q in 0..=analysis.top_degree() - p {
            let n = analysis.n_space(p, q).expect("in range");
            n_table.push((p, q, n.uniform_rank(), n.total_dim()));
        }
    }

    let mut hat_ranks = Vec::new();
    for q in 0..=analysis.top_degree() {
        let h = analysis.hat_h(q);
        hat_ranks.push((q, h.free_rank(), h.total_dim()));
    }

    let mut nabla_curvature_zero = Vec::new();
    let mut verbose_nabla = verbose.then(Vec::new);
    for q in 0..=analysis.top_degree() {
        let nq = analysis.nabla_q(q)?;
        analysis.check_nabla_q_leibniz(q, &nq)?;
        let flat = if analysis.hat_h(q).free_certificate.is_some() {
            analysis.nabla_q_curvature(q, &nq)?
        } else {
            true
        };
        nabla_curvature_zero.push((q, flat));
        if let Some(v) = verbose_nabla.as_mut() {
            let mut text = String::new();
            for (oi, orbit) in analysis.hat_h(q).orbits.iter().enumerate() {
                let rep = orbit.representative;
                let m = &nq.per_sector[rep];
                if m.rows() == 0 {
                    continue;
                }
                let _ = write!(
                    text,
                    "orbit {oi} rep {}: ",
                    fd.total().sectors().display(rep)
                );
                for r in 0..m.rows() {
                    let row: Vec<String> = m.row(r).iter().map(format_scalar).collect();
                    let _ = write!(text, "[{}] ", row.join(", "));
                }
            }
            v.push((q, text));
        }
    }

    let runs = analysis.engine_runs()?;
    let mut pages = Vec::new();
    for r in 1..=r_max {
        pages.push((
            r,
            DimGrid::from_map(LerayAnalysis::aggregate_page_dims(&runs, r)),
        ));
    }
    let einf = DimGrid::from_map(LerayAnalysis::aggregate_limit_dims(&runs));
    let second = analysis.second_page()?;
    let e2_theorem = DimGrid::from_map(second.grid.clone());
    let cross = analysis.cross_check(&runs)?;

    Ok(LerayReport {
        model: fd.total().name().to_owned(),
        window_note: format!(
            "total sectors: {}, base sectors: {}",
            fd.total().sectors().len(),
            fd.base().sectors().len()
        ),
        lambda,
        axioms_total_ok: total_axioms.ok(),
        axioms_base_ok: base_axioms.ok(),
        axiom_failures,
        n_table,
        fibration_ok: true,
        fiber_b_linear_checked,
        hat_ranks,
        nabla_curvature_zero,
        pages,
        e2_theorem,
        second_page_complete: second.complete,
        einf,
        einf_totals: cross.einf_totals.clone(),
        sheaf_dims: cross.sheaf_dims.clone(),
        convergence_ok: cross.convergence_ok,
        cross_ok: cross.ok(),
        clipped: cross.clipped,
        verbose_nabla,
    })
}

impl LerayReport {
    pub fn markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# Fibration report: {}", self.model);
        let _ = writeln!(out, "\n{}", self.window_note);
        if let Some(l) = &self.lambda {
            let _ = writeln!(out, "twist lambda = {l}");
        }
        let _ = writeln!(
            out,
            "\naxioms: total {}, base {}",
            verdict(self.axioms_total_ok),
            verdict(self.axioms_base_ok)
        );
        for f in &self.axiom_failures {
            let _ = writeln!(out, "  axiom failure: {f}");
        }
        let _ = writeln!(out, "\n## N-spaces (frame rank; `-` when sector-dependent)\n");
        let _ = writeln!(out, "| p | q | frame rank | total dim |");
        let _ = writeln!(out, "|---|---|------------|-----------|");
        for (p, q, rank, total) in &self.n_table {
            let r = rank.map_or("-".to_owned(), |r| r.to_string());
            let _ = writeln!(out, "| {p} | {q} | {r:>10} | {total:>9} |");
        }
        let _ = writeln!(out, "\nfibration criterion: {}", verdict(self.fibration_ok));
        let _ = writeln!(
            out,
            "fiber differentials B-linear: PASS ({} squares)",
            self.fiber_b_linear_checked
        );
        let _ = writeln!(out, "\n## Fiber cohomology\n");
        let _ = writeln!(out, "| q | free rank | total dim |");
        let _ = writeln!(out, "|---|-----------|-----------|");
        for (q, rank, total) in &self.hat_ranks {
            let r = rank.map_or("-".to_owned(), |r| r.to_string());
            let _ = writeln!(out, "| {q} | {r:>9} | {total:>9} |");
        }
        let _ = writeln!(out, "\nbase connection curvature:");
        for (q, flat) in &self.nabla_curvature_zero {
            let _ = writeln!(out, "  R_{q} = 0: {}", verdict(*flat));
        }
        if let Some(v) = &self.verbose_nabla {
            let _ = writeln!(out, "\nbase connection matrices (per orbit representative):");
            for (q, text) in v {
                let _ = writeln!(out, "  nabla_{q}: {text}");
            }
        }
        for (r, grid) in &self.pages {
            let _ = writeln!(out, "\n## Page E_{r} (engine)\n");
            out.push_str(&grid.markdown());
        }
        let _ = writeln!(out, "\n## Second page, theorem route H^p(B; H_q, nabla_q)\n");
        out.push_str(&self.e2_theorem.markdown());
        if !self.second_page_complete {
            let _ = writeln!(out, "(incomplete: some fiber level lacked a freeness certificate; engine grids remain authoritative)");
        }
        let _ = writeln!(out, "\n## Limit page E_inf\n");
        out.push_str(&self.einf.markdown());
        let _ = writeln!(
            out,
            "\nE_inf anti-diagonal totals: {:?}",
            self.einf_totals
        );
        let _ = writeln!(out, "sheaf cohomology dims:      {:?}", self.sheaf_dims);
        let _ = writeln!(out, "convergence: {}", verdict(self.convergence_ok));
        let _ = writeln!(out, "cross-check (two routes agree): {}", verdict(self.cross_ok));
        if self.clipped > 0 {
            let _ = writeln!(
                out,
                "({} theorem-route classes fell outside the window and were not compared)",
                self.clipped
            );
        }
        out
    }

    pub fn json(&self) -> Value {
        json!({
            "model": self.model,
            "window_note": self.window_note,
            "lambda": self.lambda,
            "axioms": { "total_ok": self.axioms_total_ok, "base_ok": self.axioms_base_ok, "failures": self.axiom_failures },
            "n_table": self.n_table.iter().map(|(p, q, rank, total)| json!({
                "p": p, "q": q, "frame_rank": rank, "total_dim": total
            })).collect::<Vec<_>>(),
            "fibration_ok": self.fibration_ok,
            "fiber_b_linear_checked": self.fiber_b_linear_checked,
            "hat": self.hat_ranks.iter().map(|(q, rank, total)| json!({
                "q": q, "free_rank": rank, "total_dim": total
            })).collect::<Vec<_>>(),
            "nabla_curvature_zero": self.nabla_curvature_zero,
            "pages": self.pages.iter().map(|(r, g)| json!({"r": r, "grid": g.json()})).collect::<Vec<_>>(),
            "e2_theorem": self.e2_theorem.json(),
            "second_page_complete": self.second_page_complete,
            "einf": self.einf.json(),
            "einf_totals": self.einf_totals,
            "sheaf_dims": self.sheaf_dims,
            "convergence_ok": self.convergence_ok,
            "cross_ok": self.cross_ok,
            "clipped": self.clipped,
            "verbose_nabla": self.verbose_nabla,
        })
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}
